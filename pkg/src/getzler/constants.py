"""Normalization constants shared by the trace and convolution code.

Conventions:

* ``str(x)`` is the coefficient of the top blade ``e_1 ... e_n``.
* The operator supertrace of the Clifford element ``x`` acting on spinors
  is ``Tr(c(s) c(x)) = (2/i)^{n/2} str(x)``; equivalently
  ``str(x) = (i/2)^{n/2} Tr(c(s) c(x))``.
* At ``lambda = 0`` the supertrace of a fiber function ``phi`` is
  ``(2/i)^{n/2}`` times the top-degree coefficient of ``phi(0)``.
* The twisted convolution on a tangent fiber uses the factor
  ``exp(TWIST_SIGN * 1/2 * kappa(Y, X))``.
"""

from __future__ import annotations

from fractions import Fraction
from math import pi

TWIST_SIGN = 1
TWIST_FACTOR = Fraction(1, 2)


def _i_power(k: int) -> complex:
    return (1, 1j, -1, -1j)[k % 4]


def two_over_i_power(n: int) -> complex:
    """``(2/i)^{n/2}`` for even ``n``; exact (Gaussian-integer valued)."""
    if n % 2:
        raise ValueError("the supertrace normalization needs even n")
    return 2 ** (n // 2) * _i_power(-(n // 2))


def i_over_two_power(n: int) -> complex:
    """``(i/2)^{n/2}``, the inverse of :func:`two_over_i_power`."""
    if n % 2:
        raise ValueError("the supertrace normalization needs even n")
    return _i_power(n // 2) / 2 ** (n // 2)


def ahat_density_factor(n: int) -> complex:
    """``(i pi)^{-n/2}``: index density per unit top coefficient of the A-hat form.

    The model heat kernel at the origin has top coefficient
    ``(4 pi)^{-n/2} 2^{n/2} [A-hat]_n``; multiplying by ``(2/i)^{n/2}`` gives
    ``(i pi)^{-n/2} [A-hat]_n``.
    """
    return two_over_i_power(n) * (4 * pi) ** (-(n // 2)) * 2 ** (n // 2)
