"""Exact univariate power series used to build functions of nilpotent forms."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Sequence


@dataclass(frozen=True)
class PowerSeries1D:
    """Truncated power series ``c_0 + c_1 x + ... + c_K x^K``.

    Coefficients are kept as ``Fraction`` whenever possible so that
    functions of nilpotent elements can be evaluated exactly.
    """

    coeffs: tuple

    def __init__(self, coeffs: Sequence):
        object.__setattr__(self, "coeffs", tuple(coeffs))

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, k: int):
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else 0

    def __add__(self, other: "PowerSeries1D") -> "PowerSeries1D":
        K = min(self.order, other.order)
        return PowerSeries1D([self[k] + other[k] for k in range(K + 1)])

    def __mul__(self, other):
        if not isinstance(other, PowerSeries1D):
            return PowerSeries1D([c * other for c in self.coeffs])
        K = min(self.order, other.order)
        out = [0] * (K + 1)
        for i in range(K + 1):
            for j in range(K + 1 - i):
                out[i + j] += self[i] * other[j]
        return PowerSeries1D(out)

    __rmul__ = __mul__

    def reciprocal(self) -> "PowerSeries1D":
        if self[0] == 0:
            raise ZeroDivisionError("series with zero constant term has no reciprocal")
        inv0 = Fraction(1) / self[0] if isinstance(self[0], (int, Fraction)) else 1 / self[0]
        out = [inv0]
        for k in range(1, self.order + 1):
            acc = sum(self[j] * out[k - j] for j in range(1, k + 1))
            out.append(-acc * inv0)
        return PowerSeries1D(out)

    def derivative(self) -> "PowerSeries1D":
        return PowerSeries1D([k * self[k] for k in range(1, self.order + 1)] or [0])

    def scale_argument(self, a) -> "PowerSeries1D":
        """Series of ``x -> f(a x)``."""
        return PowerSeries1D([c * a**k for k, c in enumerate(self.coeffs)])

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc


def exp_series(K: int) -> PowerSeries1D:
    return PowerSeries1D([Fraction(1, factorial(k)) for k in range(K + 1)])


def log1p_series(K: int) -> PowerSeries1D:
    return PowerSeries1D([Fraction(0)] + [Fraction((-1) ** (k + 1), k) for k in range(1, K + 1)])


def sinhc_series(K: int) -> PowerSeries1D:
    """``sinh(x)/x`` truncated at degree ``K``."""
    return PowerSeries1D([Fraction(1, factorial(k + 1)) if k % 2 == 0 else Fraction(0)
                          for k in range(K + 1)])


def cosh_series(K: int) -> PowerSeries1D:
    return PowerSeries1D([Fraction(1, factorial(k)) if k % 2 == 0 else Fraction(0)
                          for k in range(K + 1)])


def x_over_sinh_series(K: int) -> PowerSeries1D:
    """``x/sinh(x)``; even, with constant term 1."""
    return sinhc_series(K).reciprocal()


def x_coth_series(K: int) -> PowerSeries1D:
    """``x coth(x) = cosh(x) * x/sinh(x)``."""
    return cosh_series(K) * x_over_sinh_series(K)
