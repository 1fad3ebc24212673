"""Supertraces, their small-``lambda`` limit, and the heat-kernel index density.

Normalizations live in :mod:`getzler.constants`.  Trace polynomials and the
torus quadrature are reported in units of ``str`` (top-blade coefficient);
``str_zero`` carries the ``(2/i)^{n/2}`` factor, so the consistency
statement reads ``str_zero(eps_0 sigma) == (2/i)^{n/2} * P(0)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import pi
from numbers import Number
from typing import Sequence

import numpy as np

from .calculus import CertificateError, SpinorLaurentSection, model_nabla
from .clifford import (
    CurvatureTensor,
    Multivector,
    det_sqrt_even,
    matrix_rep,
    matrix_series,
    ring_matmul,
    ring_scale,
    ring_trace,
    wedge_exp,
    wedge_mul,
)
from .constants import ahat_density_factor, two_over_i_power
from .convolution import TorusSection, torus_grid
from .gaussian import GaussianSection
from .jets import FormPoly
from .report import Report
from .series import x_coth_series, x_over_sinh_series


# -- trace polynomial ------------------------------------------------------------

@dataclass(frozen=True)
class TracePolynomial:
    """``lambda -> sum_j coeffs[j] lambda^j``."""

    coeffs: tuple

    def __call__(self, lam):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * lam + c
        return acc

    @property
    def degree(self) -> int:
        nz = [j for j, c in enumerate(self.coeffs) if c != 0]
        return nz[-1] if nz else -1

    def is_zero(self) -> bool:
        return self.degree < 0

    def to_list(self) -> list:
        return list(self.coeffs)


def _require_even(n: int) -> None:
    if n % 2:
        raise ValueError(f"supertraces need even n, got {n}")


def _diagonal_top(section: TorusSection) -> dict[int, dict[tuple, object]]:
    """For each Laurent index, the Fourier modes ``s`` of ``m -> str(sigma_p(m, m))``.

    Factored terms with a sine factor vanish on the diagonal, so they are
    skipped and the surviving coefficients stay exact.
    """
    n = section.n
    top = (1 << n) - 1
    out: dict[int, dict[tuple, object]] = {}
    for p, terms in section.factored.items():
        acc = out.setdefault(p, {})
        for t in terms:
            if t.vanishing:
                continue
            c = t.coef.coeffs.get(top, 0)
            if c:
                s = tuple(a + b for a, b in zip(t.a, t.b))
                acc[s] = acc.get(s, 0) + c
    for p, f in section.fourier_data.items():
        acc = out.setdefault(p, {})
        for (a, b), c in f.items():
            v = c.coeffs.get(top, 0)
            if v:
                s = tuple(x + y for x, y in zip(a, b))
                acc[s] = acc.get(s, 0) + v
    return {p: {s: v for s, v in d.items() if v != 0} for p, d in out.items()}


def str_lambda_algebraic(section) -> TracePolynomial:
    """``lambda -> sum_{q >= n} lambda^{q-n} str(sigma_{-q}(m, m))``, integrated over the base.

    Accepts a :class:`TorusSection` (averaged over the unit-volume torus) or a
    jet-level :class:`SpinorLaurentSection` (evaluated at its base point).
    Laurent indices ``p > -n`` must carry no top-degree diagonal component;
    a violation means the scaling certificate is inconsistent.
    """
    if isinstance(section, SpinorLaurentSection):
        n = section.n
        top = (1 << n) - 1
        diag = {}
        for p, jet in section.raw().items():
            c = jet.value_at_zero(Multivector.zero(n))
            v = c.coeffs.get(top, 0) if isinstance(c, Multivector) else 0
            diag[p] = {(0,) * n: v} if v else {}
    else:
        n = section.n
        diag = _diagonal_top(section)
    _require_even(n)
    zero = (0,) * n
    coeffs: dict[int, object] = {}
    for p, modes in diag.items():
        if p > -n:
            if modes:
                raise CertificateError(
                    f"Laurent index {p} has a nonzero top-degree diagonal component "
                    f"{next(iter(modes.values()))}; its scaling certificate is inconsistent")
            continue
        v = modes.get(zero, 0)
        if v:
            coeffs[-p - n] = coeffs.get(-p - n, 0) + v
    deg = max(coeffs, default=-1)
    return TracePolynomial(tuple(coeffs.get(j, 0) for j in range(deg + 1)))


def str_lambda_quadrature(section: TorusSection, lam, G: int = 16) -> complex:
    """``lambda^{-n} int_T str(sigma(m, m, lambda)) dm`` by the trapezoid rule."""
    if lam == 0:
        raise ValueError("quadrature supertrace needs lambda != 0; use str_zero")
    n = section.n
    _require_even(n)
    pts = torus_grid(n, G)
    vals = section.value(lam, pts, pts)
    return complex(lam) ** (-n) * complex(vals[:, (1 << n) - 1].mean())


def operator_supertrace(x: Multivector) -> complex:
    """``Tr(c(s) c(x))`` on spinors; equals ``(2/i)^{n/2} str(x)``."""
    _require_even(x.n)
    mat = matrix_rep(x)
    from .clifford import grading_element

    return complex(np.trace(matrix_rep(grading_element(x.n)) @ mat))


def str_zero(phi) -> complex:
    """``(2/i)^{n/2}`` times the top coefficient of the fiber function at the origin.

    ``phi`` may be a :class:`~getzler.convolution.FiberFunction`, a
    :class:`GaussianSection`, or the value ``phi(0)`` itself.
    """
    if isinstance(phi, Multivector):
        value = phi
    else:
        value = phi([0] * getattr(phi, "nvars", phi.n))
    n = value.n
    _require_even(n)
    return two_over_i_power(n) * value.top_coefficient()


def torus_boundary_value(section: TorusSection, X: Sequence | None = None) -> Multivector:
    """``int_T eps_0(sigma)(m; X) dm`` for a certified torus section.

    Only terms whose certificate is sharp survive the rescaling; they
    contribute ``[coef]_{deg - p} prod (2 pi X_i)^{k_i}`` with
    ``deg = sum k``.  Averaging over ``m`` keeps the modes with ``a + b = 0``.
    """
    if not section.certified:
        raise CertificateError("boundary values need a certified section")
    n = section.n
    X = [0] * n if X is None else list(X)
    out = Multivector.zero(n)
    for p, terms in section.factored.items():
        for t in terms:
            if any(a + b for a, b in zip(t.a, t.b)):
                continue
            g = t.vanishing - p
            if g > n:
                continue
            part = t.coef.grade(g)
            if part.is_zero():
                continue
            w = 1
            for x, k in zip(X, t.sin_powers):
                if k:
                    w = w * (2 * pi * x) ** k
            out = out + part * w
    return out


# -- A-hat form and the Mehler kernel ---------------------------------------------

def curvature_ring_matrix(kappa: CurvatureTensor, scale=1) -> list[list[Multivector]]:
    n = kappa.n
    return [[kappa.entry(i, j) * scale for j in range(n)] for i in range(n)]


def a_hat(kappa: CurvatureTensor, truncation: int | None = None) -> Multivector:
    """``det^{1/2}((K/2) / sinh(K/2))`` for the 2-form curvature matrix ``K``."""
    n = kappa.n
    _require_even(n)
    K = n // 2 + 1 if truncation is None else truncation
    if 2 * K < n:
        raise ValueError(f"series truncation {K} is too small for n={n}")
    M = matrix_series(x_over_sinh_series(2 * K), curvature_ring_matrix(kappa, Fraction(1, 2)))
    return det_sqrt_even(M)


def _even_powers(kappa: CurvatureTensor) -> list[list[list[Multivector]]]:
    """``[K^0, K^2, K^4, ...]`` until the powers vanish."""
    K = curvature_ring_matrix(kappa)
    n = kappa.n
    ident = [[Multivector.scalar(n, 1 if i == j else 0) for j in range(n)] for i in range(n)]
    out = [ident]
    K2 = ring_matmul(K, K)
    cur = K2
    while any(not v.is_zero() for row in cur for v in row):
        out.append(cur)
        cur = ring_matmul(cur, K2)
    return out


@dataclass
class MehlerData:
    """Pieces of ``k_tau(u) = (4 pi tau)^{-n/2} D(tau) exp(-1/4 u^T B(tau) u)``."""

    n: int
    tau: object
    B: list           # B(tau) = sum_k c_k tau^{2k-1} K^{2k}
    dB: list          # dB/dtau
    log_D: Multivector
    dlog_D: Multivector

    @property
    def D(self) -> Multivector:
        return wedge_exp(self.log_D)


def mehler_data(kappa: CurvatureTensor, tau) -> MehlerData:
    if not tau > 0:
        raise ValueError("heat time must be positive")
    n = kappa.n
    if isinstance(tau, int):
        tau = Fraction(tau)
    powers = _even_powers(kappa)
    c = x_coth_series(2 * len(powers))
    zero = [[Multivector.zero(n)] * n for _ in range(n)]
    B, dB = zero, zero
    log_D = Multivector.zero(n)
    dlog_D = Multivector.zero(n)
    for k, P in enumerate(powers):
        ck = c[2 * k]
        B = [[B[i][j] + P[i][j] * (ck * tau ** (2 * k - 1)) for j in range(n)] for i in range(n)]
        dB = [[dB[i][j] + P[i][j] * (ck * (2 * k - 1) * tau ** (2 * k - 2)) for j in range(n)]
              for i in range(n)]
        if k:
            tr = ring_trace(P)
            # log det^{1/2}(tau K / sinh(tau K)) = -1/4 sum_k c_k tau^{2k} tr K^{2k} / k
            log_D = log_D + tr * (-ck * tau ** (2 * k) / (4 * k))
            dlog_D = dlog_D + tr * (-ck * tau ** (2 * k - 1) / 2)
    return MehlerData(n, tau, B, dB, log_D, dlog_D)


def mehler_kernel(kappa: CurvatureTensor, tau) -> GaussianSection:
    """Heat kernel of ``H = -sum_i (model nabla_i)^2`` as a fiber function at time ``tau``."""
    n = kappa.n
    data = mehler_data(kappa, tau)
    A = [[v * Fraction(1, 2) for v in row] for row in data.B]
    pref = (4 * pi * float(tau)) ** (-n / 2)
    poly = FormPoly.constant(n, None, data.D * pref)
    return GaussianSection(n, A, prefactor=poly)


def _quadratic(n: int, M: list, order: int, scale) -> FormPoly:
    terms = {}
    for i in range(n):
        for j in range(n):
            if M[i][j].is_zero():
                continue
            a = [0] * n
            a[i] += 1
            a[j] += 1
            key = tuple(a)
            v = M[i][j] * scale
            terms[key] = terms[key] + v if key in terms else v
    return FormPoly(n, order, terms)


def _exp_poly(q: FormPoly, n: int, order: int) -> FormPoly:
    out = FormPoly.constant(q.nvars, order, Multivector.scalar(n, 1))
    term = out
    for k in range(1, order // 2 + 1):
        term = term.wedge(q) * Fraction(1, k)
        out = out + term
    return out


def heat_residual(kappa: CurvatureTensor, tau, order: int = 8) -> Report:
    """``d_tau k + H k`` on the Taylor jet of the Mehler kernel, in exact arithmetic.

    The common factor ``(4 pi)^{-n/2}`` is dropped, so ``tau`` must be
    rational for the check to be exact.  ``H`` is assembled from
    :func:`~getzler.calculus.model_nabla`; ``d_tau`` uses the closed-form
    derivatives of ``B`` and ``log D``.  Residual terms are compared up to
    degree ``order - 2``, the range the truncated jet determines.
    """
    n = kappa.n
    tau = Fraction(tau)
    data = mehler_data(kappa, tau)
    S = _quadratic(n, data.B, order, Fraction(-1, 4))
    k = _exp_poly(S, n, order).wedge(FormPoly.constant(n, order, data.D * tau ** (-(n // 2))))
    H = None
    for i in range(n):
        Ni = model_nabla(kappa, i)
        sq = Ni * Ni
        H = sq if H is None else H + sq
    Hk = -H.apply(k)
    rate = _quadratic(n, data.dB, order, Fraction(-1, 4)) + FormPoly.constant(
        n, order, data.dlog_D + Multivector.scalar(n, Fraction(-n, 2) / tau))
    dk = rate.wedge(k)
    res = (dk + Hk).truncate(order - 2)
    worst = max((v.max_abs() for _, v in res.items()), default=0.0)
    return Report("heat equation for the Mehler kernel", res.is_zero(), cases=1,
                  max_residual=float(worst),
                  details={"tau": str(tau), "order": order, "terms": len(res.terms())})


def index_density(kappa: CurvatureTensor, tau) -> complex:
    """``(2/i)^{n/2}`` times the top coefficient of the Mehler kernel at ``u = 0``."""
    return str_zero(mehler_kernel(kappa, tau))


def ahat_density(kappa: CurvatureTensor) -> complex:
    """The index density predicted by the A-hat form: ``(i pi)^{-n/2} [A-hat]_n``."""
    return ahat_density_factor(kappa.n) * complex(a_hat(kappa).top_coefficient())


def supertrace_commutator(s1: TorusSection, s2: TorusSection, parity: int,
                          lam=1.0, G: int = 16) -> complex:
    """Quadrature ``Str_lambda(s1 * s2 - (-1)^parity s2 * s1)``."""
    from .convolution import torus_product

    a = str_lambda_quadrature(torus_product(s1, s2), lam, G)
    b = str_lambda_quadrature(torus_product(s2, s1), lam, G)
    return a - (-1) ** parity * b
