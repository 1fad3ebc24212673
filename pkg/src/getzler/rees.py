"""Jet-level model of the deformation algebra of the diagonal in R^n x R^n.

Functions on ``V = R^n x R^n`` are polynomials in the diagonal-adapted
chart ``(u, v)`` with ``u = x - y`` and ``v = y`` for a point ``(x, y)``.
Variables ``0..n-1`` are ``u`` and ``n..2n-1`` are ``v``.  An element of the
algebra is a Laurent polynomial ``sum_p f_p t^{-p}`` in which ``f_p`` has
``u``-degree at least ``p`` in every term; that is the order-``p`` vanishing
along the diagonal.

Tangent vectors at the diagonal are identified with normal vectors through
the first factor, so a tangent vector ``X`` acts as ``sum_i X_i d/du_i``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Mapping, Sequence

from .jets import JetPoly, TruncationError


class VanishingOrderError(ValueError):
    """A coefficient ``f_p`` does not vanish to order ``p`` on the diagonal."""


def u_vars(n: int) -> range:
    return range(n)


def v_vars(n: int) -> range:
    return range(n, 2 * n)


class ReesElement:
    """Laurent polynomial ``sum_p f_p t^{-p}`` with certified vanishing orders."""

    __slots__ = ("n", "order", "_f")

    def __init__(self, n: int, order: int, coeffs: Mapping[int, JetPoly] | None = None):
        self.n = n
        self.order = order
        f = {}
        for p, jet in (coeffs or {}).items():
            if jet.nvars != 2 * n:
                raise ValueError(f"coefficient t^{-p} has {jet.nvars} variables, expected {2 * n}")
            jet = jet.truncate(order)
            if jet.is_zero():
                continue
            if p > 0 and jet.partial_order(u_vars(n)) < p:
                raise VanishingOrderError(
                    f"f_{p} has u-degree {jet.partial_order(u_vars(n))} < {p}")
            f[p] = jet
        self._f = f

    @classmethod
    def from_function(cls, n: int, order: int, f: JetPoly, p: int = 0) -> "ReesElement":
        return cls(n, order, {p: f})

    @classmethod
    def one(cls, n: int, order: int) -> "ReesElement":
        return cls(n, order, {0: JetPoly.constant(2 * n, order, 1)})

    @classmethod
    def t(cls, n: int, order: int) -> "ReesElement":
        """The element ``t`` itself, i.e. ``f_{-1} = 1``."""
        return cls(n, order, {-1: JetPoly.constant(2 * n, order, 1)})

    def coefficients(self) -> dict[int, JetPoly]:
        return dict(self._f)

    def __getitem__(self, p: int) -> JetPoly:
        return self._f.get(p, JetPoly(2 * self.n, self.order))

    def powers(self) -> list[int]:
        return sorted(self._f)

    def is_zero(self) -> bool:
        return not self._f

    def validate(self) -> None:
        """Re-check the vanishing-order certificate of every coefficient."""
        for p, jet in self._f.items():
            if p > 0 and jet.partial_order(u_vars(self.n)) < p:
                raise VanishingOrderError(f"f_{p} violates its vanishing order")

    def _compatible(self, other: "ReesElement") -> None:
        if other.n != self.n or other.order != self.order:
            raise TruncationError(
                f"incompatible elements: (n={self.n}, N={self.order}) vs (n={other.n}, N={other.order})")

    def __add__(self, other: "ReesElement") -> "ReesElement":
        self._compatible(other)
        out = dict(self._f)
        for p, jet in other._f.items():
            out[p] = out[p] + jet if p in out else jet
        return ReesElement(self.n, self.order, out)

    def __neg__(self) -> "ReesElement":
        return ReesElement(self.n, self.order, {p: -j for p, j in self._f.items()})

    def __sub__(self, other: "ReesElement") -> "ReesElement":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, ReesElement):
            return rees_mul(self, other)
        return ReesElement(self.n, self.order, {p: j * other for p, j in self._f.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, ReesElement):
            return NotImplemented
        return self.n == other.n and (self - other).is_zero()

    def __repr__(self):
        return f"ReesElement(n={self.n}, N={self.order}, {self._f})"


def rees_mul(a: ReesElement, b: ReesElement) -> ReesElement:
    """Product of Laurent polynomials; vanishing orders add."""
    a._compatible(b)
    out: dict[int, JetPoly] = {}
    for p, fa in a._f.items():
        for q, fb in b._f.items():
            prod = fa * fb
            out[p + q] = out[p + q] + prod if p + q in out else prod
    return ReesElement(a.n, a.order, out)


def eval_point(a: ReesElement, x: Sequence, y: Sequence, lam) -> object:
    """Character at the point ``(x, y, lam)`` with ``lam != 0``: ``sum f_p lam^{-p}``."""
    if lam == 0:
        raise ValueError("eval_point needs lam != 0; use eval_normal on the boundary")
    if isinstance(lam, int):
        lam = Fraction(lam)
    point = [xi - yi for xi, yi in zip(x, y)] + list(y)
    total = 0
    for p, jet in a._f.items():
        total += jet.evaluate(point) * lam ** (-p)
    return total


def _apply_power(jet: JetPoly, X: Sequence, n: int, k: int) -> JetPoly:
    for _ in range(k):
        jet = jet.directional(X, u_vars(n))
    return jet


def eval_normal(a: ReesElement, m: Sequence, X: Sequence) -> object:
    """Character at the boundary point ``(X_m, 0)``: ``sum_{p>=0} X^p(f_p)(m, m) / p!``."""
    n = a.n
    top = max((p for p in a._f if p >= 0), default=0)
    if top > a.order:
        raise TruncationError(f"jet order {a.order} cannot resolve t^-{top}")
    diag = [0] * n + list(m)
    total = 0
    for p, jet in a._f.items():
        if p < 0:
            continue
        total += _apply_power(jet, X, n, p).evaluate(diag) * Fraction(1, factorial(p))
    return total


def eval_base(a: ReesElement, m: Sequence) -> object:
    """``epsilon_m``: the ``t^0`` coefficient at the diagonal point ``(m, m)``."""
    return a[0].evaluate([0] * a.n + list(m))


def extend_vector_field(X: Sequence, a: ReesElement) -> ReesElement:
    """Extend a vector field acting on the first factor to a derivation.

    ``X`` lists coefficient functions (numbers or 2n-variable jets) of
    ``d/dx_i``; the result is ``sum_p X(f_p) t^{-(p-1)}``.  Terms pushed past
    the truncation order are lost, which only matters for polynomial ``X``.
    """
    n = a.n
    out = {}
    for p, jet in a._f.items():
        acc = JetPoly(2 * n, a.order)
        for i, coef in enumerate(X):
            d = jet.derivative(i)
            if isinstance(coef, JetPoly):
                acc = acc + coef * d
            elif coef != 0:
                acc = acc + d * coef
        out[p - 1] = acc
    return ReesElement(n, a.order, out)


def exp_formula_eval(a: ReesElement, m: Sequence, X: Sequence) -> object:
    """``epsilon_m(exp(X) a)`` by iterating the extended derivation."""
    total = 0
    term = a
    k = 0
    while not term.is_zero():
        total += eval_base(term, m) * Fraction(1, factorial(k))
        term = extend_vector_field(X, term)
        k += 1
    return total


@dataclass(frozen=True)
class TangentGroupoidPoint:
    """Either ``(x, y, lam)`` with ``lam != 0`` or ``(X_m, 0)`` on the boundary."""

    kind: str
    first: tuple
    second: tuple
    lam: object = 0

    @classmethod
    def interior(cls, x: Sequence, y: Sequence, lam) -> "TangentGroupoidPoint":
        if lam == 0:
            raise ValueError("interior points need lam != 0")
        return cls("interior", tuple(x), tuple(y), lam)

    @classmethod
    def boundary(cls, m: Sequence, X: Sequence) -> "TangentGroupoidPoint":
        return cls("boundary", tuple(m), tuple(X), 0)

    @property
    def base(self) -> tuple:
        return self.first if self.kind == "boundary" else None

    @property
    def tangent(self) -> tuple:
        return self.second if self.kind == "boundary" else None

    def source(self) -> tuple:
        return self.first if self.kind == "boundary" else self.second

    def target(self) -> tuple:
        return self.first

    def compose(self, other: "TangentGroupoidPoint") -> "TangentGroupoidPoint":
        if self.kind != other.kind or self.lam != other.lam:
            raise ValueError("points lie in different slices of the groupoid")
        if self.kind == "interior":
            if self.second != other.first:
                raise ValueError("arrows are not composable")
            return TangentGroupoidPoint.interior(self.first, other.second, self.lam)
        return compose_boundary(self.tangent, other.tangent, self.base, other.base)


def compose_boundary(X: Sequence, Y: Sequence, m: Sequence, m_other: Sequence | None = None
                     ) -> TangentGroupoidPoint:
    """``(X_m, 0) o (Y_m, 0) = (X_m + Y_m, 0)``."""
    if m_other is not None and tuple(m_other) != tuple(m):
        raise ValueError("boundary arrows over different base points do not compose")
    return TangentGroupoidPoint.boundary(m, [a + b for a, b in zip(X, Y)])


def triple_pullback_character(a: ReesElement, m: Sequence, X: Sequence, Y: Sequence) -> object:
    """Character ``epsilon_{(X, 0, -Y)}`` of the composition pullback on ``M^3``.

    Works in absolute coordinates ``(x1, x2, x3)`` on ``M^3``: each ``f_p``
    is rewritten through ``u = x1 - x3``, ``v = x3`` and the vector
    ``(X, 0, -Y)`` is applied ``p`` times at ``(m, m, m)``.  Independent of
    the diagonal-adapted chart used by :func:`eval_normal`.
    """
    n = a.n
    nv = 3 * n
    images = []
    for i in range(n):
        images.append(JetPoly.variable(nv, None, i) - JetPoly.variable(nv, None, 2 * n + i))
    for i in range(n):
        images.append(JetPoly.variable(nv, None, 2 * n + i))
    direction = list(X) + [0] * n + [-y for y in Y]
    point = list(m) * 3
    total = 0
    for p, jet in a._f.items():
        if p < 0:
            continue
        g = jet.substitute_linear(images, nv)
        for _ in range(p):
            g = g.directional(direction)
        total += g.evaluate(point) * Fraction(1, factorial(p))
    return total


def random_rees(rng, n: int, order: int, powers: Sequence[int] = (-1, 0, 1, 2),
                max_degree: int | None = None, n_terms: int = 3) -> ReesElement:
    """Random element with rational coefficients.

    Total degrees stay at most ``max_degree`` (default ``order // 2``) so
    that products of two such elements are not cut off by the truncation.
    """
    cap = order // 2 if max_degree is None else max_degree
    coeffs = {}
    for p in powers:
        lo = max(0, p)
        if lo > cap:
            continue
        terms = {}
        for _ in range(n_terms):
            udeg = rng.randint(lo, cap)
            vdeg = rng.randint(0, cap - udeg)
            alpha = [0] * (2 * n)
            for _ in range(udeg):
                alpha[rng.randrange(n)] += 1
            for _ in range(vdeg):
                alpha[n + rng.randrange(n)] += 1
            terms[tuple(alpha)] = Fraction(rng.randint(-5, 5), rng.randint(1, 4))
        coeffs[p] = JetPoly(2 * n, order, terms)
    return ReesElement(n, order, coeffs)
