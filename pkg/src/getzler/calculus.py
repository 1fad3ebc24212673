"""Getzler filtration, model symbols and the rescaled evaluation maps.

Everything lives on one tangent fiber with a constant curvature tensor
``kappa``.  Spinor-kernel sections are Clifford-valued jets: on the fiber
model the variables are ``u``, on the two-sided model they are ``(u, v)``
as in :mod:`getzler.rees`.

Orientation convention (used throughout the package): the model of the
covariant derivative ``nabla_{e_i}`` is ``d_i + 1/2 kappa(u, e_i) ^``, that is
the curvature argument order ``kappa(Y, X)`` with ``Y`` the fiber point.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Callable, Iterable, Sequence

import numpy as np

from .clifford import (
    CurvatureTensor,
    Multivector,
    _sign_table,
    clifford_order,
    popcount,
    wedge_exp,
)
from .jets import FormPoly, JetPoly, monomials
from .report import Report

# Fixed by requiring [nabla_i, nabla_j] = c(q(kappa_ij)) at the origin for
# nabla_i = d_i + RADIAL_GAUGE_COEFFICIENT * sum_j u_j q(kappa_ij).
RADIAL_GAUGE_COEFFICIENT = Fraction(-1, 2)


class CertificateError(ValueError):
    """A Laurent coefficient is not certified to have the required scaling order."""


# -- flat kernel for Clifford-valued jets ---------------------------------------
# Hot loops of the evaluation maps work on nested dicts alpha -> {mask: coef}
# instead of JetPoly[Multivector]; conversion happens at the boundaries.

def _flat(jet: JetPoly) -> dict:
    return {a: dict(c.items()) for a, c in jet.items()}


def _unflat(flat: dict, nvars: int, order: int | None, n: int) -> JetPoly:
    return JetPoly(nvars, order, {a: Multivector(n, c) for a, c in flat.items()})


def _flat_mul(x: dict, y: dict, order: int, table) -> dict:
    out: dict = {}
    right = [(b, cb, sum(b)) for b, cb in y.items()]
    for a, ca in x.items():
        da = sum(a)
        for b, cb, db in right:
            if da + db > order:
                continue
            g = tuple(map(int.__add__, a, b))
            acc = out.get(g)
            if acc is None:
                acc = out[g] = {}
            for ma, va in ca.items():
                row = table[ma]
                for mb, vb in cb.items():
                    m = ma ^ mb
                    acc[m] = acc.get(m, 0) + row[mb] * va * vb
    return out


def _flat_add(out: dict, x: dict, scale=1) -> None:
    for a, ca in x.items():
        acc = out.get(a)
        if acc is None:
            acc = out[a] = {}
        for m, v in ca.items():
            acc[m] = acc.get(m, 0) + scale * v


def _flat_derivative(x: dict, i: int) -> dict:
    out = {}
    for a, ca in x.items():
        k = a[i]
        if k:
            b = list(a)
            b[i] -= 1
            out[tuple(b)] = {m: k * v for m, v in ca.items()}
    return out


def _integerize(x: dict) -> tuple[dict, int]:
    """Scale a rational flat jet to integer coefficients; returns ``(scaled, D)``.

    Non-rational (float or complex) data is returned unchanged with ``D = 1``.
    """
    den = 1
    for ca in x.values():
        for v in ca.values():
            if isinstance(v, Fraction):
                den = den * v.denominator // math.gcd(den, v.denominator)
            elif not isinstance(v, int):
                return x, 1
    def scale(v):
        if v.__class__ is int:
            return v * den
        return v.numerator * (den // v.denominator)

    return {a: {m: scale(v) for m, v in ca.items()} for a, ca in x.items()}, den


def _flat_clean(x: dict, order: int | None = None) -> dict:
    out = {}
    for a, ca in x.items():
        if order is not None and sum(a) > order:
            continue
        c = {m: v for m, v in ca.items() if v != 0}
        if c:
            out[a] = c
    return out


# -- radial-gauge connection ---------------------------------------------------

class RadialGauge:
    """Clifford connection with constant curvature ``kappa`` in radial gauge.

    ``two_sided=False`` gives the fiber model: jets in ``u`` only and
    ``nabla_i = d_i - 1/2 sum_j u_j q(kappa_ij)`` acting by left Clifford
    multiplication.

    ``two_sided=True`` gives kernels ``sigma(x, y)`` on ``R^n x R^n`` in the
    chart ``(u, v)``, with the gauge centred at the base point ``m = 0``:
    left derivatives use the potential at ``x = u + v`` (left
    multiplication) and right derivatives use the potential at ``y = v``
    (right multiplication).  Left and right operators commute exactly.
    """

    def __init__(self, kappa: CurvatureTensor, order: int, two_sided: bool = False):
        self.kappa = kappa
        self.n = kappa.n
        self.order = order
        self.two_sided = two_sided
        self.nvars = 2 * self.n if two_sided else self.n
        self._left = [self._potential(i, self._x_coords()) for i in range(self.n)]
        self._right = ([self._potential(i, self._y_coords()) for i in range(self.n)]
                       if two_sided else None)
        self._frame = None

    def _x_coords(self) -> list[list[int]]:
        n = self.n
        if self.two_sided:
            return [[j, n + j] for j in range(n)]
        return [[j] for j in range(n)]

    def _y_coords(self) -> list[list[int]]:
        return [[self.n + j] for j in range(self.n)]

    def _potential(self, i: int, coords: list[list[int]]) -> JetPoly:
        terms: dict = {}
        for j in range(self.n):
            form = self.kappa.entry(i, j)
            if form.is_zero():
                continue
            for var in coords[j]:
                alpha = [0] * self.nvars
                alpha[var] = 1
                key = tuple(alpha)
                val = form * RADIAL_GAUGE_COEFFICIENT
                terms[key] = terms[key] + val if key in terms else val
        return JetPoly(self.nvars, self.order, terms)

    def connection_form(self, i: int) -> JetPoly:
        return self._left[i]

    def constant(self, value: Multivector) -> JetPoly:
        return JetPoly.constant(self.nvars, self.order, value)

    def nabla(self, i: int, sigma: JetPoly) -> JetPoly:
        """Left covariant derivative along ``e_i``."""
        return sigma.derivative(i) + self._left[i] * sigma

    def nabla_vec(self, X: Sequence, sigma: JetPoly) -> JetPoly:
        out = JetPoly(sigma.nvars, sigma.order)
        for i, xi in enumerate(X):
            if xi != 0:
                out = out + self.nabla(i, sigma) * xi
        return out

    def right_nabla(self, i: int, sigma: JetPoly) -> JetPoly:
        if not self.two_sided:
            raise ValueError("right derivatives need the two-sided model")
        n = self.n
        return sigma.derivative(n + i) - sigma.derivative(i) - sigma * self._right[i]

    def two_sided_nabla(self, X: Sequence, Y: Sequence, sigma: JetPoly) -> JetPoly:
        """``nabla_{(X, Y)} = nabla_{(X, 0)} + nabla_{(0, Y)}``."""
        out = self.nabla_vec(X, sigma)
        for i, yi in enumerate(Y):
            if yi != 0:
                out = out + self.right_nabla(i, sigma) * yi
        return out

    def flat_step(self, X: Sequence, Y: Sequence | None = None) -> "FlatStep":
        """``nabla_{(X, Y)}`` on flat jets; see :class:`FlatStep`."""
        n = self.n
        Y = [0] * n if Y is None else list(Y)
        if any(y != 0 for y in Y) and not self.two_sided:
            raise ValueError("right derivatives need the two-sided model")
        # d/du_i weights, d/dv_i weights, and the Clifford potentials
        du = [x - y for x, y in zip(X, Y)] if self.two_sided else list(X)
        dv = list(Y) if self.two_sided else []
        left: dict = {}
        right: dict = {}
        for i, x in enumerate(X):
            if x != 0:
                _flat_add(left, _flat(self._left[i]), x)
        for i, y in enumerate(Y):
            if y != 0:
                _flat_add(right, _flat(self._right[i]), -y)
        return FlatStep(n, du, dv, _flat_clean(left), _flat_clean(right))

    def clifford(self, i: int, sigma: JetPoly) -> JetPoly:
        return sigma.left_apply(Multivector.basis(self.n, i + 1))

    def curvature_at(self, i: int, j: int) -> JetPoly:
        """``[nabla_i, nabla_j]`` as a Clifford-valued function (a multiplication operator)."""
        A, B = self._left[i], self._left[j]
        return B.derivative(i) - A.derivative(j) + (A * B - B * A)

    def synchronous_frame(self) -> JetPoly:
        """Parallel transport ``P(x <- y)`` along straight rays, as a jet.

        On the fiber model this is ``1``.  On the two-sided model it is
        ``exp(1/2 sum_ij u_i v_j q(kappa_ij))`` computed with the Clifford
        product; it satisfies ``(E + u.A(x)) P = 0`` for the Euler field ``E``.
        """
        one = self.constant(Multivector.scalar(self.n, 1))
        if not self.two_sided:
            return one
        n = self.n
        terms = {}
        for i in range(n):
            for j in range(n):
                form = self.kappa.entry(i, j)
                if form.is_zero():
                    continue
                alpha = [0] * self.nvars
                alpha[i] += 1
                alpha[n + j] += 1
                key = tuple(alpha)
                val = form * Fraction(1, 2)
                terms[key] = terms[key] + val if key in terms else val
        if self._frame is None:
            table = _sign_table(n)
            B, dB = _integerize(_flat(JetPoly(self.nvars, self.order, terms)))
            powers = [_flat(one)]
            while True:
                nxt = _flat_clean(_flat_mul(powers[-1], B, self.order, table))
                if not nxt:
                    break
                powers.append(nxt)
            # integer accumulation over the common denominator K! dB^K
            K = len(powers) - 1
            den = factorial(K) * dB ** K
            out: dict = {}
            for k, power in enumerate(powers):
                _flat_add(out, power, den // (factorial(k) * dB ** k))
            flat = {a: {m: Fraction(v, den) for m, v in c.items()} for a, c in _flat_clean(out).items()}
            self._frame = _unflat(flat, self.nvars, self.order, n)
        return self._frame


def clifford_jet_product(x: JetPoly, y: JetPoly) -> JetPoly:
    """Clifford product of Clifford-valued jets (fast path of ``x * y``)."""
    order = x._check(y)
    n = next((c.n for _, c in itertools.chain(x.items(), y.items())), 0)
    if order is None:
        order = max(x.degree(), 0) + max(y.degree(), 0)
    fx, dx = _integerize(_flat(x))
    fy, dy = _integerize(_flat(y))
    flat = _flat_mul(fx, fy, order, _sign_table(n))
    if dx * dy != 1:
        w = Fraction(1, dx * dy)
        flat = {a: {m: v * w for m, v in c.items()} for a, c in flat.items()}
    return _unflat(_flat_clean(flat), x.nvars, x._check(y), n)


class FlatStep:
    """Integer-scaled action of ``nabla_{(X, Y)}`` on flat jets.

    ``step(sigma, order)`` returns ``D * nabla_{(X, Y)} sigma`` truncated to
    ``order``, where ``D = step.denominator`` clears every denominator in
    the direction vectors and the potentials.  Integer input stays integer.
    """

    def __init__(self, n: int, du: list, dv: list, left: dict, right: dict):
        self.n = n
        self.table = _sign_table(n)
        weights = {a: {0: v} for a, v in enumerate(du + dv) if v != 0}
        (_, d1) = _integerize(weights)
        (_, d2) = _integerize(left)
        (_, d3) = _integerize(right)
        den = d1 * d2 // math.gcd(d1, d2)
        den = den * d3 // math.gcd(den, d3)
        self.denominator = den
        scale = (lambda v: int(v * den)) if all(
            isinstance(v, (int, Fraction)) for v in du + dv) else (lambda v: v * den)
        self.derivs = [(i, scale(v)) for i, v in enumerate(du + dv) if v != 0]
        self.left = {a: {m: v * den for m, v in c.items()} for a, c in left.items()}
        self.right = {a: {m: v * den for m, v in c.items()} for a, c in right.items()}
        self.left, _ = _integerize(self.left)
        self.right, _ = _integerize(self.right)

    def __call__(self, sigma: dict, order: int) -> dict:
        out: dict = {}
        for i, w in self.derivs:
            _flat_add(out, _flat_derivative(sigma, i), w)
        if self.left:
            _flat_add(out, _flat_mul(self.left, sigma, order, self.table))
        if self.right:
            _flat_add(out, _flat_mul(sigma, self.right, order, self.table))
        return _flat_clean(out, order)


def radial_gauge_connection(kappa: CurvatureTensor, order: int) -> list["GetzlerOp"]:
    """The covariant derivatives ``nabla_1..nabla_n`` of the fiber model as operators."""
    return [GetzlerOp.nabla(i) for i in range(kappa.n)]


# -- Getzler-filtered operators -----------------------------------------------

@dataclass(frozen=True)
class Generator:
    kind: str  # "nabla", "c" or "mult"
    index: int = 0
    poly: JetPoly | None = None

    @property
    def weight(self) -> int:
        return 0 if self.kind == "mult" else 1


@dataclass(frozen=True)
class Word:
    coefficient: object
    generators: tuple[Generator, ...]

    @property
    def length(self) -> int:
        return sum(g.weight for g in self.generators)


class GetzlerOp:
    """Formal sum of words ``f * D_1 ... D_p`` in covariant derivatives,
    Clifford multiplications and polynomial multipliers."""

    __slots__ = ("words",)

    def __init__(self, words: Iterable[Word]):
        self.words = tuple(words)

    @classmethod
    def nabla(cls, i: int) -> "GetzlerOp":
        return cls([Word(1, (Generator("nabla", i),))])

    @classmethod
    def clifford(cls, i: int) -> "GetzlerOp":
        return cls([Word(1, (Generator("c", i),))])

    @classmethod
    def multiplier(cls, f: JetPoly) -> "GetzlerOp":
        return cls([Word(1, (Generator("mult", poly=f),))])

    @classmethod
    def identity(cls) -> "GetzlerOp":
        return cls([Word(1, ())])

    def __add__(self, other: "GetzlerOp") -> "GetzlerOp":
        return GetzlerOp(self.words + other.words)

    def __neg__(self) -> "GetzlerOp":
        return GetzlerOp(Word(-w.coefficient, w.generators) for w in self.words)

    def __sub__(self, other: "GetzlerOp") -> "GetzlerOp":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, GetzlerOp):
            return GetzlerOp(Word(a.coefficient * b.coefficient, a.generators + b.generators)
                             for a in self.words for b in other.words)
        return GetzlerOp(Word(w.coefficient * other, w.generators) for w in self.words)

    def __rmul__(self, other):
        return GetzlerOp(Word(other * w.coefficient, w.generators) for w in self.words)

    def apply(self, sigma: JetPoly, gauge: RadialGauge) -> JetPoly:
        out = JetPoly(sigma.nvars, sigma.order)
        for w in self.words:
            term = sigma
            for g in reversed(w.generators):
                if g.kind == "nabla":
                    term = gauge.nabla(g.index, term)
                elif g.kind == "c":
                    term = gauge.clifford(g.index, term)
                else:
                    term = g.poly * term
            out = out + (w.coefficient * term if isinstance(w.coefficient, JetPoly)
                         else term * w.coefficient)
        return out


def getzler_order(D: GetzlerOp) -> int:
    """Declared filtration bound: the longest word, counting nabla and c."""
    return max((w.length for w in D.words), default=0)


def all_words(n: int, max_length: int) -> list[tuple[Generator, ...]]:
    gens = [Generator("nabla", i) for i in range(n)] + [Generator("c", i) for i in range(n)]
    out: list[tuple[Generator, ...]] = []
    for L in range(max_length + 1):
        out.extend(itertools.product(gens, repeat=L))
    return out


# -- model operators -----------------------------------------------------------

class ModelOp:
    """Differential operator ``sum_alpha a_alpha(u) ^ d^alpha`` with form-valued coefficients."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: dict[tuple, FormPoly] | None = None):
        self.n = n
        self.terms = {a: p for a, p in (terms or {}).items() if not p.is_zero()}

    @classmethod
    def identity(cls, n: int) -> "ModelOp":
        return cls(n, {(0,) * n: FormPoly.constant(n, None, Multivector.scalar(n, 1))})

    @classmethod
    def zero(cls, n: int) -> "ModelOp":
        return cls(n, {})

    @classmethod
    def multiplication(cls, coefficient: FormPoly) -> "ModelOp":
        n = coefficient.nvars
        return cls(n, {(0,) * n: coefficient})

    @classmethod
    def partial(cls, n: int, i: int) -> "ModelOp":
        alpha = [0] * n
        alpha[i] = 1
        return cls(n, {tuple(alpha): FormPoly.constant(n, None, Multivector.scalar(n, 1))})

    def __add__(self, other: "ModelOp") -> "ModelOp":
        out = dict(self.terms)
        for a, p in other.terms.items():
            out[a] = out[a] + p if a in out else p
        return ModelOp(self.n, out)

    def __neg__(self) -> "ModelOp":
        return ModelOp(self.n, {a: -p for a, p in self.terms.items()})

    def __sub__(self, other: "ModelOp") -> "ModelOp":
        return self + (-other)

    def scale(self, c) -> "ModelOp":
        return ModelOp(self.n, {a: p * c for a, p in self.terms.items()})

    def __mul__(self, other: "ModelOp") -> "ModelOp":
        """Composition ``self o other`` via the Leibniz rule."""
        out: dict[tuple, FormPoly] = {}
        for alpha, a in self.terms.items():
            for beta, b in other.terms.items():
                for gamma in itertools.product(*(range(k + 1) for k in alpha)):
                    db = b
                    mult = 1
                    for i, g in enumerate(gamma):
                        for _ in range(g):
                            db = db.derivative(i)
                        mult *= comb(alpha[i], g)
                    if db.is_zero():
                        continue
                    key = tuple(al - g + be for al, g, be in zip(alpha, gamma, beta))
                    term = a.wedge(db) * mult
                    out[key] = out[key] + term if key in out else term
        return ModelOp(self.n, out)

    def apply(self, f: FormPoly) -> FormPoly:
        out = FormPoly(self.n, None)
        for alpha, a in self.terms.items():
            df = f
            for i, k in enumerate(alpha):
                for _ in range(k):
                    df = df.derivative(i)
            out = out + a.wedge(df)
        return out

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, ModelOp) and (self - other).is_zero()

    def __repr__(self):
        return f"ModelOp({self.n}, {self.terms})"


def model_nabla(kappa: CurvatureTensor, i: int) -> ModelOp:
    """``d_i + 1/2 kappa(u, e_i) ^`` on the tangent fiber."""
    n = kappa.n
    terms = {}
    for j in range(n):
        form = kappa.entry(j, i) * Fraction(1, 2)
        if not form.is_zero():
            alpha = [0] * n
            alpha[j] = 1
            terms[tuple(alpha)] = form
    return ModelOp.partial(n, i) + ModelOp.multiplication(FormPoly(n, None, terms))


def model_nabla_vec(kappa: CurvatureTensor, X: Sequence) -> ModelOp:
    out = ModelOp.zero(kappa.n)
    for i, x in enumerate(X):
        if x != 0:
            out = out + model_nabla(kappa, i).scale(x)
    return out


def model_clifford(n: int, i: int) -> ModelOp:
    return ModelOp.multiplication(FormPoly.constant(n, None, Multivector.basis(n, i + 1)))


def model_symbol(D: GetzlerOp, kappa: CurvatureTensor) -> ModelOp:
    """Top-order Getzler symbol; words shorter than the declared order drop out."""
    n = kappa.n
    top = getzler_order(D)
    out = ModelOp.zero(n)
    for w in D.words:
        if w.length < top:
            continue
        coef = w.coefficient
        if isinstance(coef, JetPoly):
            coef = coef.value_at_zero()
        op = ModelOp.identity(n).scale(coef)
        for g in w.generators:
            if g.kind == "nabla":
                op = op * model_nabla(kappa, g.index)
            elif g.kind == "c":
                op = op * model_clifford(n, g.index)
            else:
                op = op.scale(g.poly.value_at_zero())
        out = out + op
    return out


# -- scaling orders ------------------------------------------------------------

def scaling_order_bound(sigma: JetPoly, variables: Sequence[int] | None = None) -> float:
    """``min_alpha (|alpha| - CliffordOrder(sigma_alpha))`` over synchronous pieces.

    ``sigma`` is the Taylor expansion in the normal variables (``u``) with
    coefficients given in a synchronous frame; any remaining variables
    (``v``) only label the base point.  Zero gives ``+inf``.
    """
    vs = range(sigma.nvars) if variables is None else variables
    best = float("inf")
    for alpha, coef in sigma.items():
        best = min(best, sum(alpha[i] for i in vs) - clifford_order(coef))
    return best


def verify_scaling_definition(sigma: JetPoly, kappa: CurvatureTensor, max_length: int = 3,
                              order: int | None = None) -> Report:
    """Apply every word of length ``<= max_length`` and test the filtration bound.

    ``sigma`` is a fiber-model section given in the synchronous frame.
    """
    n = kappa.n
    order = order if order is not None else max(sigma.order or 0, max_length + 1)
    gauge = RadialGauge(kappa, order)
    bound = scaling_order_bound(sigma)
    violations = []
    words = all_words(n, max_length)
    for word in words:
        op = GetzlerOp([Word(1, word)])
        value = op.apply(sigma.truncate(order), gauge).value_at_zero(Multivector.zero(n))
        if clifford_order(value) > len(word) - bound:
            violations.append({
                "word": [f"{g.kind}{g.index + 1}" for g in word],
                "clifford_order": clifford_order(value),
                "allowed": len(word) - bound,
            })
    return Report("scaling-order definition", not violations, cases=len(words),
                  max_residual=float(len(violations)),
                  witness=violations[0] if violations else None,
                  details={"bound": bound, "violations": len(violations)})


class SpinorLaurentSection:
    """``sum_p sigma_p t^{-p}`` with each ``sigma_p`` certified of scaling order ``>= p``.

    ``synchronous[p]`` holds the Taylor data of ``sigma_p`` in a synchronous
    frame: its ``u``-monomials times constant Clifford elements (and, on the
    two-sided model, scalar functions of ``v``).  The actual section is
    ``frame * synchronous[p]``.
    """

    def __init__(self, n: int, order: int, synchronous: dict[int, JetPoly],
                 frame: JetPoly | None = None):
        self.n = n
        self.order = order
        self.synchronous = {p: j.truncate(order) for p, j in synchronous.items() if not j.is_zero()}
        nvars = {j.nvars for j in self.synchronous.values()}
        if len(nvars) > 1:
            raise ValueError("coefficients have different variable counts")
        self.nvars = nvars.pop() if nvars else n
        self.frame = frame
        self._integer_cache = None
        self.certificates = {}
        for p, jet in self.synchronous.items():
            bound = scaling_order_bound(jet, range(n))
            if bound < p:
                raise CertificateError(f"t^{-p} coefficient has certified scaling order {bound} < {p}")
            self.certificates[p] = bound

    def raw(self) -> dict[int, JetPoly]:
        if self.frame is None:
            return dict(self.synchronous)
        return {p: clifford_jet_product(self.frame, j) for p, j in self.synchronous.items()}

    def powers(self) -> list[int]:
        return sorted(self.synchronous)

    def __repr__(self):
        return f"SpinorLaurentSection(n={self.n}, N={self.order}, {self.synchronous})"


LaurentData = dict  # p -> Clifford-valued JetPoly


def _as_data(section) -> LaurentData:
    return section.raw() if isinstance(section, SpinorLaurentSection) else dict(section)


def eval_S0_at_m(section, n: int | None = None) -> Multivector:
    """``epsilon_m``: sum over ``d`` of the grade-``d`` part of ``sigma_{-d}`` at the base point."""
    data = _as_data(section)
    if n is None:
        n = section.n
    out = Multivector.zero(n)
    for p, jet in data.items():
        if p > 0 or -p > n:
            continue
        out = out + jet.value_at_zero(Multivector.zero(n)).grade(-p)
    return out


def _integer_data(section, n: int) -> dict[int, tuple[dict, int, int]]:
    """Coefficients ``p -> (integer flat jet, denominator, nvars)`` truncated to ``n + p``.

    Coefficients that cannot reach the evaluation (``n + p < max(0, p)``)
    are dropped.  For a :class:`SpinorLaurentSection` the frame product is
    formed here, already truncated, and cached on the section.
    """
    cache = getattr(section, "_integer_cache", None)
    if cache is not None and cache[0] == n:
        return cache[1]
    out = {}
    if isinstance(section, SpinorLaurentSection) and section.frame is not None:
        frame, dF = _integerize(_flat(section.frame))
        table = _sign_table(n)
        for p, jet in section.synchronous.items():
            kmax = n + p
            if kmax < max(0, p):
                continue
            sync, dS = _integerize(_flat_clean(_flat(jet), kmax))
            prod = _flat_clean(_flat_mul(frame, sync, kmax, table))
            out[p] = (prod, dF * dS, jet.nvars)
    else:
        for p, jet in _as_data(section).items():
            kmax = n + p
            if kmax < max(0, p):
                continue
            flat, den = _integerize(_flat_clean(_flat(jet), kmax))
            out[p] = (flat, den, jet.nvars)
    if isinstance(section, SpinorLaurentSection):
        section._integer_cache = (n, out)
    return out


def exp_operator_eval(section, step: "FlatStep", n: int) -> Multivector:
    """``epsilon_m(exp(D) sigma)`` for a degree-lowering operator ``D`` on Laurent data.

    ``D`` maps ``sigma_p t^{-p}`` to ``D(sigma_p) t^{-(p-1)}``.  Only the
    finitely many terms that can reach the evaluation are formed: before the
    remaining ``r`` applications a coefficient is truncated to degree ``r``,
    since each application lowers the degree by at most one.  Rational data
    is carried as integers with a separate common denominator.
    """
    den_step = getattr(step, "denominator", 1)
    coeffs: dict[int, object] = {}
    for p, (term, den, nvars) in _integer_data(section, n).items():
        kmin, kmax = max(0, p), n + p
        zero = (0,) * nvars
        for k in range(kmax + 1):
            if k >= kmin:
                weight = Fraction(1, factorial(k) * den)
                for m, v in term.get(zero, {}).items():
                    if popcount(m) == k - p:
                        coeffs[m] = coeffs.get(m, 0) + v * weight
            if k == kmax:
                break
            term = step(term, kmax - k - 1)
            den *= den_step
            if not term:
                break
    return Multivector(n, coeffs)


def eval_S0_at_tangent(section, X: Sequence, gauge: RadialGauge) -> Multivector:
    """``epsilon_{X_m} = epsilon_m o exp(nabla_X)``."""
    return exp_operator_eval(section, gauge.flat_step(X), gauge.n)


def eval_two_sided(section, X: Sequence, Y: Sequence, gauge: RadialGauge) -> Multivector:
    """``epsilon_{(X_m, Y_m)} = epsilon_m o exp(nabla_{(X, Y)})`` on the two-sided model."""
    return exp_operator_eval(section, gauge.flat_step(X, Y), gauge.n)


def normal_vs_tangent_check(section, X: Sequence, Y: Sequence, gauge: RadialGauge) -> Report:
    """``epsilon_{(X,Y)} = exp(1/2 kappa(X, Y)) ^ epsilon_{(X - Y, 0)}``."""
    lhs = eval_two_sided(section, X, Y, gauge)
    diff = [x - y for x, y in zip(X, Y)]
    twist = wedge_exp(gauge.kappa(X, Y) * Fraction(1, 2))
    rhs = twist ^ eval_two_sided(section, diff, [0] * gauge.n, gauge)
    res = lhs - rhs
    ok = res.is_zero() or res.max_abs() == 0
    return Report("normal vs tangent evaluation", ok, cases=1, max_residual=float(res.max_abs()),
                  witness=None if ok else {"lhs": repr(lhs), "rhs": repr(rhs)})


def module_action(f_coeffs: dict[int, JetPoly], section) -> LaurentData:
    """Action of a Rees element ``sum f_p t^{-p}`` on Laurent section data."""
    data = _as_data(section)
    out: LaurentData = {}
    for p, f in f_coeffs.items():
        for q, s in data.items():
            term = s * f
            out[p + q] = out[p + q] + term if p + q in out else term
    return out


# -- nilpotent Baker-Campbell-Hausdorff ----------------------------------------

def nilpotent_exp(A: np.ndarray, max_terms: int = 64) -> np.ndarray:
    """Exponential by the terminating power series of a nilpotent matrix."""
    out = np.eye(A.shape[0], dtype=np.result_type(A, float))
    term = out.copy()
    for k in range(1, max_terms):
        term = term @ A / k
        if not np.any(term):
            return out
        out = out + term
    raise ValueError("matrix is not nilpotent within the series bound")


def bch_nilpotent(A: np.ndarray, B: np.ndarray, tol: float = 1e-12) -> Report:
    """Check ``exp(A) exp(B) = exp([A, B]/2) exp(A + B)``.

    The identity is only asserted when ``[A, B]`` commutes with ``A`` and
    ``B``; otherwise the report records the failed hypothesis.
    """
    A = np.asarray(A)
    B = np.asarray(B)
    C = A @ B - B @ A
    hyp = max(np.abs(C @ A - A @ C).max(initial=0), np.abs(C @ B - B @ C).max(initial=0))
    if hyp > tol:
        return Report("nilpotent BCH", False, cases=1, max_residual=float(hyp),
                      witness={"hypothesis": "commutator is not central"},
                      details={"hypothesis_ok": False})
    lhs = nilpotent_exp(A) @ nilpotent_exp(B)
    rhs = nilpotent_exp(C / 2) @ nilpotent_exp(A + B)
    res = float(np.abs(lhs - rhs).max(initial=0))
    return Report("nilpotent BCH", res <= tol, cases=1, max_residual=res,
                  details={"hypothesis_ok": True})


# -- synchronous sections and Euler field ----------------------------------------

def euler_derivative(sigma: JetPoly, gauge: RadialGauge) -> JetPoly:
    """``nabla_E sigma`` for the Euler field ``E = sum u_i d/du_i``."""
    out = JetPoly(sigma.nvars, sigma.order)
    for i in range(gauge.n):
        out = out + JetPoly.variable(sigma.nvars, sigma.order, i) * gauge.nabla(i, sigma)
    return out


def taylor_synchronous_check(sigma: Multivector, X: Sequence, gauge: RadialGauge) -> Report:
    """Taylor structure of ``nabla_X`` applied to a constant (synchronous) section.

    Checks that the order-0 term vanishes, that every Taylor coefficient is
    ``q(omega_alpha) sigma`` for a 2-form ``omega_alpha``, and that the
    coefficients agree with the Euler-field recursion
    ``(E + 1) nabla_X sigma = K(E, X) sigma``.
    """
    n = gauge.n
    s = gauge.constant(sigma)
    direct = gauge.nabla_vec(X, s)
    euler_zero = euler_derivative(s, gauge).is_zero()
    # K(E, X) = sum_ij u_i X_j [nabla_i, nabla_j]
    KEX = JetPoly(gauge.nvars, gauge.order)
    for i in range(n):
        for j in range(n):
            if X[j] == 0:
                continue
            KEX = KEX + JetPoly.variable(gauge.nvars, gauge.order, i) * gauge.curvature_at(i, j) * X[j]
    problems = []
    zero = Multivector.zero(n)
    if not direct.value_at_zero(zero).is_zero():
        problems.append("order-0 Taylor term does not vanish")
    alphas = set(a for a, _ in direct.items()) | set(a for a, _ in KEX.items())
    for alpha in alphas:
        omega = KEX.coefficient(alpha, zero) * Fraction(1, sum(alpha) + 1)
        if omega.grades() - {2}:
            problems.append(f"coefficient at {alpha} is not a 2-form multiple")
        if direct.coefficient(alpha, zero) != omega * sigma:
            problems.append(f"Euler recursion fails at {alpha}")
    if not euler_zero:
        problems.append("section is not synchronous")
    return Report("synchronous Taylor expansion", not problems, cases=len(alphas),
                  max_residual=float(len(problems)),
                  witness={"problem": problems[0]} if problems else None)


def model_curvature_check(kappa: CurvatureTensor, X: Sequence, Y: Sequence) -> Report:
    """``[model(nabla_X), model(nabla_Y)] 1 = kappa(X, Y)``."""
    n = kappa.n
    a = model_nabla_vec(kappa, X)
    b = model_nabla_vec(kappa, Y)
    one = FormPoly.constant(n, None, Multivector.scalar(n, 1))
    got = (a * b - b * a).apply(one)
    want = FormPoly.constant(n, None, kappa(X, Y))
    diff = got - want
    return Report("model curvature", diff.is_zero(), cases=1,
                  max_residual=0.0 if diff.is_zero() else float(max(c.max_abs() for _, c in diff.items())))


# -- random certified data -----------------------------------------------------

def random_multivector(rng, n: int, n_terms: int = 2, grades: Sequence[int] | None = None,
                       coeff: Callable | None = None) -> Multivector:
    masks = [m for m in range(1 << n) if grades is None or popcount(m) in grades]
    coeff = coeff or (lambda: Fraction(rng.randint(-4, 4), rng.randint(1, 3)))
    return Multivector(n, {masks[rng.randrange(len(masks))]: coeff() for _ in range(n_terms)})


def random_curvature(rng, n: int, coeff: Callable | None = None, density: float = 0.6) -> CurvatureTensor:
    coeff = coeff or (lambda: Fraction(rng.randint(-3, 3), rng.randint(1, 2)))
    entries = {}
    for i in range(n):
        for j in range(i + 1, n):
            terms = {}
            for a in range(n):
                for b in range(a + 1, n):
                    if rng.random() < density:
                        terms[(1 << a) | (1 << b)] = coeff()
            entries[(i, j)] = Multivector(n, terms)
    return CurvatureTensor(n, entries)


def _random_index(rng, nvars: int, degree: int) -> list[int]:
    alpha = [0] * nvars
    for _ in range(degree):
        alpha[rng.randrange(nvars)] += 1
    return alpha


def random_section(rng, n: int, order: int, powers: Sequence[int], two_sided: bool,
                   gauge: RadialGauge | None = None, n_terms: int = 3) -> SpinorLaurentSection:
    """Random certified section whose terms mostly saturate ``|alpha_u| - ord = p``.

    ``u``-degrees are drawn from the range that can reach the base point
    under the evaluation maps, so the sections are rarely invisible to them.
    """
    nvars = 2 * n if two_sided else n
    sync = {}
    for p in powers:
        lo, hi = max(0, p), min(order, n + p)
        if hi < lo:
            continue
        terms = {}
        for _ in range(n_terms):
            udeg = rng.randint(lo, hi)
            alpha = _random_index(rng, n, udeg)
            if two_sided:
                vdeg = 0 if rng.random() < 0.6 else rng.randint(1, max(1, order - udeg))
                alpha += _random_index(rng, n, min(vdeg, order - udeg))
            top = min(n, udeg - p)
            grade = top if rng.random() < 0.7 else rng.randint(0, top)
            mv = random_multivector(rng, n, 1, grades=[grade])
            key = tuple(alpha)
            terms[key] = terms[key] + mv if key in terms else mv
        sync[p] = JetPoly(nvars, order, terms)
    frame = gauge.synchronous_frame() if (two_sided and gauge is not None) else None
    return SpinorLaurentSection(n, order, sync, frame)
