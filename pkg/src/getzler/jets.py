"""Truncated multivariate polynomials with coefficients in a ring.

Coefficients may be numbers or :class:`~getzler.clifford.Multivector`; the
``*`` operator uses the coefficient ring's own product (Clifford product for
multivectors) and :meth:`JetPoly.wedge` uses the exterior product.
"""

from __future__ import annotations

from fractions import Fraction
from math import factorial
from numbers import Number
from typing import Callable, Iterable, Mapping, Sequence

Alpha = tuple


def _zero(c) -> bool:
    is_zero = getattr(c, "is_zero", None)
    return is_zero() if callable(is_zero) else c == 0


def monomials(nvars: int, max_degree: int) -> Iterable[Alpha]:
    """All multi-indices of total degree at most ``max_degree``."""
    def rec(i, left):
        if i == nvars:
            yield ()
            return
        for k in range(left + 1):
            for rest in rec(i + 1, left - k):
                yield (k,) + rest
    return rec(0, max_degree)


class TruncationError(ValueError):
    pass


class JetPoly:
    """Polynomial in ``nvars`` variables, truncated above total degree ``order``.

    ``order=None`` means no truncation.
    """

    __slots__ = ("nvars", "order", "_t")

    def __init__(self, nvars: int, order: int | None, terms: Mapping[Alpha, object] | None = None):
        self.nvars = nvars
        self.order = order
        t = {}
        for alpha, c in (terms or {}).items():
            alpha = tuple(alpha)
            if len(alpha) != nvars or any(a < 0 for a in alpha):
                raise ValueError(f"bad multi-index {alpha} for {nvars} variables")
            if order is not None and sum(alpha) > order:
                continue
            if not _zero(c):
                t[alpha] = c
        self._t = t

    @classmethod
    def _trusted(cls, nvars: int, order: int | None, terms: dict) -> "JetPoly":
        # internal fast path: multi-indices already valid and within the order
        obj = object.__new__(cls)
        obj.nvars = nvars
        obj.order = order
        obj._t = {a: c for a, c in terms.items() if not _zero(c)}
        return obj

    # constructors
    @classmethod
    def constant(cls, nvars: int, order: int | None, c) -> "JetPoly":
        return cls(nvars, order, {(0,) * nvars: c})

    @classmethod
    def variable(cls, nvars: int, order: int | None, i: int, c=1) -> "JetPoly":
        alpha = [0] * nvars
        alpha[i] = 1
        return cls(nvars, order, {tuple(alpha): c})

    @classmethod
    def monomial(cls, nvars: int, order: int | None, alpha: Sequence[int], c=1) -> "JetPoly":
        return cls(nvars, order, {tuple(alpha): c})

    # inspection
    def terms(self) -> dict[Alpha, object]:
        return dict(self._t)

    def items(self):
        return self._t.items()

    def coefficient(self, alpha: Sequence[int], default=0):
        return self._t.get(tuple(alpha), default)

    def is_zero(self) -> bool:
        return not self._t

    def degree(self) -> float:
        return max((sum(a) for a in self._t), default=float("-inf"))

    def partial_order(self, variables: Sequence[int]) -> float:
        """Least degree in the given variables over all nonzero terms."""
        return min((sum(a[i] for i in variables) for a in self._t), default=float("inf"))

    def _like(self, terms) -> "JetPoly":
        return type(self)(self.nvars, self.order, terms)

    def _check(self, other: "JetPoly") -> int | None:
        if other.nvars != self.nvars:
            raise ValueError("variable count mismatch")
        if self.order is None:
            return other.order
        if other.order is None:
            return self.order
        return min(self.order, other.order)

    # arithmetic
    def __add__(self, other):
        if not isinstance(other, JetPoly):
            return self + type(self).constant(self.nvars, self.order, other)
        order = self._check(other)
        out = dict(self._t)
        for a, c in other._t.items():
            out[a] = out[a] + c if a in out else c
        if order is not None and (self.order is None or order < self.order
                                  or other.order is None or order < other.order):
            out = {a: c for a, c in out.items() if sum(a) <= order}
        return type(self)._trusted(self.nvars, order, out)

    __radd__ = __add__

    def __neg__(self):
        return type(self)._trusted(self.nvars, self.order, {a: -c for a, c in self._t.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def _product(self, other: "JetPoly", op: Callable) -> "JetPoly":
        order = self._check(other)
        out: dict = {}
        right = [(b, cb, sum(b)) for b, cb in other._t.items()]
        for a, ca in self._t.items():
            da = sum(a)
            for b, cb, db in right:
                if order is not None and da + db > order:
                    continue
                g = tuple(map(int.__add__, a, b))
                v = op(ca, cb)
                out[g] = out[g] + v if g in out else v
        return type(self)._trusted(self.nvars, order, out)

    @staticmethod
    def _coef_mul(x, y):
        return x * y

    def __mul__(self, other):
        if isinstance(other, JetPoly):
            return self._product(other, self._coef_mul)
        return type(self)._trusted(self.nvars, self.order, {a: c * other for a, c in self._t.items()})

    def __rmul__(self, other):
        return type(self)._trusted(self.nvars, self.order, {a: other * c for a, c in self._t.items()})

    def wedge(self, other: "JetPoly") -> "JetPoly":
        return self._product(other, lambda x, y: x ^ y)

    def left_apply(self, c) -> "JetPoly":
        """Multiply every coefficient on the left by the ring element ``c``."""
        return type(self)._trusted(self.nvars, self.order, {a: c * v for a, v in self._t.items()})

    def right_apply(self, c) -> "JetPoly":
        return type(self)._trusted(self.nvars, self.order, {a: v * c for a, v in self._t.items()})

    def map(self, f: Callable) -> "JetPoly":
        return self._like({a: f(c) for a, c in self._t.items()})

    def __pow__(self, k: int) -> "JetPoly":
        out = type(self).constant(self.nvars, self.order, 1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, JetPoly):
            return NotImplemented
        return self.nvars == other.nvars and (self - other).is_zero()

    def __hash__(self):
        return hash((self.nvars, frozenset(self._t)))

    def truncate(self, order: int | None) -> "JetPoly":
        if order is None:
            return type(self)._trusted(self.nvars, None, self._t)
        return type(self)._trusted(self.nvars, order, {a: c for a, c in self._t.items() if sum(a) <= order})

    def derivative(self, i: int) -> "JetPoly":
        out = {}
        for a, c in self._t.items():
            if a[i]:
                b = list(a)
                b[i] -= 1
                out[tuple(b)] = c * a[i]
        return type(self)._trusted(self.nvars, self.order, out)

    def directional(self, direction: Sequence, variables: Sequence[int] | None = None) -> "JetPoly":
        """``sum_k direction[k] * d/dx_{variables[k]}`` applied once."""
        variables = range(self.nvars) if variables is None else variables
        out = type(self)(self.nvars, self.order)
        for d, i in zip(direction, variables):
            if d != 0:
                out = out + self.derivative(i) * d
        return out

    def evaluate(self, point: Sequence):
        total = None
        for a, c in self._t.items():
            w = 1
            for x, k in zip(point, a):
                if k:
                    w = w * x**k
            term = c * w
            total = term if total is None else total + term
        return 0 if total is None else total

    def value_at_zero(self, default=0):
        return self._t.get((0,) * self.nvars, default)

    def homogeneous_part(self, degree: int, variables: Sequence[int] | None = None) -> "JetPoly":
        vs = range(self.nvars) if variables is None else variables
        return self._like({a: c for a, c in self._t.items() if sum(a[i] for i in vs) == degree})

    def substitute_linear(self, images: Sequence["JetPoly"], target_nvars: int,
                          order: int | None = None) -> "JetPoly":
        """Replace variable ``i`` by the polynomial ``images[i]``."""
        cls = type(self)
        out = cls(target_nvars, order)
        cache: dict[tuple[int, int], JetPoly] = {}

        def power(i, k):
            if (i, k) not in cache:
                cache[(i, k)] = images[i].truncate(order) ** k if k else cls.constant(target_nvars, order, 1)
            return cache[(i, k)]

        for a, c in self._t.items():
            term = cls.constant(target_nvars, order, 1)
            for i, k in enumerate(a):
                if k:
                    term = term * power(i, k)
            out = out + term.map(lambda s, c=c: cls._coef_mul(c, s))
        return out

    def __repr__(self):
        if not self._t:
            return f"JetPoly({self.nvars}, N={self.order}, 0)"
        body = " + ".join(f"{c!r}*x^{a}" for a, c in sorted(self._t.items()))
        return f"JetPoly({self.nvars}, N={self.order}, {body})"


def _wedge_or_mul(x, y):
    if isinstance(x, Number) or isinstance(y, Number):
        return x * y
    return x ^ y


class FormPoly(JetPoly):
    """Polynomial with exterior-algebra coefficients multiplied by wedge."""

    __slots__ = ()

    _coef_mul = staticmethod(_wedge_or_mul)


def taylor_factor(alpha: Sequence[int]) -> int:
    out = 1
    for a in alpha:
        out *= factorial(a)
    return out


def random_jet(rng, nvars: int, order: int, n_terms: int, coeff: Callable,
               min_degree: int = 0, degree_in: Sequence[int] | None = None,
               min_partial: int = 0) -> JetPoly:
    """Sparse random polynomial; ``min_partial`` bounds the degree in ``degree_in``."""
    pool = [a for a in monomials(nvars, order)
            if sum(a) >= min_degree and (degree_in is None or sum(a[i] for i in degree_in) >= min_partial)]
    terms = {}
    for _ in range(n_terms):
        if not pool:
            break
        a = pool[rng.randrange(len(pool))]
        terms[a] = coeff()
    return JetPoly(nvars, order, terms)


def rational(rng, lo: int = -5, hi: int = 5, den: int = 4) -> Fraction:
    return Fraction(rng.randint(lo, hi), rng.randint(1, den))
