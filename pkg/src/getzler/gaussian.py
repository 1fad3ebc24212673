"""Closed-form Gaussian sections over the even exterior subring.

A :class:`GaussianSection` in ``m`` variables is

    P(X) ^ exp(-1/2 X^T A X + b^T X + c)

where ``A`` is a symmetric matrix, ``b`` a vector and ``c`` a scalar, all
with entries in the commutative even subring of ``/\\R^n``, and ``P`` is a
polynomial with arbitrary form coefficients.  Integrating out variables
reduces to ordinary Gaussian integrals because the nilpotent parts of the
entries commute: the body of ``A`` fixes convergence and the rest is a
finite perturbation series.  Gaussian moments are computed with Isserlis'
rule against the inverse matrix.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from typing import Sequence

from .clifford import (
    _wedge_table,
    Multivector,
    RingMatrix,
    _exact_det,
    det_sqrt_even,
    even_inverse,
    ring_body,
    ring_inverse,
    ring_matmul,
    wedge_exp,
    wedge_mul,
)
from .jets import FormPoly


def _mv(n: int, x) -> Multivector:
    return x if isinstance(x, Multivector) else Multivector.scalar(n, x)


def exp_even(s: Multivector) -> Multivector:
    """Exponential of an even form with an arbitrary scalar part."""
    body = s.scalar_part()
    nil = s - body
    if isinstance(body, complex):
        scale = cmath.exp(body)
    elif body == 0:
        scale = 1
    else:
        scale = math.exp(body)
    return wedge_exp(nil) * scale


def _is_spd(mat: list[list]) -> bool:
    size = len(mat)
    for k in range(1, size + 1):
        minor = [row[:k] for row in mat[:k]]
        if isinstance(minor[0][0], complex):
            return False
        d = _exact_det(minor)
        if isinstance(d, complex) or not d > 0:
            return False
    return all(mat[i][j] == mat[j][i] for i in range(size) for j in range(size))


class GaussianSection:
    """``P(X) ^ exp(-1/2 X^T A X + b^T X + c)`` on ``R^nvars`` with values in ``/\\R^n``."""

    __slots__ = ("n", "nvars", "A", "b", "c", "prefactor")

    def __init__(self, n: int, A: Sequence[Sequence], b: Sequence | None = None, c=0,
                 prefactor: FormPoly | None = None, check: bool = True):
        self.n = n
        self.nvars = len(A)
        m = self.nvars
        self.A = [[_mv(n, v) for v in row] for row in A]
        self.b = [_mv(n, v) for v in (b if b is not None else [0] * m)]
        self.c = _mv(n, c)
        if prefactor is None:
            prefactor = FormPoly.constant(m, None, Multivector.scalar(n, 1))
        if prefactor.nvars != m:
            raise ValueError("prefactor variable count differs from the exponent")
        self.prefactor = prefactor
        for row in self.A:
            if len(row) != m:
                raise ValueError("A must be square")
            for v in row:
                if not v.is_even():
                    raise ValueError("exponent entries must be even forms")
        for i in range(m):
            for j in range(i + 1, m):
                if self.A[i][j] != self.A[j][i]:
                    raise ValueError("A must be symmetric")
        if not all(v.is_even() for v in self.b) or not self.c.is_even():
            raise ValueError("exponent entries must be even forms")
        if check and m and not _is_spd(ring_body(self.A)):
            raise ValueError("the body of A must be symmetric positive definite")

    # -- construction helpers --------------------------------------------------
    @classmethod
    def centered(cls, n: int, nvars: int, variance=1) -> "GaussianSection":
        """``exp(-|X|^2 / (2 variance))``."""
        inv = Fraction(1) / variance if isinstance(variance, (int, Fraction)) else 1 / variance
        A = [[inv if i == j else 0 for j in range(nvars)] for i in range(nvars)]
        return cls(n, A)

    def with_prefactor(self, poly: FormPoly) -> "GaussianSection":
        return GaussianSection(self.n, self.A, self.b, self.c, poly, check=False)

    def scaled(self, s) -> "GaussianSection":
        return self.with_prefactor(self.prefactor * s)

    # -- evaluation ----------------------------------------------------------------
    def exponent_at(self, X: Sequence) -> Multivector:
        n, m = self.n, self.nvars
        out = self.c
        for i in range(m):
            if X[i] == 0:
                continue
            out = out + self.b[i] * X[i]
            for j in range(m):
                if X[j] != 0:
                    out = out - self.A[i][j] * (X[i] * X[j] / 2)
        return out

    def __call__(self, X: Sequence) -> Multivector:
        poly = self.prefactor.evaluate(list(X))
        poly = _mv(self.n, poly)
        return wedge_mul(poly, exp_even(self.exponent_at(X)))

    # -- structural operations -----------------------------------------------------
    def pullback(self, L: Sequence[Sequence]) -> "GaussianSection":
        """Compose with the linear map ``X_old = L X_new`` (``L`` has scalar entries)."""
        n = self.n
        m_new = len(L[0])
        Lm = [[_mv(n, v) for v in row] for row in L]
        LT = [list(col) for col in zip(*Lm)]
        A = ring_matmul(ring_matmul(LT, self.A), Lm)
        b = [row[0] for row in ring_matmul(LT, [[v] for v in self.b])]
        images = []
        for row in L:
            terms = {}
            for k, v in enumerate(row):
                if v != 0:
                    alpha = [0] * m_new
                    alpha[k] = 1
                    terms[tuple(alpha)] = v
            images.append(FormPoly(m_new, None, terms))
        poly = self.prefactor.substitute_linear(images, m_new)
        return GaussianSection(n, _symmetrize(A), b, self.c, poly, check=False)

    def __mul__(self, other: "GaussianSection") -> "GaussianSection":
        """Pointwise wedge product (self on the left)."""
        if other.nvars != self.nvars or other.n != self.n:
            raise ValueError("incompatible Gaussian sections")
        A = [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.A, other.A)]
        b = [x + y for x, y in zip(self.b, other.b)]
        return GaussianSection(self.n, A, b, self.c + other.c,
                               self.prefactor.wedge(other.prefactor), check=False)

    def integrate_tail(self, k: int) -> "GaussianSection":
        """Integrate out the last ``k`` variables over ``R^k``.

        With ``M`` the tail block of ``A`` and ``J(X) = b_Y - A_YX X``, the
        integral of ``Q(X, Y) exp(-1/2 Y^T M Y + Y^T J)`` is
        ``(2 pi)^{k/2} det(M)^{-1/2} exp(1/2 J^T M^{-1} J) E[Q(X, mu + Z)]``
        with ``mu = M^{-1} J`` and ``Z`` centred with covariance ``M^{-1}``.
        """
        n, m = self.n, self.nvars
        keep = m - k
        if k <= 0 or keep < 0:
            raise ValueError("nothing to integrate")
        Axx = [row[:keep] for row in self.A[:keep]]
        Axy = [row[keep:] for row in self.A[:keep]]
        Ayx = [row[:keep] for row in self.A[keep:]]
        M = [row[keep:] for row in self.A[keep:]]
        if not _is_spd(ring_body(M)):
            raise ValueError("integrated block has a non positive definite body")
        Minv = _symmetrize(ring_inverse(M))
        by = [[v] for v in self.b[keep:]]
        # new exponent
        MinvAyx = ring_matmul(Minv, Ayx) if keep else []
        Minvby = ring_matmul(Minv, by)
        if keep:
            A_new = _symmetrize([[a - s for a, s in zip(ra, rs)]
                                 for ra, rs in zip(Axx, ring_matmul(Axy, MinvAyx))])
            corr = ring_matmul(Axy, Minvby)
            b_new = [self.b[i] - corr[i][0] for i in range(keep)]
        else:
            A_new, b_new = [], []
        byT = [[row[0] for row in by]]
        c_new = self.c + ring_matmul(byT, Minvby)[0][0] * Fraction(1, 2)
        # prefactor: substitute Y = mu0 - R X + Z and take Gaussian moments in Z
        nz = keep + k
        images = []
        for i in range(keep):
            alpha = [0] * nz
            alpha[i] = 1
            images.append(FormPoly(nz, None, {tuple(alpha): Multivector.scalar(n, 1)}))
        for r in range(k):
            terms = {(0,) * nz: Minvby[r][0]}
            for j in range(keep):
                alpha = [0] * nz
                alpha[j] = 1
                terms[tuple(alpha)] = -MinvAyx[r][j]
            alpha = [0] * nz
            alpha[keep + r] = 1
            terms[tuple(alpha)] = Multivector.scalar(n, 1)
            images.append(FormPoly(nz, None, terms))
        shifted = _flat_substitute(self.prefactor, images, n)
        moments = _Moments(Minv)
        acc: dict = {}
        for alpha, coef in shifted.items():
            mom = moments(alpha[keep:])
            if mom.is_zero():
                continue
            _flat_acc(acc.setdefault(alpha[:keep], {}), coef, mom._c, _wedge_table(n))
        out = {a: Multivector(n, v) for a, v in acc.items()}
        norm = even_inverse(det_sqrt_even(M)) * (2 * math.pi) ** (k / 2)
        poly = FormPoly(keep, None, {a: wedge_mul(v, norm) for a, v in out.items()})
        return GaussianSection(n, A_new, b_new, c_new, poly, check=False)

    def max_difference(self, other: "GaussianSection", points: Sequence[Sequence]) -> float:
        """Largest coefficient difference over sample points."""
        worst = 0.0
        for X in points:
            worst = max(worst, (self(X) - other(X)).max_abs())
        return worst


def _flat_of(x, n: int) -> dict[int, object]:
    return dict(x.items()) if isinstance(x, Multivector) else ({0: x} if x != 0 else {})


def _flat_acc(out: dict, x: dict, y: dict, table) -> None:
    """``out += x ^ y`` on blade dictionaries."""
    for a, ca in x.items():
        row = table[a]
        for b, cb in y.items():
            s = row[b]
            if s:
                m = a | b
                out[m] = out.get(m, 0) + s * ca * cb


def _flat_poly_mul(x: dict, y: dict, table) -> dict:
    out: dict = {}
    for a, ca in x.items():
        for b, cb in y.items():
            key = tuple(map(int.__add__, a, b))
            _flat_acc(out.setdefault(key, {}), ca, cb, table)
    return out


def _flat_substitute(poly: FormPoly, images: Sequence[FormPoly], n: int) -> dict:
    """``poly`` with variable ``i`` replaced by ``images[i]``, as ``alpha -> {blade: coef}``."""
    table = _wedge_table(n)
    flat_images = [{a: _flat_of(c, n) for a, c in im.items()} for im in images]
    nz = images[0].nvars if images else 0
    one = {(0,) * nz: {0: 1}}
    cache: dict[tuple[int, int], dict] = {}

    def power(i, k):
        if k == 0:
            return one
        if (i, k) not in cache:
            cache[(i, k)] = _flat_poly_mul(power(i, k - 1), flat_images[i], table)
        return cache[(i, k)]

    out: dict = {}
    for alpha, c in poly.items():
        term = {(0,) * nz: _flat_of(c, n)}
        for i, k in enumerate(alpha):
            if k:
                term = _flat_poly_mul(term, power(i, k), table)
        for key, blades in term.items():
            acc = out.setdefault(key, {})
            for m, v in blades.items():
                acc[m] = acc.get(m, 0) + v
    return out


def _symmetrize(A: RingMatrix) -> RingMatrix:
    size = len(A)
    return [[(A[i][j] + A[j][i]) * Fraction(1, 2) for j in range(size)] for i in range(size)]


class _Moments:
    """Isserlis moments ``E[Z^alpha]`` for a centred Gaussian with covariance ``C``."""

    def __init__(self, C: RingMatrix):
        self.C = C
        self.n = C[0][0].n
        self.cache: dict[tuple, Multivector] = {}

    def __call__(self, alpha: tuple) -> Multivector:
        alpha = tuple(alpha)
        if alpha in self.cache:
            return self.cache[alpha]
        total = sum(alpha)
        if total == 0:
            out = Multivector.scalar(self.n, 1)
        elif total % 2:
            out = Multivector.zero(self.n)
        else:
            i = next(k for k, a in enumerate(alpha) if a)
            beta = list(alpha)
            beta[i] -= 1
            out = Multivector.zero(self.n)
            for j, bj in enumerate(beta):
                if bj == 0 or self.C[i][j].is_zero():
                    continue
                gamma = list(beta)
                gamma[j] -= 1
                out = out + wedge_mul(self.C[i][j], self(tuple(gamma))) * bj
        self.cache[alpha] = out
        return out


def bilinear_factor(n: int, T: RingMatrix, nvars: int, rows: Sequence[int], cols: Sequence[int]
                    ) -> GaussianSection:
    """``exp(sum_ij Z_rows[i] T_ij Z_cols[j])`` as a (degenerate) Gaussian in ``nvars`` variables."""
    W = [[Multivector.zero(n) for _ in range(nvars)] for _ in range(nvars)]
    for i, r in enumerate(rows):
        for j, c in enumerate(cols):
            t = T[i][j]
            if t.is_zero():
                continue
            if r == c:
                W[r][r] = W[r][r] - t * 2
            else:
                W[r][c] = W[r][c] - t
                W[c][r] = W[c][r] - t
    return GaussianSection(n, W, check=False)


def _fiber_pair(g1: GaussianSection, g2: GaussianSection) -> GaussianSection:
    """``g1(X - Y) ^ g2(Y)`` on ``(X, Y)``."""
    m = g1.nvars
    if g2.nvars != m or g2.n != g1.n:
        raise ValueError("incompatible Gaussian sections")
    diff = [[1 if j == i else (-1 if j == m + i else 0) for j in range(2 * m)] for i in range(m)]
    second = [[1 if j == m + i else 0 for j in range(2 * m)] for i in range(m)]
    return g1.pullback(diff) * g2.pullback(second)


def twisted_product(g1: GaussianSection, g2: GaussianSection, T: RingMatrix) -> GaussianSection:
    """``int g1(X - Y) ^ g2(Y) ^ exp(Y^T T X) dY`` in closed form."""
    m = g1.nvars
    joint = _fiber_pair(g1, g2) * bilinear_factor(g1.n, T, 2 * m, range(m, 2 * m), range(m))
    return joint.integrate_tail(m)


def split_product(g1: GaussianSection, g2: GaussianSection, S: RingMatrix) -> GaussianSection:
    """``int g1(A) ^ g2(B) ^ exp(A^T S B)`` over ``A + B = X``.

    Built on the pair space ``(A, B)`` first and only then pulled back along
    ``(X, Y) -> (X - Y, Y)``; used as the multiplicative-structure route.
    """
    m = g1.nvars
    first = [[1 if j == i else 0 for j in range(2 * m)] for i in range(m)]
    second = [[1 if j == m + i else 0 for j in range(2 * m)] for i in range(m)]
    pair = g1.pullback(first) * g2.pullback(second) * bilinear_factor(
        g1.n, S, 2 * m, range(m), range(m, 2 * m))
    to_pair = [[1 if j == i else (-1 if j == m + i else 0) for j in range(2 * m)] for i in range(m)]
    to_pair += second
    return pair.pullback(to_pair).integrate_tail(m)


def random_gaussian(rng, n: int, nvars: int, poly_degree: int = 2, nil_scale: float = 0.3,
                    poly_terms: int = 3) -> GaussianSection:
    """Random Gaussian with SPD body, even nilpotent corrections and a form-valued prefactor."""
    from .calculus import random_multivector

    def even_nil():
        return random_multivector(rng, n, 2, grades=[g for g in range(2, n + 1, 2)],
                                  coeff=lambda: rng.uniform(-nil_scale, nil_scale))

    body = [[0.0] * nvars for _ in range(nvars)]
    for i in range(nvars):
        body[i][i] = rng.uniform(0.6, 1.4)
    for i in range(nvars):
        for j in range(i + 1, nvars):
            v = rng.uniform(-0.2, 0.2)
            body[i][j] = body[j][i] = v
    A = [[Multivector.scalar(n, body[i][j]) for j in range(nvars)] for i in range(nvars)]
    for i in range(nvars):
        for j in range(i, nvars):
            e = even_nil()
            A[i][j] = A[i][j] + e
            if i != j:
                A[j][i] = A[j][i] + e
    b = [even_nil() + rng.uniform(-0.3, 0.3) for _ in range(nvars)]
    c = even_nil()
    from .jets import monomials

    pool = list(monomials(nvars, poly_degree))
    terms = {}
    for _ in range(poly_terms):
        alpha = pool[rng.randrange(len(pool))]
        terms[alpha] = random_multivector(rng, n, 2, coeff=lambda: rng.uniform(-1, 1))
    if not terms:
        terms[(0,) * nvars] = Multivector.scalar(n, 1)
    return GaussianSection(n, A, b, c, FormPoly(nvars, None, terms))
