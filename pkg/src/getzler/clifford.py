"""Clifford and exterior algebra of a Euclidean space, blade-indexed.

A blade ``e_I = e_{i1} ... e_{id}`` (``i1 < ... < id``) is stored as the
bitmask with bit ``i - 1`` set for each ``i`` in ``I``.  Coefficients may be
any Python number type; ``int``/``Fraction`` (optionally wrapped in
``complex`` with integer parts) keep every operation exact.

The Clifford relations are ``e f + f e = -2 <e, f>``, so ``e_i * e_i = -1``.
The quantization map ``q`` is the identity on blade coefficients, which is
why a single ``Multivector`` type carries both products.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from numbers import Number
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .series import PowerSeries1D, exp_series, log1p_series

NEG_INF = float("-inf")


class DimensionError(ValueError):
    pass


@lru_cache(maxsize=None)
def reorder_sign(a: int, b: int) -> int:
    """Sign of moving the generators of ``b`` past those of ``a``."""
    a >>= 1
    swaps = 0
    while a:
        swaps += bin(a & b).count("1")
        a >>= 1
    return -1 if swaps & 1 else 1


@lru_cache(maxsize=None)
def clifford_sign(a: int, b: int) -> int:
    s = reorder_sign(a, b)
    return -s if bin(a & b).count("1") & 1 else s


@lru_cache(maxsize=None)
def _sign_table(n: int) -> tuple[tuple[int, ...], ...]:
    size = 1 << n
    return tuple(tuple(clifford_sign(a, b) for b in range(size)) for a in range(size))


@lru_cache(maxsize=None)
def _wedge_table(n: int) -> tuple[tuple[int, ...], ...]:
    """``reorder_sign(a, b)`` for disjoint blades, 0 when they overlap."""
    size = 1 << n
    return tuple(tuple(0 if a & b else reorder_sign(a, b) for b in range(size)) for a in range(size))


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def mask_from_indices(indices: Iterable[int], n: int) -> int:
    """Bitmask of a strictly increasing 1-based index list."""
    idx = list(indices)
    if any(b <= a for a, b in zip(idx, idx[1:])):
        raise ValueError(f"blade indices must be strictly increasing, got {idx}")
    mask = 0
    for i in idx:
        if not 1 <= i <= n:
            raise ValueError(f"blade index {i} out of range for n={n}")
        mask |= 1 << (i - 1)
    return mask


def indices_from_mask(mask: int) -> tuple[int, ...]:
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def _is_zero(c) -> bool:
    return c == 0


class Multivector:
    """Element of ``Cl(R^n) (x) C`` (equivalently of the exterior algebra)."""

    __slots__ = ("n", "_c")

    def __init__(self, n: int, coeffs: Mapping[int, Number] | None = None):
        if n < 0:
            raise DimensionError("dimension must be non-negative")
        self.n = n
        top = (1 << n) - 1
        c = {}
        if coeffs:
            for mask, v in coeffs.items():
                if mask & ~top:
                    raise ValueError(f"blade mask {mask:b} invalid for n={n}")
                if v.__class__ is Fraction and v.denominator == 1:
                    v = v.numerator
                if not _is_zero(v):
                    c[mask] = v
        self._c = c

    @classmethod
    def _trusted(cls, n: int, coeffs: dict) -> "Multivector":
        # internal fast path: masks already valid, only zeros and integral fractions cleaned
        c = {}
        for m, v in coeffs.items():
            if v.__class__ is Fraction and v._denominator == 1:
                v = v._numerator
            if v != 0:
                c[m] = v
        obj = object.__new__(cls)
        obj.n = n
        obj._c = c
        return obj

    # construction helpers
    @classmethod
    def scalar(cls, n: int, value=1) -> "Multivector":
        return cls(n, {0: value})

    @classmethod
    def zero(cls, n: int) -> "Multivector":
        return cls(n)

    @classmethod
    def basis(cls, n: int, i: int, value=1) -> "Multivector":
        return cls(n, {mask_from_indices([i], n): value})

    @classmethod
    def blade(cls, n: int, indices: Sequence[int], value=1) -> "Multivector":
        return cls(n, {mask_from_indices(indices, n): value})

    @classmethod
    def vector(cls, n: int, components: Sequence) -> "Multivector":
        return cls(n, {1 << i: v for i, v in enumerate(components)})

    # inspection
    @property
    def coeffs(self) -> dict[int, Number]:
        return dict(self._c)

    def items(self) -> Iterator[tuple[int, Number]]:
        return iter(self._c.items())

    def coefficient(self, indices: Sequence[int] | int):
        mask = indices if isinstance(indices, int) else mask_from_indices(indices, self.n)
        return self._c.get(mask, 0)

    def scalar_part(self):
        return self._c.get(0, 0)

    def top_coefficient(self):
        return self._c.get((1 << self.n) - 1, 0)

    def is_zero(self) -> bool:
        return not self._c

    def grades(self) -> set[int]:
        return {popcount(m) for m in self._c}

    def grade(self, k: int) -> "Multivector":
        return Multivector(self.n, {m: v for m, v in self._c.items() if popcount(m) == k})

    def even_part(self) -> "Multivector":
        return Multivector(self.n, {m: v for m, v in self._c.items() if popcount(m) % 2 == 0})

    def odd_part(self) -> "Multivector":
        return Multivector(self.n, {m: v for m, v in self._c.items() if popcount(m) % 2 == 1})

    def is_even(self) -> bool:
        return all(popcount(m) % 2 == 0 for m in self._c)

    def max_abs(self) -> float:
        return max((abs(v) for v in self._c.values()), default=0.0)

    def map(self, f) -> "Multivector":
        return Multivector(self.n, {m: f(v) for m, v in self._c.items()})

    def conjugate(self) -> "Multivector":
        return self.map(lambda v: v.conjugate())

    # arithmetic
    def _check(self, other: "Multivector") -> None:
        if other.n != self.n:
            raise DimensionError(f"dimension mismatch: {self.n} vs {other.n}")

    def __add__(self, other):
        if isinstance(other, Multivector):
            self._check(other)
            out = dict(self._c)
            for m, v in other._c.items():
                out[m] = out.get(m, 0) + v
            return Multivector._trusted(self.n, out)
        if isinstance(other, Number):
            return self + Multivector.scalar(self.n, other)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return Multivector._trusted(self.n, {m: -v for m, v in self._c.items()})

    def __sub__(self, other):
        if isinstance(other, (Multivector, Number)):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Multivector):
            return clifford_mul(self, other)
        if isinstance(other, Number):
            return Multivector._trusted(self.n, {m: v * other for m, v in self._c.items()})
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, Number):
            return Multivector._trusted(self.n, {m: other * v for m, v in self._c.items()})
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, Number):
            if isinstance(other, int):
                other = Fraction(other)
            return Multivector(self.n, {m: v / other for m, v in self._c.items()})
        return NotImplemented

    def __xor__(self, other):
        if isinstance(other, Multivector):
            return wedge_mul(self, other)
        return NotImplemented

    def __eq__(self, other):
        if isinstance(other, Number):
            other = Multivector.scalar(self.n, other)
        if not isinstance(other, Multivector):
            return NotImplemented
        return self.n == other.n and self._c == other._c

    def __hash__(self):
        return hash((self.n, frozenset(self._c.items())))

    def __repr__(self) -> str:
        if not self._c:
            return f"Multivector({self.n}, 0)"
        parts = []
        for m in sorted(self._c, key=lambda k: (popcount(k), k)):
            name = "e" + "".join(str(i) for i in indices_from_mask(m)) if m else "1"
            parts.append(f"{self._c[m]!r}*{name}")
        return f"Multivector({self.n}, " + " + ".join(parts) + ")"


def clifford_mul(a: Multivector, b: Multivector) -> Multivector:
    """Clifford product with ``e_i e_i = -1``."""
    a._check(b)
    out: dict[int, Number] = {}
    table = _sign_table(a.n)
    for ma, va in a._c.items():
        row = table[ma]
        for mb, vb in b._c.items():
            m = ma ^ mb
            out[m] = out.get(m, 0) + row[mb] * (va * vb)
    return Multivector._trusted(a.n, out)


def wedge_mul(a: Multivector, b: Multivector) -> Multivector:
    """Graded-commutative exterior product."""
    a._check(b)
    out: dict[int, Number] = {}
    for ma, va in a._c.items():
        for mb, vb in b._c.items():
            if ma & mb:
                continue
            m = ma | mb
            out[m] = out.get(m, 0) + reorder_sign(ma, mb) * (va * vb)
    return Multivector._trusted(a.n, out)


def wedge_all(factors: Iterable[Multivector], n: int) -> Multivector:
    acc = Multivector.scalar(n, 1)
    for f in factors:
        acc = wedge_mul(acc, f)
    return acc


def commutator(a: Multivector, b: Multivector) -> Multivector:
    return clifford_mul(a, b) - clifford_mul(b, a)


def supercommutator(a: Multivector, b: Multivector) -> Multivector:
    """``ab - (-1)^{|a||b|} ba`` for homogeneous-parity inputs."""
    pa = {popcount(m) % 2 for m, _ in a.items()}
    pb = {popcount(m) % 2 for m, _ in b.items()}
    if len(pa) > 1 or len(pb) > 1:
        raise ValueError("supercommutator needs parity-homogeneous arguments")
    sign = -1 if (pa and pb and pa.pop() == 1 and pb.pop() == 1) else 1
    return clifford_mul(a, b) - sign * clifford_mul(b, a)


def clifford_order(a: Multivector) -> float:
    """Largest grade present, ``-inf`` for zero."""
    return max((popcount(m) for m, _ in a.items()), default=NEG_INF)


def _require_even_n(n: int) -> None:
    if n % 2:
        raise DimensionError(f"operation needs even dimension, got n={n}")


def str_blade(a: Multivector):
    """Supertrace: the coefficient of ``e_1 ... e_n``."""
    _require_even_n(a.n)
    return a.top_coefficient()


def i_power(k: int):
    """``i**k`` with exact integer parts."""
    return (1, 1j, -1, -1j)[k % 4]


def grading_element(n: int) -> Multivector:
    """``s = i^{n/2} e_1 ... e_n``; satisfies ``s*s = 1``."""
    _require_even_n(n)
    return Multivector(n, {(1 << n) - 1: i_power(n // 2)})


@lru_cache(maxsize=None)
def _generator_matrices(n: int) -> tuple[np.ndarray, ...]:
    # Jordan-Wigner fermions on (C^2)^{n/2}; e_{2j-1} -> a_j - a_j^+, e_{2j} -> i(a_j + a_j^+)
    k = n // 2
    a = np.array([[0, 1], [0, 0]], dtype=complex)
    z = np.diag([1, -1]).astype(complex)
    eye = np.eye(2, dtype=complex)

    def site(op, j):
        mats = [z] * j + [op] + [eye] * (k - j - 1)
        out = np.ones((1, 1), dtype=complex)
        for m in mats:
            out = np.kron(out, m)
        return out

    gens = []
    for j in range(k):
        aj = site(a, j)
        adj = aj.conj().T
        gens.append(aj - adj)
        gens.append(1j * (aj + adj))
    return tuple(gens)


def matrix_rep(a: Multivector) -> np.ndarray:
    """Irreducible complex representation of size ``2^{n/2}``."""
    _require_even_n(a.n)
    gens = _generator_matrices(a.n)
    dim = 2 ** (a.n // 2)
    out = np.zeros((dim, dim), dtype=complex)
    for mask, v in a.items():
        mat = np.eye(dim, dtype=complex)
        for i in indices_from_mask(mask):
            mat = mat @ gens[i - 1]
        out += complex(v) * mat
    return out


def str_via_trace(a: Multivector) -> complex:
    """``(i/2)^{n/2} Tr(c(s) c(a))`` computed in ``matrix_rep``."""
    _require_even_n(a.n)
    k = a.n // 2
    s = matrix_rep(grading_element(a.n))
    return complex((0.5j) ** k * np.trace(s @ matrix_rep(a)))


class SkewMatrix:
    """Real antisymmetric matrix stored by its strict upper triangle."""

    __slots__ = ("n", "_upper")

    def __init__(self, n: int, upper: Mapping[tuple[int, int], Number]):
        for (i, j) in upper:
            if not 0 <= i < j < n:
                raise ValueError(f"entry ({i},{j}) is not strictly upper triangular")
        self.n = n
        self._upper = {k: v for k, v in upper.items() if v != 0}

    @classmethod
    def from_matrix(cls, mat) -> "SkewMatrix":
        rows = [list(r) for r in mat]
        n = len(rows)
        for i in range(n):
            for j in range(n):
                if rows[i][j] != -rows[j][i]:
                    raise ValueError("matrix is not skew-symmetric")
        return cls(n, {(i, j): rows[i][j] for i in range(n) for j in range(i + 1, n)})

    @property
    def upper(self) -> dict[tuple[int, int], Number]:
        return dict(self._upper)

    def __getitem__(self, ij: tuple[int, int]):
        i, j = ij
        if i == j:
            return 0
        if i < j:
            return self._upper.get((i, j), 0)
        return -self._upper.get((j, i), 0)

    def to_list(self) -> list[list]:
        return [[self[i, j] for j in range(self.n)] for i in range(self.n)]

    def __eq__(self, other):
        return isinstance(other, SkewMatrix) and self.n == other.n and self._upper == other._upper

    def __repr__(self):
        return f"SkewMatrix({self.n}, {self._upper})"


def gamma_map(T: SkewMatrix) -> Multivector:
    """Inverse of :func:`adjoint_action` on ``so(n)``.

    With ``e_i^2 = -1`` this is ``1/4 sum_i e_i ^ T(e_i)``; the ordering of
    the wedge is what makes ``adjoint_action(gamma_map(T)) == T``.
    """
    n = T.n
    out: dict[int, Number] = {}
    for i in range(n):
        for j in range(n):
            t = T[j, i]  # component of T(e_i) along e_j
            if t == 0 or i == j:
                continue
            term = wedge_mul(Multivector.basis(n, i + 1), Multivector.basis(n, j + 1, t))
            for m, v in term.items():
                out[m] = out.get(m, 0) + v
    return Multivector(n, out) / 4


def adjoint_action(b: Multivector) -> SkewMatrix:
    """Matrix of ``v -> [b, v]`` on vectors, for ``b`` of pure grade 2."""
    if b.grades() - {2}:
        raise ValueError("adjoint_action needs a pure grade-2 element")
    n = b.n
    cols = []
    for i in range(n):
        br = commutator(b, Multivector.basis(n, i + 1))
        if br.grades() - {1}:
            raise ArithmeticError("commutator left the vector subspace")
        cols.append([br.coefficient([j + 1]) for j in range(n)])
    mat = [[cols[j][i] for j in range(n)] for i in range(n)]
    return SkewMatrix.from_matrix(mat)


class CurvatureTensor:
    """Constant antisymmetric map ``(X, Y) -> kappa(X, Y)`` into 2-forms.

    Entries ``kappa_ij`` for ``i < j`` (0-based) are pure grade-2
    multivectors.  The first Bianchi identity is not imposed; call
    :meth:`satisfies_bianchi` when it matters.
    """

    __slots__ = ("n", "_entries")

    def __init__(self, n: int, entries: Mapping[tuple[int, int], Multivector] | None = None):
        self.n = n
        clean = {}
        for (i, j), form in (entries or {}).items():
            if not 0 <= i < j < n:
                raise ValueError(f"curvature index ({i},{j}) must satisfy 0 <= i < j < n")
            if form.n != n:
                raise DimensionError("curvature entry has wrong dimension")
            if form.grades() - {2}:
                raise ValueError(f"curvature entry ({i},{j}) is not a pure 2-form")
            if not form.is_zero():
                clean[(i, j)] = form
        self._entries = clean

    @classmethod
    def zero(cls, n: int) -> "CurvatureTensor":
        return cls(n, {})

    def entry(self, i: int, j: int) -> Multivector:
        if i == j:
            return Multivector.zero(self.n)
        if i < j:
            return self._entries.get((i, j), Multivector.zero(self.n))
        return -self._entries.get((j, i), Multivector.zero(self.n))

    def entries(self) -> dict[tuple[int, int], Multivector]:
        return dict(self._entries)

    def matrix(self) -> list[list[Multivector]]:
        return [[self.entry(i, j) for j in range(self.n)] for i in range(self.n)]

    def __call__(self, X: Sequence, Y: Sequence) -> Multivector:
        out = Multivector.zero(self.n)
        for (i, j), form in self._entries.items():
            c = X[i] * Y[j] - X[j] * Y[i]
            if c != 0:
                out = out + form * c
        return out

    def scaled(self, c) -> "CurvatureTensor":
        return CurvatureTensor(self.n, {k: v * c for k, v in self._entries.items()})

    def is_zero(self) -> bool:
        return not self._entries

    def satisfies_bianchi(self) -> bool:
        """First Bianchi identity for the endomorphisms ``ad(q(kappa_ij))``."""
        n = self.n
        for i, j, k in combinations(range(n), 3):
            total = Multivector.zero(n)
            for a, b, c in ((i, j, k), (j, k, i), (k, i, j)):
                total = total + commutator(self.entry(a, b), Multivector.basis(n, c + 1))
            if not total.is_zero():
                return False
        return True

    def __eq__(self, other):
        return isinstance(other, CurvatureTensor) and self.n == other.n and self._entries == other._entries

    def __repr__(self):
        return f"CurvatureTensor({self.n}, {self._entries})"


def _nilpotent_power_bound(n: int) -> int:
    return n // 2


def analytic_even(f: PowerSeries1D, omega: Multivector) -> Multivector:
    """``sum_k c_k omega^k`` under the wedge product, for nilpotent even ``omega``."""
    n = omega.n
    if omega.scalar_part() != 0:
        raise ValueError("analytic_even needs zero grade-0 part")
    if any(g % 2 for g in omega.grades()):
        raise ValueError("analytic_even needs an even form")
    out = Multivector.scalar(n, f[0])
    power = Multivector.scalar(n, 1)
    k = 0
    while True:
        k += 1
        power = wedge_mul(power, omega)
        if power.is_zero():
            return out
        if k > f.order:
            raise ValueError(f"series of order {f.order} too short for a form in dimension {n}")
        if f[k] != 0:
            out = out + power * f[k]


def wedge_exp(omega: Multivector) -> Multivector:
    return analytic_even(exp_series(_nilpotent_power_bound(omega.n) + 1), omega)


# -- matrices over the commutative even subring ------------------------------

RingMatrix = list  # list[list[Multivector]]


def ring_identity(size: int, n: int) -> RingMatrix:
    return [[Multivector.scalar(n, 1 if i == j else 0) for j in range(size)] for i in range(size)]


def ring_matmul(A: RingMatrix, B: RingMatrix) -> RingMatrix:
    n = A[0][0].n
    rows, inner, cols = len(A), len(B), len(B[0])
    out = []
    for i in range(rows):
        row = []
        for j in range(cols):
            acc = Multivector.zero(n)
            for k in range(inner):
                if A[i][k].is_zero() or B[k][j].is_zero():
                    continue
                acc = acc + wedge_mul(A[i][k], B[k][j])
            row.append(acc)
        out.append(row)
    return out


def ring_add(A: RingMatrix, B: RingMatrix) -> RingMatrix:
    return [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def ring_scale(A: RingMatrix, c) -> RingMatrix:
    return [[a * c for a in row] for row in A]


def ring_body(A: RingMatrix) -> list[list]:
    return [[a.scalar_part() for a in row] for row in A]


def ring_nilpart(A: RingMatrix) -> RingMatrix:
    return [[a - a.scalar_part() for a in row] for row in A]


def ring_is_zero(A: RingMatrix) -> bool:
    return all(a.is_zero() for row in A for a in row)


def ring_from_scalars(mat, n: int) -> RingMatrix:
    return [[Multivector.scalar(n, v) for v in row] for row in mat]


def ring_trace(A: RingMatrix) -> Multivector:
    acc = Multivector.zero(A[0][0].n)
    for i in range(len(A)):
        acc = acc + A[i][i]
    return acc


def matrix_series(f: PowerSeries1D, A: RingMatrix) -> RingMatrix:
    """``sum_k c_k A^k`` for a matrix whose entries are nilpotent even forms."""
    n = A[0][0].n
    size = len(A)
    out = ring_scale(ring_identity(size, n), f[0])
    power = ring_identity(size, n)
    k = 0
    while True:
        k += 1
        power = ring_matmul(power, A)
        if ring_is_zero(power):
            return out
        if k > f.order:
            raise ValueError(f"series of order {f.order} too short for matrix argument")
        if f[k] != 0:
            out = ring_add(out, ring_scale(power, f[k]))


def _exact_inverse(mat: list[list]) -> list[list]:
    """Gauss-Jordan inverse; exact for ``int``/``Fraction`` entries."""
    size = len(mat)
    exact = all(isinstance(v, (int, Fraction)) for row in mat for v in row)
    one = Fraction(1) if exact else 1.0
    aug = [[(Fraction(v) if exact else v) for v in row] + [one if i == j else 0 * one for j in range(size)]
           for i, row in enumerate(mat)]
    for col in range(size):
        piv = max(range(col, size), key=lambda r: abs(aug[r][col]))
        if aug[piv][col] == 0:
            raise ZeroDivisionError("singular body matrix")
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [v / p for v in aug[col]]
        for r in range(size):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [row[size:] for row in aug]


def _exact_det(mat: list[list]):
    size = len(mat)
    exact = all(isinstance(v, (int, Fraction)) for row in mat for v in row)
    a = [[(Fraction(v) if exact else v) for v in row] for row in mat]
    det = Fraction(1) if exact else 1.0
    for col in range(size):
        piv = max(range(col, size), key=lambda r: abs(a[r][col]))
        if a[piv][col] == 0:
            return 0
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        for r in range(col + 1, size):
            f = a[r][col] / a[col][col]
            a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return det


def _exact_sqrt(x):
    if isinstance(x, Fraction) or isinstance(x, int):
        x = Fraction(x)
        rn, rd = math.isqrt(x.numerator), math.isqrt(x.denominator)
        if rn * rn == x.numerator and rd * rd == x.denominator:
            return Fraction(rn, rd)
        return math.sqrt(x)
    return x ** 0.5


def ring_inverse(A: RingMatrix) -> RingMatrix:
    """Inverse via ``(B + N)^{-1} = sum_k (-B^{-1} N)^k B^{-1}``."""
    n = A[0][0].n
    binv = ring_from_scalars(_exact_inverse(ring_body(A)), n)
    step = ring_scale(ring_matmul(binv, ring_nilpart(A)), -1)
    out = binv
    term = binv
    while True:
        term = ring_matmul(step, term)
        if ring_is_zero(term):
            return out
        out = ring_add(out, term)


def even_inverse(x: Multivector) -> Multivector:
    """Inverse of an even element with invertible scalar part."""
    b = x.scalar_part()
    if b == 0:
        raise ZeroDivisionError("even element with zero body is not invertible")
    if isinstance(b, int):
        b = Fraction(b)
    nil = (x - x.scalar_part()) / b
    out = Multivector.scalar(x.n, 1)
    term = Multivector.scalar(x.n, 1)
    while True:
        term = -wedge_mul(term, nil)
        if term.is_zero():
            return out / b
        out = out + term


def det_sqrt_even(M: RingMatrix) -> Multivector:
    """``exp(1/2 tr log M)`` for a matrix over the even exterior subring.

    The body ``M_0`` must have positive determinant; the nilpotent part is
    handled by the logarithm series of ``1 + M_0^{-1} N``.
    """
    n = M[0][0].n
    for row in M:
        for a in row:
            if not a.is_even():
                raise ValueError("det_sqrt_even needs even entries")
    body = ring_body(M)
    det0 = _exact_det(body)
    if det0 == 0:
        raise ZeroDivisionError("singular body matrix")
    if isinstance(det0, complex) or det0 < 0:
        raise ValueError("body determinant must be positive")
    X = ring_matmul(ring_from_scalars(_exact_inverse(body), n), ring_nilpart(M))
    logm = matrix_series(log1p_series(n // 2 + 1), X)
    half_tr = ring_trace(logm) * Fraction(1, 2)
    return wedge_exp(half_tr) * _exact_sqrt(det0)


def ring_det(M: RingMatrix) -> Multivector:
    """Leibniz determinant over the commutative even subring."""
    from itertools import permutations

    size = len(M)
    n = M[0][0].n
    out = Multivector.zero(n)
    for perm in permutations(range(size)):
        inv = sum(1 for a in range(size) for b in range(a + 1, size) if perm[a] > perm[b])
        term = Multivector.scalar(n, -1 if inv % 2 else 1)
        for i, j in enumerate(perm):
            term = wedge_mul(term, M[i][j])
            if term.is_zero():
                break
        out = out + term
    return out
