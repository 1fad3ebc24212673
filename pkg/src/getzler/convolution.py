"""Convolution algebras on the two sides of the tangent groupoid.

For ``lambda != 0`` the desk model is the unit-volume flat torus
``T^n = R^n / Z^n``.  Sections are trigonometric polynomials in
``(x, y)`` with Clifford coefficients and a Laurent index, and
:func:`eps_lambda` samples the smoothing kernel ``lambda^{-n} sigma(x, y, lambda)``.

For ``lambda = 0`` the sections live on a tangent fiber ``R^n`` with values
in ``/\\R^n``; the product is the twisted convolution

    (phi_1 * phi_2)(X) = int phi_1(X - Y) ^ phi_2(Y) ^ exp(1/2 kappa(Y, X)) dY

available as a closed form on Gaussian sections and as FFT quadrature on a
grid.  The arrow-level multiplicative structure of the tangent bundle
(:func:`multiplicative_compose`) is kept as a separate code path so the two
conventions can be compared.

Cl-valued grid arrays carry a trailing axis of length ``2^n`` indexed by
blade bitmask.
"""

from __future__ import annotations

import cmath
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial
from typing import Callable, Sequence

import numpy as np
from scipy.signal import fftconvolve

from .clifford import (
    CurvatureTensor,
    Multivector,
    _sign_table,
    clifford_order,
    popcount,
    reorder_sign,
    wedge_exp,
    wedge_mul,
)
from .constants import TWIST_FACTOR, TWIST_SIGN
from .gaussian import GaussianSection, split_product, twisted_product
from .report import Report


def haar_scale(lam, n: int):
    """Density of the Haar system on the fiber over ``lambda``.

    ``|lambda|^{-n}`` for ``lambda != 0``; on the tangent fibers
    (``lambda = 0``) the measure is plain Lebesgue measure, weight ``1``.
    """
    if lam == 0:
        return 1
    if isinstance(lam, int):
        lam = Fraction(lam)
    return abs(lam) ** (-n)


# -- Clifford-valued arrays ------------------------------------------------------

def _blade_pairs(n: int, wedge: bool) -> list[tuple[int, int, int, int]]:
    table = _sign_table(n)
    out = []
    size = 1 << n
    for a in range(size):
        for b in range(size):
            if wedge:
                if a & b:
                    continue
                out.append((a, b, a | b, reorder_sign(a, b)))
            else:
                out.append((a, b, a ^ b, table[a][b]))
    return out


def multivector_array(n: int, shape: tuple, value: Multivector | None = None) -> np.ndarray:
    arr = np.zeros(shape + (1 << n,), dtype=complex)
    if value is not None:
        for m, v in value.items():
            arr[..., m] = complex(v)
    return arr


def array_to_multivector(n: int, vec: np.ndarray) -> Multivector:
    return Multivector(n, {m: complex(v) for m, v in enumerate(vec) if v != 0})


# -- torus sections (lambda != 0) --------------------------------------------------

Mode = tuple  # (a, b): frequency vectors for x and y


@dataclass(frozen=True)
class TorusTerm:
    """``coef * prod_i sin(2 pi (x_i - y_i))^{k_i} * exp(2 pi i (a.x + b.y))``."""

    coef: Multivector
    sin_powers: tuple
    a: tuple
    b: tuple

    @property
    def vanishing(self) -> int:
        return sum(self.sin_powers)

    def fourier(self) -> dict[Mode, Multivector]:
        n = len(self.a)
        out: dict[Mode, Multivector] = {((tuple(self.a), tuple(self.b))): self.coef}
        for i, k in enumerate(self.sin_powers):
            if k == 0:
                continue
            # sin(t)^k = (2i)^{-k} sum_j C(k,j) (-1)^{k-j} e^{i (2j - k) t}
            factor = (2j) ** (-k)
            new: dict[Mode, Multivector] = {}
            for (a, b), c in out.items():
                for j in range(k + 1):
                    w = factor * comb(k, j) * (-1) ** (k - j)
                    shift = 2 * j - k
                    a2 = list(a)
                    b2 = list(b)
                    a2[i] += shift
                    b2[i] -= shift
                    key = (tuple(a2), tuple(b2))
                    val = c * w
                    new[key] = new[key] + val if key in new else val
            out = {k2: v for k2, v in new.items() if not v.is_zero()}
        return out


class TorusSection:
    """Laurent section ``sum_p sigma_p t^{-p}`` on ``T^n x T^n``.

    ``factored`` holds certified terms (:class:`TorusTerm`); ``fourier`` holds
    uncertified Fourier data such as products.  On the flat torus with the
    trivial spinor frame every term is synchronous, so ``sin``-powers give
    the Taylor order in ``u = x - y`` and the certificate is
    ``sum(k) - CliffordOrder(coef) >= p``.
    """

    def __init__(self, n: int, factored: dict[int, list[TorusTerm]] | None = None,
                 fourier: dict[int, dict[Mode, Multivector]] | None = None):
        self.n = n
        self.factored = {p: list(ts) for p, ts in (factored or {}).items() if ts}
        self.fourier_data = {p: dict(f) for p, f in (fourier or {}).items() if f}
        for p, terms in self.factored.items():
            for t in terms:
                if t.vanishing - clifford_order(t.coef) < p:
                    raise ValueError(
                        f"term of t^{-p} has certified scaling order "
                        f"{t.vanishing - clifford_order(t.coef)} < {p}")

    @property
    def certified(self) -> bool:
        return not self.fourier_data

    def powers(self) -> list[int]:
        return sorted(set(self.factored) | set(self.fourier_data))

    def fourier(self) -> dict[int, dict[Mode, Multivector]]:
        out: dict[int, dict[Mode, Multivector]] = {}
        for p, terms in self.factored.items():
            acc = out.setdefault(p, {})
            for t in terms:
                for k, v in t.fourier().items():
                    acc[k] = acc[k] + v if k in acc else v
        for p, f in self.fourier_data.items():
            acc = out.setdefault(p, {})
            for k, v in f.items():
                acc[k] = acc[k] + v if k in acc else v
        return {p: {k: v for k, v in f.items() if not v.is_zero()} for p, f in out.items()}

    def value(self, lam, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """``sigma(x, y, lambda)`` at paired points; ``x, y`` have shape ``(..., n)``.

        Factored terms are evaluated as written, so their sine factors are
        exactly zero on the diagonal.
        """
        n = self.n
        out = np.zeros(x.shape[:-1] + (1 << n,), dtype=complex)
        u = x - y
        for p, terms in self.factored.items():
            w = complex(lam) ** (-p)
            for t in terms:
                f = np.exp(2j * np.pi * (x @ np.array(t.a, float) + y @ np.array(t.b, float)))
                for i, k in enumerate(t.sin_powers):
                    if k:
                        f = f * np.sin(2 * np.pi * u[..., i]) ** k
                for m, v in t.coef.items():
                    out[..., m] += w * complex(v) * f
        for p, fd in self.fourier_data.items():
            w = complex(lam) ** (-p)
            for (a, b), c in fd.items():
                phase = np.exp(2j * np.pi * (x @ np.array(a, float) + y @ np.array(b, float)))
                for m, v in c.items():
                    out[..., m] += w * complex(v) * phase
        return out

    def bandwidth(self) -> int:
        """Largest absolute frequency in the Fourier expansion."""
        return max((abs(v) for f in self.fourier().values() for a, b in f for v in a + b), default=0)

    def scale_t(self, k: int) -> "TorusSection":
        """Multiply by ``t^k`` (shift every Laurent index by ``-k``)."""
        return TorusSection(self.n, None,
                            {p - k: f for p, f in self.fourier().items()})


def torus_product(s1: TorusSection, s2: TorusSection) -> TorusSection:
    """Groupoid convolution ``(s1 * s2)(x, z, lam) = int s1(x, y) s2(y, z) |lam|^{-n} dy``.

    Exact on Fourier data: ``int e^{2 pi i (b + c) y} dy = delta_{b + c, 0}``.
    For ``lambda > 0`` the Haar factor ``lambda^{-n}`` shifts the Laurent
    index by ``n``.
    """
    n = s1.n
    f1, f2 = s1.fourier(), s2.fourier()
    out: dict[int, dict[Mode, Multivector]] = {}
    for p, d1 in f1.items():
        for q, d2 in f2.items():
            acc = out.setdefault(p + q + n, {})
            by_c: dict[tuple, list] = {}
            for (c, d), v in d2.items():
                by_c.setdefault(c, []).append((d, v))
            for (a, b), u in d1.items():
                neg = tuple(-x for x in b)
                for d, v in by_c.get(neg, ()):
                    key = (a, d)
                    val = u * v
                    acc[key] = acc[key] + val if key in acc else val
    return TorusSection(n, None, out)


@dataclass
class TorusKernel:
    """Samples of a kernel on ``(Z/G)^n x (Z/G)^n`` with Clifford values.

    ``samples`` has shape ``(G^n, G^n, 2^n)``; points are flattened in
    row-major order of the lattice ``k / G``.
    """

    n: int
    G: int
    lam: object
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.G < 4:
            raise ValueError("grid resolution must be at least 4")
        size = self.G ** self.n
        if self.samples.shape != (size, size, 1 << self.n):
            raise ValueError(f"samples have shape {self.samples.shape}, expected {(size, size, 1 << self.n)}")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("kernel samples must be finite")


def torus_grid(n: int, G: int) -> np.ndarray:
    axes = [np.arange(G) / G] * n
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=-1)


def eps_lambda(section: TorusSection, lam, G: int) -> TorusKernel:
    """Kernel ``lambda^{-n} sigma(x, y, lambda)`` sampled on the torus grid."""
    if lam == 0:
        raise ValueError("eps_lambda needs lambda != 0; use eps_zero at lambda = 0")
    n = section.n
    pts = torus_grid(n, G)
    x = np.repeat(pts[:, None, :], len(pts), axis=1)
    y = np.repeat(pts[None, :, :], len(pts), axis=0)
    vals = section.value(lam, x, y) * complex(lam) ** (-n)
    return TorusKernel(n, G, lam, vals)


def compose_kernels(k1: TorusKernel, k2: TorusKernel) -> TorusKernel:
    """Trapezoid composition ``sum_y k1(x, y) k2(y, z) / G^n`` with Clifford products."""
    if (k1.n, k1.G) != (k2.n, k2.G):
        raise ValueError("kernels live on different grids")
    if k1.lam != k2.lam:
        raise ValueError("kernels belong to different lambda slices")
    n = k1.n
    w = 1.0 / k1.G ** n
    out = np.zeros_like(k1.samples)
    for a, b, m, sign in _blade_pairs(n, wedge=False):
        A = k1.samples[:, :, a]
        B = k2.samples[:, :, b]
        if not A.any() or not B.any():
            continue
        out[:, :, m] += sign * w * (A @ B)
    return TorusKernel(n, k1.G, k1.lam, out)


def random_torus_section(rng, n: int, powers: Sequence[int], n_terms: int = 3,
                         max_freq: int = 2, max_sin: int = 3,
                         trace_term: bool = False) -> TorusSection:
    """Random certified trigonometric section with rational coefficients.

    ``trace_term`` adds a top-blade, ``sin``-free term with ``a + b = 0`` at
    Laurent index ``-n`` so the diagonal supertrace is nonzero.
    """
    from .calculus import random_multivector

    factored: dict[int, list[TorusTerm]] = {}
    for p in powers:
        terms = []
        for _ in range(n_terms):
            ks = [rng.randint(0, max_sin) for _ in range(n)]
            top = min(n, sum(ks) - p)
            if top < 0:
                ks[0] += -top
                top = 0
            grade = top if rng.random() < 0.6 else rng.randint(0, top)
            coef = random_multivector(rng, n, 1, grades=[grade])
            a = tuple(rng.randint(-max_freq, max_freq) for _ in range(n))
            b = tuple(-v if rng.random() < 0.5 else rng.randint(-max_freq, max_freq) for v in a)
            terms.append(TorusTerm(coef, tuple(ks), a, b))
        factored[p] = terms
    if trace_term:
        a = tuple(rng.randint(-max_freq, max_freq) for _ in range(n))
        coef = random_multivector(rng, n, 1, grades=[n])
        while coef.is_zero():
            coef = random_multivector(rng, n, 1, grades=[n])
        factored.setdefault(-n, []).append(
            TorusTerm(coef, (0,) * n, a, tuple(-v for v in a)))
    return TorusSection(n, factored)


# -- fiber functions (lambda = 0) ------------------------------------------------------

@dataclass
class FiberGrid:
    """Lattice ``k h`` with ``k = -G/2 .. G/2 - 1`` per axis and ``h = 2 R / G``."""

    n: int
    G: int
    radius: float

    @property
    def h(self) -> float:
        return 2 * self.radius / self.G

    def axis(self) -> np.ndarray:
        return (np.arange(self.G) - self.G // 2) * self.h

    def points(self) -> np.ndarray:
        mesh = np.meshgrid(*[self.axis()] * self.n, indexing="ij")
        return np.stack(mesh, axis=-1)


class FiberFunction:
    """Function ``R^n -> /\\R^n (x) C`` on a tangent fiber.

    ``backend="gaussian"`` wraps a :class:`GaussianSection`;
    ``backend="grid"`` holds samples of shape ``(G,)*n + (2^n,)``;
    ``backend="callable"`` wraps a Python function (used for restrictions
    of jet-level sections).
    """

    def __init__(self, n: int, backend: str, gaussian: GaussianSection | None = None,
                 grid: FiberGrid | None = None, samples: np.ndarray | None = None,
                 func: Callable | None = None):
        if backend not in ("gaussian", "grid", "callable"):
            raise ValueError(f"unknown backend {backend!r}")
        self.n = n
        self.backend = backend
        self.gaussian = gaussian
        self.grid = grid
        self.samples = samples
        self.func = func
        if backend == "gaussian" and gaussian is None:
            raise ValueError("gaussian backend needs a GaussianSection")
        if backend == "grid":
            if grid is None or samples is None:
                raise ValueError("grid backend needs a grid and samples")
            if samples.shape != (grid.G,) * grid.n + (1 << n,):
                raise ValueError("sample shape does not match the grid")

    @classmethod
    def from_gaussian(cls, g: GaussianSection) -> "FiberFunction":
        return cls(g.n, "gaussian", gaussian=g)

    def __call__(self, X: Sequence) -> Multivector:
        if self.backend == "gaussian":
            return self.gaussian(list(X))
        if self.backend == "callable":
            return self.func(X)
        idx = tuple(int(round(x / self.grid.h)) + self.grid.G // 2 for x in X)
        return array_to_multivector(self.n, self.samples[idx])

    def to_grid(self, grid: FiberGrid) -> "FiberFunction":
        if self.backend == "grid":
            if (grid.G, grid.radius) != (self.grid.G, self.grid.radius):
                raise ValueError("resampling between grids is not supported")
            return self
        pts = grid.points().reshape(-1, grid.n)
        vals = np.zeros((len(pts), 1 << self.n), dtype=complex)
        for r, X in enumerate(pts):
            for m, v in self(list(map(float, X))).items():
                vals[r, m] = complex(v)
        return FiberFunction(self.n, "grid", grid=grid,
                             samples=vals.reshape((grid.G,) * grid.n + (1 << self.n,)))


def kappa_matrix(kappa: CurvatureTensor, scale=1) -> list[list[Multivector]]:
    """``K_ij = scale * kappa_ij`` so that ``kappa(Y, X) = Y^T K X``."""
    n = kappa.n
    return [[kappa.entry(i, j) * scale for j in range(n)] for i in range(n)]


def twist_matrix(kappa: CurvatureTensor, sign: int | None = None) -> list[list[Multivector]]:
    sign = TWIST_SIGN if sign is None else sign
    return kappa_matrix(kappa, TWIST_FACTOR * sign)


def twisted_convolve(phi1: FiberFunction, phi2: FiberFunction, kappa: CurvatureTensor,
                     sign: int | None = None) -> FiberFunction:
    """``int phi1(X - Y) ^ phi2(Y) ^ exp(1/2 kappa(Y, X)) dY``.

    ``sign`` overrides the documented :data:`TWIST_SIGN`; it exists so the
    verification suite can build a deliberately broken variant.
    """
    if phi1.backend == "gaussian" and phi2.backend == "gaussian":
        T = twist_matrix(kappa, sign)
        return FiberFunction.from_gaussian(twisted_product(phi1.gaussian, phi2.gaussian, T))
    grid = phi1.grid if phi1.backend == "grid" else phi2.grid
    if grid is None:
        raise ValueError("grid convolution needs at least one grid-backed input")
    a = phi1.to_grid(grid)
    b = phi2.to_grid(grid)
    return grid_twisted_convolve(a, b, kappa, sign)


def _center_full(full: np.ndarray, G: int, n: int) -> np.ndarray:
    # full convolution index s = k1 + k2 + G (offset); keep s - G//2 ... in range
    sl = tuple(slice(G // 2, G // 2 + G) for _ in range(n))
    return full[sl]


def grid_wedge_convolve(f: np.ndarray, g: np.ndarray, grid: FiberGrid) -> np.ndarray:
    """Plain ``/\\``-convolution of sampled functions by FFT."""
    n = grid.n
    G = grid.G
    out = np.zeros_like(f, dtype=complex)
    w = grid.h ** n
    for a, b, m, sign in _blade_pairs(f.shape[-1].bit_length() - 1, wedge=True):
        A = f[..., a]
        B = g[..., b]
        if not A.any() or not B.any():
            continue
        out[..., m] += sign * w * _center_full(fftconvolve(A, B, mode="full"), G, n)
    return out


def grid_wedge_convolve_direct(f: np.ndarray, g: np.ndarray, grid: FiberGrid) -> np.ndarray:
    """Plain ``/\\``-convolution by direct summation over shifts (independent of FFT)."""
    n = grid.n
    G = grid.G
    k = f.shape[-1].bit_length() - 1
    out = np.zeros_like(f, dtype=complex)
    w = grid.h ** n
    pairs = _blade_pairs(k, wedge=True)
    for shift in itertools.product(range(-(G // 2), G - G // 2), repeat=n):
        # Y index = shift; X - Y index = X - shift
        g_val = g[tuple(s + G // 2 for s in shift)]
        if not g_val.any():
            continue
        src = []
        dst = []
        for s in shift:
            lo = max(0, s)
            hi = min(G, G + s)
            dst.append(slice(lo, hi))
            src.append(slice(lo - s, hi - s))
        fs = f[tuple(src)]
        for a, b, m, sign in pairs:
            if g_val[b] == 0:
                continue
            out[tuple(dst) + (m,)] += sign * w * fs[..., a] * g_val[b]
    return out


def grid_twisted_convolve(phi1: FiberFunction, phi2: FiberFunction, kappa: CurvatureTensor,
                          sign: int | None = None) -> FiberFunction:
    """Twisted convolution on the grid.

    The twist ``exp(Y^T T X)`` is nilpotent beyond the constant term, so it
    expands into finitely many monomials ``Y^beta X^gamma omega``; each is an
    ordinary convolution of ``phi1`` with ``Y^beta phi2`` followed by
    multiplication with ``X^gamma omega``.
    """
    grid = phi1.grid
    n = kappa.n
    if phi2.grid is None or (phi2.grid.G, phi2.grid.radius) != (grid.G, grid.radius):
        raise ValueError("grid inputs must share the grid")
    T = twist_matrix(kappa, sign)
    f, g = phi1.samples, phi2.samples
    pts = grid.points()
    # twist expansion: sum_k (sum_ij Y_i X_j T_ij)^k / k!
    terms: dict[tuple, Multivector] = {((0,) * n, (0,) * n): Multivector.scalar(n, 1)}
    base = {}
    for i in range(n):
        for j in range(n):
            if not T[i][j].is_zero():
                base[(i, j)] = T[i][j]
    power = dict(terms)
    k = 0
    while base:
        k += 1
        new: dict[tuple, Multivector] = {}
        for (beta, gamma), c in power.items():
            for (i, j), t in base.items():
                b2 = list(beta)
                g2 = list(gamma)
                b2[i] += 1
                g2[j] += 1
                key = (tuple(b2), tuple(g2))
                val = wedge_mul(c, t)
                new[key] = new[key] + val if key in new else val
        power = {key: v for key, v in new.items() if not v.is_zero()}
        if not power:
            break
        for key, v in power.items():
            val = v * Fraction(1, factorial(k))
            terms[key] = terms[key] + val if key in terms else val
    out = np.zeros_like(f, dtype=complex)
    for (beta, gamma), omega in terms.items():
        ymono = np.prod([pts[..., i] ** e for i, e in enumerate(beta)], axis=0)
        xmono = np.prod([pts[..., j] ** e for j, e in enumerate(gamma)], axis=0)
        conv = grid_wedge_convolve(f, g * ymono[..., None], grid)
        om = multivector_array(n, (), omega)
        out += _wedge_arrays(conv, om, n) * xmono[..., None]
    return FiberFunction(n, "grid", grid=grid, samples=out)


def _wedge_arrays(arr: np.ndarray, omega: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros_like(arr)
    for a, b, m, sign in _blade_pairs(n, wedge=True):
        if omega[b] == 0:
            continue
        out[..., m] += sign * arr[..., a] * omega[b]
    return out


def multiplicative_compose(alpha: Multivector, beta: Multivector, X: Sequence, Y: Sequence,
                           kappa: CurvatureTensor) -> Multivector:
    """Product of fiber values at ``(X, 0)`` and ``(Y, 0)``, landing at ``(X + Y, 0)``:
    ``alpha ^ beta ^ exp(-1/2 kappa(X, Y))``."""
    return wedge_mul(wedge_mul(alpha, beta), wedge_exp(kappa(X, Y) * Fraction(-1, 2)))


# -- sections at lambda = 0 ----------------------------------------------------------

class GaussianBackedSection:
    """Section of the rescaled bundle whose restriction to one tangent fiber is Gaussian.

    Products at ``lambda = 0`` are formed arrow by arrow with
    :func:`multiplicative_compose`: the value over ``X`` integrates the
    composite of arrows ``A = X - Y`` and ``B = Y``.  That construction does
    not touch :func:`twisted_convolve`.
    """

    def __init__(self, fiber: GaussianSection, kappa: CurvatureTensor):
        self.fiber = fiber
        self.kappa = kappa

    def __mul__(self, other: "GaussianBackedSection") -> "GaussianBackedSection":
        S = kappa_matrix(self.kappa, Fraction(-1, 2))
        return GaussianBackedSection(split_product(self.fiber, other.fiber, S), self.kappa)


def eps_zero(section, gauge=None) -> FiberFunction:
    """Restriction ``X_m -> sigma(X_m, 0)`` to the tangent fiber over the base point.

    Accepts a :class:`GaussianBackedSection` (closed form) or a jet-level
    :class:`~getzler.calculus.SpinorLaurentSection` together with its gauge,
    evaluated through the rescaled evaluation maps.
    """
    if isinstance(section, GaussianBackedSection):
        return FiberFunction.from_gaussian(section.fiber)
    if gauge is None:
        raise ValueError("jet-level sections need their connection to be evaluated")
    from .calculus import eval_S0_at_tangent

    return FiberFunction(gauge.n, "callable", func=lambda X: eval_S0_at_tangent(section, X, gauge))


# -- identities ------------------------------------------------------------------

def cocycle_check(kappa: CurvatureTensor, X: Sequence, Y: Sequence, Z: Sequence) -> Report:
    """``1/2 kappa(X, Y) + 1/2 kappa(X + Y, Z) = 1/2 kappa(Y, Z) + 1/2 kappa(X, Y + Z)``."""
    half = Fraction(1, 2)
    add = lambda a, b: [p + q for p, q in zip(a, b)]
    lhs = kappa(X, Y) * half + kappa(add(X, Y), Z) * half
    rhs = kappa(Y, Z) * half + kappa(X, add(Y, Z)) * half
    res = (lhs - rhs).max_abs()
    return Report("twist cocycle", lhs == rhs, cases=1, max_residual=float(res))


def sign_coherence_check(kappa: CurvatureTensor, X: Sequence, Y: Sequence,
                         sign: int | None = None) -> Report:
    """Arrow twist ``exp(-1/2 kappa(X - Y, Y))`` versus convolution twist at ``(X, Y)``."""
    sign = TWIST_SIGN if sign is None else sign
    diff = [a - b for a, b in zip(X, Y)]
    arrow = wedge_exp(kappa(diff, Y) * Fraction(-1, 2))
    conv = wedge_exp(kappa(Y, X) * (TWIST_FACTOR * sign))
    res = (arrow - conv).max_abs()
    return Report("twist sign coherence", arrow == conv, cases=1, max_residual=float(res),
                  witness=None if arrow == conv else {"X": [str(v) for v in X], "Y": [str(v) for v in Y],
                                                      "arrow": repr(arrow), "convolution": repr(conv)})
