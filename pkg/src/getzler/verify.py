"""Property suites behind ``getzler verify`` and the acceptance tests.

Each suite takes a seeded :class:`random.Random` and returns a list of
:class:`~getzler.report.Report`.  Case counts are parameters so the CLI can
run a quick pass while the tests run the full counts.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable

import numpy as np

from .calculus import (
    RadialGauge,
    model_curvature_check,
    normal_vs_tangent_check,
    random_curvature,
    random_multivector,
    random_section,
    verify_scaling_definition,
)
from .clifford import (
    CurvatureTensor,
    Multivector,
    SkewMatrix,
    adjoint_action,
    clifford_mul,
    gamma_map,
    str_blade,
    str_via_trace,
)
from .constants import TWIST_SIGN, two_over_i_power
from .convolution import (
    FiberFunction,
    FiberGrid,
    GaussianBackedSection,
    array_to_multivector,
    cocycle_check,
    compose_kernels,
    eps_lambda,
    eps_zero,
    grid_wedge_convolve_direct,
    random_torus_section,
    sign_coherence_check,
    torus_product,
    twisted_convolve,
)
from .gaussian import random_gaussian
from .jets import JetPoly, monomials
from .rees import (
    eval_normal,
    eval_point,
    exp_formula_eval,
    random_rees,
    rees_mul,
    triple_pullback_character,
)
from .report import Report
from .supertrace import (
    a_hat,
    ahat_density,
    heat_residual,
    index_density,
    mehler_kernel,
    str_lambda_algebraic,
    str_lambda_quadrature,
    str_zero,
    torus_boundary_value,
)

LAMBDAS = (1, 0.5, 0.1, 0.01)
TAUS = (0.25, 0.5, 1.0)


def _frac(rng, lo=-3, hi=3, den=3) -> Fraction:
    return Fraction(rng.randint(lo, hi), rng.randint(1, den))


def _vec(rng, n, **kw) -> list[Fraction]:
    return [_frac(rng, **kw) for _ in range(n)]


def _fail_witness(failures: list) -> dict | None:
    return failures[0] if failures else None


# -- algebra core -------------------------------------------------------------------

def suite_clifford(rng, max_n: int = 6, samples: int = 1000) -> list[Report]:
    """Generator relations for every ``n <= max_n`` and two routes to ``str``."""
    failures = []
    checked = 0
    for n in range(1, max_n + 1):
        gens = [Multivector.basis(n, i + 1) for i in range(n)]
        one = Multivector.scalar(n, 1)
        for i in range(n):
            for j in range(n):
                lhs = clifford_mul(gens[i], gens[j]) + clifford_mul(gens[j], gens[i])
                want = one * (-2) if i == j else Multivector.zero(n)
                checked += 1
                if lhs != want:
                    failures.append({"n": n, "i": i + 1, "j": j + 1, "got": repr(lhs)})
        # every blade is the ordered product of its generators
        for mask in range(1 << n):
            idx = [i for i in range(n) if mask >> i & 1]
            prod = one
            for i in idx:
                prod = clifford_mul(prod, gens[i])
            checked += 1
            if prod != Multivector(n, {mask: 1}):
                failures.append({"n": n, "blade": [i + 1 for i in idx], "got": repr(prod)})
    relations = Report("Clifford generator relations", not failures, cases=checked,
                       max_residual=float(len(failures)), witness=_fail_witness(failures))
    worst = 0.0
    count = 0
    for n in (2, 4):
        for _ in range(samples // 2):
            coeff = lambda: complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
            x = random_multivector(rng, n, rng.randint(1, 1 << n), coeff=coeff)
            worst = max(worst, abs(complex(str_blade(x)) - str_via_trace(x)))
            count += 1
    traces = Report("str by top blade vs operator trace", worst <= 1e-12, cases=count, max_residual=worst)
    return [relations, traces]


def suite_gamma(rng, samples: int = 100, max_n: int = 6) -> list[Report]:
    failures = []
    for _ in range(samples):
        n = rng.randint(2, max_n)
        T = SkewMatrix(n, {(i, j): _frac(rng, -5, 5, 4) for i, j in combinations(range(n), 2)
                           if rng.random() < 0.7})
        back = adjoint_action(gamma_map(T))
        if back != T:
            failures.append({"n": n, "T": repr(T), "back": repr(back)})
    return [Report("adjoint action inverts gamma", not failures, cases=samples,
                   max_residual=float(len(failures)), witness=_fail_witness(failures))]


# -- Rees characters ----------------------------------------------------------------

def suite_rees(rng, pairs: int = 500) -> list[Report]:
    bad_point, bad_normal, bad_exp = [], [], []
    nontrivial = 0
    for _ in range(pairs):
        n = rng.randint(1, 3)
        N = rng.randint(2, 6)
        a = random_rees(rng, n, N)
        b = random_rees(rng, n, N)
        ab = rees_mul(a, b)
        x, y = _vec(rng, n), _vec(rng, n)
        lam = Fraction(rng.randint(1, 6), rng.randint(1, 4)) * rng.choice((1, -1))
        pa, pb, pab = eval_point(a, x, y, lam), eval_point(b, x, y, lam), eval_point(ab, x, y, lam)
        if pab != pa * pb:
            bad_point.append({"n": n, "N": N, "lhs": str(pab), "rhs": str(pa * pb)})
        m, X = _vec(rng, n), _vec(rng, n)
        na, nb, nab = eval_normal(a, m, X), eval_normal(b, m, X), eval_normal(ab, m, X)
        nontrivial += nab != 0
        if nab != na * nb:
            bad_normal.append({"n": n, "N": N, "lhs": str(nab), "rhs": str(na * nb)})
        e = exp_formula_eval(a, m, X)
        if e != na:
            bad_exp.append({"n": n, "N": N, "exp": str(e), "normal": str(na)})
    return [
        Report("point evaluation is a character", not bad_point, cases=pairs,
               max_residual=float(len(bad_point)), witness=_fail_witness(bad_point)),
        Report("normal evaluation is a character", not bad_normal, cases=pairs,
               max_residual=float(len(bad_normal)), witness=_fail_witness(bad_normal),
               details={"nonzero_values": nontrivial}),
        Report("exponential formula for normal evaluation", not bad_exp, cases=pairs,
               max_residual=float(len(bad_exp)), witness=_fail_witness(bad_exp)),
    ]


def suite_composition(rng, triples: int = 100) -> list[Report]:
    failures = []
    for _ in range(triples):
        n = rng.randint(1, 3)
        N = rng.randint(2, 6)
        f = random_rees(rng, n, N, max_degree=N)
        m, X, Y = _vec(rng, n), _vec(rng, n), _vec(rng, n)
        lhs = triple_pullback_character(f, m, X, Y)
        rhs = eval_normal(f, m, [a + b for a, b in zip(X, Y)])
        if lhs != rhs:
            failures.append({"n": n, "X": [str(v) for v in X], "Y": [str(v) for v in Y],
                             "pullback": str(lhs), "sum": str(rhs)})
    return [Report("boundary arrows compose by addition", not failures, cases=triples,
                   max_residual=float(len(failures)), witness=_fail_witness(failures))]


# -- Getzler calculus -------------------------------------------------------------------

def monomial_sections(n: int, max_degree: int) -> list[JetPoly]:
    out = []
    for alpha in monomials(n, max_degree):
        for mask in range(1 << n):
            out.append(JetPoly(n, max_degree + 4, {alpha: Multivector(n, {mask: 1})}))
    return out


def suite_symbols(rng, curvature_cases: int = 20, n_model: int = 4, n_scaling: int = 2,
                  max_degree: int = 4, max_length: int = 3) -> list[Report]:
    bad = []
    for _ in range(curvature_cases):
        kappa = random_curvature(rng, n_model)
        X, Y = _vec(rng, n_model), _vec(rng, n_model)
        r = model_curvature_check(kappa, X, Y)
        if not r.passed:
            bad.append({"kappa": repr(kappa), "X": [str(v) for v in X], "Y": [str(v) for v in Y]})
    model = Report("model curvature identity", not bad, cases=curvature_cases,
                   max_residual=float(len(bad)), witness=_fail_witness(bad))
    kappa = random_curvature(rng, n_scaling)
    violations = 0
    witness = None
    sections = monomial_sections(n_scaling, max_degree)
    words = 0
    for sigma in sections:
        r = verify_scaling_definition(sigma, kappa, max_length=max_length)
        words += r.cases
        if not r.passed:
            violations += r.details["violations"]
            witness = witness or {"section": repr(sigma), **r.witness}
    scaling = Report("scaling order bounds every word", violations == 0, cases=words,
                     max_residual=float(violations), witness=witness,
                     details={"sections": len(sections)})
    return [model, scaling]


def suite_normal_tangent(rng, cases: int = 200, n: int = 4, order: int = 6) -> list[Report]:
    failures = []
    for _ in range(cases):
        kappa = random_curvature(rng, n)
        gauge = RadialGauge(kappa, order, two_sided=True)
        sec = random_section(rng, n, order, [-2, -1, 0, 1, 2], two_sided=True, gauge=gauge)
        X, Y = _vec(rng, n), _vec(rng, n)
        r = normal_vs_tangent_check(sec, X, Y, gauge)
        if not r.passed:
            failures.append({"X": [str(v) for v in X], "Y": [str(v) for v in Y], **(r.witness or {})})
    return [Report("two-sided evaluation carries the half-curvature twist", not failures, cases=cases,
                   max_residual=float(len(failures)), witness=_fail_witness(failures))]


# -- convolution ----------------------------------------------------------------------

def _probe_points(rng, n: int, k: int = 4) -> list[list[float]]:
    return [[rng.uniform(-1.5, 1.5) for _ in range(n)] for _ in range(k)]


def _max_diff(f, g, points) -> tuple[float, dict]:
    worst, where = 0.0, {}
    for X in points:
        a, b = f(X), g(X)
        d = (a - b).max_abs()
        if d >= worst:
            worst, where = d, {"X": X, "lhs": repr(a), "rhs": repr(b)}
    return worst, where


def suite_twisted(rng, triples: int = 100, n: int = 2, G: int = 64, twist_sign: int = TWIST_SIGN,
                  tol: float = 1e-10, mixed: bool = True) -> list[Report]:
    """Associativity, degeneration, backend agreement and sign coherence."""
    reports = []
    worst, witness = 0.0, None
    worst_mixed, witness_mixed = 0.0, None
    for _ in range(triples):
        kappa = random_curvature(rng, n)
        g = [random_gaussian(rng, n, n) for _ in range(3)]
        f = [FiberFunction.from_gaussian(x) for x in g]
        conv = lambda a, b: twisted_convolve(a, b, kappa, sign=twist_sign)
        lhs = conv(conv(f[0], f[1]), f[2])
        rhs = conv(f[0], conv(f[1], f[2]))
        pts = _probe_points(rng, n)
        d, w = _max_diff(lhs, rhs, pts)
        if d >= worst:
            worst, witness = d, w
        if not mixed:
            continue
        # bracketing across the two product routes: twisted convolution and the
        # arrow-wise multiplicative product must be the same algebra
        s = [GaussianBackedSection(x, kappa) for x in g]
        mixed_l = FiberFunction.from_gaussian(
            (GaussianBackedSection(conv(f[0], f[1]).gaussian, kappa) * s[2]).fiber)
        mixed_r = conv(f[0], FiberFunction.from_gaussian((s[1] * s[2]).fiber))
        d, w = _max_diff(mixed_l, mixed_r, pts)
        if d >= worst_mixed:
            worst_mixed, witness_mixed = d, w
    reports.append(Report("twisted convolution is associative", worst <= tol, cases=triples,
                          max_residual=worst, witness=None if worst <= tol else witness))
    if mixed:
        reports.append(Report("associativity across twisted and multiplicative products",
                              worst_mixed <= tol, cases=triples, max_residual=worst_mixed,
                              witness=None if worst_mixed <= tol else witness_mixed))

    # kappa = 0: grid twisted convolution against a direct shift-sum wedge convolution
    zero = CurvatureTensor.zero(n)
    grid = FiberGrid(n, 32, 8.0)
    a, b = (FiberFunction.from_gaussian(random_gaussian(rng, n, n)).to_grid(grid) for _ in range(2))
    fft = twisted_convolve(a, b, zero, sign=twist_sign).samples
    direct = grid_wedge_convolve_direct(a.samples, b.samples, grid)
    d = float(np.abs(fft - direct).max())
    reports.append(Report("zero curvature gives plain wedge convolution", d <= tol, cases=1, max_residual=d))

    # grid quadrature against the closed form, nonzero curvature
    kappa = random_curvature(rng, n)
    grid = FiberGrid(n, G, 8.0)
    g1, g2 = FiberFunction.from_gaussian(random_gaussian(rng, n, n)), FiberFunction.from_gaussian(
        random_gaussian(rng, n, n))
    exact = twisted_convolve(g1, g2, kappa, sign=twist_sign)
    num = twisted_convolve(g1.to_grid(grid), g2.to_grid(grid), kappa, sign=twist_sign)
    pts = grid.points()
    worst = 0.0
    c = G // 2
    for off in [(0,) * n] + [tuple(rng.randint(-G // 4, G // 4) for _ in range(n)) for _ in range(8)]:
        idx = tuple(c + o for o in off)
        X = [float(v) for v in pts[idx]]
        worst = max(worst, (exact(X) - array_to_multivector(n, num.samples[idx])).max_abs())
    reports.append(Report("grid quadrature matches the closed form", worst <= 1e-3, cases=9,
                          max_residual=worst, details={"G": G}))

    cocycle = [cocycle_check(random_curvature(rng, n), _vec(rng, n), _vec(rng, n), _vec(rng, n))
               for _ in range(20)]
    reports.append(Report("twist is a 2-cocycle", all(cocycle), cases=len(cocycle),
                          max_residual=max(r.max_residual for r in cocycle)))
    coh = [sign_coherence_check(random_curvature(rng, n), _vec(rng, n), _vec(rng, n), sign=twist_sign)
           for _ in range(20)]
    bad = [r for r in coh if not r.passed]
    reports.append(Report("arrow twist matches convolution twist", not bad, cases=len(coh),
                          max_residual=max(r.max_residual for r in coh),
                          witness=bad[0].witness if bad else None))
    return reports


def suite_homomorphisms(rng, sections: int = 10, G: int = 32, gaussian_cases: int = 20,
                        twist_sign: int = TWIST_SIGN, tol: float = 1e-10) -> list[Report]:
    """Kernel maps on the torus (``n = 1`` at ``G``, plus ``n = 2`` on a coarser grid)
    and the boundary restriction on Gaussian-backed sections (``n = 2``)."""
    worst = 0.0
    cases = 0
    for n, g in ((1, G), (2, 12)):
        for _ in range(sections):
            s1 = random_torus_section(rng, n, [-1, 0, 1], max_freq=2, max_sin=2)
            s2 = random_torus_section(rng, n, [-2, 0], max_freq=2, max_sin=2)
            lam = rng.choice((1.0, 0.5, 0.25, 2.0))
            prod = eps_lambda(torus_product(s1, s2), lam, g)
            comp = compose_kernels(eps_lambda(s1, lam, g), eps_lambda(s2, lam, g))
            scale = max(float(np.abs(prod.samples).max()), 1e-300)
            worst = max(worst, float(np.abs(prod.samples - comp.samples).max()) / scale)
            cases += 1
    torus = Report("kernel map is multiplicative on the torus", worst <= tol, cases=cases,
                   max_residual=worst, details={"G": G})
    n = 2
    worst0, witness0 = 0.0, None
    for _ in range(gaussian_cases):
        kappa = random_curvature(rng, n)
        a = GaussianBackedSection(random_gaussian(rng, n, n), kappa)
        b = GaussianBackedSection(random_gaussian(rng, n, n), kappa)
        lhs = eps_zero(a * b)
        rhs = twisted_convolve(eps_zero(a), eps_zero(b), kappa, sign=twist_sign)
        d, w = _max_diff(lhs, rhs, _probe_points(rng, n))
        if d >= worst0:
            worst0, witness0 = d, w
    zero = Report("boundary restriction is multiplicative", worst0 <= tol, cases=gaussian_cases,
                  max_residual=worst0, witness=None if worst0 <= tol else witness0)
    return [torus, zero]


# -- supertraces and index ----------------------------------------------------------------

def suite_supertrace(rng, sections: int = 50, dims=(2, 4), lambdas=LAMBDAS,
                     tol: float = 1e-8) -> list[Report]:
    """Sections cycle through ``dims``.  Diagonal frequencies stay below 5, so
    the trapezoid grid (16 points per axis for ``n = 2``, 8 above) is exact
    for them."""
    worst = 0.0
    limit_bad = []
    witness = None
    for k in range(sections):
        n = dims[k % len(dims)]
        G = 16 if n <= 2 else 8
        s = random_torus_section(rng, n, [-n - 2, -n - 1, -n, -n + 1, 0, 1], max_freq=2, max_sin=2,
                                 trace_term=True)
        poly = str_lambda_algebraic(s)
        for lam in lambdas:
            q = str_lambda_quadrature(s, lam, G)
            want = complex(poly(Fraction(lam)))
            rel = abs(q - want) / abs(want) if want else abs(q)
            if rel > worst:
                worst = rel
                witness = {"lambda": lam, "quadrature": repr(q), "polynomial": repr(want)}
        limit = two_over_i_power(n) * poly(0)
        boundary = str_zero(torus_boundary_value(s))
        if limit != boundary:
            limit_bad.append({"limit": repr(limit), "str_zero": repr(boundary)})
    return [
        Report("quadrature supertrace equals the trace polynomial", worst <= tol,
               cases=sections * len(lambdas), max_residual=worst,
               witness=None if worst <= tol else witness),
        Report("small-lambda limit equals the boundary supertrace", not limit_bad, cases=sections,
               max_residual=float(len(limit_bad)), witness=_fail_witness(limit_bad)),
    ]


def suite_index(rng, n: int = 4, heat_order: int | None = None, taus=TAUS,
                twist_sign: int = TWIST_SIGN, tol: float = 1e-10) -> list[Report]:
    kappa = random_curvature(rng, n)
    order = heat_order if heat_order is not None else (6 if n >= 4 else 8)
    heat = [heat_residual(kappa, Fraction(1, 2), order), heat_residual(kappa, Fraction(3, 4), order)]
    heat_r = Report("Mehler kernel solves the heat equation", all(heat), cases=len(heat),
                    max_residual=max(r.max_residual for r in heat))
    k1, k2, k12 = mehler_kernel(kappa, 0.3), mehler_kernel(kappa, 0.45), mehler_kernel(kappa, 0.75)
    prod = twisted_convolve(FiberFunction.from_gaussian(k1), FiberFunction.from_gaussian(k2), kappa,
                            sign=twist_sign)
    pts = [[0.0] * n] + _probe_points(rng, n)
    d, w = _max_diff(prod, k12, pts)
    semigroup = Report("heat semigroup under twisted convolution", d <= tol, cases=len(pts),
                       max_residual=d, witness=None if d <= tol else w)
    dens = [index_density(kappa, t) for t in taus]
    spread = max(abs(a - b) for a in dens for b in dens)
    predicted = ahat_density(kappa)
    gap = max(abs(x - predicted) for x in dens)
    density = Report("index density is constant and matches the A-hat form",
                     spread <= tol and gap <= tol, cases=len(taus), max_residual=max(spread, gap),
                     details={"density": repr(dens[0]), "a_hat_top": str(a_hat(kappa).top_coefficient())})
    out = [heat_r, semigroup, density]
    if n != 2:
        k2d = random_curvature(rng, 2)
        d2 = [index_density(k2d, t) for t in taus]
        out.append(Report("index density vanishes in dimension 2", all(v == 0 for v in d2),
                          cases=len(taus), max_residual=max(abs(v) for v in d2)))
    return out


# -- driver -------------------------------------------------------------------------

@dataclass
class SuiteConfig:
    seed: int = 0
    n: int = 4
    jet_order: int = 6
    grid: int = 64
    twist_sign: int = TWIST_SIGN
    scale: str = "quick"           # "quick" or "full"
    only: tuple = field(default_factory=tuple)


def _suites(cfg: SuiteConfig) -> dict[str, Callable[[random.Random], list[Report]]]:
    full = cfg.scale == "full"
    ts = cfg.twist_sign
    return {
        "clifford": lambda r: suite_clifford(r, samples=1000 if full else 200),
        "gamma": lambda r: suite_gamma(r, samples=100 if full else 30),
        "rees": lambda r: suite_rees(r, pairs=500 if full else 60),
        "composition": lambda r: suite_composition(r, triples=100 if full else 30),
        "symbols": lambda r: suite_symbols(r, curvature_cases=20 if full else 5,
                                           max_degree=4 if full else 2),
        "normal_tangent": lambda r: suite_normal_tangent(r, cases=200 if full else 20, n=cfg.n,
                                                         order=cfg.jet_order),
        "twisted": lambda r: suite_twisted(r, triples=100 if full else 10, G=cfg.grid, twist_sign=ts),
        "homomorphisms": lambda r: suite_homomorphisms(r, sections=10 if full else 3,
                                                       gaussian_cases=20 if full else 5, twist_sign=ts),
        "supertrace": lambda r: suite_supertrace(r, sections=50 if full else 10,
                                                 dims=(2, cfg.n) if cfg.n <= 4 else (2,)),
        "index": lambda r: suite_index(r, n=cfg.n, twist_sign=ts),
    }


SUITE_NAMES = tuple(_suites(SuiteConfig()).keys())


def run_suites(cfg: SuiteConfig) -> dict:
    """Run the suites in a fixed order; each suite gets its own seeded generator."""
    if cfg.n % 2:
        raise ValueError(f"spinor suites need even n, got {cfg.n}")
    if cfg.jet_order < 2:
        raise ValueError("jet order must be at least 2")
    results = []
    for name, fn in _suites(cfg).items():
        if cfg.only and name not in cfg.only:
            continue
        rng = random.Random(f"{cfg.seed}:{name}")
        for r in fn(rng):
            results.append({"suite": name, **r.to_json()})
    return {"seed": cfg.seed, "n": cfg.n, "jet_order": cfg.jet_order, "grid": cfg.grid,
            "twist_sign": cfg.twist_sign, "passed": all(r["passed"] for r in results),
            "results": results}
