import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from getzler.calculus import random_curvature
from getzler.clifford import CurvatureTensor, Multivector, wedge_exp, wedge_mul
from getzler.convolution import (
    FiberFunction,
    FiberGrid,
    GaussianBackedSection,
    TorusKernel,
    TorusSection,
    TorusTerm,
    cocycle_check,
    compose_kernels,
    eps_lambda,
    eps_zero,
    grid_wedge_convolve,
    grid_wedge_convolve_direct,
    haar_scale,
    multiplicative_compose,
    random_torus_section,
    sign_coherence_check,
    torus_product,
    twisted_convolve,
)
from getzler.gaussian import GaussianSection, random_gaussian

seeds = st.integers(0, 2**32 - 1)


def _vec(rng, n):
    return [Fraction(rng.randint(-3, 3), rng.randint(1, 3)) for _ in range(n)]


def test_haar_scale():
    assert haar_scale(Fraction(1, 2), 2) == 4
    assert haar_scale(0, 3) == 1
    assert haar_scale(-2, 1) == Fraction(1, 2)


def test_multiplicative_compose_example():
    theta = Fraction(3, 5)
    kappa = CurvatureTensor(2, {(0, 1): Multivector.blade(2, [1, 2], theta)})
    one = Multivector.scalar(2, 1)
    got = multiplicative_compose(one, one, [1, 0], [0, 1], kappa)
    assert got == one - Multivector.blade(2, [1, 2], theta / 2)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_twist_cocycle_and_sign_coherence(seed):
    rng = random.Random(seed)
    kappa = random_curvature(rng, 3)
    X, Y, Z = (_vec(rng, 3) for _ in range(3))
    assert cocycle_check(kappa, X, Y, Z).passed
    assert sign_coherence_check(kappa, X, Y).passed


def test_flipped_sign_breaks_coherence():
    kappa = CurvatureTensor(2, {(0, 1): Multivector.blade(2, [1, 2])})
    assert not sign_coherence_check(kappa, [2, 1], [1, 3], sign=-1).passed


def _brute_force(phi1, phi2, kappa, X, R=7.0, G=56):
    # midpoint sum over the Y box, using only pointwise evaluation
    n = kappa.n
    h = 2 * R / G
    axis = -R + h * (np.arange(G) + 0.5)
    total = Multivector.zero(n)
    for Y in np.stack(np.meshgrid(*[axis] * n, indexing="ij"), -1).reshape(-1, n):
        Y = [float(v) for v in Y]
        diff = [a - b for a, b in zip(X, Y)]
        twist = wedge_exp(kappa(Y, X) * 0.5)
        total = total + wedge_mul(wedge_mul(phi1(diff), phi2(Y)), twist)
    return total * h ** n


def test_closed_form_against_pointwise_quadrature():
    rng = random.Random(2)
    n = 2
    kappa = random_curvature(rng, n)
    f1 = FiberFunction.from_gaussian(GaussianSection.centered(n, n, Fraction(1, 2)))
    f2 = FiberFunction.from_gaussian(random_gaussian(rng, n, n, poly_degree=1))
    conv = twisted_convolve(f1, f2, kappa)
    X = [0.4, -0.3]
    assert (conv(X) - _brute_force(f1, f2, kappa, X)).max_abs() < 1e-8


def test_centered_gaussians_convolve_to_wider_gaussian():
    n = 2
    g = FiberFunction.from_gaussian(GaussianSection.centered(n, n, 1))
    conv = twisted_convolve(g, g, CurvatureTensor.zero(n))
    X = [0.7, -1.1]
    want = np.pi * np.exp(-(X[0] ** 2 + X[1] ** 2) / 4)
    assert abs(complex(conv(X).scalar_part()) - want) < 1e-12


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_twisted_convolution_is_associative(seed):
    rng = random.Random(seed)
    n = 2
    kappa = random_curvature(rng, n)
    f = [FiberFunction.from_gaussian(random_gaussian(rng, n, n)) for _ in range(3)]
    conv = lambda a, b: twisted_convolve(a, b, kappa)
    lhs, rhs = conv(conv(f[0], f[1]), f[2]), conv(f[0], conv(f[1], f[2]))
    X = [rng.uniform(-1, 1) for _ in range(n)]
    assert (lhs(X) - rhs(X)).max_abs() < 1e-10


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_boundary_restriction_is_multiplicative(seed):
    rng = random.Random(seed)
    n = 2
    kappa = random_curvature(rng, n)
    a = GaussianBackedSection(random_gaussian(rng, n, n), kappa)
    b = GaussianBackedSection(random_gaussian(rng, n, n), kappa)
    lhs = eps_zero(a * b)
    rhs = twisted_convolve(eps_zero(a), eps_zero(b), kappa)
    X = [rng.uniform(-1, 1) for _ in range(n)]
    assert (lhs(X) - rhs(X)).max_abs() < 1e-10


def test_fft_wedge_convolution_matches_direct_sum():
    rng = random.Random(4)
    grid = FiberGrid(2, 16, 6.0)
    a = FiberFunction.from_gaussian(random_gaussian(rng, 2, 2)).to_grid(grid)
    b = FiberFunction.from_gaussian(random_gaussian(rng, 2, 2)).to_grid(grid)
    fast = grid_wedge_convolve(a.samples, b.samples, grid)
    slow = grid_wedge_convolve_direct(a.samples, b.samples, grid)
    assert np.abs(fast - slow).max() < 1e-12


def test_torus_section_rejects_bad_certificate():
    coef = Multivector.blade(2, [1, 2])
    with pytest.raises(ValueError):
        TorusSection(2, {1: [TorusTerm(coef, (1, 0), (0, 0), (0, 0))]})


def test_sine_factor_expands_to_two_modes():
    t = TorusTerm(Multivector.scalar(1, 1), (1,), (0,), (0,))
    f = t.fourier()
    assert set(f) == {((1,), (-1,)), ((-1,), (1,))}


@settings(max_examples=8, deadline=None)
@given(seeds, st.sampled_from([1.0, 0.5, 2.0]))
def test_kernel_map_is_multiplicative(seed, lam):
    rng = random.Random(seed)
    s1 = random_torus_section(rng, 1, [-1, 0, 1], max_freq=2, max_sin=2)
    s2 = random_torus_section(rng, 1, [-2, 0], max_freq=2, max_sin=2)
    G = 16
    direct = eps_lambda(torus_product(s1, s2), lam, G).samples
    composed = compose_kernels(eps_lambda(s1, lam, G), eps_lambda(s2, lam, G)).samples
    assert np.abs(direct - composed).max() <= 1e-10 * max(1.0, np.abs(direct).max())


def test_kernel_validation():
    with pytest.raises(ValueError):
        TorusKernel(1, 2, 1.0, np.zeros((2, 2, 2)))
    with pytest.raises(ValueError):
        TorusKernel(1, 4, 1.0, np.full((4, 4, 2), np.nan))
    with pytest.raises(ValueError):
        eps_lambda(random_torus_section(random.Random(0), 1, [0]), 0, 8)
