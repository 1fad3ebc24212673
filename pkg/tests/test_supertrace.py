import random
from fractions import Fraction
from math import pi

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import getzler.supertrace as st_mod
from getzler.calculus import CertificateError, random_curvature
from getzler.clifford import CurvatureTensor, Multivector
from getzler.constants import ahat_density_factor, i_over_two_power, two_over_i_power
from getzler.convolution import FiberFunction, TorusSection, TorusTerm, random_torus_section, twisted_convolve
from getzler.series import x_over_sinh_series
from getzler.supertrace import (
    TracePolynomial,
    a_hat,
    ahat_density,
    heat_residual,
    index_density,
    mehler_kernel,
    str_lambda_algebraic,
    str_lambda_quadrature,
    str_zero,
    supertrace_commutator,
    torus_boundary_value,
)

seeds = st.integers(0, 2**32 - 1)


def test_normalization_constants():
    assert two_over_i_power(2) == -2j
    assert two_over_i_power(4) == -4
    assert two_over_i_power(4) * i_over_two_power(4) == 1
    assert ahat_density_factor(4) == pytest.approx(-1 / pi ** 2)
    with pytest.raises(ValueError):
        two_over_i_power(3)


def test_trace_polynomial_evaluation():
    p = TracePolynomial((1, 0, Fraction(1, 2)))
    assert p(2) == 3 and p.degree == 2 and not p.is_zero()
    assert TracePolynomial(()).is_zero()


def _block_oracle(omegas, n):
    # prod over 2x2 blocks of (w/2)/sin(w/2) = 1 + w^2/24 + ...; w is a commuting even form
    coeffs = x_over_sinh_series(n)
    total = Multivector.scalar(n, 1)
    for w in omegas:
        half = w * Fraction(1, 2)
        f = Multivector.zero(n)
        power = Multivector.scalar(n, 1)
        for k in range(n + 1):
            # sin replaces sinh: alternate the sign of every second even coefficient
            f = f + power * (coeffs[k] * (-1) ** (k // 2))
            power = power ^ half
        total = total ^ f
    return total


@settings(max_examples=30, deadline=None)
@given(st.lists(st.fractions(min_value=-3, max_value=3, max_denominator=4), min_size=4, max_size=4))
def test_a_hat_on_block_diagonal_curvature(c):
    n = 4
    e12, e34 = Multivector.blade(n, [1, 2]), Multivector.blade(n, [3, 4])
    w1 = e12 * c[0] + e34 * c[1]
    w2 = e12 * c[2] + e34 * c[3]
    kappa = CurvatureTensor(n, {(0, 1): w1, (2, 3): w2})
    assert a_hat(kappa) == _block_oracle([w1, w2], n)
    assert a_hat(kappa).top_coefficient() == (c[0] * c[1] + c[2] * c[3]) / 12


def test_a_hat_is_one_in_dimension_two():
    kappa = random_curvature(random.Random(1), 2)
    assert a_hat(kappa) == Multivector.scalar(2, 1)


def test_flat_mehler_kernel_is_the_euclidean_heat_kernel():
    n, tau = 2, 0.7
    k = mehler_kernel(CurvatureTensor.zero(n), tau)
    X = [0.3, -1.2]
    want = (4 * pi * tau) ** -1 * np.exp(-(X[0] ** 2 + X[1] ** 2) / (4 * tau))
    assert abs(complex(k(X).scalar_part()) - want) < 1e-14


@pytest.mark.parametrize("n", [2, 4])
def test_heat_residual_vanishes_exactly(n):
    kappa = random_curvature(random.Random(n), n)
    r = heat_residual(kappa, Fraction(2, 3), order=6)
    assert r.passed and r.max_residual == 0.0


def test_heat_residual_detects_wrong_time_derivative(monkeypatch):
    kappa = random_curvature(random.Random(9), 4)
    real = st_mod.mehler_data

    def skewed(k, tau):
        d = real(k, tau)
        d.dB = [[v * 2 for v in row] for row in d.dB]
        return d

    monkeypatch.setattr(st_mod, "mehler_data", skewed)
    assert not heat_residual(kappa, Fraction(1, 2), order=6).passed


def test_semigroup_needs_the_twist():
    # in n = 2 the curvature squares to zero and the kernel is flat
    rng = random.Random(6)
    n = 4
    kappa = random_curvature(rng, n)
    while kappa.is_zero():
        kappa = random_curvature(rng, n)
    k1, k2 = (FiberFunction.from_gaussian(mehler_kernel(kappa, t)) for t in (0.3, 0.45))
    k12 = mehler_kernel(kappa, 0.75)
    X = [0.5, -0.8, 0.2, 0.1]
    twisted = twisted_convolve(k1, k2, kappa)(X)
    plain = twisted_convolve(k1, k2, CurvatureTensor.zero(n))(X)
    assert (twisted - k12(X)).max_abs() < 1e-12
    assert (plain - k12(X)).max_abs() > 1e-6


@settings(max_examples=8, deadline=None)
@given(seeds)
def test_index_density_is_time_independent(seed):
    kappa = random_curvature(random.Random(seed), 4)
    dens = [index_density(kappa, t) for t in (0.25, 0.5, 1.0)]
    assert max(abs(d - ahat_density(kappa)) for d in dens) < 1e-10


def test_index_density_vanishes_for_n_2():
    kappa = random_curvature(random.Random(0), 2)
    assert index_density(kappa, 0.5) == 0


@settings(max_examples=15, deadline=None)
@given(seeds, st.sampled_from([2, 4]))
def test_quadrature_matches_trace_polynomial(seed, n):
    rng = random.Random(seed)
    s = random_torus_section(rng, n, [-n - 2, -n - 1, -n, 0, 1], max_freq=2, max_sin=2, trace_term=True)
    poly = str_lambda_algebraic(s)
    G = 16 if n == 2 else 8
    for lam in (1.0, 0.5, 0.1):
        want = complex(poly(Fraction(lam)))
        assert abs(str_lambda_quadrature(s, lam, G) - want) <= 1e-8 * max(1.0, abs(want))
    assert two_over_i_power(n) * poly(0) == str_zero(torus_boundary_value(s))


def test_uncertified_top_diagonal_term_is_rejected():
    n = 2
    top = Multivector.blade(n, [1, 2])
    s = TorusSection(n, None, {-1: {((0, 0), (0, 0)): top}})
    with pytest.raises(CertificateError):
        str_lambda_algebraic(s)


def test_boundary_value_of_constant_top_section():
    n = 2
    top = Multivector.blade(n, [1, 2], 3)
    s = TorusSection(n, {-2: [TorusTerm(top, (0, 0), (1, 0), (-1, 0))]})
    assert torus_boundary_value(s) == top
    assert str_zero(torus_boundary_value(s)) == -6j
    assert str_lambda_algebraic(s).to_list() == [3]


def _parity_part(s, parity):
    pick = (lambda c: c.even_part()) if parity == 0 else (lambda c: c.odd_part())
    return TorusSection(s.n, {p: [TorusTerm(pick(t.coef), t.sin_powers, t.a, t.b) for t in ts]
                              for p, ts in s.factored.items()})


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_supertrace_vanishes_on_graded_commutators(seed):
    rng = random.Random(seed)
    s1, s2 = (random_torus_section(rng, 2, [-3, -2, -1, 0], max_freq=2, max_sin=1, trace_term=True)
              for _ in range(2))
    for p1 in (0, 1):
        for p2 in (0, 1):
            a, b = _parity_part(s1, p1), _parity_part(s2, p2)
            assert abs(supertrace_commutator(a, b, p1 * p2, lam=0.5)) < 1e-12


def test_ungraded_commutator_is_not_traceless():
    rng = random.Random(1)
    worst = 0.0
    for _ in range(5):
        s1, s2 = (_parity_part(random_torus_section(rng, 2, [-3, -2, -1, 0], max_freq=2, max_sin=1,
                                                    trace_term=True), 0) for _ in range(2))
        worst = max(worst, abs(supertrace_commutator(s1, s2, 1, lam=0.5)))
    assert worst > 0.1
