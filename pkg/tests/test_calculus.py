import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from getzler.calculus import (
    GetzlerOp,
    RadialGauge,
    getzler_order,
    model_curvature_check,
    model_nabla,
    model_symbol,
    normal_vs_tangent_check,
    random_curvature,
    random_section,
    scaling_order_bound,
    verify_scaling_definition,
)
from getzler.clifford import CurvatureTensor, Multivector
from getzler.jets import FormPoly, JetPoly

seeds = st.integers(0, 2**32 - 1)


def _vec(rng, n):
    return [Fraction(rng.randint(-3, 3), rng.randint(1, 3)) for _ in range(n)]


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_model_curvature_identity(seed):
    rng = random.Random(seed)
    kappa = random_curvature(rng, 4)
    assert model_curvature_check(kappa, _vec(rng, 4), _vec(rng, 4)).passed


def test_model_nabla_on_a_single_block():
    n = 2
    w = Multivector.blade(n, [1, 2], 3)
    kappa = CurvatureTensor(n, {(0, 1): w})
    one = FormPoly.constant(n, None, Multivector.scalar(n, 1))
    # d_2 + 1/2 kappa(u, e_2) ^ applied to 1 gives 1/2 u_1 kappa_12
    got = model_nabla(kappa, 1).apply(one)
    assert got == FormPoly(n, None, {(1, 0): w * Fraction(1, 2)})


def test_gauge_curvature_matches_kappa():
    rng = random.Random(3)
    kappa = random_curvature(rng, 3)
    gauge = RadialGauge(kappa, 4)
    for i in range(3):
        for j in range(3):
            F = gauge.curvature_at(i, j).truncate(0)
            assert F.value_at_zero(Multivector.zero(3)) == kappa.entry(i, j)


def test_synchronous_frame_solves_the_radial_equation():
    rng = random.Random(11)
    n, order = 2, 5
    kappa = random_curvature(rng, n)
    gauge = RadialGauge(kappa, order, two_sided=True)
    P = gauge.synchronous_frame()
    total = JetPoly(2 * n, order)
    for i in range(n):
        total = total + JetPoly.variable(2 * n, order, i) * gauge.nabla(i, P)
    assert total.truncate(order - 1).is_zero()


def test_symbol_of_clifford_and_nabla():
    rng = random.Random(5)
    kappa = random_curvature(rng, 2)
    D = GetzlerOp.clifford(0) * GetzlerOp.nabla(1) + GetzlerOp.nabla(0)
    assert getzler_order(D) == 2
    one = FormPoly.constant(2, None, Multivector.scalar(2, 1))
    sym = model_symbol(D, kappa).apply(one)
    # e_1 ^ (1/2 u_1 kappa_12); the length-one word drops out
    want = FormPoly(2, None, {(1, 0): Multivector.basis(2, 1) ^ (kappa.entry(0, 1) * Fraction(1, 2))})
    assert sym == want


def test_scaling_bound_of_monomial():
    n = 2
    sigma = JetPoly(n, 6, {(2, 1): Multivector.blade(n, [1])})
    assert scaling_order_bound(sigma) == 3 - 1


@pytest.mark.parametrize("alpha", [(0, 0), (1, 0), (1, 1), (2, 1), (0, 3)])
@pytest.mark.parametrize("mask", range(4))
def test_scaling_definition_holds_on_monomials(alpha, mask):
    kappa = random_curvature(random.Random(7), 2)
    sigma = JetPoly(2, 7, {alpha: Multivector(2, {mask: 1})})
    assert verify_scaling_definition(sigma, kappa, max_length=3).passed


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_normal_and_tangent_evaluations_agree(seed):
    rng = random.Random(seed)
    n, order = 2, 4
    kappa = random_curvature(rng, n)
    gauge = RadialGauge(kappa, order, two_sided=True)
    sec = random_section(rng, n, order, [-1, 0, 1, 2], two_sided=True, gauge=gauge)
    assert normal_vs_tangent_check(sec, _vec(rng, n), _vec(rng, n), gauge).passed
