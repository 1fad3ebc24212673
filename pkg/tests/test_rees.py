import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from getzler.jets import JetPoly, TruncationError
from getzler.rees import (
    ReesElement,
    TangentGroupoidPoint,
    VanishingOrderError,
    eval_normal,
    eval_point,
    exp_formula_eval,
    random_rees,
    rees_mul,
    triple_pullback_character,
)

seeds = st.integers(0, 2**32 - 1)


def _vec(rng, n):
    return [Fraction(rng.randint(-3, 3), rng.randint(1, 3)) for _ in range(n)]


def test_vanishing_order_is_enforced():
    n = 1
    u = JetPoly.variable(2 * n, 4, 0)
    ReesElement(n, 4, {1: u})
    with pytest.raises(VanishingOrderError):
        ReesElement(n, 4, {2: u})


def test_incompatible_truncations_are_rejected():
    with pytest.raises(TruncationError):
        ReesElement.one(1, 4) + ReesElement.one(1, 5)


def test_t_evaluates_to_lambda_and_zero():
    t = ReesElement.t(2, 4)
    assert eval_point(t, [1, 2], [0, 0], Fraction(3, 2)) == Fraction(3, 2)
    assert eval_normal(t, [1, 2], [5, 7]) == 0


def test_normal_value_of_u_over_t_is_the_tangent_vector():
    # f_1 = u_1 (x - y along e_1), so f_1 t^{-1} -> X_1 at lambda = 0
    n = 2
    a = ReesElement(n, 4, {1: JetPoly.variable(2 * n, 4, 0)})
    assert eval_normal(a, [0, 0], [Fraction(5, 3), 1]) == Fraction(5, 3)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_evaluations_are_characters(seed):
    rng = random.Random(seed)
    n, N = rng.randint(1, 3), rng.randint(2, 6)
    a, b = random_rees(rng, n, N), random_rees(rng, n, N)
    ab = rees_mul(a, b)
    x, y, m, X = (_vec(rng, n) for _ in range(4))
    lam = Fraction(rng.randint(1, 5), rng.randint(1, 3))
    assert eval_point(ab, x, y, lam) == eval_point(a, x, y, lam) * eval_point(b, x, y, lam)
    assert eval_normal(ab, m, X) == eval_normal(a, m, X) * eval_normal(b, m, X)
    assert exp_formula_eval(a, m, X) == eval_normal(a, m, X)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_boundary_arrows_compose_by_addition(seed):
    rng = random.Random(seed)
    n, N = rng.randint(1, 3), rng.randint(2, 6)
    f = random_rees(rng, n, N, max_degree=N)
    m, X, Y = (_vec(rng, n) for _ in range(3))
    assert triple_pullback_character(f, m, X, Y) == eval_normal(f, m, [a + b for a, b in zip(X, Y)])


def test_groupoid_points_compose():
    g = TangentGroupoidPoint.interior([1, 0], [0, 0], 2)
    h = TangentGroupoidPoint.interior([0, 0], [0, 3], 2)
    gh = g.compose(h)
    assert gh.target() == g.target() and gh.source() == h.source()
    with pytest.raises(ValueError):
        h.compose(g)
    a = TangentGroupoidPoint.boundary([1, 1], [1, 2])
    b = TangentGroupoidPoint.boundary([1, 1], [3, -1])
    assert a.compose(b).tangent == (4, 1)
