from fractions import Fraction

from hypothesis import given, settings, strategies as st

from getzler.jets import JetPoly, monomials, taylor_factor
from getzler.series import cosh_series, exp_series, x_coth_series, x_over_sinh_series

small = st.fractions(min_value=-3, max_value=3, max_denominator=4)


def test_x_over_sinh_coefficients():
    s = x_over_sinh_series(6)
    assert [s[k] for k in range(7)] == [1, 0, Fraction(-1, 6), 0, Fraction(7, 360), 0, Fraction(-31, 15120)]


def test_x_coth_coefficients():
    s = x_coth_series(6)
    assert [s[k] for k in range(0, 7, 2)] == [1, Fraction(1, 3), Fraction(-1, 45), Fraction(2, 945)]


def test_exp_times_reciprocal_is_one():
    e = exp_series(8)
    prod = e * e.reciprocal()
    assert [prod[k] for k in range(9)] == [1] + [0] * 8
    assert cosh_series(4)[4] == Fraction(1, 24)


def test_monomial_count_and_taylor_factor():
    assert len(list(monomials(3, 2))) == 10
    assert taylor_factor((2, 1, 3)) == 2 * 1 * 6


@st.composite
def jets(draw, nvars=2, order=4, max_degree=None):
    pool = list(monomials(nvars, order if max_degree is None else max_degree))
    keys = draw(st.lists(st.sampled_from(pool), max_size=5))
    return JetPoly(nvars, order, {k: draw(small) for k in keys})


@settings(max_examples=60, deadline=None)
@given(jets(), jets(), st.integers(0, 1))
def test_leibniz_rule(f, g, i):
    lhs = (f * g).derivative(i)
    rhs = f.derivative(i) * g + f * g.derivative(i)
    # derivatives of truncated products are exact one degree below the cut
    assert (lhs - rhs).truncate(f.order - 1).is_zero()


@settings(max_examples=60, deadline=None)
@given(jets(max_degree=2), jets(max_degree=2), st.lists(small, min_size=2, max_size=2))
def test_evaluation_is_multiplicative_below_the_cut(f, g, x):
    assert (f * g).evaluate(x) == f.evaluate(x) * g.evaluate(x)
