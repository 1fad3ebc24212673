from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from getzler.clifford import (
    CurvatureTensor,
    Multivector,
    SkewMatrix,
    adjoint_action,
    clifford_mul,
    gamma_map,
    str_blade,
    str_via_trace,
    wedge_exp,
    wedge_mul,
)
from getzler.supertrace import operator_supertrace

fractions = st.fractions(min_value=-4, max_value=4, max_denominator=6)


@st.composite
def multivectors(draw, n):
    coeffs = draw(st.dictionaries(st.integers(0, (1 << n) - 1), fractions, max_size=6))
    return Multivector(n, coeffs)


@st.composite
def skew_matrices(draw, n):
    upper = {(i, j): draw(fractions) for i in range(n) for j in range(i + 1, n)}
    return SkewMatrix(n, upper)


@pytest.mark.parametrize("n", range(1, 7))
def test_generator_relations(n):
    for i, j in product(range(1, n + 1), repeat=2):
        ei, ej = Multivector.basis(n, i), Multivector.basis(n, j)
        anti = ei * ej + ej * ei
        assert anti == Multivector.scalar(n, -2 if i == j else 0)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_clifford_product_is_associative(data):
    n = data.draw(st.integers(1, 4))
    a, b, c = (data.draw(multivectors(n)) for _ in range(3))
    assert (a * b) * c == a * (b * c)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_wedge_product_is_associative_and_graded(data):
    n = data.draw(st.integers(1, 4))
    a, b, c = (data.draw(multivectors(n)) for _ in range(3))
    assert wedge_mul(wedge_mul(a, b), c) == wedge_mul(a, wedge_mul(b, c))
    u, v = Multivector.basis(n, 1), Multivector.basis(n, n)
    assert wedge_mul(u, v) == -wedge_mul(v, u)


def test_wedge_agrees_with_clifford_on_orthogonal_vectors():
    e1, e2 = Multivector.basis(3, 1), Multivector.basis(3, 2)
    assert clifford_mul(e1, e2) == wedge_mul(e1, e2) == Multivector.blade(3, [1, 2])


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_str_blade_matches_operator_trace(data):
    n = data.draw(st.sampled_from([2, 4]))
    a = data.draw(multivectors(n))
    assert abs(complex(str_blade(a)) - str_via_trace(a)) <= 1e-12


def test_operator_supertrace_of_e12():
    # Tr(c(s) c(e1 e2)) for n = 2 equals (2/i) * str(e1 e2)
    assert operator_supertrace(Multivector.blade(2, [1, 2])) == pytest.approx(-2j)


def test_gamma_of_elementary_rotation():
    # T e1 = e2, T e2 = -e1; the inverse of ad carries a plus sign
    T = SkewMatrix.from_matrix([[0, -1], [1, 0]])
    assert gamma_map(T) == Multivector.blade(2, [1, 2], Fraction(1, 2))


def test_adjoint_of_e12():
    assert adjoint_action(Multivector.blade(2, [1, 2])).to_list() == [[0, -2], [2, 0]]


@settings(max_examples=30, deadline=None)
@given(st.data())
def test_gamma_is_minus_quarter_sum_of_image_wedge_basis(data):
    n = data.draw(st.integers(2, 5))
    T = data.draw(skew_matrices(n))
    total = Multivector.zero(n)
    for i in range(n):
        image = Multivector.vector(n, [T[j, i] for j in range(n)])
        total = total + wedge_mul(image, Multivector.basis(n, i + 1))
    assert gamma_map(T) == total * Fraction(-1, 4)


@settings(max_examples=50, deadline=None)
@given(st.data())
def test_adjoint_inverts_gamma(data):
    n = data.draw(st.integers(2, 6))
    T = data.draw(skew_matrices(n))
    assert adjoint_action(gamma_map(T)) == T


def test_gamma_rejects_nothing_but_adjoint_needs_bivectors():
    with pytest.raises(ValueError):
        adjoint_action(Multivector.basis(3, 1))


def test_wedge_exp_truncates_on_nilpotents():
    n = 4
    w = Multivector.blade(n, [1, 2]) + Multivector.blade(n, [3, 4])
    assert wedge_exp(w) == 1 + w + Multivector.blade(n, [1, 2, 3, 4])


def test_curvature_call_is_antisymmetric():
    k = CurvatureTensor(3, {(0, 1): Multivector.blade(3, [2, 3], 2)})
    X, Y = [1, 0, 0], [0, 1, 0]
    assert k(X, Y) == -k(Y, X) == Multivector.blade(3, [2, 3], 2)
    with pytest.raises(ValueError):
        CurvatureTensor(3, {(0, 1): Multivector.basis(3, 1)})
