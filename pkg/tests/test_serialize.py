import json
import random
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from getzler import serialize as ser
from getzler.calculus import GetzlerOp, RadialGauge, random_curvature, random_section
from getzler.clifford import Multivector, SkewMatrix
from getzler.convolution import FiberFunction, FiberGrid, eps_lambda, random_torus_section
from getzler.gaussian import random_gaussian
from getzler.jets import JetPoly
from getzler.rees import random_rees

seeds = st.integers(0, 2**32 - 1)
ROOT = Path(__file__).resolve().parents[1]


def _roundtrip(obj, to_json, from_json):
    doc = json.loads(ser.dumps(to_json(obj)))
    return from_json(doc)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.dictionaries(st.integers(0, 31),
       st.one_of(st.fractions(max_denominator=9), st.integers(-9, 9), st.complex_numbers(max_magnitude=5)),
       max_size=5))
def test_multivector_roundtrip(n, coeffs):
    a = Multivector(n, {m & ((1 << n) - 1): c for m, c in coeffs.items()})
    assert _roundtrip(a, ser.multivector_to_json, ser.multivector_from_json) == a


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_algebraic_roundtrips(seed):
    rng = random.Random(seed)
    kappa = random_curvature(rng, 3)
    assert _roundtrip(kappa, ser.curvature_to_json, ser.curvature_from_json) == kappa
    T = SkewMatrix(3, {(0, 1): Fraction(1, 3), (1, 2): -2})
    assert _roundtrip(T, ser.skew_to_json, ser.skew_from_json) == T
    r = random_rees(rng, 2, 4)
    assert _roundtrip(r, ser.rees_to_json, ser.rees_from_json) == r


def test_jet_and_section_roundtrips():
    rng = random.Random(3)
    jet = JetPoly(2, 3, {(1, 0): Multivector.blade(2, [2], Fraction(1, 2)), (0, 0): Multivector.scalar(2, 4)})
    assert _roundtrip(jet, ser.jet_to_json, ser.jet_from_json) == jet
    kappa = random_curvature(rng, 2)
    gauge = RadialGauge(kappa, 4, two_sided=True)
    sec = random_section(rng, 2, 4, [-1, 0, 1], two_sided=True, gauge=gauge)
    back = _roundtrip(sec, ser.spinor_section_to_json, ser.spinor_section_from_json)
    assert all(back.synchronous[p] == sec.synchronous[p] for p in sec.powers())


def test_operator_roundtrip_applies_identically():
    rng = random.Random(8)
    kappa = random_curvature(rng, 2)
    gauge = RadialGauge(kappa, 5)
    D = GetzlerOp.clifford(0) * GetzlerOp.nabla(1) + GetzlerOp.nabla(0) * Fraction(2, 3)
    back = _roundtrip(D, ser.getzler_op_to_json, ser.getzler_op_from_json)
    sigma = JetPoly(2, 5, {(1, 1): Multivector.blade(2, [1])})
    assert back.apply(sigma, gauge) == D.apply(sigma, gauge)


def test_torus_and_fiber_roundtrips():
    rng = random.Random(5)
    s = random_torus_section(rng, 2, [-1, 0, 1])
    back = _roundtrip(s, ser.torus_section_to_json, ser.torus_section_from_json)
    assert back.fourier() == s.fourier()
    g = FiberFunction.from_gaussian(random_gaussian(rng, 2, 2))
    gb = _roundtrip(g, ser.fiber_function_to_json, ser.fiber_function_from_json)
    assert (gb([0.3, 0.1]) - g([0.3, 0.1])).max_abs() < 1e-15
    grid = g.to_grid(FiberGrid(2, 8, 4.0))
    grb = _roundtrip(grid, ser.fiber_function_to_json, ser.fiber_function_from_json)
    assert np.array_equal(grb.samples, grid.samples)


def test_kernel_blob_roundtrip():
    k = eps_lambda(random_torus_section(random.Random(1), 1, [-1, 0]), 0.5, 8)
    blob = ser.kernel_to_bytes(k)
    assert len(blob) == 32 + 8 * 8 * 2 * 2 * 8 and blob[:8] == b"GZKERNEL"
    back = ser.kernel_from_bytes(blob)
    assert (back.n, back.G, back.lam) == (1, 8, 0.5)
    assert np.array_equal(back.samples, k.samples)
    with pytest.raises(ValueError):
        ser.kernel_from_bytes(b"NOTAKERNEL" + blob[10:])
    with pytest.raises(ValueError):
        ser.kernel_from_bytes(blob[:-8])
    meta = ser.kernel_metadata(k)
    ser.validate(meta, "torus_kernel")


def test_schema_errors_carry_a_location():
    doc = {"n": 2, "terms": [{"blades": [1], "re": "x/2"}]}
    with pytest.raises(ser.SchemaError) as err:
        ser.multivector_from_json(doc)
    assert err.value.location == "$.terms[0].re"


def test_blade_index_out_of_range_is_rejected():
    with pytest.raises((ser.SchemaError, ValueError)):
        ser.multivector_from_json({"n": 2, "terms": [{"blades": [3], "re": 1}]})


def test_dumps_is_deterministic():
    doc = {"b": Fraction(1, 3), "a": [1, 2]}
    assert ser.dumps(doc) == ser.dumps(dict(reversed(list(doc.items()))))


def test_published_schemas_match_packaged_copies():
    for path in (ROOT / "docs" / "schemas").glob("*.json"):
        assert json.loads(path.read_text()) == ser.load_schema(path.stem)
