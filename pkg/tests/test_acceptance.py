"""Acceptance criteria, one test each, at the documented sizes and tolerances.

Every test prints a single ``criterion N ... PASS|FAIL`` line and must finish
within the per-criterion time budget.
"""

import contextlib
import io
import json
import random
import time

import pytest

from getzler import verify
from getzler.cli import main

BUDGET_SECONDS = 10.0


def _rng(k):
    return random.Random(f"acceptance:{k}")


def _check(number, title, run, capsys):
    start = time.perf_counter()
    reports = run()
    elapsed = time.perf_counter() - start
    ok = all(r.passed for r in reports) and elapsed < BUDGET_SECONDS
    with capsys.disabled():
        print(f"\ncriterion {number:2d} {title}: {'PASS' if ok else 'FAIL'} ({elapsed:.2f} s)")
        for r in reports:
            print(f"    {'ok  ' if r.passed else 'FAIL'} {r.identity}: cases={r.cases} "
                  f"max_residual={r.max_residual:.3g}")
    failed = [r.identity for r in reports if not r.passed]
    assert not failed, f"failed identities: {failed}"
    assert elapsed < BUDGET_SECONDS, f"took {elapsed:.1f} s"
    return reports


def test_criterion_01_clifford_core(capsys):
    reports = _check(1, "Clifford relations and supertrace routes",
                     lambda: verify.suite_clifford(_rng(1), max_n=6, samples=1000), capsys)
    assert reports[1].cases == 1000 and reports[1].max_residual <= 1e-12


def test_criterion_02_gamma_inversion(capsys):
    _check(2, "adjoint action inverts gamma",
           lambda: verify.suite_gamma(_rng(2), samples=100, max_n=6), capsys)


def test_criterion_03_rees_characters(capsys):
    reports = _check(3, "Rees characters and exponential formula",
                     lambda: verify.suite_rees(_rng(3), pairs=500), capsys)
    assert all(r.cases == 500 for r in reports)
    # the normal character is not trivially zero on the fuzzed pairs
    assert reports[1].details["nonzero_values"] > 100


def test_criterion_04_composition_law(capsys):
    _check(4, "boundary composition law", lambda: verify.suite_composition(_rng(4), triples=100), capsys)


def test_criterion_05_getzler_symbols(capsys):
    reports = _check(5, "model curvature and scaling orders",
                     lambda: verify.suite_symbols(_rng(5), curvature_cases=20, n_model=4, n_scaling=2,
                                                  max_degree=4, max_length=3), capsys)
    assert reports[1].max_residual == 0.0


def test_criterion_06_normal_vs_tangent(capsys):
    _check(6, "normal versus tangent evaluation",
           lambda: verify.suite_normal_tangent(_rng(6), cases=200, n=4, order=6), capsys)


def test_criterion_07_twisted_convolution(capsys):
    reports = _check(7, "twisted convolution",
                     lambda: verify.suite_twisted(_rng(7), triples=100, n=2, G=64, tol=1e-10, mixed=False),
                     capsys)
    by_name = {r.identity: r for r in reports}
    assert by_name["twisted convolution is associative"].max_residual <= 1e-10
    assert by_name["zero curvature gives plain wedge convolution"].max_residual <= 1e-10
    assert by_name["grid quadrature matches the closed form"].max_residual <= 1e-3


def test_criterion_08_homomorphisms(capsys):
    _check(8, "kernel maps are homomorphisms",
           lambda: verify.suite_homomorphisms(_rng(8), sections=10, G=32, gaussian_cases=20, tol=1e-10),
           capsys)


def test_criterion_09_supertrace_realization(capsys):
    reports = _check(9, "supertrace family and its limit",
                     lambda: verify.suite_supertrace(_rng(9), sections=50, lambdas=(1, 0.5, 0.1, 0.01),
                                                     tol=1e-8), capsys)
    assert reports[1].cases == 50


def test_criterion_10_index_demo(capsys):
    reports = _check(10, "Mehler kernel and index density",
                     lambda: verify.suite_index(_rng(10), n=4, taus=(0.25, 0.5, 1.0), tol=1e-10), capsys)
    assert reports[0].max_residual == 0.0
    assert len(reports) == 4


class _CliReport:
    def __init__(self, identity, passed):
        self.identity, self.passed, self.cases, self.max_residual = identity, passed, 1, 0.0


def _cli(argv):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(argv)
    return code, json.loads(buf.getvalue())


def test_criterion_11_cli(capsys):
    outcome = {}

    def run():
        code, doc = _cli(["verify"])
        outcome["pristine"] = (code, doc)
        fcode, fdoc = _cli(["verify", "--inject-fault", "twist-sign"])
        outcome["fault"] = (fcode, fdoc)
        assoc = [r for r in fdoc["results"] if r["identity"].startswith("associativity") and not r["passed"]]
        return [_CliReport("pristine build exits 0", code == 0 and doc["passed"]),
                _CliReport("flipped twist sign exits 1", fcode == 1 and not fdoc["passed"]),
                _CliReport("associativity witness reported", bool(assoc) and assoc[0]["witness"] is not None)]

    _check(11, "command-line verification", run, capsys)
    assert outcome["fault"][1]["twist_sign"] == -1
