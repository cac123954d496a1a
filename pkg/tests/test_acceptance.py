"""Acceptance criteria 1-11, run once per session through the cross-validation harness.

Each test prints the harness verdict line; the lines are also collected and
shown in the terminal summary.
"""

import subprocess
import sys
import time

import pytest

from poncelet import crossval as cv

pytestmark = pytest.mark.slow

LINES: list = []


def record(result: cv.CriterionResult, seconds: float | None = None) -> None:
    line = result.line() + (f" ({seconds:.1f} s)" if seconds is not None else "")
    print(line)
    LINES.append(line)


@pytest.fixture(scope="module")
def suite():
    """Criteria 1-10 in harness order with per-criterion wall time."""
    out, times = {}, {}

    def timed(k, fn):
        t0 = time.perf_counter()
        out[k] = fn()
        times[k] = time.perf_counter() - t0

    timed(1, cv.criterion_1)
    timed(2, cv.criterion_2)
    t0 = time.perf_counter()
    found = cv.porism_caustics()
    search_time = time.perf_counter() - t0
    timed(3, lambda: cv.criterion_3(found=found))
    times[3] += search_time
    timed(4, lambda: cv.criterion_4(found=found))
    timed(5, cv.criterion_5)
    timed(6, cv.criterion_6)
    timed(7, cv.criterion_7)
    timed(8, cv.criterion_8)
    timed(9, cv.criterion_9)
    timed(10, lambda: cv.criterion_10(cv.certification_probes(out[5], out[7])))
    return out, times


def check(suite, k):
    results, times = suite
    record(results[k], times[k])
    return results[k], times[k]


def test_criterion_01_chasles_invariance(suite):
    res, seconds = check(suite, 1)
    assert res.passed, res.details
    assert seconds < 10.0


def test_criterion_02_lemma1_inequalities(suite):
    res, _ = check(suite, 2)
    assert res.passed, res.details


def test_criterion_03_poncelet_porism(suite):
    res, seconds = check(suite, 3)
    assert res.passed, res.details
    assert set(res.details["periods"]) == {3, 4, 5, 6}
    assert all(row["max_vertex_error"] < 1e-6 for row in res.details["periods"].values())
    assert seconds < 30.0


def test_criterion_04_theorem1_cross_check(suite):
    res, _ = check(suite, 4)
    assert res.passed, res.details
    assert "d3_n6" in res.details


def test_criterion_05_corollary1_cross_check(suite):
    res, _ = check(suite, 5)
    assert res.passed, res.details
    closure, *perturbed = res.details["rows"]
    assert closure["residual"] < 1e-20 and all(r["residual"] >= 1e-6 for r in perturbed)


@pytest.mark.xfail(strict=True, reason="three printed entries of the explicit 3x3 matrix disagree with "
                                       "the reduction of the generic m = 4 determinant; see the decisions ledger")
def test_criterion_06_example1_printed_entries(suite):
    res, _ = check(suite, 6)
    assert res.passed, res.details


def test_criterion_06_example1_derived_entries(suite):
    res = suite[0][6]
    assert res.expected_failure
    assert res.details["derived_agrees"]


def test_criterion_07_proposition1(suite):
    res, _ = check(suite, 7)
    assert res.passed, res.details
    assert res.details["m"] >= 3 and res.details["certified"]


def test_criterion_08_proposition2_vs_theorem3(suite):
    res, _ = check(suite, 8)
    assert res.passed, res.details
    counts = res.details["counts"]
    assert sum(counts.values()) == 900
    assert not res.details["disagreements"]


def test_criterion_09_series_kernel(suite):
    res, _ = check(suite, 9)
    assert res.passed, res.details


def test_criterion_10_rank_certification(suite):
    res, _ = check(suite, 10)
    assert res.passed, res.details
    h = res.details["hilbert8"]
    assert not h["p64"]["certified"] and h["p256"]["certified"]


def test_criterion_11_determinism(suite, tmp_path):
    results = [suite[0][k] for k in range(1, 11)]
    first = cv.report_json(results)
    out = tmp_path / "xvalidate.json"
    proc = subprocess.run([sys.executable, "-m", "poncelet.cli", "xvalidate", "--no-determinism", "--out", str(out)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    passed = out.read_text() == first
    record(cv.CriterionResult(11, "xvalidate reports are byte-identical across runs", passed))
    assert passed
