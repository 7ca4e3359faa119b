"""The ten acceptance criteria, one test each.

Every test prints one [PASS]/[FAIL] line; the lines are repeated in the
terminal summary.  Criterion 10 runs the whole `kkit verify-all` suite twice
as a subprocess, with one and with two worker processes.
"""

from __future__ import annotations

import os
import subprocess
import sys
import time

import pytest

from conftest import ACCEPTANCE_LINES
from kkit import acceptance
from kkit.acceptance import SUITE_LIMIT_SECONDS, CriterionResult

LINES: dict[int, str] = {}


def report(res: CriterionResult) -> CriterionResult:
    line = res.line()
    print(line)
    ACCEPTANCE_LINES.append(line)
    LINES[res.number] = line
    return res


def test_criterion_1_kloosterman_oracle():
    res = report(acceptance.criterion_1())
    assert res.measured["max_oracle_diff"] <= 1e-10
    assert res.measured["max_named_diff"] <= 1e-10
    assert res.seconds < 5.0
    assert res.passed


def test_criterion_2_weil_salie():
    res = report(acceptance.criterion_2(threads=1))
    growth = [v for k, v in res.measured.items() if k.endswith("_growth")]
    ratios = [v for k, v in res.measured.items() if k.endswith("_ratio")]
    assert len(growth) == len(ratios) == 6
    assert all(g < 0.2 for g in growth)
    assert all(0 < r < float("inf") for r in ratios)
    assert res.seconds < 120.0
    assert res.passed


def test_criterion_3_delta_asymptotics():
    res = report(acceptance.criterion_3())
    assert res.measured["d1_rel_dev"] <= 0.02
    assert res.measured["d2_rel_dev"] <= 0.05
    assert all(v >= 0.45 for k, v in res.measured.items() if k.startswith("exp_"))
    assert res.seconds < 60.0
    assert res.passed


def test_criterion_4_kloosterman_dominance():
    res = report(acceptance.criterion_4(threads=1))
    gaps = [v for k, v in res.measured.items() if k.endswith("_gap")]
    tails = [v for k, v in res.measured.items() if k.endswith("_max_tail_frac")]
    assert len(gaps) == len(tails) == 3
    assert all(g >= 0.2 for g in gaps)
    assert all(t <= 0.1 for t in tails)
    assert res.seconds < 600.0
    assert res.passed


def test_criterion_5_eisenstein_oracle():
    res = report(acceptance.criterion_5())
    m = res.measured
    assert m["phi_diff_Q"] <= 1e-3
    assert m["phi_diff_Q5"] <= 1e-2
    assert m["q_route_diff"] <= 1e-4
    assert m["inv_zeta2_diff"] <= 1e-5
    assert res.seconds < 180.0
    assert res.passed


def test_criterion_6_partial_sums():
    res = report(acceptance.criterion_6())
    assert res.measured["shrink"] >= 2
    assert res.measured["max_s_lambda_over_sqrt_n"] < float("inf")
    assert res.seconds < 120.0
    assert res.passed


def test_criterion_7_l_lower_bound():
    res = report(acceptance.criterion_7())
    assert res.measured["constant"] > 0
    assert abs(res.measured["refined"] - res.measured["constant"]) <= 0.5 * res.measured["constant"]
    assert res.seconds < 60.0
    assert res.passed


def test_criterion_8_tauberian():
    res = report(acceptance.criterion_8())
    m = res.measured
    assert m["patterns"] == 8
    assert m["max_rel_err_X1e4"] <= 0.05
    assert m["corgen_diff"] <= 1e-10
    assert m["complementary_target"] == 0.0
    assert m["dseries_diff"] <= 1e-10
    assert res.passed


def test_criterion_9_bessel():
    res = report(acceptance.criterion_9())
    assert res.measured["cross_method_max_rel"] <= 1e-8
    assert res.measured["discrete_only_rel"] <= 1e-9
    # envelope constants fitted at s = 0.5 must cover the smaller s
    assert res.measured["plus_max_ratio_after"] <= res.measured["plus_anchor_const"]
    assert res.measured["minus_max_ratio_after"] <= res.measured["minus_anchor_const"]
    assert res.passed


def _verify_all(threads: int) -> tuple[str, float]:
    env = {**os.environ, "PYTHONHASHSEED": "0"}
    t0 = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "kkit.cli", "--threads", str(threads), "verify-all"],
                          capture_output=True, text=True, env=env, timeout=2 * SUITE_LIMIT_SECONDS)
    return proc.stdout, time.perf_counter() - t0


def test_criterion_10_suite_time_and_determinism():
    out1, t1 = _verify_all(1)
    out2, _ = _verify_all(2)
    identical = out1 == out2
    lines1 = out1.splitlines()
    # lines of criteria already run in this session must match the subprocess run
    same_as_session = all(LINES[n] in lines1 for n in LINES)
    ok = t1 < SUITE_LIMIT_SECONDS and identical and same_as_session and len(lines1) == 10
    line = (f"[{'PASS' if ok else 'FAIL'}] criterion 10: verify-all time and determinism :: "
            f"seconds_threads1={t1:.1f}, identical_threads_1_2={identical}, matches_session={same_as_session}")
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert t1 < SUITE_LIMIT_SECONDS
    assert identical
    assert same_as_session
    assert ok


if __name__ == "__main__":  # pragma: no cover
    sys.exit(pytest.main([__file__, "-v"]))
