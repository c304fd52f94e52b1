"""Acceptance criteria 1-12.

One end-to-end ``bosonic-nogo verify`` run produces the measured values; each
test re-checks them against the pinned tolerances and prints one status line.
"""

import json
import math
import subprocess
import sys
import time

import pytest

from bosonic_nogo import bounds, verify
from bosonic_nogo.cli import main

RUNTIME_LIMIT = 600.0


@pytest.fixture(scope="module")
def report(tmp_path_factory):
    out = tmp_path_factory.mktemp("verify") / "report.json"
    t0 = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "bosonic_nogo", "verify", "--format", "json", "--out", str(out)],
                          capture_output=True, text=True, timeout=2 * RUNTIME_LIMIT)
    elapsed = time.perf_counter() - t0
    doc = json.loads(out.read_text())
    by_num = {r["criterion"]: r["measured"] for r in doc["results"]}
    return {"doc": doc, "measured": by_num, "elapsed": elapsed, "returncode": proc.returncode}


def announce(capsys, num, ok, detail):
    with capsys.disabled():
        print(f"\ncriterion {num}: {'PASS' if ok else 'FAIL'} - {detail}")


def test_criterion_01_classicalization(report, capsys):
    m = report["measured"][1]
    worst0 = max(v["default_grid"] for v in m.values())
    worst1 = max(v["refined"] for v in m.values())
    ok = len(m) == 4 and worst0 < 5e-3 and worst1 < 1e-3
    announce(capsys, 1, ok, f"max trace distance {worst0:.2e} (<5e-3) default grid, {worst1:.2e} (<1e-3) refined")
    assert ok


def test_criterion_02_commutation(report, capsys):
    m = report["measured"][2]
    ok = m["points"] == 9 and m["max_defect"] < 1e-6
    announce(capsys, 2, ok, f"{m['points']} points, max defect {m['max_defect']:.2e} (<1e-6)")
    assert ok


def test_criterion_03_one_photon(report, capsys):
    inc = report["measured"][3]["photon_increase"]
    ok = all(abs(v - 1.0) < 1e-6 for v in inc.values())
    announce(capsys, 3, ok, ", ".join(f"{k} +{v:.9f}" for k, v in inc.items()))
    assert ok


def test_criterion_04_single_mode_bound(report, capsys):
    m = report["measured"][4]
    closed_err = max(abs(v["measured"] - 2 * float(N) / (float(N) + 1)) for N, v in m.items())
    dominated = all(v["measured"] <= v["bound"] + 1e-9 for v in m.values())
    at_one = m["1.0"]["measured"]
    ok = closed_err < 1e-6 and dominated and abs(at_one - 1.0) < 1e-6
    announce(capsys, 4, ok, f"closed-form error {closed_err:.1e}, distance at N=1 {at_one:.9f}, bound dominates={dominated}")
    assert ok


def test_criterion_05_noise_difference_bound(report, capsys):
    m = dict(report["measured"][5])
    sensing = m.pop("sensing")
    dominated = all(v["measured"] <= v["bound"] + 1e-6 for v in m.values())
    ok = dominated and abs(sensing["bound"] - 0.02) < 1e-12 and sensing["measured"] < sensing["bound"]
    announce(capsys, 5, ok, f"{len(m)} grid points dominated={dominated}; sensing instance "
                            f"{sensing['measured']:.4e} <= {sensing['bound']:.4g}")
    assert ok


def test_criterion_06_multimode_bound(report, capsys):
    m = report["measured"][6]
    ok = m["max_m1_difference"] < 1e-12 and m["m1e5_N20_value"] > 2 and m["vacuous"]
    announce(capsys, 6, ok, f"m=1 difference {m['max_m1_difference']:.1e}, m=1e5 N=20 value {m['m1e5_N20_value']:.1f} vacuous")
    assert ok


def test_criterion_07_randomized_inequalities(report, capsys):
    m = report["measured"][7]
    ok = m["lemma3_violations"] == 0 and m["lemma4_violations"] == 0
    announce(capsys, 7, ok, f"{m['trials']} trials each: measurement-gap violations {m['lemma3_violations']}, "
                            f"tensor (operator-norm weights) violations {m['lemma4_violations']} "
                            f"(worst excess {m['lemma4_worst_excess']:.3f}), "
                            f"tensor (trace-norm weights) violations {m['lemma4_trace_norm_violations']}")
    assert ok


def test_criterion_08_qidc(report, capsys):
    m = report["measured"][8]
    eig = max(abs(v["min_eigenvalue"]) for v in m.values())
    thr = max(abs(v["threshold"] - 1.0) for v in m.values())
    ok = set(m) == {"0.1", "0.5", "1.0", "10.0"} and eig < 1e-10 and thr < 1e-8
    announce(capsys, 8, ok, f"max |min eigenvalue| {eig:.1e} (<1e-10), threshold error {thr:.1e} (<1e-8)")
    assert ok


def test_criterion_09_thresholds(report, capsys):
    m = report["measured"][9]
    ok = m["fock1_trace_distance"] < 1e-4 and abs(m["squeezed_margin"] - math.exp(-1) / 2) < 1e-10
    announce(capsys, 9, ok, f"Fock |1> distance {m['fock1_trace_distance']:.1e} (<1e-4), squeezed margin {m['squeezed_margin']:.10f}")
    assert ok


def test_criterion_10_cross_representation(report, capsys):
    d = report["measured"][10]["max_moment_difference"]
    ok = d < 1e-5
    announce(capsys, 10, ok, f"max moment difference {d:.1e} (<1e-5)")
    assert ok


def test_criterion_11_power(report, capsys):
    m = report["measured"][11]
    ok = (abs(m["wide_band_dbm"] + 10) <= 5 and abs(m["picosecond_dbm"] + 40) <= 5
          and 0.5 <= m["photons_per_second_at_1W"] / 1e19 <= 2)
    announce(capsys, 11, ok, f"{m['wide_band_dbm']:.2f} dBm, {m['picosecond_dbm']:.2f} dBm, "
                             f"{m['photons_per_second_at_1W']:.3e} photons/s")
    assert ok


def test_criterion_12_runtime(report, capsys):
    ok = report["elapsed"] < RUNTIME_LIMIT
    announce(capsys, 12, ok, f"full verify run took {report['elapsed']:.1f} s (<{RUNTIME_LIMIT:.0f} s)")
    assert ok


def test_verify_exit_status_tracks_failures(report):
    failed = report["doc"]["summary"]["failed"]
    assert report["returncode"] == (0 if failed == 0 else 1)


def test_sign_error_in_bound_is_caught(monkeypatch, capsys):
    assert verify.run_check(4).passed
    monkeypatch.setattr(bounds, "bound_theorem2", lambda N: -2 * math.sqrt(N / (N + 1)))
    assert not verify.run_check(4).passed
    assert not verify.run_check(6).passed


def test_crashing_check_counts_as_failure(monkeypatch, tmp_path, capsys):
    def boom(*_):
        raise RuntimeError("broken")

    monkeypatch.setattr(bounds, "bound_theorem3", boom)
    res = verify.run_check(5)
    assert not res.passed and "broken" in res.measured["error"]
