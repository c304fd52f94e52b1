"""The acceptance suite: twelve numbered checks with measured values and pass/fail.

Bound formulas are looked up on the ``bounds`` module at call time, so patching
``bounds.bound_theorem2`` (for example) changes what the suite checks.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import bounds, gaussian, power
from .channels import ChannelSpec, apply_agn, apply_channel, apply_loss
from .fock import (
    DensityMatrix,
    FockCutoff,
    coherent_state,
    mean_photon_number,
    number_state,
    qidc_state,
    squeezed_vacuum,
    thermal_state,
)
from .phase_space import (
    classical_counterpart,
    default_grid,
    q_function,
    reconstruct_with_refinement,
    state_from_p,
    theorem1_p_output,
)
from .scenarios import SweepConfig, run_scenario

RUNTIME_BUDGET = 600.0


@dataclass
class CheckResult:
    criterion: int
    name: str
    passed: bool
    measured: dict[str, Any] = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.criterion:2d} {self.name} ({self.seconds:.2f} s)"

    def to_dict(self) -> dict:
        return {"criterion": self.criterion, "name": self.name, "passed": self.passed,
                "measured": self.measured, "seconds": round(self.seconds, 3)}


def _sweep_rows(scenario: str, **kw) -> list[dict]:
    return run_scenario(SweepConfig(scenario, **kw)).rows


def check_classicalization(seed: int) -> tuple[bool, dict]:
    cut = 40
    out, ok = {}, True
    for name, rho in (("fock1", number_state(1, cut)), ("squeezed0.5", squeezed_vacuum(0.5, cut))):
        grid0 = default_grid(rho)
        for kappa in (0.25, 0.5):
            direct = apply_channel(rho, ChannelSpec([kappa], [kappa]))
            rebuilt = state_from_p(theorem1_p_output(rho, kappa, grid0), cut)
            d0 = bounds.trace_distance(rebuilt, direct)

            def build(spacing, rho=rho, kappa=kappa):
                g = default_grid(rho, spacing)
                return theorem1_p_output(rho, kappa, g)

            refined, _, _ = reconstruct_with_refinement(build, rebuilt.cutoff, grid0.spacing, 1e-4)
            d1 = bounds.trace_distance(refined, direct)
            out[f"{name}_k{kappa}"] = {"default_grid": d0, "refined": d1}
            ok = ok and d0 < 5e-3 and d1 < 1e-3
    return ok, out


def check_commutation(seed: int) -> tuple[bool, dict]:
    rows = _sweep_rows("commutation")
    worst = max(r["defect"] for r in rows)
    return len(rows) == 9 and worst < 1e-6, {"points": len(rows), "max_defect": worst}


def check_one_photon(seed: int) -> tuple[bool, dict]:
    out = {}
    for name, rho in (("coherent1", coherent_state(1.0, 40)), ("fock1", number_state(1, 40))):
        out[name] = mean_photon_number(classical_counterpart(rho)) - mean_photon_number(rho)
    return all(abs(v - 1.0) < 1e-6 for v in out.values()), {"photon_increase": out}


def check_theorem2(seed: int) -> tuple[bool, dict]:
    rho = coherent_state(1.0, 60)
    ok, out = True, {}
    for N in (0.05, 0.1, 0.2, 0.5, 1.0):
        bound = bounds.bound_theorem2(N)
        measured = bounds.trace_distance(rho, apply_agn(rho, N))
        closed = 2 * N / (N + 1)
        out[str(N)] = {"measured": measured, "bound": bound}
        ok = ok and abs(measured - closed) < 1e-6 and measured <= bound + bounds.SLACK
    ok = ok and abs(out["1.0"]["measured"] - 1.0) < 1e-6
    return ok, out


def sensing_instance(kappa: float = 0.01, N: float = 1.0, Ns: float = 0.1) -> dict:
    """Two-mode sensor: signal loss ``kappa`` and noise ``N``, idler untouched.

    Compares the return from the QI-DC input with the return from its
    classical counterpart (unit AGN on the signal before transmission), which
    is ||(G_N - G_{N+kappa}) L rho||_1 on the signal mode.
    """
    rho = qidc_state(Ns, (30, 12))
    lossy = apply_loss(rho, [kappa, 1.0])
    quantum_out = apply_agn(lossy, [N, 0.0])
    classical_out = apply_agn(lossy, [N + kappa, 0.0])
    received = gaussian.classicality_certificate(gaussian.moments_from_fock(quantum_out))
    return {
        "bound": bounds.bound_theorem3(N + kappa, N),
        "measured": bounds.trace_distance(quantum_out, classical_out),
        "received_state_classical": received.is_classical,
    }


def check_theorem3(seed: int) -> tuple[bool, dict]:
    ok, out = True, {}
    for fname, rho in (("coherent1", coherent_state(1.0, 40)), ("thermal0.5", thermal_state(0.5, 40))):
        for N2 in (0.5, 1.0):
            for dN in (0.05, 0.2):
                N1 = N2 + dN
                bound = bounds.bound_theorem3(N1, N2)
                measured = bounds.trace_distance(apply_agn(rho, N1), apply_agn(rho, N2))
                out[f"{fname}_N1={N1:g}_N2={N2:g}"] = {"measured": measured, "bound": bound}
                ok = ok and measured <= bound + 1e-6
    e24 = sensing_instance()
    out["sensing"] = e24
    ok = ok and abs(e24["bound"] - 0.02) < 1e-12 and e24["measured"] < e24["bound"]
    return ok, out


def check_theorem5(seed: int) -> tuple[bool, dict]:
    diffs = [abs(bounds.bound_theorem5([N]) - bounds.bound_theorem2(N)) for N in (0.0, 0.05, 0.5, 1.0, 2.0, 20.0)]
    big = bounds.bound_theorem5(np.full(100_000, 20.0))
    ok = max(diffs) < 1e-12 and bounds.is_vacuous(big)
    return ok, {"max_m1_difference": max(diffs), "m1e5_N20_value": big, "vacuous": bounds.is_vacuous(big)}


def random_state(rng: np.random.Generator, dim: int, rank: int | None = None) -> DensityMatrix:
    rank = rank or dim
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return DensityMatrix(rho / np.trace(rho).real, FockCutoff((dim,)))


def random_effect(rng: np.random.Generator, dim: int) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, _ = np.linalg.qr(g)
    return (q * rng.uniform(0, 1, dim)) @ q.conj().T


def check_lemmas(seed: int, trials: int = 200) -> tuple[bool, dict]:
    """Randomized mixed-state trials. The pass condition uses the operator-norm
    form of the tensor bound; the trace-norm form is reported alongside."""
    rng = np.random.default_rng(seed)
    v3 = 0
    for _ in range(trials):
        d = int(rng.integers(2, 7))
        rep = bounds.lemma3_probability_gap(random_state(rng, d), random_state(rng, d), random_effect(rng, d))
        v3 += not rep.satisfied
    v4 = {"operator": 0, "trace": 0}
    worst = 0.0
    for _ in range(trials):
        da, db = (int(x) for x in rng.integers(2, 5, size=2))
        A, C = random_state(rng, da), random_state(rng, da)
        B, D = random_state(rng, db), random_state(rng, db)
        for norm in v4:
            rep = bounds.lemma4_tensor_bound(A, B, C, D, norm)
            v4[norm] += not rep.satisfied
            if norm == "operator":
                worst = max(worst, -rep.margin)
    measured = {"trials": trials, "lemma3_violations": v3, "lemma4_violations": v4["operator"],
                "lemma4_trace_norm_violations": v4["trace"], "lemma4_worst_excess": worst}
    return v3 == 0 and v4["operator"] == 0, measured


def check_qidc(seed: int) -> tuple[bool, dict]:
    rows = _sweep_rows("qidc")
    out = {str(r["Ns"]): {"min_eigenvalue": r["min_eigenvalue"], "threshold": r["threshold"]} for r in rows}
    return all(r["passed"] for r in rows), out


def check_lemma_thresholds(seed: int) -> tuple[bool, dict]:
    rho = number_state(1, 40)
    grid = default_grid(rho, 0.05)
    q = q_function(rho, grid)
    # unit AGN: the output P-function is the input Q-function
    rebuilt = state_from_p(q.with_values(q.values, "P"), 40)
    d = bounds.trace_distance(rebuilt, apply_agn(rho, 1.0))
    cert = gaussian.gaussian_lemma2_check(gaussian.squeezed_gaussian(0.5))
    ok = d < 1e-4 and cert.is_classical and abs(cert.margin - math.exp(-1) / 2) < 1e-10
    return ok, {"fock1_trace_distance": d, "squeezed_margin": cert.margin}


def _gaussian_fixtures():
    yield "coherent1", coherent_state(1.0, 40), gaussian.coherent_gaussian(1.0)
    yield "squeezed0.5", squeezed_vacuum(0.5, 40), gaussian.squeezed_gaussian(0.5)
    yield "thermal0.5", thermal_state(0.5, 40), gaussian.thermal_gaussian(0.5)


def check_cross_representation(seed: int) -> tuple[bool, dict]:
    worst = 0.0
    for _, rho, g in _gaussian_fixtures():
        for kappa in (0.3, 0.7):
            for N in (0.5, 1.0):
                m = gaussian.moments_from_fock(apply_channel(rho, ChannelSpec([kappa], [N])))
                ref = gaussian.gaussian_apply_agn(gaussian.gaussian_apply_loss(g, kappa), N)
                worst = max(worst, np.max(np.abs(m.mean - ref.mean)), np.max(np.abs(m.cov - ref.cov)))
    return worst < 1e-5, {"max_moment_difference": float(worst)}


def _within_db(value_watts: float, target_dbm: float, tol_db: float = 5.0) -> bool:
    return abs(power.watts_to_dbm(value_watts) - target_dbm) <= tol_db


def check_power(seed: int) -> tuple[bool, dict]:
    a = power.power_calc(1.0, 1e15, wavelength=1e-6)
    rate = power.photon_rate(1.0, wavelength=1e-6)
    c = power.power_calc(1.0, 1e12, wavelength=1e-6)
    ok = _within_db(a.power_watts, -10.0) and 0.5 <= rate / 1e19 <= 2.0 and _within_db(c.power_watts, -40.0)
    return ok, {"wide_band_dbm": a.power_dbm, "photons_per_second_at_1W": rate, "picosecond_dbm": c.power_dbm}


CHECKS: list[tuple[int, str, Callable[[int], tuple[bool, dict]]]] = [
    (1, "classicalization via rescaled Q", check_classicalization),
    (2, "loss/noise commutation", check_commutation),
    (3, "one-photon bookkeeping", check_one_photon),
    (4, "single-mode noise distance bound", check_theorem2),
    (5, "noise-difference distance bound", check_theorem3),
    (6, "multimode bound reduction and vacuity", check_theorem5),
    (7, "measurement and tensor inequalities, randomized", check_lemmas),
    (8, "QI-DC marginal classicality", check_qidc),
    (9, "Fock and squeezed classicality thresholds", check_lemma_thresholds),
    (10, "Fock vs covariance moments", check_cross_representation),
    (11, "power formula magnitudes", check_power),
]


def run_check(criterion: int, seed: int = 0) -> CheckResult:
    for num, name, fn in CHECKS:
        if num == criterion:
            t0 = time.perf_counter()
            try:
                ok, measured = fn(seed)
            except Exception as e:  # a crashing check is a failing check
                ok, measured = False, {"error": f"{type(e).__name__}: {e}"}
            return CheckResult(num, name, bool(ok), measured, time.perf_counter() - t0)
    raise KeyError(criterion)


@dataclass
class VerifyReport:
    checks: list[CheckResult]
    runtime: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {"results": [c.to_dict() for c in self.checks],
                "summary": {"passed": self.passed, "failed": sum(not c.passed for c in self.checks),
                            "runtime_seconds": round(self.runtime, 3)}}


def verify_all(seed: int = 0, echo: Callable[[str], None] | None = print) -> VerifyReport:
    t0 = time.perf_counter()
    results = []
    for num, _, _ in CHECKS:
        r = run_check(num, seed)
        results.append(r)
        if echo:
            echo(r.line())
    elapsed = time.perf_counter() - t0
    budget = CheckResult(12, "full run within runtime budget", elapsed < RUNTIME_BUDGET,
                         {"runtime_seconds": elapsed, "budget_seconds": RUNTIME_BUDGET}, elapsed)
    results.append(budget)
    if echo:
        echo(budget.line())
        echo(f"total runtime {elapsed:.1f} s; {'all checks passed' if all(r.passed for r in results) else 'FAILURES'}")
    return VerifyReport(results, elapsed)
