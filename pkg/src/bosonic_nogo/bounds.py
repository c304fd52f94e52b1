"""Trace distances and the closed-form trace-distance bounds, plus dominance checks.

Bounds are pure formula evaluations; measured distances always come from an
eigendecomposition. The two paths share no code so a dominance check cannot
confirm itself. Trace norms are unnormalized: they range over [0, 2].
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Iterable, Mapping

import numpy as np

from .channels import apply_agn
from .errors import (
    DegenerateDenominator,
    InvalidNoiseVariance,
    InvalidOrdering,
    InvalidParameter,
    InvalidPovmElement,
)
from .fock import DensityMatrix, coherent_amplitudes, require_same_cutoff

SLACK = 1e-9
MIN_DENOMINATOR = 1e-6
BOUND_NAMES = (
    "theorem2",
    "theorem3",
    "theorem4_printed",
    "theorem4_permode",
    "theorem5",
    "uhlmann",
    "lemma3",
    "lemma4",
)


@dataclass
class BoundReport:
    bound_name: str
    params: dict[str, Any]
    bound_value: float
    measured_value: float | None = None
    margin: float = field(init=False)
    satisfied: bool = field(init=False)
    slack: float = SLACK

    def __post_init__(self):
        if self.measured_value is None:
            self.margin = math.nan
            self.satisfied = True
        else:
            self.margin = self.bound_value - self.measured_value
            self.satisfied = bool(self.measured_value <= self.bound_value + self.slack)

    def flat_params(self) -> dict[str, Any]:
        out = {}
        for key, val in self.params.items():
            if isinstance(val, (list, tuple, np.ndarray)):
                for i, v in enumerate(val):
                    out[f"{key}_{i}"] = v
            else:
                out[key] = val
        return out

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["params"] = {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.params.items()}
        return d

    def csv_row(self) -> dict[str, Any]:
        row = {"bound_name": self.bound_name}
        row.update(self.flat_params())
        row.update(
            bound=self.bound_value,
            measured=self.measured_value,
            margin=self.margin,
            satisfied=self.satisfied,
        )
        return row


def trace_norm(a: np.ndarray) -> float:
    """Sum of |eigenvalues| of the Hermitian part of ``a``."""
    a = np.asarray(a)
    h = 0.5 * (a + a.conj().T)
    return float(np.sum(np.abs(np.linalg.eigvalsh(h))))


def operator_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(np.asarray(a), 2))


def trace_distance(rho1: DensityMatrix, rho2: DensityMatrix) -> float:
    require_same_cutoff(rho1, rho2)
    return trace_norm(rho1.data - rho2.data)


def uhlmann_bound(alpha: complex, rho_prime: DensityMatrix) -> float:
    """2 sqrt(1 - <alpha|rho'|alpha>) for a single-mode ``rho_prime``."""
    if rho_prime.modes != 1:
        raise InvalidParameter("uhlmann_bound takes a single-mode state")
    c = coherent_amplitudes([alpha], rho_prime.dims[0])[0]
    overlap = float(np.real(c.conj() @ rho_prime.data @ c))
    return 2.0 * math.sqrt(max(0.0, 1.0 - overlap))


def _check_variance(*values: float) -> None:
    for n in values:
        if not n >= 0 or math.isinf(n):
            raise InvalidNoiseVariance(f"noise variance {n} must be finite and >= 0")


def bound_theorem2(N: float) -> float:
    _check_variance(N)
    return 2.0 * math.sqrt(N / (N + 1.0))


def bound_theorem3(N1: float, N2: float) -> float:
    _check_variance(N1, N2)
    if N1 < N2:
        raise InvalidOrdering(f"need N1 >= N2, got N1={N1}, N2={N2}")
    if N2 < MIN_DENOMINATOR:
        raise DegenerateDenominator(f"N2={N2} below {MIN_DENOMINATOR}")
    return 2.0 * (N1 - N2) / N2


def _ratio(num: float, den: float) -> float:
    if num == 0:
        return 0.0
    if den < MIN_DENOMINATOR:
        raise DegenerateDenominator(f"denominator {den} below {MIN_DENOMINATOR}")
    return num / den


def bound_theorem4(Na, Nb, reading: str = "permode") -> float:
    """Two-mode bound for ||(G_Na - G_Nb) rho||_1, Na >= Nb componentwise.

    ``reading="printed"`` evaluates the formula with its subscripts taken
    literally (differences between the two components of each vector).
    ``reading="permode"`` takes mode ``i`` differences Na_i - Nb_i over Nb_i,
    which reduces to the single-mode noise-difference bound when one mode is noiseless
    in the difference. Zero-difference terms are dropped before dividing.
    """
    a1, a2 = (float(v) for v in Na)
    b1, b2 = (float(v) for v in Nb)
    _check_variance(a1, a2, b1, b2)
    if a1 < b1 or a2 < b2:
        raise InvalidOrdering(f"need Na >= Nb componentwise, got Na={Na}, Nb={Nb}")
    if reading == "printed":
        da, db = a1 - a2, b1 - b2
        if da < 0 or db < 0:
            raise InvalidOrdering("printed reading needs Na_1 >= Na_2 and Nb_1 >= Nb_2")
        ta, tb = _ratio(da, a2), _ratio(db, b2)
        cross = 0.0 if da * db == 0 else 2.0 * da * db / (a2 * b2)
        return 2.0 * (ta + tb + cross)
    if reading == "permode":
        t1, t2 = _ratio(a1 - b1, b1), _ratio(a2 - b2, b2)
        return 2.0 * (t1 + t2 + 2.0 * t1 * t2)
    raise InvalidParameter(f"unknown reading {reading!r}")


def bound_theorem5(N_vec) -> float:
    n = np.atleast_1d(np.asarray(N_vec, dtype=float))
    if np.any(~(n >= 0)) or np.any(np.isinf(n)):
        raise InvalidNoiseVariance("noise variances must be finite and >= 0")
    return float(2.0 * np.sum(np.sqrt(n / (n + 1.0))))


def is_vacuous(bound_value: float) -> bool:
    """A trace-distance bound above 2 says nothing."""
    return bound_value > 2.0


def lemma3_probability_gap(
    rho1: DensityMatrix, rho2: DensityMatrix, povm_element: np.ndarray, tol: float = 1e-10
) -> BoundReport:
    require_same_cutoff(rho1, rho2)
    X = np.asarray(povm_element, dtype=complex)
    if X.shape != rho1.data.shape or np.max(np.abs(X - X.conj().T)) > tol:
        raise InvalidPovmElement("POVM element must be a Hermitian matrix of the state's size")
    ev = np.linalg.eigvalsh(0.5 * (X + X.conj().T))
    if ev[0] < -tol or ev[-1] > 1 + tol:
        raise InvalidPovmElement(f"eigenvalues must lie in [0, 1], got [{ev[0]:.3e}, {ev[-1]:.3e}]")
    gap = abs(np.trace(rho1.data @ X) - np.trace(rho2.data @ X))
    return BoundReport("lemma3", {}, trace_distance(rho1, rho2), float(gap))


def lemma4_tensor_bound(
    A: DensityMatrix, B: DensityMatrix, C: DensityMatrix, D: DensityMatrix, norm: str = "operator"
) -> BoundReport:
    """||A(x)B - C(x)D||_1 against ||B|| ||A-C||_1 + ||C|| ||B-D||_1.

    ``norm="operator"`` weights with operator norms (the stated form). It
    fails for mixed B: A=|0><0|, C=|1><1|, B=D=I/2 gives 2 > 1.
    ``norm="trace"`` weights with trace norms, which always holds since
    ||X (x) Y||_1 = ||X||_1 ||Y||_1.
    """
    require_same_cutoff(A, C)
    require_same_cutoff(B, D)
    if norm == "operator":
        weight = operator_norm
    elif norm == "trace":
        weight = trace_norm
    else:
        raise InvalidParameter(f"norm must be 'operator' or 'trace', got {norm!r}")
    lhs = trace_norm(np.kron(A.data, B.data) - np.kron(C.data, D.data))
    rhs = weight(B.data) * trace_norm(A.data - C.data) + weight(C.data) * trace_norm(B.data - D.data)
    return BoundReport("lemma4", {"norm": norm}, rhs, lhs)


def _measure(rho: DensityMatrix, name: str, p: Mapping[str, Any]) -> tuple[float, float]:
    if name == "theorem2":
        bound = bound_theorem2(p["N"])
        measured = trace_distance(rho, apply_agn(rho, p["N"]))
    elif name == "theorem3":
        bound = bound_theorem3(p["N1"], p["N2"])
        measured = trace_distance(apply_agn(rho, p["N1"]), apply_agn(rho, p["N2"]))
    elif name in ("theorem4_printed", "theorem4_permode"):
        bound = bound_theorem4(p["Na"], p["Nb"], name.split("_")[1])
        measured = trace_distance(apply_agn(rho, p["Na"]), apply_agn(rho, p["Nb"]))
    elif name == "theorem5":
        bound = bound_theorem5(p["N"])
        measured = trace_distance(rho, apply_agn(rho, p["N"]))
    elif name == "uhlmann":
        out = apply_agn(rho, p["N"])
        bound = uhlmann_bound(p["alpha"], out)
        measured = trace_distance(rho, out)
    else:
        raise InvalidParameter(f"no dominance sweep for {name!r}")
    return bound, measured


def dominance_sweep(
    rho_classical: DensityMatrix, bound_name: str, param_grid: Iterable[Mapping[str, Any]]
) -> list[BoundReport]:
    """Exact trace distance against the named bound at every parameter point.

    Only states known to be classical by construction are accepted. Points
    where the bound is undefined (ordering or denominator errors) propagate.
    """
    if not rho_classical.classical:
        raise InvalidParameter("dominance sweeps need a state known to be classical by construction")
    reports = []
    for p in param_grid:
        bound, measured = _measure(rho_classical, bound_name, p)
        reports.append(BoundReport(bound_name, dict(p), bound, measured))
    return reports
