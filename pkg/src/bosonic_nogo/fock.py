"""Multimode states and single-mode operators in a truncated Fock basis.

Modes are ordered as in ``np.kron``: the first mode is the slowest index of
the flattened basis. Nothing here renormalizes a truncated state; the mass
discarded by truncation is carried in ``DensityMatrix.leakage``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammainc, gammaln

from .errors import (
    ArgumentOutOfReliableRange,
    CutoffMismatch,
    CutoffTooSmall,
    DimensionOverflow,
    InvalidModeIndex,
    InvalidParameter,
    NoGoError,
)

MAX_TOTAL_DIM = 8192
LEAKAGE_BUDGET = 1e-8
HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10

# e^{-|beta|^2/2} underflows past this, so matrix elements would silently vanish.
MAX_DISPLACEMENT_SQ = 700.0


class InvalidState(NoGoError):
    pass


@dataclass(frozen=True)
class FockCutoff:
    """Per-mode Fock dimensions; mode ``i`` keeps levels ``0..dims[i]-1``."""

    dims: tuple[int, ...]
    max_total_dim: int = MAX_TOTAL_DIM

    def __post_init__(self):
        dims = tuple(int(d) for d in np.atleast_1d(self.dims))
        if not dims:
            raise InvalidParameter("a cutoff needs at least one mode")
        if any(d < 2 for d in dims):
            raise InvalidParameter(f"every mode needs dimension >= 2, got {dims}")
        object.__setattr__(self, "dims", dims)
        if self.total > self.max_total_dim:
            raise DimensionOverflow(
                f"total dimension {self.total} exceeds maximum {self.max_total_dim}"
            )

    @classmethod
    def uniform(cls, dim: int, modes: int = 1, **kw) -> "FockCutoff":
        return cls((dim,) * modes, **kw)

    @property
    def modes(self) -> int:
        return len(self.dims)

    @property
    def total(self) -> int:
        return math.prod(self.dims)

    def joined(self, other: "FockCutoff") -> "FockCutoff":
        return FockCutoff(self.dims + other.dims, max(self.max_total_dim, other.max_total_dim))

    def select(self, modes: Sequence[int]) -> "FockCutoff":
        return FockCutoff(tuple(self.dims[i] for i in modes), self.max_total_dim)


def as_cutoff(cutoff, modes: int = 1) -> FockCutoff:
    if isinstance(cutoff, FockCutoff):
        return cutoff
    dims = tuple(np.atleast_1d(cutoff).tolist())
    if len(dims) == 1 and modes > 1:
        dims = dims * modes
    return FockCutoff(dims)


def default_cutoff(mean: float, variance: float = 0.0, added_noise: float = 0.0) -> int:
    """Heuristic per-mode dimension: mean + 6 sigma + 10 + expected added noise photons."""
    return int(math.ceil(mean + 6.0 * math.sqrt(max(variance, 0.0)) + 10.0 + added_noise))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Truncated density matrix.

    ``classical`` is provenance, not a test: it is True only when the state was
    built by a route known to yield a P-representable state (coherent, thermal,
    P-mixtures, enough added noise). False means "not known to be classical".
    """

    data: np.ndarray
    cutoff: FockCutoff
    leakage: float = 0.0
    classical: bool = False

    def __post_init__(self):
        data = np.array(self.data, dtype=complex)
        n = self.cutoff.total
        if data.shape != (n, n):
            raise InvalidState(f"data shape {data.shape} does not match cutoff {self.cutoff.dims}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "leakage", float(max(self.leakage, 0.0)))

    @property
    def dims(self) -> tuple[int, ...]:
        return self.cutoff.dims

    @property
    def modes(self) -> int:
        return self.cutoff.modes

    @property
    def trace(self) -> float:
        return float(np.trace(self.data).real)

    def tensor(self) -> np.ndarray:
        """View as an array of shape ``dims + dims`` (row indices first)."""
        return self.data.reshape(self.dims + self.dims)

    @classmethod
    def from_tensor(cls, arr: np.ndarray, cutoff: FockCutoff, leakage: float = 0.0, classical: bool = False) -> "DensityMatrix":
        n = cutoff.total
        return cls(np.asarray(arr).reshape(n, n), cutoff, leakage, classical)

    @classmethod
    def from_ket(cls, psi: np.ndarray, cutoff: FockCutoff, leakage: float = 0.0, classical: bool = False) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex).ravel()
        return cls(np.outer(psi, psi.conj()), cutoff, leakage, classical)

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.data - self.data.conj().T)))

    def min_eigenvalue(self) -> float:
        h = 0.5 * (self.data + self.data.conj().T)
        return float(np.linalg.eigvalsh(h)[0])

    def validate(self, leakage_budget: float = LEAKAGE_BUDGET) -> None:
        """Raise ``InvalidState`` unless Hermitian, PSD and trace in ``[1 - budget, 1]``."""
        herm = self.hermiticity_defect()
        if herm > HERMITIAN_TOL:
            raise InvalidState(f"not Hermitian: max deviation {herm:.3e}")
        lo = self.min_eigenvalue()
        if lo < -PSD_TOL:
            raise InvalidState(f"not PSD: min eigenvalue {lo:.3e}")
        tr = self.trace
        if not (1.0 - leakage_budget - 1e-12 <= tr <= 1.0 + 1e-12):
            raise InvalidState(f"trace {tr!r} outside [1 - {leakage_budget:g}, 1]")

    def populations(self, mode: int | None = None) -> np.ndarray:
        """Diagonal photon-number distribution, of one mode if ``mode`` is given."""
        if mode is None:
            return np.real(np.diag(self.data)).copy()
        return np.real(np.diag(partial_trace(self, [mode]).data)).copy()


@dataclass(frozen=True)
class ModeOperator:
    data: np.ndarray
    kind: str

    @property
    def dim(self) -> int:
        return self.data.shape[0]


def annihilation(dim: int) -> ModeOperator:
    return ModeOperator(np.diag(np.sqrt(np.arange(1, dim)), 1).astype(complex), "annihilation")


def creation(dim: int) -> ModeOperator:
    return ModeOperator(np.diag(np.sqrt(np.arange(1, dim)), -1).astype(complex), "creation")


def number(dim: int) -> ModeOperator:
    return ModeOperator(np.diag(np.arange(dim)).astype(complex), "number")


def displacement_matrices(betas, dim: int) -> np.ndarray:
    """Exact matrix elements <m|D(beta)|n>, m, n < dim, for a batch of amplitudes.

    The infinite-dimensional operator is truncated, not exponentiated in the
    truncated space, so every returned element is exact. Each diagonal
    ``<n+k|D|n>`` is generated by the three-term recurrence of normalized
    associated Laguerre functions, which is forward-stable (unlike the
    row/column ladder recurrences). Returns shape ``(len(betas), dim, dim)``.
    """
    betas = np.atleast_1d(np.asarray(betas, dtype=complex))
    x = np.abs(betas) ** 2
    if np.any(x > MAX_DISPLACEMENT_SQ):
        raise ArgumentOutOfReliableRange(
            f"|beta|^2 = {x.max():.1f} exceeds {MAX_DISPLACEMENT_SQ}"
        )
    phi = _laguerre_diagonals(np.sqrt(x), dim)
    phase = np.exp(1j * np.angle(betas))
    out = np.zeros((betas.size, dim, dim), dtype=complex)
    for k in range(dim):
        n = np.arange(dim - k)
        lower = phi[:, k, : dim - k] * (phase[:, None] ** k)
        out[:, n + k, n] = lower
        if k:
            out[:, n, n + k] = (-1) ** k * lower.conj()
    return out


def real_displacement_matrices(radii, dim: int) -> np.ndarray:
    """``displacement_matrices`` for real nonnegative amplitudes, as a real array."""
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    if np.any(radii**2 > MAX_DISPLACEMENT_SQ):
        raise ArgumentOutOfReliableRange(f"radius {radii.max():.2f} out of range")
    phi = _laguerre_diagonals(radii, dim)
    out = np.zeros((radii.size, dim, dim))
    for k in range(dim):
        n = np.arange(dim - k)
        out[:, n + k, n] = phi[:, k, : dim - k]
        if k:
            out[:, n, n + k] = (-1) ** k * phi[:, k, : dim - k]
    return out


def _laguerre_diagonals(r: np.ndarray, dim: int) -> np.ndarray:
    # phi[b, k, n] = sqrt(n!/(n+k)!) r^k e^{-r^2/2} L_n^{(k)}(r^2)
    x = r**2
    k = np.arange(dim, dtype=float)
    phi = np.zeros((r.size, dim, dim))
    with np.errstate(divide="ignore", invalid="ignore"):
        logr = np.log(r)
    with np.errstate(invalid="ignore"):
        start = np.exp(k[None, :] * logr[:, None] - x[:, None] / 2 - 0.5 * gammaln(k + 1)[None, :])
    zero = r == 0
    if np.any(zero):
        start[zero] = (k == 0).astype(float)
    phi[:, :, 0] = start
    for n in range(dim - 1):
        prev = phi[:, :, n - 1] if n else 0.0
        phi[:, :, n + 1] = (
            (2 * n + k + 1 - x[:, None]) * phi[:, :, n] - np.sqrt(n * (n + k)) * prev
        ) / np.sqrt((n + 1) * (n + k + 1))
    return phi


def displacement(beta: complex, dim: int) -> ModeOperator:
    return ModeOperator(displacement_matrices([beta], dim)[0], "displacement")


def coherent_amplitudes(alphas, dim: int) -> np.ndarray:
    """Fock amplitudes e^{-|a|^2/2} a^n / sqrt(n!) for a batch; shape ``(len(alphas), dim)``."""
    alphas = np.atleast_1d(np.asarray(alphas, dtype=complex)).ravel()
    out = np.empty((alphas.size, dim), dtype=complex)
    out[:, 0] = np.exp(-np.abs(alphas) ** 2 / 2)
    for n in range(1, dim):
        out[:, n] = out[:, n - 1] * alphas / math.sqrt(n)
    return out


def _check_leakage(tail: float, budget: float, what: str) -> None:
    if tail > budget:
        raise CutoffTooSmall(f"{what}: truncated tail mass {tail:.3e} exceeds budget {budget:.1e}")


def coherent_state(alpha, cutoff, leakage_budget: float = LEAKAGE_BUDGET) -> DensityMatrix:
    """Product coherent state; ``alpha`` is a scalar or one amplitude per mode."""
    alphas = np.atleast_1d(np.asarray(alpha, dtype=complex))
    cut = as_cutoff(cutoff, modes=alphas.size)
    if cut.modes != alphas.size:
        raise InvalidParameter(f"{alphas.size} amplitudes for {cut.modes} modes")
    psi = np.ones(1, dtype=complex)
    kept = 1.0
    for a, d in zip(alphas, cut.dims):
        psi = np.kron(psi, coherent_amplitudes([a], d)[0])
        # P(Poisson(|a|^2) >= d)
        tail = float(gammainc(d, abs(a) ** 2)) if a != 0 else 0.0
        kept *= 1.0 - tail
    leak = 1.0 - kept
    _check_leakage(leak, leakage_budget, "coherent_state")
    return DensityMatrix.from_ket(psi, cut, leak, classical=True)


def number_state(n, cutoff) -> DensityMatrix:
    ns = np.atleast_1d(np.asarray(n, dtype=int))
    cut = as_cutoff(cutoff, modes=ns.size)
    if cut.modes != ns.size:
        raise InvalidParameter(f"{ns.size} photon numbers for {cut.modes} modes")
    psi = np.ones(1, dtype=complex)
    for k, d in zip(ns, cut.dims):
        if k < 0:
            raise InvalidParameter("photon number must be nonnegative")
        if k >= d:
            raise CutoffTooSmall(f"|{k}> needs dimension > {k}, got {d}")
        e = np.zeros(d, dtype=complex)
        e[k] = 1.0
        psi = np.kron(psi, e)
    return DensityMatrix.from_ket(psi, cut, classical=bool(np.all(ns == 0)))


def vacuum(cutoff) -> DensityMatrix:
    cut = as_cutoff(cutoff)
    return number_state([0] * cut.modes, cut)


def squeezed_vacuum(r: float, cutoff, leakage_budget: float = LEAKAGE_BUDGET) -> DensityMatrix:
    """Single-mode squeezed vacuum, squeezed along x for ``r > 0``."""
    cut = as_cutoff(cutoff)
    if cut.modes != 1:
        raise InvalidParameter("squeezed_vacuum is single-mode")
    d = cut.dims[0]
    psi = np.zeros(d, dtype=complex)
    t = math.tanh(r)
    ks = np.arange((d + 1) // 2)
    if t == 0:
        psi[0] = 1.0
    else:
        # sqrt((2k)!)/(2^k k!) evaluated in logs
        mag = 0.5 * gammaln(2 * ks + 1) - ks * math.log(2.0) - gammaln(ks + 1)
        amp = np.exp(mag + ks * math.log(abs(t))) * np.sign(-t) ** ks
        psi[2 * ks] = amp / math.sqrt(math.cosh(r))
    leak = max(0.0, 1.0 - float(np.sum(np.abs(psi) ** 2)))
    _check_leakage(leak, leakage_budget, "squeezed_vacuum")
    return DensityMatrix.from_ket(psi, cut, leak)


def thermal_state(nbar: float, cutoff, leakage_budget: float = LEAKAGE_BUDGET) -> DensityMatrix:
    cut = as_cutoff(cutoff)
    if cut.modes != 1:
        raise InvalidParameter("thermal_state is single-mode")
    if nbar < 0:
        raise InvalidParameter("mean photon number must be nonnegative")
    d = cut.dims[0]
    q = nbar / (nbar + 1.0)
    p = (1.0 - q) * q ** np.arange(d)
    leak = q**d
    _check_leakage(leak, leakage_budget, "thermal_state")
    return DensityMatrix(np.diag(p), cut, leak, classical=True)


def qidc_state(Ns: float, cutoff, leakage_budget: float = LEAKAGE_BUDGET) -> DensityMatrix:
    """Two-mode downconverter state sqrt(1-lam^2) sum_n lam^n |n>|n>, lam^2 = Ns/(Ns+1)."""
    if Ns < 0:
        raise InvalidParameter("Ns must be nonnegative")
    cut = as_cutoff(cutoff, modes=2)
    if cut.modes != 2:
        raise InvalidParameter("qidc_state is two-mode")
    da, db = cut.dims
    lam2 = Ns / (Ns + 1.0)
    kmax = min(da, db)
    n = np.arange(kmax)
    coeff = math.sqrt(1.0 - lam2) * np.sqrt(lam2) ** n
    psi = np.zeros((da, db), dtype=complex)
    psi[n, n] = coeff
    leak = lam2**kmax
    _check_leakage(leak, leakage_budget, "qidc_state")
    return DensityMatrix.from_ket(psi, cut, leak)


def tensor(rho1: DensityMatrix, rho2: DensityMatrix) -> DensityMatrix:
    cut = rho1.cutoff.joined(rho2.cutoff)
    leak = 1.0 - (1.0 - rho1.leakage) * (1.0 - rho2.leakage)
    return DensityMatrix(np.kron(rho1.data, rho2.data), cut, leak, rho1.classical and rho2.classical)


def _check_modes(rho: DensityMatrix, modes) -> list[int]:
    modes = [int(m) for m in np.atleast_1d(modes)]
    if not modes:
        raise InvalidModeIndex("mode list is empty")
    if len(set(modes)) != len(modes) or any(m < 0 or m >= rho.modes for m in modes):
        raise InvalidModeIndex(f"invalid modes {modes} for a {rho.modes}-mode state")
    return modes


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Reduced state on ``keep`` (kept in ascending order)."""
    keep = sorted(_check_modes(rho, keep))
    m = rho.modes
    t = rho.tensor()
    letters = "abcdefghijklmnopqrstuvwxyz"
    rows = list(letters[:m])
    cols = list(letters[m : 2 * m])
    for i in range(m):
        if i not in keep:
            cols[i] = rows[i]
    out = "".join(rows[i] for i in keep) + "".join(cols[i] for i in keep)
    reduced = np.einsum("".join(rows) + "".join(cols) + "->" + out, t)
    cut = rho.cutoff.select(keep)
    return DensityMatrix.from_tensor(reduced, cut, rho.leakage, rho.classical)


def embed(op: np.ndarray, mode: int, cutoff: FockCutoff) -> np.ndarray:
    """Lift a single-mode matrix to the full multimode space."""
    out = np.ones((1, 1), dtype=complex)
    for i, d in enumerate(cutoff.dims):
        if i == mode:
            if op.shape != (d, d):
                raise CutoffMismatch(f"operator dim {op.shape[0]} vs mode dim {d}")
            out = np.kron(out, op)
        else:
            out = np.kron(out, np.eye(d))
    return out


def expectation(rho: DensityMatrix, op: np.ndarray, mode: int | None = None) -> complex:
    if mode is not None:
        red = partial_trace(rho, [mode])
        return complex(np.trace(red.data @ op))
    return complex(np.trace(rho.data @ op))


def mean_photon_number(rho: DensityMatrix, mode: int = 0) -> float:
    _check_modes(rho, [mode])
    pops = rho.populations(mode)
    return float(np.dot(np.arange(pops.size), pops))


def occupied_level(rho: DensityMatrix, mode: int = 0, threshold: float = 1e-10) -> int:
    """Highest Fock level of ``mode`` whose population exceeds ``threshold``."""
    pops = rho.populations(mode)
    idx = np.nonzero(pops > threshold)[0]
    return int(idx[-1]) if idx.size else 0


def require_same_cutoff(*states: DensityMatrix) -> None:
    dims = {s.dims for s in states}
    if len(dims) > 1:
        raise CutoffMismatch(f"cutoffs differ: {sorted(dims)}")
