"""Covariance-matrix calculus for Gaussian states.

Quadratures are ordered (x1, p1, ..., xm, pm) with x = (a + a^dag)/sqrt(2),
p = (a - a^dag)/(i sqrt(2)), so the vacuum covariance is I/2 and AGN of
variance N adds N to every quadrature variance of its mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidNoiseVariance, InvalidParameter, InvalidTransmittance
from .fock import DensityMatrix, partial_trace

SYMMETRY_TOL = 1e-12
UNCERTAINTY_TOL = 1e-10
PSD_TOL = 1e-10


def symplectic_form(modes: int) -> np.ndarray:
    return np.kron(np.eye(modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def _sym(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


@dataclass(frozen=True, eq=False)
class GaussianState:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).ravel()
        cov = np.array(self.cov, dtype=float)
        if cov.shape != (mean.size, mean.size) or mean.size % 2:
            raise InvalidParameter(f"mean {mean.shape} / cov {cov.shape} mismatch")
        if np.max(np.abs(cov - cov.T), initial=0.0) > SYMMETRY_TOL:
            raise InvalidParameter("covariance matrix is not symmetric")
        cov = _sym(cov)
        lo = np.linalg.eigvalsh(cov + 0.5j * symplectic_form(mean.size // 2))[0]
        if lo < -UNCERTAINTY_TOL:
            raise InvalidParameter(f"uncertainty principle violated (min eigenvalue {lo:.3e})")
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def modes(self) -> int:
        return self.mean.size // 2

    def mean_photon_number(self, mode: int = 0) -> float:
        i = 2 * mode
        block = self.cov[i : i + 2, i : i + 2]
        return float((np.trace(block) - 1.0) / 2.0 + (self.mean[i] ** 2 + self.mean[i + 1] ** 2) / 2.0)


@dataclass(frozen=True)
class ClassicalityCertificate:
    is_classical: bool
    min_eigenvalue: float
    margin: float


def vacuum_gaussian(modes: int = 1) -> GaussianState:
    return GaussianState(np.zeros(2 * modes), 0.5 * np.eye(2 * modes))


def coherent_gaussian(alpha: complex) -> GaussianState:
    alpha = complex(alpha)
    return GaussianState(math.sqrt(2) * np.array([alpha.real, alpha.imag]), 0.5 * np.eye(2))


def squeezed_gaussian(r: float) -> GaussianState:
    """Squeezed vacuum, x squeezed for ``r > 0`` (matches ``fock.squeezed_vacuum``)."""
    return GaussianState(np.zeros(2), 0.5 * np.diag([math.exp(-2 * r), math.exp(2 * r)]))


def thermal_gaussian(nbar: float) -> GaussianState:
    if nbar < 0:
        raise InvalidParameter("mean photon number must be nonnegative")
    return GaussianState(np.zeros(2), (nbar + 0.5) * np.eye(2))


def direct_sum(*states: GaussianState) -> GaussianState:
    n = sum(s.mean.size for s in states)
    cov = np.zeros((n, n))
    i = 0
    for s in states:
        k = s.mean.size
        cov[i : i + k, i : i + k] = s.cov
        i += k
    return GaussianState(np.concatenate([s.mean for s in states]), cov)


def gaussian_qidc(Ns: float) -> GaussianState:
    """Covariance of the two-mode downconverter state with Ns signal photons."""
    if Ns < 0:
        raise InvalidParameter("Ns must be nonnegative")
    diag = (Ns + 0.5) * np.eye(2)
    off = math.sqrt(Ns * (Ns + 1.0)) * np.diag([1.0, -1.0])
    cov = np.block([[diag, off], [off, diag]])
    return GaussianState(np.zeros(4), cov)


def _per_mode(values, modes: int) -> np.ndarray:
    vec = np.atleast_1d(np.asarray(values, dtype=float))
    if vec.size == 1 and modes > 1:
        vec = np.repeat(vec, modes)
    if vec.size != modes:
        raise InvalidParameter(f"expected {modes} per-mode values, got {vec.size}")
    return vec


def gaussian_apply_loss(g: GaussianState, kappa_vec) -> GaussianState:
    kappa = _per_mode(kappa_vec, g.modes)
    if np.any((kappa < 0) | (kappa > 1)) or np.any(np.isnan(kappa)):
        raise InvalidTransmittance(f"transmittance outside [0, 1]: {kappa}")
    scale = np.repeat(np.sqrt(kappa), 2)
    cov = scale[:, None] * g.cov * scale[None, :] + np.diag(np.repeat((1.0 - kappa) / 2.0, 2))
    return GaussianState(scale * g.mean, cov)


def gaussian_apply_agn(g: GaussianState, noise_vec) -> GaussianState:
    noise = _per_mode(noise_vec, g.modes)
    if np.any(~(noise >= 0)) or np.any(np.isinf(noise)):
        raise InvalidNoiseVariance(f"noise variances must be finite and >= 0: {noise}")
    return GaussianState(g.mean, g.cov + np.diag(np.repeat(noise, 2)))


def symplectic_eigenvalues(g: GaussianState) -> np.ndarray:
    ev = np.abs(np.linalg.eigvals(1j * symplectic_form(g.modes) @ g.cov))
    return np.sort(ev)[::2]


def classicality_certificate(g: GaussianState, psd_tol: float = PSD_TOL) -> ClassicalityCertificate:
    """P-representability test: classical iff cov - I/2 is PSD (to ``psd_tol``)."""
    lo = float(np.linalg.eigvalsh(_sym(g.cov - 0.5 * np.eye(g.cov.shape[0])))[0])
    return ClassicalityCertificate(lo >= -psd_tol, lo, lo)


def gaussian_lemma2_check(g: GaussianState) -> ClassicalityCertificate:
    """Certificate after adding AGN of variance 1/2 to every mode."""
    return classicality_certificate(gaussian_apply_agn(g, 0.5))


def classicality_threshold(g: GaussianState, mode: int = 0, tol: float = 1e-12, hi: float = 1.0) -> float:
    """Smallest AGN variance on ``mode`` alone that makes ``g`` classical, by bisection.

    Uses the exact sign of the minimum eigenvalue (no tolerance), so the answer
    is the crossing point itself rather than a tolerance-shifted one.
    """
    if not 0 <= mode < g.modes:
        raise InvalidParameter(f"mode {mode} out of range")
    noise = np.zeros(g.modes)

    def classical_at(n: float) -> bool:
        noise[mode] = n
        return classicality_certificate(gaussian_apply_agn(g, noise), psd_tol=0.0).is_classical

    if classical_at(0.0):
        return 0.0
    lo = 0.0
    for _ in range(200):
        if classical_at(hi):
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise InvalidParameter("no finite single-mode noise makes this state classical")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if classical_at(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _padded_quadratures(dim: int) -> tuple[np.ndarray, np.ndarray]:
    # one extra level so products like x @ x are exact on the kept levels
    a = np.diag(np.sqrt(np.arange(1, dim + 1)), 1).astype(complex)
    x = (a + a.conj().T) / math.sqrt(2)
    p = (a - a.conj().T) / (1j * math.sqrt(2))
    return x, p


def moments_from_fock(rho: DensityMatrix) -> GaussianState:
    """First and second quadrature moments of a truncated state, as a GaussianState.

    Only meaningful as a Gaussian description when ``rho`` is (close to) Gaussian.
    """
    m = rho.modes
    quads = []
    for mode in range(m):
        x, p = _padded_quadratures(rho.dims[mode])
        quads.extend([(mode, x), (mode, p)])
    d = [rho.dims[i] for i in range(m)]

    def one(mode, op):
        red = partial_trace(rho, [mode]).data
        return complex(np.trace(red @ op))

    mean = np.array([one(mode, op[: d[mode], : d[mode]]).real for mode, op in quads])
    cov = np.zeros((2 * m, 2 * m))
    for i, (mi, oi) in enumerate(quads):
        for j, (mj, oj) in enumerate(quads):
            if j < i:
                continue
            if mi == mj:
                k = d[mi]
                val = one(mi, 0.5 * (oi @ oj + oj @ oi)[:k, :k])
            else:
                t = partial_trace(rho, [mi, mj]).tensor()
                ka, kb = d[mi], d[mj]
                val = complex(np.einsum("ijkl,ki,lj->", t, oi[:ka, :ka], oj[:kb, :kb]))
            cov[i, j] = cov[j, i] = val.real - mean[i] * mean[j]
    return GaussianState(mean, _sym(cov))
