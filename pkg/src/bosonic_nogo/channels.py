"""Pure-loss and additive Gaussian noise (AGN) channels on truncated Fock states.

Both channels are phase covariant: a Fock coherence ``|m><m-delta|`` is only
ever mapped onto coherences with the same offset ``delta``. Each channel is
therefore stored as a stack of *transfer matrices* ``T[delta][j, m]`` with

    out[j, j - delta] = sum_m T[delta][j, m] * rho[m, m - delta]

which is applied to one mode of a multimode state at a time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.hermite import hermgauss
from numpy.polynomial.laguerre import laggauss
from scipy.special import gammaln

from .errors import CutoffHeadroomInsufficient, InvalidNoiseVariance, InvalidParameter, InvalidTransmittance
from .fock import (
    DensityMatrix,
    displacement_matrices,
    occupied_level,
    real_displacement_matrices,
)

GUARD_FRACTION = 0.2


@dataclass(frozen=True)
class ChannelSpec:
    """Per-mode loss ``kappa`` followed by per-mode AGN of variance ``noise``."""

    kappa: tuple[float, ...]
    noise: tuple[float, ...]

    def __post_init__(self):
        kappa = _as_vector(self.kappa)
        noise = _as_vector(self.noise)
        if len(kappa) != len(noise):
            raise InvalidParameter("kappa and noise vectors differ in length")
        _check_kappa(kappa)
        _check_noise(noise)
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "noise", noise)

    @property
    def modes(self) -> int:
        return len(self.kappa)


@dataclass(frozen=True)
class KrausSet:
    operators: np.ndarray
    completeness_defect: float


def _as_vector(v) -> tuple[float, ...]:
    return tuple(float(x) for x in np.atleast_1d(np.asarray(v, dtype=float)))


def _check_kappa(kappa) -> None:
    for k in kappa:
        if not (0.0 <= k <= 1.0) or math.isnan(k):
            raise InvalidTransmittance(f"transmittance {k} outside [0, 1]")


def _check_noise(noise) -> None:
    for n in noise:
        if not n >= 0.0 or math.isinf(n):
            raise InvalidNoiseVariance(f"noise variance {n} must be finite and >= 0")


def _per_mode(values, modes: int) -> tuple[float, ...]:
    vec = _as_vector(values)
    if len(vec) == 1 and modes > 1:
        vec = vec * modes
    if len(vec) != modes:
        raise InvalidParameter(f"expected {modes} per-mode values, got {len(vec)}")
    return vec


def loss_kraus(kappa: float, dim: int) -> KrausSet:
    """Photon-loss Kraus operators A_k, <n-k|A_k|n> = sqrt(C(n,k)) kappa^((n-k)/2) (1-kappa)^(k/2)."""
    _check_kappa([kappa])
    if kappa == 1.0:
        ops = np.eye(dim)[None]
    else:
        ops = np.zeros((dim, dim, dim))
        n = np.arange(dim)
        for k in range(dim):
            src = n[k:]
            logc = gammaln(src + 1) - gammaln(k + 1) - gammaln(src - k + 1)
            ops[k, src - k, src] = (
                np.exp(0.5 * logc) * np.power(kappa, 0.5 * (src - k)) * (1.0 - kappa) ** (0.5 * k)
            )
    guard = dim - max(1, int(math.ceil(GUARD_FRACTION * dim)))
    comp = np.einsum("kji,kjl->il", ops, ops)
    defect = float(np.max(np.abs(comp - np.eye(dim))[:guard, :guard]))
    return KrausSet(ops, defect)


def _offset_blocks(dim: int):
    for delta in range(-(dim - 1), dim):
        rows = np.arange(max(0, delta), min(dim, dim + delta))
        yield delta, rows, rows - delta


def transfer_from_kraus(ops: np.ndarray) -> np.ndarray:
    """Transfer stack for Kraus operators that each shift photon number by a fixed amount."""
    dim = ops.shape[-1]
    T = np.zeros((2 * dim - 1, dim, dim), dtype=ops.dtype)
    for delta, rows, cols in _offset_blocks(dim):
        a = ops[:, rows][:, :, rows]
        b = ops[:, cols][:, :, cols]
        T[delta + dim - 1][np.ix_(rows, rows)] = np.sum(a * b.conj(), axis=0)
    return T


@lru_cache(maxsize=64)
def _loss_transfer(kappa: float, dim: int) -> np.ndarray:
    T = transfer_from_kraus(loss_kraus(kappa, dim).operators)
    T.setflags(write=False)
    return T


@lru_cache(maxsize=64)
def _agn_transfer(noise: float, dim: int) -> np.ndarray:
    # Phase-averaged Gauss-Laguerre rule. The angular average of
    # D(beta) rho D(beta)^dag is taken analytically (it keeps only matching
    # offsets). Radially, F_jm(r) F_kn(r) = e^{-s} * poly(s) with s = r^2 and
    # degree <= 2(dim-1), so dim + 2 nodes make the rule exact on the truncation.
    order = dim + 2
    t, w = laggauss(order)
    s = t * noise / (noise + 1.0)
    with np.errstate(divide="ignore"):
        weights = np.exp(np.log(w) + s) / (noise + 1.0)
    F = real_displacement_matrices(np.sqrt(s), dim)
    T = np.zeros((2 * dim - 1, dim, dim))
    for delta, rows, cols in _offset_blocks(dim):
        a = F[:, rows][:, :, rows]
        b = F[:, cols][:, :, cols]
        T[delta + dim - 1][np.ix_(rows, rows)] = np.tensordot(weights, a * b, axes=1)
    T.setflags(write=False)
    return T


def hermite_nodes(noise: float, order: int = 21) -> tuple[np.ndarray, np.ndarray]:
    """Tensor Gauss-Hermite rule for the density e^{-|b|^2/N}/(pi N) on the complex plane."""
    u, w = hermgauss(order)
    scale = math.sqrt(noise)
    beta = scale * (u[:, None] + 1j * u[None, :])
    weights = (w[:, None] * w[None, :]) / math.pi
    return beta.ravel(), weights.ravel()


def _apply_transfer(T: np.ndarray, t: np.ndarray, mode: int, modes: int) -> np.ndarray:
    x = np.moveaxis(t, (mode, modes + mode), (0, 1))
    dim = x.shape[0]
    out = np.zeros(x.shape, dtype=complex)
    for delta, rows, cols in _offset_blocks(dim):
        block = T[delta + dim - 1][np.ix_(rows, rows)]
        out[rows, cols] = np.tensordot(block, x[rows, cols], axes=1)
    return np.moveaxis(out, (0, 1), (mode, modes + mode))


def _apply_nodes(betas, weights, t: np.ndarray, mode: int, modes: int, chunk: int = 64) -> np.ndarray:
    x = np.moveaxis(t, (mode, modes + mode), (0, 1))
    dim = x.shape[0]
    out = np.zeros(x.shape, dtype=complex)
    for start in range(0, len(betas), chunk):
        D = displacement_matrices(betas[start : start + chunk], dim)
        w = weights[start : start + chunk]
        y = np.tensordot(D, x, axes=([2], [0]))  # (i, j, n, ...)
        out += np.einsum("i,ijn...,ikn->jk...", w, y, D.conj())
    return np.moveaxis(out, (0, 1), (mode, modes + mode))


def _finish(rho: DensityMatrix, t: np.ndarray, classical: bool) -> DensityMatrix:
    n = rho.cutoff.total
    data = t.reshape(n, n)
    data = 0.5 * (data + data.conj().T)
    out_trace = float(np.trace(data).real)
    leak = rho.leakage + max(0.0, rho.trace - out_trace)
    return DensityMatrix(data, rho.cutoff, leak, classical)


def apply_loss(rho: DensityMatrix, kappa_vec) -> DensityMatrix:
    """Pure-loss channel with per-mode transmittance (scalar broadcasts to every mode)."""
    kappa = _per_mode(kappa_vec, rho.modes)
    _check_kappa(kappa)
    t = rho.tensor()
    for mode, k in enumerate(kappa):
        if k == 1.0:
            continue
        t = _apply_transfer(_loss_transfer(k, rho.dims[mode]), t, mode, rho.modes)
    return _finish(rho, t, rho.classical)


def required_headroom(noise: float) -> int:
    return int(math.ceil(6.0 * math.sqrt(noise) + 3.0 * noise))


def apply_agn(
    rho: DensityMatrix,
    noise_vec,
    rule: str = "laguerre",
    order: int = 21,
    check_headroom: bool = True,
) -> DensityMatrix:
    """Additive Gaussian noise: rho -> int e^{-|b|^2/N}/(pi N) D(b) rho D(b)^dag d^2 b, per mode.

    ``rule="laguerre"`` (default) is exact on the truncated space.
    ``rule="hermite"`` uses an ``order`` x ``order`` tensor Gauss-Hermite grid
    and is kept for convergence comparisons.
    """
    noise = _per_mode(noise_vec, rho.modes)
    _check_noise(noise)
    if check_headroom:
        for mode, n in enumerate(noise):
            if n == 0:
                continue
            need = required_headroom(n)
            have = rho.dims[mode] - 1 - occupied_level(rho, mode)
            if have < need:
                raise CutoffHeadroomInsufficient(
                    f"mode {mode}: {have} free Fock levels, AGN N={n:g} needs {need}"
                )
    t = rho.tensor()
    for mode, n in enumerate(noise):
        if n == 0:
            continue
        if rule == "laguerre":
            t = _apply_transfer(_agn_transfer(n, rho.dims[mode]), t, mode, rho.modes)
        elif rule == "hermite":
            betas, weights = hermite_nodes(n, order)
            t = _apply_nodes(betas, weights, t, mode, rho.modes)
        else:
            raise InvalidParameter(f"unknown quadrature rule {rule!r}")
    # unit noise on every mode makes any input classical
    return _finish(rho, t, rho.classical or all(n >= 1.0 for n in noise))


def apply_channel(rho: DensityMatrix, spec: ChannelSpec, **agn_kw) -> DensityMatrix:
    """Loss then AGN, i.e. G_N L_kappa rho."""
    if spec.modes != rho.modes:
        raise InvalidParameter(f"channel has {spec.modes} modes, state has {rho.modes}")
    out = apply_agn(apply_loss(rho, spec.kappa), spec.noise, **agn_kw)
    if not out.classical and all(n >= k for n, k in zip(spec.noise, spec.kappa)):
        # noise at least the transmittance on every mode classicalizes
        out = DensityMatrix(out.data, out.cutoff, out.leakage, True)
    return out


def apply_kraus(rho: DensityMatrix, ops: np.ndarray, mode: int = 0) -> DensityMatrix:
    """Generic operator-sum action on one mode (reference path, no structure assumed)."""
    x = np.moveaxis(rho.tensor(), (mode, rho.modes + mode), (0, 1))
    y = np.tensordot(ops, x, axes=([2], [0]))
    out = np.einsum("ijn...,ikn->jk...", y, np.conj(ops))
    out = np.moveaxis(out, (0, 1), (mode, rho.modes + mode))
    return _finish(rho, out, False)


def commutation_defect(rho: DensityMatrix, kappa: float, noise: float) -> float:
    """Trace norm of L_kappa G_N rho - G_{kappa N} L_kappa rho (same kappa, N on every mode)."""
    from .bounds import trace_norm

    lhs = apply_loss(apply_agn(rho, noise), kappa)
    rhs = apply_agn(apply_loss(rho, kappa), kappa * noise)
    return trace_norm(lhs.data - rhs.data)
