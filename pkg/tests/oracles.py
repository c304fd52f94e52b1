"""Independent reference computations used only by the tests.

None of these share code with the package's channel or displacement paths.
"""

from __future__ import annotations

import math

import mpmath as mp
import numpy as np


def displacement_element(m: int, n: int, beta: complex, dps: int = 40) -> complex:
    """<m|D(beta)|n> from the closed Laguerre form, in extended precision."""
    mp.mp.dps = dps
    b = mp.mpc(beta.real, beta.imag)
    if m >= n:
        k = m - n
        x = abs(b) ** 2
        lag = mp.fsum(
            (-1) ** j * mp.binomial(m, n - j) * x**j / mp.factorial(j) for j in range(n + 1)
        )
        val = mp.sqrt(mp.factorial(n) / mp.factorial(m)) * b**k * mp.exp(-x / 2) * lag
    else:
        val = (-1) ** (n - m) * mp.conj(displacement_element(n, m, beta, dps))
    return complex(val)


def poisson(mean: float, dim: int) -> np.ndarray:
    n = np.arange(dim)
    return np.array([math.exp(-mean + k * math.log(mean) - math.lgamma(k + 1)) if mean > 0 else float(k == 0) for k in n])


def thermal_diagonal(nbar: float, dim: int) -> np.ndarray:
    return (1.0 / (nbar + 1.0)) * (nbar / (nbar + 1.0)) ** np.arange(dim)


def _loss_ops(eta: float, dim: int) -> list[np.ndarray]:
    ops = []
    for k in range(dim):
        A = np.zeros((dim, dim))
        for n in range(k, dim):
            A[n - k, n] = math.sqrt(math.comb(n, k) * eta ** (n - k) * (1 - eta) ** k)
        ops.append(A)
    return ops


def _amplifier_ops(gain: float, dim: int) -> list[np.ndarray]:
    # <n+k|B_k|n> = sqrt(C(n+k, k) ((G-1)/G)^k G^-(n+1))
    x = (gain - 1.0) / gain
    ops = []
    for k in range(dim):
        B = np.zeros((dim, dim))
        for n in range(dim - k):
            B[n + k, n] = math.sqrt(math.comb(n + k, k) * x**k * gain ** (-(n + 1)))
        ops.append(B)
    return ops


def _kraus(ops, rho):
    return sum(K @ rho @ K.conj().T for K in ops)


def agn_by_loss_and_amplifier(rho: np.ndarray, noise: float) -> np.ndarray:
    """Single-mode AGN written as loss 1/(1+N) followed by a quantum-limited amplifier of gain 1+N.

    Loss only lowers photon number and the amplifier only raises it, so the
    first ``dim`` output levels are exact even though both maps are truncated.
    """
    if noise == 0:
        return rho.copy()
    dim = rho.shape[0]
    g = 1.0 + noise
    return _kraus(_amplifier_ops(g, dim), _kraus(_loss_ops(1.0 / g, dim), rho))


def loss_single_mode(rho: np.ndarray, kappa: float) -> np.ndarray:
    return _kraus(_loss_ops(kappa, rho.shape[0]), rho)
