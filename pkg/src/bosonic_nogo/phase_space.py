"""Characteristic functions, quasi-probability grids and P-function state synthesis.

P-functions are never obtained by deconvolution. They come from a Q or W
function that is already known to be the P-function of some channel output
(unit-noise or half-noise identifications, or the loss-plus-noise rescaling
in ``theorem1_p_output``).

Grids are midpoint lattices: for one mode the samples sit at
``x_i + 1j * y_j`` with ``x, y = -R + spacing/2 + k*spacing``; two-mode grids
are the Cartesian product of two such lattices, values shaped ``(n, n, n, n)``.
All integrals are midpoint Riemann sums.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy.special import gammaln

from .channels import apply_agn
from .errors import (
    ArgumentOutOfReliableRange,
    GridTooSmall,
    InvalidParameter,
    InvalidTransmittance,
    NegativePFunction,
)
from .fock import (
    MAX_DISPLACEMENT_SQ,
    DensityMatrix,
    FockCutoff,
    as_cutoff,
    coherent_amplitudes,
    displacement_matrices,
    mean_photon_number,
)

GRID_TOLERANCE = 1e-4
NEGATIVE_TOL = 1e-12
KINDS = ("grid", "chi_N", "chi_A", "chi_W", "Q", "W", "P")


@dataclass(frozen=True, eq=False)
class PhaseSpaceGrid:
    extent: float
    spacing: float
    modes: int = 1
    kind: str = "grid"
    values: np.ndarray | None = None

    def __post_init__(self):
        if not self.spacing > 0 or not self.extent > 0:
            raise InvalidParameter("grid spacing and extent must be positive")
        if self.modes not in (1, 2):
            raise InvalidParameter("phase-space grids support one or two modes")
        if self.kind not in KINDS:
            raise InvalidParameter(f"unknown grid kind {self.kind!r}")
        if self.values is not None:
            vals = np.asarray(self.values)
            if vals.shape != (self.n,) * (2 * self.modes):
                raise InvalidParameter(f"values shape {vals.shape} does not fit the grid")
            vals = vals.copy()
            vals.setflags(write=False)
            object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return max(1, int(round(2 * self.extent / self.spacing)))

    @property
    def axis(self) -> np.ndarray:
        return -self.extent + self.spacing * (np.arange(self.n) + 0.5)

    @property
    def points(self) -> np.ndarray:
        """Single-mode lattice of complex amplitudes, shape ``(n, n)``, ``[re, im]`` indexing."""
        ax = self.axis
        return ax[:, None] + 1j * ax[None, :]

    @property
    def cell(self) -> float:
        return self.spacing ** (2 * self.modes)

    def with_values(self, values: np.ndarray, kind: str) -> "PhaseSpaceGrid":
        return replace(self, values=values, kind=kind)

    def riemann_sum(self) -> float:
        if self.values is None:
            raise InvalidParameter("grid has no values")
        return float(np.sum(self.values).real * self.cell)

    def to_csv(self, path) -> None:
        """Write ``re_alpha, im_alpha, value`` rows (single-mode grids)."""
        if self.modes != 1 or self.values is None:
            raise InvalidParameter("CSV export needs a single-mode grid with values")
        pts = self.points.ravel()
        vals = self.values.ravel()
        with open(Path(path), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["re_alpha", "im_alpha", "value"])
            for a, v in zip(pts, vals):
                v = v.real if np.isrealobj(vals) or abs(v.imag) == 0 else v
                w.writerow([f"{a.real:.12g}", f"{a.imag:.12g}", f"{v:.12g}"])


def default_grid(rho: DensityMatrix, spacing: float | None = None) -> PhaseSpaceGrid:
    """Extent 1 + 4(1 + support) where support = max_i sqrt(<n_i>); spacing 0.1 (0.25 for two modes)."""
    support = max(math.sqrt(max(mean_photon_number(rho, i), 0.0)) for i in range(rho.modes))
    if spacing is None:
        spacing = 0.1 if rho.modes == 1 else 0.25
    return PhaseSpaceGrid(1.0 + 4.0 * (1.0 + support), spacing, modes=rho.modes)


# ---------------------------------------------------------------- characteristic functions


def _lower_exponential(mu: complex, dim: int) -> np.ndarray:
    # <m|exp(-mu a^dag)|n> = (-mu)^(m-n) sqrt(m!/n!) / (m-n)!, m >= n
    m = np.arange(dim)[:, None]
    n = np.arange(dim)[None, :]
    k = m - n
    mask = k >= 0
    kk = np.where(mask, k, 0)
    mag = np.exp(0.5 * (gammaln(m + 1) - gammaln(n + 1)) - gammaln(kk + 1))
    return np.where(mask, mag * (-mu) ** kk, 0.0)


def _upper_exponential(mu: complex, dim: int) -> np.ndarray:
    # exp(mu* a) is the adjoint of exp(mu a^dag) = lower(-mu)
    return _lower_exponential(-mu, dim).conj().T


def reliable_radius(dim: int, ordering: str) -> float:
    r = 2.0 * math.sqrt(dim)
    if ordering == "A":
        # the antinormal product needs an intermediate sum with cancellations ~ e^{2|mu|^2}
        r = min(r, 3.0)
    return min(r, math.sqrt(MAX_DISPLACEMENT_SQ))


def _mode_operator(mu: complex, dim: int, ordering: str) -> np.ndarray:
    if abs(mu) > reliable_radius(dim, ordering):
        raise ArgumentOutOfReliableRange(
            f"|mu| = {abs(mu):.3g} beyond reliable radius {reliable_radius(dim, ordering):.3g} for dim {dim}"
        )
    if ordering == "N":
        return _lower_exponential(mu, dim) @ _upper_exponential(mu, dim)
    if ordering == "A":
        pad = dim + 40 + int(math.ceil(8 * abs(mu) ** 2))
        return (_upper_exponential(mu, pad) @ _lower_exponential(mu, pad))[:dim, :dim]
    if ordering == "W":
        return displacement_matrices([-mu], dim)[0]
    raise InvalidParameter(f"ordering must be N, A or W, got {ordering!r}")


def char_func(rho: DensityMatrix, mu, ordering: str = "W") -> complex:
    """chi(mu) = tr[rho O(mu)] with O the N-, A- or W-ordered displacement exponential.

    ``mu`` is a scalar (single mode) or one value per mode. Normal ordering is
    exact on the truncation (its intermediate sum stays below the cutoff),
    antinormal ordering is evaluated in a padded space and then truncated.
    """
    mus = np.atleast_1d(np.asarray(mu, dtype=complex))
    if mus.size != rho.modes:
        raise InvalidParameter(f"{mus.size} arguments for a {rho.modes}-mode state")
    t = rho.tensor()
    m = rho.modes
    # contract each mode's column index with the operator's row index, then trace
    for i, (z, d) in enumerate(zip(mus, rho.dims)):
        op = _mode_operator(complex(z), d, ordering)
        t = np.moveaxis(np.tensordot(t, op, axes=([m + i], [0])), -1, m + i)
    letters = "abcdefghij"[:m]
    return complex(np.einsum(letters + letters + "->", t))


def char_func_grid(rho: DensityMatrix, grid: PhaseSpaceGrid, ordering: str = "W") -> PhaseSpaceGrid:
    if rho.modes != 1 or grid.modes != 1:
        raise InvalidParameter("char_func_grid is single-mode")
    pts = grid.points
    if ordering == "W":
        vals = _weyl_values(rho, -pts.ravel()).reshape(pts.shape)
    else:
        vals = np.array([char_func(rho, z, ordering) for z in pts.ravel()]).reshape(pts.shape)
    return grid.with_values(vals, f"chi_{ordering}")


def _weyl_values(rho: DensityMatrix, betas: np.ndarray, chunk: int = 2048) -> np.ndarray:
    # tr[rho D(beta)] for many beta
    d = rho.dims[0]
    out = np.empty(betas.size, dtype=complex)
    for s in range(0, betas.size, chunk):
        D = displacement_matrices(betas[s : s + chunk], d)
        out[s : s + chunk] = np.einsum("mn,bnm->b", rho.data, D)
    return out


# ---------------------------------------------------------------- Q, W, P


def _q_on_points(rho: DensityMatrix, per_mode_points: list[np.ndarray]) -> np.ndarray:
    """<alpha|rho|alpha>/pi^m on the product of the given per-mode point sets."""
    if rho.modes == 1:
        c = coherent_amplitudes(per_mode_points[0], rho.dims[0])
        q = np.einsum("pi,ij,pj->p", c.conj(), rho.data, c).real / math.pi
        return q
    if rho.modes == 2:
        d1, d2 = rho.dims
        c1 = coherent_amplitudes(per_mode_points[0], d1)
        c2 = coherent_amplitudes(per_mode_points[1], d2)
        # <a1,a2|rho|a1,a2> = sum (c1*_i c1_k)(c2*_j c2_l) rho[(i,j),(k,l)]
        k1 = (c1.conj()[:, :, None] * c1[:, None, :]).reshape(len(c1), d1 * d1)
        k2 = (c2.conj()[:, :, None] * c2[:, None, :]).reshape(len(c2), d2 * d2)
        r = rho.tensor().transpose(0, 2, 1, 3).reshape(d1 * d1, d2 * d2)
        return (k1 @ r @ k2.T).real / math.pi**2
    raise InvalidParameter("Q evaluation supports one or two modes")


def _check_normalization(grid: PhaseSpaceGrid, target: float, tol: float, what: str) -> None:
    total = grid.riemann_sum()
    if abs(total - target) > tol:
        raise GridTooSmall(f"{what}: grid integral {total:.8f} vs expected {target:.8f} (tolerance {tol:g})")


def q_function(rho: DensityMatrix, grid: PhaseSpaceGrid, grid_tolerance: float = GRID_TOLERANCE) -> PhaseSpaceGrid:
    if grid.modes != rho.modes:
        raise InvalidParameter("grid and state have different mode counts")
    pts = grid.points.ravel()
    q = _q_on_points(rho, [pts] * rho.modes)
    out = grid.with_values(q.reshape((grid.n,) * (2 * grid.modes)), "Q")
    _check_normalization(out, rho.trace, grid_tolerance, "q_function")
    return out


def wigner_function(rho: DensityMatrix, grid: PhaseSpaceGrid, grid_tolerance: float = GRID_TOLERANCE) -> PhaseSpaceGrid:
    """W(alpha) = (2/pi) tr[rho D(2 alpha) Parity], exact on the truncation (single mode)."""
    if rho.modes != 1 or grid.modes != 1:
        raise InvalidParameter("wigner_function is single-mode")
    d = rho.dims[0]
    parity = (-1.0) ** np.arange(d)
    pts = grid.points.ravel()
    vals = np.empty(pts.size)
    # tr[rho D Pi] = sum_{mn} rho_mn D_nm (-1)^m
    weighted = rho.data * parity[None, :]
    for s in range(0, pts.size, 2048):
        D = displacement_matrices(2 * pts[s : s + 2048], d)
        vals[s : s + 2048] = (2 / math.pi) * np.einsum("mn,bnm->b", weighted.T, D).real
    out = grid.with_values(vals.reshape(grid.n, grid.n), "W")
    _check_normalization(out, rho.trace, grid_tolerance, "wigner_function")
    return out


def state_from_p(p_grid: PhaseSpaceGrid, cutoff, grid_tolerance: float = GRID_TOLERANCE) -> DensityMatrix:
    """Riemann-sum mixture sum_j P(alpha_j) cell |alpha_j><alpha_j| of truncated coherent projectors."""
    if p_grid.values is None:
        raise InvalidParameter("P grid has no values")
    vals = np.asarray(p_grid.values)
    if np.iscomplexobj(vals):
        if np.max(np.abs(vals.imag)) > NEGATIVE_TOL:
            raise NegativePFunction("P function has an imaginary part")
        vals = vals.real
    if vals.min() < -NEGATIVE_TOL:
        raise NegativePFunction(f"P function takes negative value {vals.min():.3e}")
    _check_normalization(p_grid, 1.0, grid_tolerance, "state_from_p")
    cut = as_cutoff(cutoff, modes=p_grid.modes)
    if cut.modes != p_grid.modes:
        raise InvalidParameter("cutoff and grid have different mode counts")
    w = np.clip(vals, 0.0, None) * p_grid.cell
    pts = p_grid.points.ravel()
    if p_grid.modes == 1:
        c = coherent_amplitudes(pts, cut.dims[0])
        data = np.einsum("p,pi,pj->ij", w.ravel(), c, c.conj())
    else:
        d1, d2 = cut.dims
        c1 = coherent_amplitudes(pts, d1)
        c2 = coherent_amplitudes(pts, d2)
        k1 = (c1[:, :, None] * c1.conj()[:, None, :]).reshape(pts.size, d1 * d1)
        k2 = (c2[:, :, None] * c2.conj()[:, None, :]).reshape(pts.size, d2 * d2)
        t = (k1.T @ w.reshape(pts.size, pts.size) @ k2).reshape(d1, d1, d2, d2)
        data = t.transpose(0, 2, 1, 3).reshape(cut.total, cut.total)
    data = 0.5 * (data + data.conj().T)
    leak = max(0.0, 1.0 - float(np.trace(data).real))
    return DensityMatrix(data, cut, leak, classical=True)


def theorem1_p_output(rho_in: DensityMatrix, kappa_vec, grid: PhaseSpaceGrid, grid_tolerance: float = GRID_TOLERANCE) -> PhaseSpaceGrid:
    """P-function of G_kappa L_kappa rho: (prod 1/kappa_i) Q_rho(alpha_i / sqrt(kappa_i))."""
    kappa = np.atleast_1d(np.asarray(kappa_vec, dtype=float))
    if kappa.size == 1 and rho_in.modes > 1:
        kappa = np.repeat(kappa, rho_in.modes)
    if kappa.size != rho_in.modes:
        raise InvalidParameter("one transmittance per mode")
    if np.any(~(kappa > 0)) or np.any(kappa > 1):
        raise InvalidTransmittance(f"transmittance must lie in (0, 1], got {kappa}")
    if grid.modes != rho_in.modes:
        raise InvalidParameter("grid and state have different mode counts")
    pts = grid.points.ravel()
    q = _q_on_points(rho_in, [pts / math.sqrt(k) for k in kappa])
    p = q / float(np.prod(kappa))
    out = grid.with_values(p.reshape((grid.n,) * (2 * grid.modes)), "P")
    _check_normalization(out, rho_in.trace, grid_tolerance, "theorem1_p_output")
    return out


def classical_counterpart(rho_in: DensityMatrix) -> DensityMatrix:
    """G_1 rho: one unit of AGN per mode; its P-function is the Q-function of ``rho_in``."""
    return apply_agn(rho_in, 1.0)


def reconstruct_with_refinement(
    build_p, cutoff: FockCutoff, spacing: float, target_change: float, max_halvings: int = 3
):
    """Halve the grid spacing until successive reconstructions move by less than ``target_change``.

    ``build_p(spacing)`` must return a P grid. Returns the last state, the
    spacing used and the list of successive trace-distance changes.
    """
    from .bounds import trace_distance

    rho = state_from_p(build_p(spacing), cutoff)
    changes = []
    for _ in range(max_halvings):
        spacing /= 2.0
        nxt = state_from_p(build_p(spacing), cutoff)
        changes.append(trace_distance(rho, nxt))
        rho = nxt
        if changes[-1] < target_change:
            break
    return rho, spacing, changes


def wigner_from_char(chi_grid: PhaseSpaceGrid, alphas: np.ndarray) -> np.ndarray:
    """Fourier transform of sampled chi_W: W(a) = pi^-2 sum chi(mu) exp(a* mu - a mu*) cell."""
    if chi_grid.kind != "chi_W" or chi_grid.values is None:
        raise InvalidParameter("need a chi_W grid")
    ax = chi_grid.axis
    alphas = np.asarray(alphas, dtype=complex)
    x = alphas.real.ravel()
    y = alphas.imag.ravel()
    # a* mu - a mu* = 2i (x v - y u) for mu = u + iv, a = x + iy
    eu = np.exp(-2j * np.outer(y, ax))
    ev = np.exp(2j * np.outer(x, ax))
    vals = np.einsum("uv,pu,pv->p", chi_grid.values, eu, ev) * chi_grid.spacing**2 / math.pi**2
    return vals.reshape(alphas.shape)
