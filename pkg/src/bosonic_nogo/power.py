"""Signal power of a multimode transmitter: P = hbar * omega0 * Ns * W."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .errors import InvalidParameter

HBAR = 1.054571817e-34  # J s, CODATA 2018 (exact given h)
SPEED_OF_LIGHT = 299_792_458.0  # m/s, exact


@dataclass(frozen=True)
class PowerResult:
    Ns: float
    W: float
    omega0: float
    power_watts: float
    power_dbm: float
    Nmax: float | None = None
    Pmax: float | None = None
    within_limits: bool | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def omega_from_wavelength(wavelength: float) -> float:
    if not wavelength > 0:
        raise InvalidParameter("wavelength must be positive")
    return 2.0 * math.pi * SPEED_OF_LIGHT / wavelength


def watts_to_dbm(p: float) -> float:
    return 10.0 * math.log10(p / 1e-3)


def power_calc(
    Ns: float,
    W: float,
    *,
    wavelength: float | None = None,
    omega0: float | None = None,
    Nmax: float | None = None,
    Pmax: float | None = None,
) -> PowerResult:
    """Transmitted power for ``Ns`` photons per mode over bandwidth ``W`` (Hz).

    Give the carrier as either ``wavelength`` (m) or ``omega0`` (rad/s).
    When ``Nmax`` and/or ``Pmax`` are given, ``within_limits`` is true if
    Ns <= Nmax or P <= Pmax (either threshold suffices).
    """
    if (wavelength is None) == (omega0 is None):
        raise InvalidParameter("give exactly one of wavelength or omega0")
    if omega0 is None:
        omega0 = omega_from_wavelength(wavelength)
    for name, v in (("Ns", Ns), ("W", W), ("omega0", omega0)):
        if not (v > 0 and math.isfinite(v)):
            raise InvalidParameter(f"{name} must be positive and finite, got {v}")
    for name, v in (("Nmax", Nmax), ("Pmax", Pmax)):
        if v is not None and not v > 0:
            raise InvalidParameter(f"{name} must be positive, got {v}")
    watts = HBAR * omega0 * Ns * W
    ok = None
    if Nmax is not None or Pmax is not None:
        ok = (Nmax is not None and Ns <= Nmax) or (Pmax is not None and watts <= Pmax)
    return PowerResult(Ns, W, omega0, watts, watts_to_dbm(watts), Nmax, Pmax, ok)


def photon_rate(power_watts: float, *, wavelength: float | None = None, omega0: float | None = None) -> float:
    """Photons per second carried by ``power_watts`` at the given carrier."""
    if (wavelength is None) == (omega0 is None):
        raise InvalidParameter("give exactly one of wavelength or omega0")
    if omega0 is None:
        omega0 = omega_from_wavelength(wavelength)
    if not power_watts > 0:
        raise InvalidParameter("power must be positive")
    return power_watts / (HBAR * omega0)
