"""Cavity-optomechanical implementation of the squared-position measurement.

A short light pulse in a cavity couples to x^2 of the expanded sphere. The
phase read out by homodyne detection measures x^2 with strength chi, and the
pulse also scatters light, which localizes the sphere. Both effects, together
with the requirement that the cavity can be adiabatically eliminated, bound the
expansion time t1 from above. That bound (t1_om) and the matching largest
reachable chi are computed here in closed form.

Only closed-form results of the input/output treatment are implemented. The
pulse is taken to be flat-topped.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .constants import CONST, DefaultParameterSet, SphereSpec, TrapSpec, clausius_mossotti
from .gaussian import zero_point_motion

__all__ = [
    "CavitySpec",
    "OptomechBounds",
    "BranchValue",
    "cavity_from_params",
    "epsilon_c",
    "coupling_g0",
    "cavity_kappa",
    "empty_cavity_kappa",
    "sigma_squared",
    "photon_number",
    "photon_number_approx",
    "effective_coupling",
    "measurement_strength",
    "pulsed_measurement_strength",
    "double_slit_phase",
    "scattering_localization",
    "t1_bound",
    "chi_upper_bound",
    "pulsed_regime_check",
    "optomech_bounds",
]

_C = CONST.c
ADIABATIC = "adiabatic"
SCATTERING = "scattering"
PULSED_THRESHOLD = 0.1


@dataclass(frozen=True)
class CavitySpec:
    """Fabry-Perot cavity: finesse, length (m), wavelength (m), mode waist (m)."""

    finesse: float
    length: float
    wavelength: float
    waist: float

    def __post_init__(self):
        for name in ("finesse", "length", "wavelength", "waist"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"cavity {name} must be positive and finite, got {v!r}")

    @property
    def mode_volume(self) -> float:
        return math.pi * self.waist**2 * self.length / 4.0

    @property
    def k(self) -> float:
        return 2.0 * math.pi / self.wavelength


def cavity_from_params(params: DefaultParameterSet) -> CavitySpec:
    return CavitySpec(finesse=params.finesse, length=params.cavity_length,
                      wavelength=params.wavelength, waist=params.waist)


def epsilon_c(sphere: SphereSpec) -> float:
    """3 Re[(eps - 1)/(eps + 2)] at the laser wavelength."""
    return 3.0 * clausius_mossotti(sphere.eps_optical).real


def coupling_g0(sphere: SphereSpec, cavity: CavitySpec, trap: TrapSpec) -> float:
    """Quadratic optomechanical coupling rate g0 (1/s) in units of the zero-point motion."""
    x0 = zero_point_motion(sphere.mass, trap.omega)
    return epsilon_c(sphere) * x0 * x0 * cavity.k**3 * _C * sphere.volume / (4.0 * cavity.mode_volume)


def empty_cavity_kappa(cavity: CavitySpec) -> float:
    return math.pi * _C / (cavity.finesse * cavity.length)


def cavity_kappa(sphere: SphereSpec, cavity: CavitySpec) -> float:
    """Cavity amplitude decay rate: mirror losses plus light scattered out by the sphere."""
    eps = epsilon_c(sphere)
    scatter = _C * eps * eps * sphere.volume**2 * cavity.k**4 / (16.0 * math.pi * cavity.mode_volume)
    return empty_cavity_kappa(cavity) + scatter


def sigma_squared(t1: float, trap: TrapSpec, mass: float) -> float:
    """Ground-state width after free expansion, x0^2 (1 + (omega t1)^2)."""
    x0 = zero_point_motion(mass, trap.omega)
    return x0 * x0 * (1.0 + (trap.omega * t1) ** 2)


def photon_number(t1: float, trap: TrapSpec, mass: float, g0: float, kappa: float) -> float:
    """Pulse photon number that cancels the time-of-flight phase.

    Uses the exact expanded width; see :func:`photon_number_approx` for the
    large omega t1 form.
    """
    if not t1 > 0:
        raise ValueError("t1 must be positive")
    x0 = zero_point_motion(mass, trap.omega)
    return trap.omega * t1 * kappa * x0 * x0 / (8.0 * g0 * sigma_squared(t1, trap, mass))


def photon_number_approx(t1: float, trap: TrapSpec, g0: float, kappa: float) -> float:
    if not t1 > 0:
        raise ValueError("t1 must be positive")
    return kappa / (8.0 * g0 * t1 * trap.omega)


def effective_coupling(t1: float, trap: TrapSpec, mass: float, g0: float) -> float:
    """g_bar = g0 sigma^2 / x0^2, the coupling seen by the expanded packet."""
    x0 = zero_point_motion(mass, trap.omega)
    return g0 * sigma_squared(t1, trap, mass) / (x0 * x0)


def measurement_strength(t1: float, trap: TrapSpec, g0: float, kappa: float) -> float:
    """Phase-compensated strength chi = (omega t1)^(3/2) sqrt(g0 / kappa)."""
    if t1 < 0:
        raise ValueError("t1 must be non-negative")
    return (trap.omega * t1) ** 1.5 * math.sqrt(g0 / kappa)


def pulsed_measurement_strength(g_bar: float, n_ph: float, kappa: float) -> float:
    return 2.0 * math.sqrt(2.0) * g_bar * math.sqrt(n_ph) / kappa


def double_slit_phase(g_bar: float, n_ph: float, kappa: float) -> float:
    """Global phase imprinted by the classical part of the pulse, -2 g_bar n_ph / kappa."""
    return -2.0 * g_bar * n_ph / kappa


def scattering_localization(sphere: SphereSpec, cavity: CavitySpec, trap: TrapSpec) -> tuple[float, float]:
    """(Lambda0_sc, Gamma0_sc) for light scattered during the pulse.

    Gamma0_sc is Lambda0_sc x0^2.
    """
    eps = epsilon_c(sphere)
    lam0 = eps * eps * _C * sphere.volume**2 * cavity.k**6 / (6.0 * math.pi * cavity.mode_volume)
    x0 = zero_point_motion(sphere.mass, trap.omega)
    return lam0, lam0 * x0 * x0


@dataclass(frozen=True)
class BranchValue:
    """Value of a two-way minimum with both arguments and the one that binds."""

    value: float
    branch: str
    adiabatic: float
    scattering: float


def _rates(sphere, cavity, trap):
    g0 = coupling_g0(sphere, cavity, trap)
    kappa = cavity_kappa(sphere, cavity)
    gam0 = scattering_localization(sphere, cavity, trap)[1]
    return g0, kappa, gam0


def t1_bound(sphere: SphereSpec, cavity: CavitySpec, trap: TrapSpec) -> BranchValue:
    """Largest t1 compatible with adiabatic elimination and negligible light scattering."""
    g0, kappa, gam0 = _rates(sphere, cavity, trap)
    adi = math.sqrt(kappa / g0) / trap.omega
    sca = 4.0 * g0 / (gam0 * trap.omega)
    return BranchValue(min(adi, sca), ADIABATIC if adi <= sca else SCATTERING, adi, sca)


def chi_upper_bound(sphere: SphereSpec, cavity: CavitySpec, trap: TrapSpec) -> BranchValue:
    g0, kappa, gam0 = _rates(sphere, cavity, trap)
    adi = (kappa / g0) ** 0.25
    sca = 8.0 * g0 * g0 / math.sqrt(kappa * gam0**3)
    return BranchValue(min(adi, sca), ADIABATIC if adi <= sca else SCATTERING, adi, sca)


def pulsed_regime_check(trap: TrapSpec, T_pulse: float, threshold: float = PULSED_THRESHOLD) -> tuple[bool, float]:
    """Whether (2 nbar + 1) omega T / 4 stays at or below `threshold`; returns (passed, value)."""
    if not T_pulse > 0:
        raise ValueError("pulse length must be positive")
    value = (2.0 * trap.nbar + 1.0) * trap.omega * T_pulse / 4.0
    return value <= threshold, value


@dataclass(frozen=True)
class OptomechBounds:
    g0: float
    kappa: float
    Gamma0_sc: float
    t1_om: float
    chi_max: float
    branch: str
    omega: float
    mass: float

    def n_ph(self, t1: float) -> float:
        return photon_number(t1, TrapSpec(omega=self.omega), self.mass, self.g0, self.kappa)

    def chi(self, t1: float) -> float:
        return measurement_strength(t1, TrapSpec(omega=self.omega), self.g0, self.kappa)


def optomech_bounds(sphere: SphereSpec, cavity: CavitySpec, trap: TrapSpec) -> OptomechBounds:
    g0, kappa, gam0 = _rates(sphere, cavity, trap)
    t1 = t1_bound(sphere, cavity, trap)
    chi = chi_upper_bound(sphere, cavity, trap)
    return OptomechBounds(g0=g0, kappa=kappa, Gamma0_sc=gam0, t1_om=t1.value, chi_max=chi.value,
                          branch=t1.branch, omega=trap.omega, mass=sphere.mass)
