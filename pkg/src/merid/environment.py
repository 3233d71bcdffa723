"""Unavoidable environmental decoherence: residual gas and thermal radiation.

Scattering sources are tied to the generic (gamma, a) description by the
connection relations a = lambda_th / 2 and gamma = lambda_th^2 Lambda, with
lambda_th the thermal wavelength of the scattered particle. The mean gas
velocity is taken as the rms speed sqrt(3 k_B T / m_a), the only choice that
makes the gas formulas below satisfy those relations exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .constants import CONST, EnvironmentSpec, SphereSpec, clausius_mossotti
from .localization import LocalizationModel

__all__ = [
    "ZETA_9",
    "BlackbodyBreakdown",
    "air_thermal_wavelength",
    "air_mean_velocity",
    "air_localization_parameter",
    "air_saturation_rate",
    "air_model",
    "bb_thermal_wavelength",
    "blackbody_localization",
    "blackbody_model",
]

ZETA_9 = 1.002008392826082
_HB, _KB, _C = CONST.hbar, CONST.k_b, CONST.c


def air_thermal_wavelength(env: EnvironmentSpec) -> float:
    """2 pi hbar / sqrt(2 pi m_a k_B T_e), which is also 2 a_air."""
    return 2.0 * math.pi * _HB / math.sqrt(2.0 * math.pi * env.gas_mass * _KB * env.T_env)


def air_mean_velocity(env: EnvironmentSpec) -> float:
    return math.sqrt(3.0 * _KB * env.T_env / env.gas_mass)


def air_localization_parameter(env: EnvironmentSpec, sphere: SphereSpec) -> float:
    v = air_mean_velocity(env)
    R = sphere.radius
    return 8.0 * math.sqrt(2.0 * math.pi) * env.gas_mass * v * env.pressure * R * R / (3.0 * math.sqrt(3.0) * _HB**2)


def air_saturation_rate(env: EnvironmentSpec, sphere: SphereSpec) -> float:
    """Rate at which gas collisions destroy coherence beyond 2 a_air (1/s)."""
    v = air_mean_velocity(env)
    R = sphere.radius
    return 16.0 * math.pi * math.sqrt(2.0 * math.pi) / math.sqrt(3.0) * env.pressure * R * R / (v * env.gas_mass)


def air_model(env: EnvironmentSpec, sphere: SphereSpec) -> LocalizationModel:
    """Saturating model for gas scattering.

    Zero pressure gives a zero-strength quadratic model, since a saturating
    model needs gamma > 0.
    """
    if env.pressure == 0:
        return LocalizationModel.quadratic(0.0, label="air")
    lam = air_thermal_wavelength(env)
    gamma = air_saturation_rate(env, sphere)
    Lam = air_localization_parameter(env, sphere)
    if abs(gamma - lam * lam * Lam) > 1e-6 * gamma:
        raise AssertionError(f"gas scattering rates inconsistent: gamma={gamma!r}, lambda^2 Lambda={lam * lam * Lam!r}")
    return LocalizationModel.saturating(gamma, lam / 2.0, label="air")


def bb_thermal_wavelength(T_e: float) -> float:
    """pi^(2/3) hbar c / (k_B T_e), which is also 2 a_bb."""
    if not T_e > 0:
        raise ValueError("temperature must be positive")
    return math.pi ** (2.0 / 3.0) * _HB * _C / (_KB * T_e)


@dataclass(frozen=True)
class BlackbodyBreakdown:
    lambda_sc: float
    lambda_emit: float
    lambda_abs: float

    @property
    def total(self) -> float:
        return self.lambda_sc + self.lambda_emit + self.lambda_abs


def _emission_like(R: float, T: float, im_cm: float) -> float:
    return 16.0 * math.pi**5 * _C * R**3 / 189.0 * (_KB * T / (_HB * _C)) ** 6 * im_cm


def blackbody_localization(sphere: SphereSpec, env: EnvironmentSpec) -> BlackbodyBreakdown:
    """Thermal-photon localization parameters in the long-wavelength limit.

    Scattering and absorption use the environment temperature and emission
    uses the sphere's internal temperature.
    """
    cm = clausius_mossotti(sphere.eps_bb)
    if cm.imag < 0:
        raise ValueError("Clausius-Mossotti factor has negative imaginary part")
    R = sphere.radius
    sc = (math.factorial(8) * 8.0 * ZETA_9 * _C * R**6 / (9.0 * math.pi)
          * (_KB * env.T_env / (_HB * _C)) ** 9 * cm.real**2)
    return BlackbodyBreakdown(
        lambda_sc=sc,
        lambda_emit=_emission_like(R, sphere.T_internal, cm.imag),
        lambda_abs=_emission_like(R, env.T_env, cm.imag),
    )


def blackbody_model(sphere: SphereSpec, env: EnvironmentSpec, saturating: bool = False) -> LocalizationModel:
    """Thermal-radiation model; pure-quadratic unless `saturating` is set."""
    total = blackbody_localization(sphere, env).total
    if saturating and total > 0:
        a = bb_thermal_wavelength(env.T_env) / 2.0
        return LocalizationModel.saturating(4.0 * a * a * total, a, label="blackbody")
    return LocalizationModel.quadratic(total, label="blackbody")
