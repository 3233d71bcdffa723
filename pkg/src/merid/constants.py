"""Physical constants, unit conversions and the default experimental parameters.

Everything is SI internally. Torr, nm and amu only appear at input boundaries
(configuration files and the command line) and are converted here.

Constants are CODATA 2018. The nucleon mass used by the collapse models is one
unified atomic mass unit.
"""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

__all__ = [
    "PhysicalConstants",
    "CONST",
    "TORR",
    "AMU",
    "torr_to_pascal",
    "pascal_to_torr",
    "SphereSpec",
    "EnvironmentSpec",
    "TrapSpec",
    "DefaultParameterSet",
    "DEFAULTS",
    "sphere_volume",
    "sphere_mass",
    "clausius_mossotti",
]

# 1 Torr = 101325/760 Pa
TORR = 133.322368
AMU = 1.66053906660e-27


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = 1.054571817e-34
    k_b: float = 1.380649e-23
    c: float = 299792458.0
    G: float = 6.67430e-11
    amu: float = AMU
    m_nucleon: float = AMU
    m_planck: float = 2.176434e-8
    l_planck: float = 1.616255e-35

    def __post_init__(self):
        for f in dataclasses.fields(self):
            if not getattr(self, f.name) > 0:
                raise ValueError(f"physical constant {f.name} must be positive")


CONST = PhysicalConstants()


def torr_to_pascal(p: float) -> float:
    """Convert a pressure in Torr to Pa."""
    if p < 0:
        raise ValueError(f"pressure must be non-negative, got {p!r} Torr")
    return p * TORR


def pascal_to_torr(p: float) -> float:
    if p < 0:
        raise ValueError(f"pressure must be non-negative, got {p!r} Pa")
    return p / TORR


def clausius_mossotti(eps: complex) -> complex:
    """(eps - 1) / (eps + 2)."""
    return (eps - 1) / (eps + 2)


@dataclass(frozen=True)
class SphereSpec:
    """Homogeneous dielectric sphere.

    Parameters
    ----------
    radius : float
        Radius in m.
    density : float
        Mass density in kg/m^3.
    eps_optical : complex
        Relative dielectric constant at the laser wavelength.
    eps_bb : complex
        Average dielectric constant over the thermal spectrum.
    T_internal : float
        Bulk temperature in K.
    """

    radius: float
    density: float = 2201.0
    eps_optical: complex = complex(2.1, 1e-10)
    eps_bb: complex = complex(2.1, 0.57)
    T_internal: float = 4.5

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"sphere radius must be positive, got {self.radius!r}")
        if not self.density > 0:
            raise ValueError(f"sphere density must be positive, got {self.density!r}")
        if self.T_internal < 0:
            raise ValueError("internal temperature must be non-negative")
        object.__setattr__(self, "eps_optical", complex(self.eps_optical))
        object.__setattr__(self, "eps_bb", complex(self.eps_bb))
        if self.eps_optical.imag < 0 or self.eps_bb.imag < 0:
            raise ValueError("dielectric constants must describe passive media (Im >= 0)")

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius

    @property
    def volume(self) -> float:
        return sphere_volume(self.radius)

    @property
    def mass(self) -> float:
        return sphere_mass(self)

    def with_radius(self, radius: float) -> "SphereSpec":
        return dataclasses.replace(self, radius=radius)


@dataclass(frozen=True)
class EnvironmentSpec:
    """Residual gas and thermal environment: pressure (Pa), temperature (K), gas molecule mass (kg)."""

    pressure: float
    T_env: float = 4.5
    gas_mass: float = 28.97 * AMU

    def __post_init__(self):
        if self.pressure < 0:
            raise ValueError("pressure must be non-negative")
        if not self.T_env > 0:
            raise ValueError("environment temperature must be positive")
        if not self.gas_mass > 0:
            raise ValueError("gas molecule mass must be positive")

    @classmethod
    def from_torr(cls, pressure_torr: float, **kwargs) -> "EnvironmentSpec":
        return cls(pressure=torr_to_pascal(pressure_torr), **kwargs)

    @property
    def pressure_torr(self) -> float:
        return pascal_to_torr(self.pressure)


@dataclass(frozen=True)
class TrapSpec:
    omega: float = 2 * math.pi * 100e3
    nbar: float = 0.1

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError("trap frequency must be positive")
        if self.nbar < 0:
            raise ValueError("mean occupation must be non-negative")


def sphere_volume(radius: float) -> float:
    return 4.0 / 3.0 * math.pi * radius**3


def sphere_mass(s: SphereSpec) -> float:
    """Mass of a homogeneous sphere, density * 4/3 pi R^3."""
    return s.density * sphere_volume(s.radius)


def _encode(value: Any) -> Any:
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


def _decode(name: str, value: Any, default: Any) -> Any:
    if isinstance(default, complex):
        if isinstance(value, (list, tuple)) and len(value) == 2:
            return complex(float(value[0]), float(value[1]))
        if isinstance(value, str):
            return complex(value.replace(" ", "").replace("i", "j"))
        return complex(value)
    if isinstance(value, str):
        return float(value)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise TypeError(f"parameter {name!r} expects a number, got {value!r}")
    return float(value)


@dataclass(frozen=True)
class DefaultParameterSet:
    """Experimental parameters shared by every calculation (SI units).

    Defaults are the fiber-cavity / silica-sphere values used throughout:
    rho = 2201 kg/m^3, eps_r = 2.1 + 1e-10 i, omega = 2 pi x 100 kHz,
    nbar = 0.1, T_e = 4.5 K, m_a = 28.97 amu, eps_bb = 2.1 + 0.57 i,
    delta_x = 0.1 nm, finesse 1.3e5, L = 2 um, lambda = 1064 nm, W_c = 1.5 um.
    """

    density: float = 2201.0
    eps_r: complex = complex(2.1, 1e-10)
    omega: float = 2 * math.pi * 100e3
    nbar: float = 0.1
    T_e: float = 4.5
    m_a: float = 28.97 * AMU
    eps_bb: complex = complex(2.1, 0.57)
    delta_x: float = 0.1e-9
    finesse: float = 1.3e5
    cavity_length: float = 2e-6
    wavelength: float = 1064e-9
    waist: float = 1.5e-6

    def to_dict(self) -> dict[str, Any]:
        return {f.name: _encode(getattr(self, f.name)) for f in dataclasses.fields(self)}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], base: "DefaultParameterSet | None" = None) -> "DefaultParameterSet":
        base = base or cls()
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise KeyError(f"unknown parameter(s): {', '.join(unknown)}")
        updates = {k: _decode(k, v, getattr(base, k)) for k, v in data.items()}
        return dataclasses.replace(base, **updates)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "DefaultParameterSet":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path: str | Path) -> "DefaultParameterSet":
        return cls.from_json(Path(path).read_text())

    # Convenience builders for the sphere, trap and environment records used by the physics modules.

    def sphere(self, radius: float, T_internal: float = 4.5) -> SphereSpec:
        return SphereSpec(radius=radius, density=self.density, eps_optical=self.eps_r,
                          eps_bb=self.eps_bb, T_internal=T_internal)

    def environment(self, pressure: float) -> EnvironmentSpec:
        return EnvironmentSpec(pressure=pressure, T_env=self.T_e, gas_mass=self.m_a)

    def trap(self) -> TrapSpec:
        return TrapSpec(omega=self.omega, nbar=self.nbar)


DEFAULTS = DefaultParameterSet()
