"""Collapse-model localization parameters for a homogeneous solid sphere.

Four models are covered: CSL, the quantum-gravity model (QG), Diosi-Penrose
(DP, with an optional microscopic mass-density cutoff r0) and Karolyhazy (K,
in its no-breathing limit). Each returns a :class:`LocalizationModel`.

Károlyházy coherence width
--------------------------
The macroscopic width is a_c = l_C (R / l_P)^(2/3) = (hbar^2 R^2 / (G m^3))^(1/3).
With an exponent of 3/2 instead, a_c comes out near 1e16 m for a 100 nm sphere
and the model would localize nothing.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .constants import CONST, SphereSpec
from .localization import LocalizationModel

__all__ = [
    "CslParams",
    "CollapseModelId",
    "MODEL_GRAMMAR",
    "csl_shape_f",
    "csl_model",
    "qg_model",
    "dp_model",
    "dp_microscopic_model",
    "k_coherence_width",
    "k_crossover_radius",
    "k_model",
    "model_for",
]

_SERIES_X = 0.1
_HB, _C, _G = CONST.hbar, CONST.c, CONST.G
M0 = CONST.m_nucleon


@dataclass(frozen=True)
class CslParams:
    """CSL parameters. Defaults are the GRW values; ``adler`` scales gamma0."""

    gamma0: float = 1e-16
    a_csl: float = 100e-9
    adler: float = 1.0

    def __post_init__(self):
        if not (self.gamma0 > 0 and self.a_csl > 0 and self.adler > 0):
            raise ValueError("CSL parameters must be positive")

    @property
    def rate(self) -> float:
        return self.gamma0 * self.adler


def csl_shape_f(x: float) -> float:
    """Geometric suppression f(x) = (6/x^4) [1 - 2/x^2 + (1 + 2/x^2) exp(-x^2)].

    f(0) = 1 and f decays as 6/x^4. Below x = 0.1 a Taylor series is used.
    """
    if x < 0:
        raise ValueError("argument must be non-negative")
    y = x * x
    if x < _SERIES_X:
        # 6 sum_k (-1)^k (k+1) y^k / (k+3)!
        total, fact = 0.0, 6.0
        for k in range(8):
            total += (-1) ** k * (k + 1) * y**k / fact
            fact *= k + 4
        return 6.0 * total
    E = math.expm1(-y)
    return 6.0 / (y * y) * (2.0 + E + 2.0 * E / y)


def csl_model(sphere: SphereSpec, params: CslParams = CslParams()) -> LocalizationModel:
    n2 = (sphere.mass / M0) ** 2
    gamma = n2 * params.rate * csl_shape_f(sphere.radius / params.a_csl)
    label = "csl" if params.adler == 1 else f"csl:adler={params.adler:g}"
    return LocalizationModel.saturating(gamma, params.a_csl, label=label)


def qg_model(sphere: SphereSpec) -> LocalizationModel:
    m = sphere.mass
    mP = CONST.m_planck
    Lam = _C**4 * m * m * M0**4 / (_HB**3 * mP**3)
    a = _HB * mP / (2.0 * _C * M0 * M0)
    return LocalizationModel.saturating(4.0 * a * a * Lam, a, label="qg")


def _dp_lambda(sphere: SphereSpec) -> float:
    return _G * sphere.mass**2 / (2.0 * sphere.radius**3 * _HB)


def dp_model(sphere: SphereSpec) -> LocalizationModel:
    """DP model with a = sqrt(3/5) R.

    That choice keeps both the quadratic coefficient G m^2 / (2 R^3 hbar) and
    the saturation rate 6 G m^2 / (5 R hbar) exact.
    """
    gamma = 6.0 * _G * sphere.mass**2 / (5.0 * sphere.radius * _HB)
    a = 0.5 * math.sqrt(gamma / _dp_lambda(sphere))
    return LocalizationModel.saturating(gamma, a, label="dp")


def dp_microscopic_model(sphere: SphereSpec, r0: float) -> LocalizationModel:
    """DP for a sphere built from balls of radius `r0`: Lambda enhanced by (R/r0)^3, 2a = r0."""
    if not 0 < r0 <= sphere.radius:
        raise ValueError(f"r0 must satisfy 0 < r0 <= R (got r0={r0!r}, R={sphere.radius!r})")
    Lam = (sphere.radius / r0) ** 3 * _dp_lambda(sphere)
    a = r0 / 2.0
    return LocalizationModel.saturating(4.0 * a * a * Lam, a, label=f"dp-micro:r0={r0 * 1e9:g}")


def k_crossover_radius(mass: float) -> float:
    """Radius at which the two K-model coherence widths coincide, l_C^3 / l_P^2."""
    lC = _HB / (mass * _C)
    return lC**3 / CONST.l_planck**2


def k_coherence_width(sphere: SphereSpec, branch: str = "macroscopic") -> float:
    """Coherence width a_c for the "macroscopic" or "microscopic" branch.

    The macroscopic width is the default at every size. The printed size
    condition compares R with a_K, which is infinite in the no-breathing limit,
    so it cannot pick a branch. The microscopic width l_C^3 / l_P^2 is available
    explicitly; :func:`k_crossover_radius` gives the radius where the two agree.
    """
    lP = CONST.l_planck
    lC = _HB / (sphere.mass * _C)
    if branch == "macroscopic":
        return lC * (sphere.radius / lP) ** (2.0 / 3.0)
    if branch == "microscopic":
        return (lC / lP) ** 2 * lC
    raise ValueError(f"unknown K-model branch {branch!r}")


def k_model(sphere: SphereSpec, branch: str = "macroscopic") -> LocalizationModel:
    a_c = k_coherence_width(sphere, branch)
    return LocalizationModel.quadratic(_HB / (8.0 * sphere.mass * a_c**4), label="k")


MODEL_GRAMMAR = "csl | csl:adler=<mult> | qg | dp | dp-micro:r0=<nm> | k"
_KINDS = ("csl", "qg", "dp", "dp-micro", "k")


@dataclass(frozen=True)
class CollapseModelId:
    """Which collapse model to evaluate.

    ``csl`` is used only when ``kind == "csl"`` and ``r0`` (m) only for
    ``"dp-micro"``.
    """

    kind: str
    csl: CslParams = CslParams()
    r0: float | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown collapse model {self.kind!r}; expected {MODEL_GRAMMAR}")
        if self.kind == "dp-micro" and not (self.r0 is not None and self.r0 > 0):
            raise ValueError("dp-micro needs r0 > 0")

    @classmethod
    def parse(cls, text: str) -> "CollapseModelId":
        """Parse the command-line form, for example ``csl:adler=1e4`` or ``dp-micro:r0=1``."""
        t = text.strip().lower()
        if t in ("csl", "qg", "dp", "k"):
            return cls(t)
        m = re.fullmatch(r"csl:adler=([0-9.eE+-]+)", t)
        if m:
            return cls("csl", csl=CslParams(adler=_number(m.group(1), text)))
        m = re.fullmatch(r"dp-micro:r0=([0-9.eE+-]+)", t)
        if m:
            return cls("dp-micro", r0=_number(m.group(1), text) * 1e-9)
        raise ValueError(f"unknown collapse model {text!r}; expected {MODEL_GRAMMAR}")

    def __str__(self) -> str:
        if self.kind == "csl" and self.csl.adler != 1:
            return f"csl:adler={self.csl.adler:g}"
        if self.kind == "dp-micro":
            return f"dp-micro:r0={self.r0 * 1e9:g}"
        return self.kind


def _number(s: str, text: str) -> float:
    try:
        return float(s)
    except ValueError:
        raise ValueError(f"bad number in model spec {text!r}") from None


def model_for(mid: CollapseModelId | str, sphere: SphereSpec) -> LocalizationModel:
    if isinstance(mid, str):
        mid = CollapseModelId.parse(mid)
    if mid.kind == "csl":
        return csl_model(sphere, mid.csl)
    if mid.kind == "qg":
        return qg_model(sphere)
    if mid.kind == "dp":
        return dp_model(sphere)
    if mid.kind == "dp-micro":
        return dp_microscopic_model(sphere, mid.r0)
    return k_model(sphere)
