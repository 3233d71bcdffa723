"""Second-moment dynamics of the centre-of-mass state.

Free flight keeps the state Gaussian, and position-localization decoherence
only adds diffusion terms to the second moments, so the state is tracked by
<x^2>, <p^2> and the symmetrized covariance <{x,p}> alone.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass

from .constants import CONST

__all__ = [
    "GaussianState",
    "ExpansionRecord",
    "zero_point_motion",
    "thermal_initial_state",
    "expand_free_coherent",
    "evolve_with_decoherence",
    "coherence_length",
    "coherence_length_schrodinger",
    "t_max_coherence",
    "xi_max",
]

HBAR = CONST.hbar
_EPS = sys.float_info.epsilon


@dataclass(frozen=True)
class GaussianState:
    """Gaussian centre-of-mass state described by its second moments.

    Attributes
    ----------
    mass : float
        Particle mass (kg).
    xx : float
        Position variance (m^2).
    pp : float
        Momentum variance (kg^2 m^2 / s^2).
    xp_sym : float
        Symmetrized covariance <xp + px> (kg m^2 / s).
    t : float
        Elapsed time (s).
    det : float, optional
        4 <x^2><p^2> - <{x,p}>^2. Computed from the moments when omitted.
        Long free flights make that subtraction cancel almost completely
        (relative error ~ (omega t)^2 * 1e-16), so the evolution routines
        carry the exact value forward instead.
    """

    mass: float
    xx: float
    pp: float
    xp_sym: float = 0.0
    t: float = 0.0
    det: float | None = None

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError("mass must be positive")
        if not (self.xx > 0 and self.pp > 0):
            raise ValueError("variances must be positive")
        if self.det is None:
            det = 4.0 * self.xx * self.pp - self.xp_sym**2
            # rounding floor of the subtraction itself
            slack = 64 * _EPS * 4.0 * self.xx * self.pp
            object.__setattr__(self, "det", det)
        else:
            det, slack = self.det, 0.0
        if det < HBAR**2 * (1.0 - 1e-9) - slack:
            raise ValueError(
                f"state violates the uncertainty relation: 4<x2><p2> - <xp>^2 = {det:.6e} < hbar^2"
            )

    @property
    def uncertainty_product(self) -> float:
        """4 <x^2><p^2> - <{x,p}>^2, bounded below by hbar^2."""
        return self.det


@dataclass(frozen=True)
class ExpansionRecord:
    sigma2: float
    phi_tof: float
    t1: float

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)


def _positive(name, value):
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value!r}")


def zero_point_motion(mass: float, omega: float) -> float:
    """Ground-state size sqrt(hbar / (2 m omega))."""
    _positive("mass", mass)
    _positive("omega", omega)
    return math.sqrt(HBAR / (2.0 * mass * omega))


def thermal_initial_state(mass: float, omega: float, nbar: float) -> GaussianState:
    """Thermal state of the trap with mean occupation `nbar`, at t = 0."""
    if nbar < 0:
        raise ValueError("nbar must be non-negative")
    x0 = zero_point_motion(mass, omega)
    g = 2.0 * nbar + 1.0
    return GaussianState(mass=mass, xx=g * x0**2, pp=g * HBAR**2 / (4.0 * x0**2), xp_sym=0.0, t=0.0)


def expand_free_coherent(mass: float, omega: float, t1: float) -> ExpansionRecord:
    """Width and quadratic phase of the ground state after free flight `t1`."""
    if t1 < 0:
        raise ValueError("expansion time must be non-negative")
    x0 = zero_point_motion(mass, omega)
    wt = omega * t1
    return ExpansionRecord(sigma2=x0**2 * (1.0 + wt * wt), phi_tof=wt / 4.0, t1=t1)


def evolve_with_decoherence(s: GaussianState, t: float, Lambda: float = 0.0) -> GaussianState:
    """Free evolution for a time `t` under localization parameter `Lambda`.

    The unitary part is the exact affine map of free flight; decoherence adds
    2 Lambda hbar^2 t^3 / (3 m^2) to <x^2>, 2 Lambda hbar^2 t to <p^2> and
    2 Lambda hbar^2 t^2 / m to <{x,p}>.
    """
    if t < 0:
        raise ValueError("evolution time must be non-negative")
    if Lambda < 0:
        raise ValueError("localization parameter must be non-negative")
    m = s.mass
    xx = s.xx + s.xp_sym * t / m + s.pp * t * t / (m * m)
    pp = s.pp
    xp = s.xp_sym + 2.0 * s.pp * t / m
    det = s.det  # invariant under free flight
    if Lambda:
        k = 2.0 * Lambda * HBAR**2
        xx += k * t**3 / (3.0 * m * m)
        pp += k * t
        xp += k * t * t / m
        # expanded by hand: every term is non-negative, so nothing cancels
        det += k * t * (4.0 * s.xx + 2.0 * s.xp_sym * t / m + 4.0 * s.pp * t * t / (3.0 * m * m))
        det += k * k * t**4 / (3.0 * m * m)
    return GaussianState(mass=m, xx=xx, pp=pp, xp_sym=xp, t=s.t + t, det=det)


def coherence_length(s: GaussianState) -> float:
    """Coherence length xi with xi^2 = 8 hbar^2 <x^2> / (4 <x^2><p^2> - <{x,p}>^2)."""
    det = s.uncertainty_product
    if not det > 0:
        raise ValueError("state has a non-positive uncertainty product")
    return math.sqrt(8.0 * HBAR**2 * s.xx / det)


def coherence_length_schrodinger(sigma2: float, nbar: float) -> float:
    """Decoherence-free coherence length sqrt(8 sigma^2 / (2 nbar + 1))."""
    _positive("sigma2", sigma2)
    return math.sqrt(8.0 * sigma2 / (2.0 * nbar + 1.0))


def t_max_coherence(mass: float, nbar: float, omega: float, Lambda: float) -> float | None:
    """Time at which the coherence length peaks.

    Returns None when ``Lambda == 0``: the coherence length then grows without
    bound and has no maximum.
    """
    if Lambda < 0:
        raise ValueError("localization parameter must be non-negative")
    if Lambda == 0:
        return None
    return (3.0 * mass * (2.0 * nbar + 1.0) / (2.0 * Lambda * HBAR * omega)) ** (1.0 / 3.0)


def xi_max(mass: float, nbar: float, omega: float, Lambda: float) -> float | None:
    """Peak coherence length reached at :func:`t_max_coherence` (None when unbounded)."""
    if Lambda < 0:
        raise ValueError("localization parameter must be non-negative")
    if Lambda == 0:
        return None
    return math.sqrt(2.0) * (2.0 * HBAR * omega / (3.0 * mass * Lambda**2 * (2.0 * nbar + 1.0))) ** (1.0 / 6.0)
