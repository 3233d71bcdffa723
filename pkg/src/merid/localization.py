"""Position-localization decoherence.

A source is described by a saturating decay function
Gamma(x) = gamma (1 - exp(-x^2 / 4a^2)) with localization parameter
Lambda = gamma / 4a^2, or, when the saturation distance is effectively
infinite, by the pure-quadratic law Gamma(x) = Lambda x^2.

Under free flight the master equation is solved exactly by the kernel

    F(p, x, t) = exp(-int_0^t Gamma(x - p tau / m) dtau)

which multiplies the decoherence-free density matrix in a mixed
position/momentum representation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Union

import numpy as np
from scipy import integrate, special

from .constants import CONST
from .gaussian import GaussianState

__all__ = [
    "SATURATING",
    "QUADRATIC",
    "LocalizationModel",
    "CompositeModel",
    "QuadratureError",
    "gamma_of_x",
    "decay_integral",
    "kernel_F",
    "coherence_function",
    "visibility_exponent",
    "visibility",
    "theta_saturating",
]

HBAR = CONST.hbar
SATURATING = "saturating"
QUADRATIC = "pure-quadratic"

# Below this half-width u = d/2a the erf ratio is summed as a series.
_SERIES_SWITCH = 0.5
_SERIES_TERMS = 14
# Gaussian factor exp(-z^2/2) < 1e-16 beyond |z| = 8.6
_P_CUTOFF = 8.6


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""


@dataclass(frozen=True)
class LocalizationModel:
    """One position-localization source.

    Use :meth:`saturating` or :meth:`quadratic` to build instances. For the
    pure-quadratic kind ``gamma`` is 0 and ``a`` is infinite, the a -> inf limit
    taken at fixed Lambda.
    """

    gamma: float
    a: float
    kind: str = SATURATING
    source_label: str = ""
    Lambda_value: float | None = None

    def __post_init__(self):
        if self.kind == SATURATING:
            if not (self.gamma > 0 and self.a > 0 and math.isfinite(self.a)):
                raise ValueError(f"saturating model needs gamma > 0 and finite a > 0 "
                                 f"(got gamma={self.gamma!r}, a={self.a!r})")
            object.__setattr__(self, "Lambda_value", self.gamma / (4.0 * self.a**2))
        elif self.kind == QUADRATIC:
            if self.Lambda_value is None or self.Lambda_value < 0:
                raise ValueError("pure-quadratic model needs Lambda >= 0")
            object.__setattr__(self, "gamma", 0.0)
            object.__setattr__(self, "a", math.inf)
        else:
            raise ValueError(f"unknown localization kind {self.kind!r}")

    @classmethod
    def saturating(cls, gamma: float, a: float, label: str = "") -> "LocalizationModel":
        return cls(gamma=gamma, a=a, kind=SATURATING, source_label=label)

    @classmethod
    def quadratic(cls, Lambda: float, label: str = "") -> "LocalizationModel":
        return cls(gamma=0.0, a=math.inf, kind=QUADRATIC, source_label=label, Lambda_value=float(Lambda))

    @property
    def Lambda(self) -> float:
        return self.Lambda_value

    @property
    def is_saturating(self) -> bool:
        return self.kind == SATURATING

    @property
    def saturation_distance(self) -> float:
        """2a, the distance beyond which the decay rate saturates (inf if never)."""
        return 2.0 * self.a

    @property
    def components(self) -> tuple["LocalizationModel", ...]:
        return (self,)

    def rate(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == QUADRATIC:
            out = self.Lambda * x * x
        else:
            out = -self.gamma * np.expm1(-(x / (2.0 * self.a)) ** 2)
        return out[()] if out.ndim == 0 else out

    def decay_integral(self, p, x, t, mass):
        """int_0^t Gamma(x - p tau/m) dtau in closed form (vectorized over p and x)."""
        p = np.asarray(p, dtype=float)
        x = np.asarray(x, dtype=float)
        v = p / mass
        if self.kind == QUADRATIC:
            out = self.Lambda * (x * x * t - x * v * t * t + v * v * t**3 / 3.0)
        else:
            u0 = x / (2.0 * self.a)
            u1 = (x - v * t) / (2.0 * self.a)
            out = self.gamma * t * _one_minus_mean_gauss(u0, u1)
        return out[()] if out.ndim == 0 else out

    def theta(self, d):
        d = np.asarray(d, dtype=float)
        if self.kind == QUADRATIC:
            out = self.Lambda * d * d / 3.0
        else:
            out = self.gamma * theta_saturating(d / (2.0 * self.a))
        return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class CompositeModel:
    """Several independent sources acting together.

    Decay rates and kernel exponents add, so kernels multiply. Saturation
    scales are kept per component and never merged.
    """

    components: tuple[LocalizationModel, ...] = field(default_factory=tuple)

    def __init__(self, components: Iterable[LocalizationModel] = ()):
        comps = []
        for c in components:
            comps.extend(c.components)
        object.__setattr__(self, "components", tuple(comps))

    def __iter__(self):
        return iter(self.components)

    def __len__(self):
        return len(self.components)

    def __add__(self, other: "ModelLike") -> "CompositeModel":
        return CompositeModel(self.components + tuple(other.components))

    @property
    def Lambda(self) -> float:
        return float(sum(c.Lambda for c in self.components))

    @property
    def labels(self) -> list[str]:
        return [c.source_label for c in self.components]

    def rate(self, x):
        return sum((c.rate(x) for c in self.components), np.zeros_like(np.asarray(x, dtype=float)))[()]

    def decay_integral(self, p, x, t, mass):
        shape = np.broadcast(np.asarray(p, dtype=float), np.asarray(x, dtype=float)).shape
        total = np.zeros(shape)
        for c in self.components:
            total = total + c.decay_integral(p, x, t, mass)
        return total[()] if total.ndim == 0 else total

    def theta(self, d):
        total = np.zeros_like(np.asarray(d, dtype=float))
        for c in self.components:
            total = total + c.theta(d)
        return total[()] if total.ndim == 0 else total


ModelLike = Union[LocalizationModel, CompositeModel]


def _one_minus_mean_gauss(u0, u1):
    """1 - mean of exp(-u^2) for u running linearly from u0 to u1."""
    u0, u1 = np.broadcast_arrays(np.asarray(u0, dtype=float), np.asarray(u1, dtype=float))
    h = u1 - u0
    out = np.empty(u0.shape)
    small = np.abs(h) < 1e-3
    if np.any(small):
        a, b = u0[small], u1[small]
        m = 0.5 * (a + b)
        # Simpson on 1 - exp(-u^2); error O(h^4)
        out[small] = -(np.expm1(-a * a) + 4.0 * np.expm1(-m * m) + np.expm1(-b * b)) / 6.0
    big = ~small
    if np.any(big):
        a, b = u0[big], u1[big]
        out[big] = 1.0 - 0.5 * math.sqrt(math.pi) * (special.erf(b) - special.erf(a)) / (b - a)
    return out


def theta_saturating(u):
    """1 - sqrt(pi)/(2u) erf(u), the saturating visibility exponent in units of gamma.

    ``u`` is d/(2a). A series replaces the direct form for small u, where the
    subtraction would cancel.
    """
    u = np.abs(np.asarray(u, dtype=float))
    out = np.empty(u.shape)
    small = u < _SERIES_SWITCH
    if np.any(small):
        y = u[small] ** 2
        acc = np.zeros_like(y)
        term = np.ones_like(y)
        for n in range(1, _SERIES_TERMS + 1):
            term = term * y / n if n > 1 else y
            acc += (-1) ** (n + 1) * term / (2 * n + 1)
        out[small] = acc
    big = ~small
    if np.any(big):
        ub = u[big]
        out[big] = 1.0 - 0.5 * math.sqrt(math.pi) * special.erf(ub) / ub
    return out[()] if out.ndim == 0 else out


def gamma_of_x(m: ModelLike, x):
    """Decay rate of position coherences separated by `x`."""
    return m.rate(x)


def decay_integral(m: ModelLike, p, x, t: float, mass: float):
    """Closed-form exponent of :func:`kernel_F`; vectorized."""
    return m.decay_integral(p, x, t, mass)


def kernel_F(m: ModelLike, p: float, x: float, t: float, mass: float, epsabs: float = 1e-10) -> float:
    """Decoherence kernel F(p, x, t), with the time integral done by adaptive quadrature.

    The integral over tau is rescaled to s = tau/t in [0, 1]; `epsabs` is the
    absolute tolerance on that dimensionless integral.
    """
    if t < 0:
        raise ValueError("time must be non-negative")
    if not mass > 0:
        raise ValueError("mass must be positive")
    if t == 0:
        return 1.0
    exponent = 0.0
    for c in m.components:
        if c.kind == QUADRATIC:
            if c.Lambda == 0:
                continue
            scale = c.Lambda * t
            fn = lambda s: (x - p * t * s / mass) ** 2
        else:
            scale = c.gamma * t
            fn = lambda s, a=c.a: -math.expm1(-((x - p * t * s / mass) / (2.0 * a)) ** 2)
        val, err, info = _quad(fn, 0.0, 1.0, epsabs=epsabs)
        exponent += scale * val
    return math.exp(-exponent)


def _quad(fn, lo, hi, epsabs=1e-10, epsrel=1e-10, limit=200, points=None):
    val, err, info, *rest = integrate.quad(fn, lo, hi, epsabs=epsabs, epsrel=epsrel, limit=limit,
                                           points=points, full_output=1)
    if rest:
        ier = rest[0]
        if ier in (1, 2, 3, 6) or err > max(epsabs, epsrel * abs(val)) * 10:
            raise QuadratureError(
                f"quadrature failed on [{lo}, {hi}]: {rest[1] if len(rest) > 1 else ier} "
                f"(value={val:.6e}, error estimate={err:.2e}, evaluations={info.get('neval')})"
            )
    return val, err, info


def coherence_function(m: ModelLike, s: GaussianState, x: float) -> float:
    """Normalized position correlation C(x, t) / C(0, t).

    `s` is the decoherence-free (Schrodinger-evolved) state at time ``s.t``;
    the decoherence enters only through the kernel F over that same time.
    """
    if x < 0:
        raise ValueError("distance must be non-negative")
    if x == 0:
        return 1.0
    return _correlation(m, s, x) / _correlation(m, s, 0.0)


def _correlation(m: ModelLike, s: GaussianState, x: float) -> float:
    hb2 = 2.0 * HBAR**2
    sig_p = HBAR / math.sqrt(s.xx)
    p_c = s.xp_sym * x / (2.0 * s.xx)
    # exponent of the Gaussian evaluated at its centre in p
    base = -(s.pp * x * x - s.xp_sym**2 * x * x / (4.0 * s.xx)) / hb2

    def integrand(z):
        p = p_c + z * sig_p
        return math.exp(-0.5 * z * z - float(m.decay_integral(p, x, s.t, s.mass)))

    val, _, _ = _quad(integrand, -_P_CUTOFF, _P_CUTOFF, epsabs=0.0, epsrel=1e-10)
    return math.exp(base) * val


def visibility_exponent(m: ModelLike, d):
    """Decay rate Theta of fringe visibility for slit separation `d`.

    Saturating sources give gamma (1 - sqrt(pi) a/d erf(d/2a)); pure-quadratic
    ones Lambda d^2 / 3. Composite models add their components.
    """
    d_arr = np.asarray(d, dtype=float)
    if np.any(d_arr <= 0):
        raise ValueError("slit separation must be positive")
    return m.theta(d)


def visibility(theta: float, t2: float) -> float:
    """exp(-theta t2)."""
    if theta < 0 or t2 < 0:
        raise ValueError("theta and t2 must be non-negative")
    return math.exp(-theta * t2)
