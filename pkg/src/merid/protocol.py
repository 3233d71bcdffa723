"""Feasibility conditions, time selection and d-vs-D diagrams.

The protocol expands the ground state for a time t1, applies the squared
position measurement (the "double slit") with strength chi, and lets the two
packets overlap for a time t2. The conditions on (t1, d, t2) are evaluated
here, both pointwise (:func:`check_conditions`) and as the set of admissible
slit separations d at a given sphere size (:func:`allowed_d_interval`).

Decoherence sources are split per component into short-distance ones, whose
saturation distance 2a exceeds the separation considered, and long-distance
ones. Short sources act through their Lambda, long ones through their
saturated rate gamma. Pure-quadratic sources are always short.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .collapse import CollapseModelId, model_for
from .constants import CONST, DEFAULTS, DefaultParameterSet, EnvironmentSpec, SphereSpec, TrapSpec
from .environment import air_model, blackbody_model
from .gaussian import (
    coherence_length,
    coherence_length_schrodinger,
    evolve_with_decoherence,
    expand_free_coherent,
    t_max_coherence,
    thermal_initial_state,
)
from .localization import CompositeModel, LocalizationModel

__all__ = [
    "Thresholds",
    "Interval",
    "ProtocolPlan",
    "Condition",
    "ConditionReport",
    "PhaseCheck",
    "Times",
    "FeasibilityDiagram",
    "standard_models",
    "fringe_spacing",
    "make_plan",
    "check_conditions",
    "phase_condition",
    "t1_candidates",
    "select_times",
    "allowed_d_interval",
    "sweep_diagram",
    "falsification_time_window",
]

HBAR = CONST.hbar


@dataclass(frozen=True)
class Thresholds:
    """Numerical meaning of the "much less than" conditions.

    ``short_reference`` only matters for time selection. A saturating
    source whose 2a exceeds it counts as short-distance there (through t_max);
    otherwise it enters through its rate gamma.
    """

    t1_gamma: float = 0.05
    t2_gamma: float = 0.1
    phase: float = 0.1
    om_fraction: float = 0.25
    short_reference: float = 1e-9


DEFAULT_THRESHOLDS = Thresholds()


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi]; empty when ``lo >= hi``."""

    lo: float = math.nan
    hi: float = math.nan

    @classmethod
    def empty(cls) -> "Interval":
        return cls()

    @property
    def is_empty(self) -> bool:
        return not (self.lo < self.hi)

    def __bool__(self) -> bool:
        return not self.is_empty

    @property
    def width(self) -> float:
        return 0.0 if self.is_empty else self.hi - self.lo

    def contains(self, x: float) -> bool:
        return not self.is_empty and self.lo <= x <= self.hi

    def contains_interval(self, other: "Interval") -> bool:
        return other.is_empty or (not self.is_empty and self.lo <= other.lo and other.hi <= self.hi)

    def minus(self, other: "Interval") -> "Interval":
        """Set difference, which must be a single interval (true when both share a lower end)."""
        if self.is_empty:
            return Interval.empty()
        if other.is_empty or other.hi <= self.lo or other.lo >= self.hi:
            return self
        lower = Interval(self.lo, other.lo) if other.lo > self.lo else Interval.empty()
        upper = Interval(other.hi, self.hi) if other.hi < self.hi else Interval.empty()
        if lower and upper:
            raise ValueError("set difference is not a single interval")
        return lower or upper

    def as_tuple(self) -> tuple[float, float] | None:
        return None if self.is_empty else (self.lo, self.hi)


def standard_models(sphere: SphereSpec, env: EnvironmentSpec) -> CompositeModel:
    """Residual gas plus thermal radiation for this sphere."""
    return CompositeModel([air_model(env, sphere), blackbody_model(sphere, env)])


def _as_composite(models) -> CompositeModel:
    if models is None:
        return CompositeModel()
    if isinstance(models, (LocalizationModel, CompositeModel)):
        return CompositeModel(models.components)
    return CompositeModel(models)


def _split(models: CompositeModel, d: float) -> tuple[float, float]:
    """(Lambda of short components, gamma of long components) at separation d."""
    lam = gam = 0.0
    for c in models.components:
        if c.is_saturating and d >= c.saturation_distance:
            gam += c.gamma
        else:
            lam += c.Lambda
    return lam, gam


def fringe_spacing(mass: float, d: float, t2: float) -> float:
    """2 pi hbar t2 / (m d)."""
    if not (mass > 0 and d > 0 and t2 > 0):
        raise ValueError("mass, d and t2 must be positive")
    return 2.0 * math.pi * HBAR * t2 / (mass * d)


@dataclass(frozen=True)
class ProtocolPlan:
    t1: float
    t2: float
    d: float
    chi: float
    delta_x: float
    sigma: float
    phi_total: float = 0.0

    def __post_init__(self):
        for name in ("t1", "t2", "d", "chi", "delta_x", "sigma"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def sigma_d(self) -> float:
        """Slit width sigma^2 / (2 chi d)."""
        return self.sigma**2 / (2.0 * self.chi * self.d)


def make_plan(sphere: SphereSpec, trap: TrapSpec, t1: float, t2: float, d: float, chi: float,
              delta_x: float = DEFAULTS.delta_x, phi_total: float = 0.0) -> ProtocolPlan:
    """Plan with sigma taken from the coherent expansion over t1."""
    sigma = expand_free_coherent(sphere.mass, trap.omega, t1).sigma
    return ProtocolPlan(t1=t1, t2=t2, d=d, chi=chi, delta_x=delta_x, sigma=sigma, phi_total=phi_total)


@dataclass(frozen=True)
class Condition:
    id: str
    description: str
    value: float
    bound: float
    passed: bool
    applicable: bool = True


@dataclass(frozen=True)
class ConditionReport:
    conditions: tuple[Condition, ...]

    @property
    def overall_pass(self) -> bool:
        return all(c.passed for c in self.conditions if c.applicable)

    def __getitem__(self, cid: str) -> Condition:
        for c in self.conditions:
            if c.id == cid:
                return c
        raise KeyError(cid)

    @property
    def failed(self) -> list[str]:
        return [c.id for c in self.conditions if c.applicable and not c.passed]


def _xi(sphere: SphereSpec, trap: TrapSpec, t1: float, Lambda: float) -> float:
    s0 = thermal_initial_state(sphere.mass, trap.omega, trap.nbar)
    return coherence_length(evolve_with_decoherence(s0, t1, Lambda))


def check_conditions(plan: ProtocolPlan, sphere: SphereSpec, trap: TrapSpec, models=None,
                     optomech=None, thresholds: Thresholds = DEFAULT_THRESHOLDS) -> ConditionReport:
    """Evaluate conditions i to ix for one plan.

    `optomech` is anything with a ``t1_om`` attribute; row ix is reported
    as not applicable without it.
    """
    models = _as_composite(models)
    m, w = sphere.mass, trap.omega
    p = plan
    lam, gam = _split(models, p.d)
    has_long = any(c.is_saturating and p.d >= c.saturation_distance for c in models.components)
    rows = []

    def add(cid, desc, value, bound, ok, applicable=True):
        rows.append(Condition(cid, desc, value, bound, bool(ok), applicable))

    add("i", "d < sqrt(8) sigma", p.d, math.sqrt(8.0) * p.sigma, p.d < math.sqrt(8.0) * p.sigma)
    d_lo = p.sigma / math.sqrt(p.chi)
    add("ii", "d > sigma / sqrt(chi)", p.d, d_lo, p.d > d_lo)
    t1_hi = math.sqrt(2.0 * p.t2 * p.chi / w)
    add("iii", "t1 <= sqrt(2 t2 chi / omega)", p.t1, t1_hi, p.t1 <= t1_hi)
    d_iv = 2.0 * math.pi * HBAR * p.t2 / (m * p.delta_x)
    add("iv", "d < 2 pi hbar t2 / (m delta_x)", p.d, d_iv, p.d < d_iv)
    xi = _xi(sphere, trap, p.t1, lam)
    add("v", "d < xi(t1)", p.d, xi, p.d < xi)
    xi_s = coherence_length_schrodinger(p.sigma**2, trap.nbar)
    ok_vi = p.t1 * gam <= thresholds.t1_gamma and p.d < xi_s
    add("vi", "t1 gamma << 1 and d < xi_s(t1)", p.t1 * gam, thresholds.t1_gamma, ok_vi, has_long)
    d_vii = math.sqrt(3.0 / (lam * p.t2)) if lam > 0 else math.inf
    add("vii", "d < sqrt(3 / (Lambda t2))", p.d, d_vii, p.d < d_vii)
    add("viii", "t2 gamma << 1", p.t2 * gam, thresholds.t2_gamma, p.t2 * gam <= thresholds.t2_gamma, has_long)
    if optomech is not None:
        bound = thresholds.om_fraction * optomech.t1_om
        add("ix", "t1 << t1_OM", p.t1, bound, p.t1 <= bound)
    else:
        add("ix", "t1 << t1_OM", p.t1, math.inf, True, False)
    return ConditionReport(tuple(rows))


class PhaseCheck(NamedTuple):
    value: float
    passed: bool


def phase_condition(phi_total: float, d: float, sigma: float, threshold: float = DEFAULT_THRESHOLDS.phase) -> PhaseCheck:
    """|phi_ds + phi_tof| d^2 / (4 sigma^2), which must stay below `threshold`."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    v = abs(phi_total) * d * d / (4.0 * sigma * sigma)
    return PhaseCheck(v, v < threshold)


class Times(NamedTuple):
    t1: float
    t2: float


def _time_split(models: CompositeModel, ref: float) -> tuple[float, float]:
    lam = gam = 0.0
    for c in models.components:
        if c.is_saturating and c.saturation_distance <= ref:
            gam += c.gamma
        else:
            lam += c.Lambda
    return lam, gam


def _t2(gam: float, thresholds: Thresholds, t2_cap: float | None) -> float:
    if gam > 0:
        t2 = thresholds.t2_gamma / gam
        return min(t2, t2_cap) if t2_cap is not None else t2
    if t2_cap is None:
        raise ValueError("no long-distance decoherence to fix t2; pass an explicit t2_cap")
    return t2_cap


def t1_candidates(sphere: SphereSpec, trap: TrapSpec, chi: float, models,
                  thresholds: Thresholds = DEFAULT_THRESHOLDS, t2_cap: float | None = None) -> dict[str, float]:
    """The three upper limits on t1 (and the resulting t2), keyed by name.

    Keys: ``overlap`` (sqrt(2 t2 chi / omega)), ``t_max`` and ``gamma``
    (t1_gamma / gamma). Limits that do not apply are infinite.
    """
    models = _as_composite(models)
    lam, gam = _time_split(models, thresholds.short_reference)
    t2 = _t2(gam, thresholds, t2_cap)
    tmax = t_max_coherence(sphere.mass, trap.nbar, trap.omega, lam)
    return {
        "t2": t2,
        "overlap": math.sqrt(2.0 * t2 * chi / trap.omega),
        "t_max": math.inf if tmax is None else tmax,
        "gamma": thresholds.t1_gamma / gam if gam > 0 else math.inf,
    }


def select_times(sphere: SphereSpec, trap: TrapSpec, env: EnvironmentSpec, chi: float, models=None,
                 thresholds: Thresholds = DEFAULT_THRESHOLDS, t2_cap: float | None = None) -> Times:
    """t2 = 0.1/gamma and t1 = min(sqrt(2 t2 chi/omega), t_max, 0.05/gamma).

    gamma is the total saturated rate of the long-distance sources (the
    residual gas for standard decoherence) and t_max uses the Lambda of the
    remaining ones. `models` defaults to the standard sources.
    """
    if not chi > 0:
        raise ValueError("chi must be positive")
    if models is None:
        models = standard_models(sphere, env)
    c = t1_candidates(sphere, trap, chi, models, thresholds, t2_cap)
    return Times(t1=min(c["overlap"], c["t_max"], c["gamma"]), t2=c["t2"])


def allowed_d_interval(sphere: SphereSpec, trap: TrapSpec, env: EnvironmentSpec, chi: float,
                       delta_x: float = DEFAULTS.delta_x, models=None, times: Times | None = None,
                       thresholds: Thresholds = DEFAULT_THRESHOLDS, t2_cap: float | None = None) -> Interval:
    """Slit separations satisfying conditions ii, iv, v, vii (and i, vi, viii).

    The d axis is cut at the saturation distances 2a of the saturating
    sources. Within each piece every source is either short or long and all
    bounds are constants. The lowest non-empty piece, merged with any
    adjacent ones, is returned. `times` defaults to :func:`select_times`
    on the standard sources, so adding a collapse model to `models` leaves
    t1 and t2 unchanged.
    """
    if models is None:
        models = standard_models(sphere, env)
    models = _as_composite(models)
    if times is None:
        times = select_times(sphere, trap, env, chi, standard_models(sphere, env), thresholds, t2_cap)
    t1, t2 = times
    m = sphere.mass
    sigma = expand_free_coherent(m, trap.omega, t1).sigma
    d_lo = sigma / math.sqrt(chi)
    common = min(math.sqrt(8.0) * sigma, 2.0 * math.pi * HBAR * t2 / (m * delta_x))
    xi_s = coherence_length_schrodinger(sigma**2, trap.nbar)

    cuts = sorted({c.saturation_distance for c in models.components if c.is_saturating})
    edges = [0.0] + cuts + [math.inf]
    pieces: list[Interval] = []
    for left, right in zip(edges[:-1], edges[1:]):
        lo = max(d_lo, left)
        if lo >= right:
            continue
        mid = 0.5 * (left + right) if math.isfinite(right) else 2.0 * left + 1.0
        lam, gam = _split(models, mid)
        hi = min(common, right, _xi_bound(sphere, trap, t1, lam, xi_s))
        if lam > 0:
            hi = min(hi, math.sqrt(3.0 / (lam * t2)))
        if gam > 0:
            if t1 * gam > thresholds.t1_gamma or t2 * gam > thresholds.t2_gamma:
                continue
            hi = min(hi, xi_s)
        if lo < hi:
            pieces.append(Interval(lo, hi))
    if not pieces:
        return Interval.empty()
    out = pieces[0]
    for nxt in pieces[1:]:
        if nxt.lo <= out.hi:
            out = Interval(out.lo, max(out.hi, nxt.hi))
        else:
            break
    return out


def _xi_bound(sphere, trap, t1, lam, xi_s):
    return _xi(sphere, trap, t1, lam) if lam > 0 else xi_s


def falsification_time_window(models_cm, d: float, gamma_air: float,
                              threshold: float = DEFAULT_THRESHOLDS.t2_gamma) -> Interval:
    """Window 3/(Lambda_CM d^2) <= t2 <= 1/gamma_air for seeing collapse-induced loss.

    Empty when the lower end reaches `threshold` / gamma_air, i.e. when gas
    collisions would already wash out the fringes.
    """
    if not d > 0:
        raise ValueError("d must be positive")
    lam = _as_composite(models_cm).Lambda
    if lam <= 0:
        return Interval.empty()
    lo = 3.0 / (lam * d * d)
    if gamma_air <= 0:
        return Interval(lo, math.inf)
    if lo >= threshold / gamma_air:
        return Interval.empty()
    return Interval(lo, 1.0 / gamma_air)


# --------------------------------------------------------------------------- diagrams


@dataclass(frozen=True)
class DiagramRow:
    D: float
    standard: Interval
    collapse: Interval
    green: Interval


@dataclass(frozen=True)
class FeasibilityDiagram:
    rows: tuple[DiagramRow, ...]
    collapse_label: str | None = None

    @property
    def D_axis(self) -> list[float]:
        return [r.D for r in self.rows]

    def green_extent(self, min_ratio: float = 1.0) -> Interval:
        """D range of samples whose green interval spans at least a factor `min_ratio`.

        With ``min_ratio = 1`` every non-empty green interval counts. A ratio
        above 1 ignores slivers where the collapse model only nudges the
        binding bound.
        """
        Ds = [r.D for r in self.rows if r.green and r.green.hi >= min_ratio * r.green.lo]
        return Interval(min(Ds), max(Ds)) if Ds else Interval.empty()

    CSV_COLUMNS = ("D_m", "d_lo_std_m", "d_hi_std_m", "d_lo_cm_m", "d_hi_cm_m", "green_lo_m", "green_hi_m")

    def records(self) -> list[dict[str, float | None]]:
        out = []
        for r in self.rows:
            rec: dict[str, float | None] = {"D_m": r.D}
            for key, iv in (("std", r.standard), ("cm", r.collapse), ("green", r.green)):
                lo_key = f"d_lo_{key}_m" if key != "green" else "green_lo_m"
                hi_key = f"d_hi_{key}_m" if key != "green" else "green_hi_m"
                rec[lo_key] = None if iv.is_empty else iv.lo
                rec[hi_key] = None if iv.is_empty else iv.hi
            out.append(rec)
        return out


def diameter_grid(D_min: float, D_max: float, per_decade: int = 64) -> np.ndarray:
    """Log-spaced diameters with `per_decade` samples per decade, endpoints included."""
    if not (0 < D_min < D_max):
        raise ValueError("need 0 < D_min < D_max")
    if per_decade < 2:
        raise ValueError("resolution must be at least 2")
    n = max(2, int(math.ceil(math.log10(D_max / D_min) * per_decade)) + 1)
    return np.geomspace(D_min, D_max, n)


def thread_count(default: int | None = None) -> int:
    raw = os.environ.get("MERID_THREADS")
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise ValueError(f"MERID_THREADS must be an integer, got {raw!r}") from None
        return max(1, n)
    return default or min(8, os.cpu_count() or 1)


def diagram_row(D: float, env: EnvironmentSpec, trap: TrapSpec, chi: float, delta_x: float,
                collapse: CollapseModelId | None, T_internal: float, params: DefaultParameterSet,
                thresholds: Thresholds = DEFAULT_THRESHOLDS, t2_cap: float | None = None) -> DiagramRow:
    sphere = params.sphere(D / 2.0, T_internal=T_internal)
    std_models = standard_models(sphere, env)
    times = select_times(sphere, trap, env, chi, std_models, thresholds, t2_cap)
    std = allowed_d_interval(sphere, trap, env, chi, delta_x, std_models, times, thresholds)
    if collapse is None:
        return DiagramRow(D, std, std, Interval.empty())
    full = std_models + CompositeModel([model_for(collapse, sphere)])
    cm = allowed_d_interval(sphere, trap, env, chi, delta_x, full, times, thresholds)
    return DiagramRow(D, std, cm, std.minus(cm))


def sweep_diagram(D_range: tuple[float, float], resolution: int = 64, env: EnvironmentSpec | None = None,
                  trap: TrapSpec | None = None, chi: float = 1000.0, delta_x: float | None = None,
                  collapse: CollapseModelId | str | None = None, T_internal: float = 4.5,
                  params: DefaultParameterSet = DEFAULTS, thresholds: Thresholds = DEFAULT_THRESHOLDS,
                  threads: int | None = None, t2_cap: float | None = None) -> FeasibilityDiagram:
    """d-vs-D diagram over log-spaced diameters (`resolution` samples per decade).

    Rows are computed in parallel (``MERID_THREADS`` caps the pool) and
    returned in grid order, so output is independent of scheduling.
    """
    env = env or params.environment(0.0)
    trap = trap or params.trap()
    delta_x = params.delta_x if delta_x is None else delta_x
    if isinstance(collapse, str):
        collapse = CollapseModelId.parse(collapse)
    grid = diameter_grid(D_range[0], D_range[1], resolution)
    n_threads = threads if threads is not None else thread_count()

    def job(D):
        return diagram_row(float(D), env, trap, chi, delta_x, collapse, T_internal, params, thresholds, t2_cap)

    if n_threads <= 1:
        rows = [job(D) for D in grid]
    else:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            rows = list(pool.map(job, grid))
    return FeasibilityDiagram(tuple(rows), None if collapse is None else str(collapse))
