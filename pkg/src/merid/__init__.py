"""MERID calculator: decoherence, collapse models and the optomechanical double slit."""
from importlib.metadata import PackageNotFoundError, version as _version

try:
    __version__ = _version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0+unknown"

from .collapse import CollapseModelId, CslParams, csl_model, dp_model, k_model, model_for, qg_model
from .constants import CONST, DEFAULTS, DefaultParameterSet, EnvironmentSpec, SphereSpec, TrapSpec
from .environment import air_model, blackbody_localization, blackbody_model
from .gaussian import GaussianState, coherence_length, evolve_with_decoherence, t_max_coherence, xi_max
from .localization import CompositeModel, LocalizationModel, kernel_F, visibility_exponent
from .optomech import CavitySpec, OptomechBounds, optomech_bounds
from .protocol import (
    FeasibilityDiagram,
    Interval,
    allowed_d_interval,
    check_conditions,
    falsification_time_window,
    make_plan,
    select_times,
    sweep_diagram,
)

__all__ = [
    "__version__",
    "CONST", "DEFAULTS", "DefaultParameterSet", "SphereSpec", "EnvironmentSpec", "TrapSpec",
    "GaussianState", "evolve_with_decoherence", "coherence_length", "t_max_coherence", "xi_max",
    "LocalizationModel", "CompositeModel", "kernel_F", "visibility_exponent",
    "air_model", "blackbody_model", "blackbody_localization",
    "CslParams", "CollapseModelId", "csl_model", "qg_model", "dp_model", "k_model", "model_for",
    "CavitySpec", "OptomechBounds", "optomech_bounds",
    "Interval", "FeasibilityDiagram", "make_plan", "check_conditions", "select_times",
    "allowed_d_interval", "falsification_time_window", "sweep_diagram",
]
