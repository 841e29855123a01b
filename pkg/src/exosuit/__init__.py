"""Modelling, design and control tools for a soft wrist exosuit driven by fPAMs."""

__version__ = "0.1.0"

from .config import ExosuitConfig, default_config
from .control import (
    ControllerConfig, ControllerState, Muscle, PlantConfig, TrackingLog, controller_step,
    plant_step, run_tracking, sinusoid_trajectory, staircase_trajectory,
)
from .designopt import (
    OptimizationProblem, OptimizationResult, ReferenceTorque, find_min_pressure, fit_wrist_radius,
    interpolate_reference, multistart_minimize, nelder_mead_box, objective, optimize_placement,
    predict_rom, size_initial_length,
)
from .errors import (
    DomainError, ExosuitError, FitError, GeometryError, InfeasibleError, InstabilityError,
    NoCrossingError, RegimeError,
)
from .fpam import (
    FpamSpec, TensileDataset, fiber_orientation, fit_force_curves, force_at_contraction,
    fpam_force, identify_spec,
)
from .mountstretch import StretchModel, fit_coefficients, stretched_placement, stretched_torque
from .wristgeom import (
    GeometrySolution, PlacementParams, Regime, classify_regime, geometry, straight_torque,
    tangency_angle, torque, wrapped_torque,
)

__all__ = [name for name in dir() if not name.startswith("_")]
