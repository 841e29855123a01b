"""Published parameter sets for the flexor fPAM and the four-muscle exosuit, in SI."""

from __future__ import annotations

import math

from .config import AXIS_OF
from .control import Muscle, PlantConfig
from .designopt import OptimizationProblem, length_for_limit
from .fpam import DEFAULT_MODULUS, DEFAULT_THICKNESS, FpamSpec
from .mountstretch import StretchModel
from .units import N_PER_CM2
from .wristgeom import PlacementParams

# tensile-test identification of the flexor muscle: P [kPa] -> (r0 [cm], eps_max)
TENSILE_TABLE = {
    0: (1.23, 0.153),
    34: (1.27, 0.303),
    68: (1.22, 0.296),
    103: (1.19, 0.301),
    137: (1.26, 0.277),
}
MEASURED_L0 = 0.340
MEASURED_R0 = 0.0102
EPS0 = 0.153


def flexor_spec(L0: float = MEASURED_L0) -> FpamSpec:
    return FpamSpec(
        L0=L0,
        r0=sum(r for r, _ in TENSILE_TABLE.values()) / len(TENSILE_TABLE) * 0.01,
        t=DEFAULT_THICKNESS,
        E=DEFAULT_MODULUS,
        eps0=EPS0,
        eps_max_by_pressure={p * 1e3: e for p, (_, e) in TENSILE_TABLE.items()},
        r0_by_pressure={p * 1e3: r * 0.01 for p, (r, _) in TENSILE_TABLE.items()},
        measured_L0=MEASURED_L0,
        measured_r0=MEASURED_R0,
    )


def torque_validation_setup() -> tuple[FpamSpec, PlacementParams, StretchModel]:
    """Flexor muscle on the torque-measurement rig (L0 shortened to 32 cm)."""
    spec = flexor_spec(0.32)
    placement = PlacementParams(0.1947, 0.0493, 0.0830, 0.0338, 0.0399)
    stretch = StretchModel(-43.36 * N_PER_CM2, -1097.50 * N_PER_CM2)
    return spec, placement, stretch


def design_spec() -> FpamSpec:
    """Muscle used for placement optimization: r0 = 1.23 cm, eps_max fixed at 0.28."""
    return FpamSpec(
        L0=0.30, r0=0.0123, t=DEFAULT_THICKNESS, E=DEFAULT_MODULUS, eps0=EPS0,
        eps_max_by_pressure={137e3: 0.28}, extrapolate=True,
    )


DESIGN_BOUNDS = {"d1": (0.02, 0.22), "w1": (0.035, 0.05), "d2": (0.015, 0.09), "w2": (0.015, 0.035)}
DESIGN_GRID = {"d1": 0.02, "w1": 0.005, "d2": 0.005, "w2": 0.005}
DESIGN_RW = 0.02
DESIGN_THETA_SIZING = math.radians(-65.4)


def design_problem(pressure: float = 137e3, **kw) -> OptimizationProblem:
    return OptimizationProblem(DESIGN_BOUNDS, DESIGN_GRID, pressure, design_spec(),
                               DESIGN_RW, DESIGN_THETA_SIZING, **kw)


# range-of-motion placements: name -> (d1, w1, d2, w2, L0) [cm]
ROM_PLACEMENTS = {
    "flexor": (20.5, 5.7, 4.0, 4.0, 29.0),
    "extensor": (24.5, 3.7, 5.4, 4.1, 32.0),
    "ulnar": (21.1, 7.1, 1.0, 3.4, 28.5),
    "radial": (21.3, 4.8, 2.3, 6.0, 27.0),
}
ROM_MEASURED_DEG = {"flexor": 44.5, "extensor": 38.7, "ulnar": 26.8, "radial": 15.9}
ROM_MODEL_ERROR_DEG = {"flexor": 5.3, "extensor": 20.9, "ulnar": 16.1, "radial": 14.0}
# wrist radius per plane; the ulnar hand mount sits 3.5 cm from the joint center
PLANE_RW = {"fe": 0.0399, "ur": 0.02}


def rom_muscle(name: str, calibrated: bool = True) -> Muscle:
    """One of the four exosuit muscles with the flexor's fPAM parameters.

    With the measured lengths the model puts the joint limits well away from
    the published modeled limits, so by default L0 is recalibrated to place
    the 137 kPa torque zero at measured limit + model error.
    """
    d1, w1, d2, w2, L0 = ROM_PLACEMENTS[name]
    axis, side = AXIS_OF[name]
    placement = PlacementParams(d1 * 0.01, w1 * 0.01, d2 * 0.01, w2 * 0.01, PLANE_RW[axis])
    spec = flexor_spec(L0 * 0.01)
    if calibrated:
        limit = math.radians(ROM_MEASURED_DEG[name] + ROM_MODEL_ERROR_DEG[name])
        spec = spec.with_length(length_for_limit(placement, limit, spec.eps_max(137e3)))
    return Muscle(name, spec, placement, None, side)


def default_plants() -> dict[str, PlantConfig]:
    return {
        "fe": PlantConfig(rom_muscle("flexor"), rom_muscle("extensor")),
        "ur": PlantConfig(rom_muscle("ulnar"), rom_muscle("radial")),
    }
