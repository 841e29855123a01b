"""Exosuit configuration: four muscles plus controller and plant settings."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

from .control import ControllerConfig, Muscle, PlantConfig
from .fpam import FpamSpec
from .mountstretch import StretchModel
from .wristgeom import PlacementParams

MUSCLE_NAMES = ("flexor", "extensor", "ulnar", "radial")
# name -> (axis, side); side +1 pulls toward positive angles on its axis
AXIS_OF = {"flexor": ("fe", 1), "extensor": ("fe", -1), "ulnar": ("ur", 1), "radial": ("ur", -1)}


@dataclass(frozen=True)
class PlantSettings:
    b: float = 0.05  # N m s/rad
    k: float = 0.1  # N m/rad
    inertia: float = 0.01  # kg m^2
    substeps: int = 4
    limits_deg: tuple[float, float] = (-90.0, 90.0)

    def to_dict(self) -> dict:
        return {"b_nms_per_rad": self.b, "k_nm_per_rad": self.k, "inertia_kgm2": self.inertia,
                "substeps": self.substeps, "limits_deg": list(self.limits_deg)}

    @classmethod
    def from_dict(cls, d: Mapping) -> "PlantSettings":
        return cls(float(d.get("b_nms_per_rad", 0.05)), float(d.get("k_nm_per_rad", 0.1)),
                   float(d.get("inertia_kgm2", 0.01)), int(d.get("substeps", 4)),
                   tuple(float(v) for v in d.get("limits_deg", (-90.0, 90.0))))


def _controller_to_dict(c: ControllerConfig) -> dict:
    return {"gain_kpa_per_deg": c.gain, "dt_s": c.dt, "p_init_kpa": c.p_init,
            "p_threshold_kpa": c.p_threshold, "p_bounds_kpa": list(c.p_bounds),
            "regulator_lag_s": c.regulator_lag}


def _controller_from_dict(d: Mapping) -> ControllerConfig:
    base = ControllerConfig()
    lag = d.get("regulator_lag_s")
    return ControllerConfig(
        gain=float(d.get("gain_kpa_per_deg", base.gain)),
        dt=float(d.get("dt_s", base.dt)),
        p_init=float(d.get("p_init_kpa", base.p_init)),
        p_threshold=float(d.get("p_threshold_kpa", base.p_threshold)),
        p_bounds=tuple(float(v) for v in d.get("p_bounds_kpa", base.p_bounds)),
        regulator_lag=None if lag is None else float(lag),
    )


@dataclass(frozen=True)
class ExosuitConfig:
    """Four muscles keyed by name; each entry's spec is looked up in ``specs``."""

    muscles: Mapping[str, Muscle]
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    plant: PlantSettings = field(default_factory=PlantSettings)

    def __post_init__(self):
        if set(self.muscles) != set(MUSCLE_NAMES):
            raise ValueError(f"config needs exactly the muscles {MUSCLE_NAMES}, got {sorted(self.muscles)}")
        for name, m in self.muscles.items():
            if m.side != AXIS_OF[name][1]:
                raise ValueError(f"muscle {name!r} must have side {AXIS_OF[name][1]}")

    def muscle(self, name: str) -> Muscle:
        try:
            return self.muscles[name]
        except KeyError:
            raise ValueError(f"unknown muscle {name!r}; expected one of {MUSCLE_NAMES}") from None

    def plants(self) -> dict[str, PlantConfig]:
        s = self.plant
        lim = (math.radians(s.limits_deg[0]), math.radians(s.limits_deg[1]))
        kw = dict(b=s.b, k=s.k, inertia=s.inertia, limits=lim, substeps=s.substeps)
        return {
            "fe": PlantConfig(self.muscles["flexor"], self.muscles["extensor"], **kw),
            "ur": PlantConfig(self.muscles["ulnar"], self.muscles["radial"], **kw),
        }

    def to_dict(self) -> dict:
        specs: dict[str, dict] = {}
        entries = []
        for name in MUSCLE_NAMES:
            m = self.muscles[name]
            key = f"{name}_fpam"
            specs[key] = m.spec.to_dict()
            entries.append({
                "name": name,
                "spec": key,
                "placement": m.placement.to_dict(),
                "stretch": None if m.stretch is None else m.stretch.to_dict(),
            })
        return {
            "units": {"length": "m", "pressure": "kPa", "angle": "deg"},
            "specs": specs,
            "muscles": entries,
            "controller": _controller_to_dict(self.controller),
            "plant": self.plant.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "ExosuitConfig":
        specs = {k: FpamSpec.from_dict(v) for k, v in d.get("specs", {}).items()}
        muscles = {}
        for entry in d["muscles"]:
            name = entry["name"]
            if name in muscles:
                raise ValueError(f"muscle {name!r} listed twice")
            if name not in AXIS_OF:
                raise ValueError(f"unknown muscle {name!r}")
            ref = entry["spec"]
            if ref not in specs:
                raise ValueError(f"muscle {name!r} references unknown spec {ref!r}")
            stretch = entry.get("stretch")
            muscles[name] = Muscle(
                name, specs[ref], PlacementParams.from_dict(entry["placement"]),
                None if stretch is None else StretchModel.from_dict(stretch), AXIS_OF[name][1],
            )
        return cls(muscles, _controller_from_dict(d.get("controller", {})),
                   PlantSettings.from_dict(d.get("plant", {})))


def default_config() -> ExosuitConfig:
    """The calibrated four-muscle exosuit with default controller and plant."""
    from .presets import rom_muscle
    return ExosuitConfig({n: rom_muscle(n) for n in MUSCLE_NAMES})
