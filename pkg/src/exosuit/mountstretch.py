"""Mounting-point displacement from fabric and soft-tissue stretching.

Each endpoint moves along the muscle force by ``dx = sqrt(F / K)``.  Stiffness
is stored as a positive magnitude; published values are quoted negative to
mark that the endpoints move toward each other, which is the direction used
here.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import FitError, GeometryError
from .fpam import FpamSpec, fpam_force
from .wristgeom import (
    GeometrySolution, PlacementParams, Regime, forearm_point, geometry, hand_point, torque,
)


class Endpoint(str, enum.Enum):
    FOREARM = "forearm"
    HAND = "hand"


@dataclass(frozen=True)
class StretchModel:
    """Quadratic stretching coefficients [N/m^2] for the forearm (K1) and hand (K2) mounts."""

    K1: float
    K2: float

    def __post_init__(self):
        object.__setattr__(self, "K1", abs(float(self.K1)))
        object.__setattr__(self, "K2", abs(float(self.K2)))
        if not (self.K1 > 0 and self.K2 > 0):
            raise ValueError("stretching coefficients must be nonzero")

    def coefficient(self, endpoint: Endpoint) -> float:
        return self.K1 if Endpoint(endpoint) is Endpoint.FOREARM else self.K2

    def to_dict(self) -> dict:
        return {"k1_n_per_m2": self.K1, "k2_n_per_m2": self.K2}

    @classmethod
    def from_dict(cls, d: Mapping) -> "StretchModel":
        return cls(d["k1_n_per_m2"], d["k2_n_per_m2"])


def displacement(model: StretchModel, F: float, endpoint: Endpoint) -> float:
    """Endpoint travel [m] under tension F [N]."""
    if F < 0:
        raise ValueError(f"force must be non-negative, got {F!r}")
    return math.sqrt(F / model.coefficient(endpoint))


def _unit(dx: float, dy: float) -> tuple[float, float]:
    n = math.hypot(dx, dy)
    return (dx / n, dy / n)


def force_directions(p: PlacementParams, theta: float,
                     sol: GeometrySolution) -> tuple[tuple[float, float], tuple[float, float]]:
    """Unit pull directions at the forearm and hand mounts, world frame."""
    x1, y1 = forearm_point(p)
    x2, y2 = hand_point(p, theta)
    if sol.regime is Regime.WRAPPED:
        u1 = _unit(sol.q1[0] - x1, sol.q1[1] - y1)
        u2 = _unit(sol.q2[0] - x2, sol.q2[1] - y2)
    else:
        u1 = _unit(x2 - x1, y2 - y1)
        u2 = (-u1[0], -u1[1])
    return u1, u2


def displaced_placement(p: PlacementParams, theta: float, sol: GeometrySolution,
                        dx1: float, dx2: float) -> PlacementParams:
    """Placement after moving each mount along its pull direction."""
    u1, u2 = force_directions(p, theta, sol)
    x1, y1 = forearm_point(p)
    x2, y2 = hand_point(p, theta)
    x1, y1 = x1 + dx1 * u1[0], y1 + dx1 * u1[1]
    x2, y2 = x2 + dx2 * u2[0], y2 + dx2 * u2[1]
    c, s = math.cos(theta), math.sin(theta)
    try:
        return PlacementParams(-x1, y1, c * x2 + s * y2, -s * x2 + c * y2, p.rw)
    except GeometryError as exc:
        raise GeometryError(f"stretched mount no longer valid: {exc}") from exc


def stretched_placement(spec: FpamSpec, P: float, p: PlacementParams, model: StretchModel,
                        theta: float, *, iterate: bool = False, tol: float = 1e-6,
                        max_iter: int = 50) -> PlacementParams:
    """Single-pass displaced placement; ``iterate=True`` repeats until the mounts settle.

    The iterative mode is an extension for study: it re-evaluates the force at
    the displaced placement and re-applies the displacement from the initial one.
    """
    sol = geometry(p, theta)
    F = fpam_force(spec, P, sol.length)
    if F == 0.0:
        return p
    new = displaced_placement(p, theta, sol, displacement(model, F, Endpoint.FOREARM),
                              displacement(model, F, Endpoint.HAND))
    if not iterate:
        return new
    for _ in range(max_iter):
        F = fpam_force(spec, P, geometry(new, theta).length)
        nxt = displaced_placement(p, theta, sol, displacement(model, F, Endpoint.FOREARM),
                                  displacement(model, F, Endpoint.HAND))
        moved = max(abs(nxt.d1 - new.d1), abs(nxt.w1 - new.w1),
                    abs(nxt.d2 - new.d2), abs(nxt.w2 - new.w2))
        new = nxt
        if moved < tol:
            break
    return new


def stretched_torque(spec: FpamSpec, P: float, p: PlacementParams, model: StretchModel,
                     theta: float, **kwargs) -> float:
    """Torque [N m] with mounts displaced by the stretching model.

    ``p`` is the initial placement (deflated muscle, neutral wrist).
    """
    q = stretched_placement(spec, P, p, model, theta, **kwargs)
    return torque(spec, P, q, theta)[0]


def fit_coefficients(records: Iterable[tuple[float, float, float]]) -> StretchModel:
    """Average per-record ``K_i = F / dx_i^2`` over records with nonzero displacement."""
    k1, k2 = [], []
    for F, dx1, dx2 in records:
        if dx1 > 0:
            k1.append(F / (dx1 * dx1))
        if dx2 > 0:
            k2.append(F / (dx2 * dx2))
    if not k1 or not k2:
        raise FitError("every displacement at one endpoint is zero; K is undetermined")
    return StretchModel(sum(k1) / len(k1), sum(k2) / len(k2))
