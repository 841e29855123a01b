"""Antagonistic pressure feedback and a passive-wrist surrogate plant.

Controller quantities follow the hardware conventions: pressures in kPa,
angles in degrees.  The plant works in SI internally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import InstabilityError
from .fpam import FpamSpec
from .mountstretch import StretchModel, stretched_torque
from .units import KPA
from .wristgeom import PlacementParams, torque

MAX_OMEGA = 100.0


@dataclass(frozen=True)
class ControllerConfig:
    gain: float = 0.0083  # kPa/deg
    dt: float = 0.014  # s
    p_init: float = 13.8  # kPa
    p_threshold: float = 13.8  # kPa
    p_bounds: tuple[float, float] = (0.0, 137.0)  # kPa
    regulator_lag: float | None = None  # s, first-order lag; None = ideal regulator

    def __post_init__(self):
        if not self.gain > 0:
            raise ValueError("gain must be positive")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        lo, hi = self.p_bounds
        if not lo <= self.p_init <= hi:
            raise ValueError("p_init must lie within p_bounds")


@dataclass(frozen=True)
class ControllerState:
    """Pressure setpoints [kPa] of one antagonistic pair.

    ``positive`` drives the joint toward positive angles (flexor, ulnar
    deviator), ``negative`` toward negative angles.
    """

    positive: float
    negative: float

    @classmethod
    def initial(cls, cfg: ControllerConfig) -> "ControllerState":
        return cls(cfg.p_init, cfg.p_init)


def _clamp(x: float, bounds: tuple[float, float]) -> float:
    return min(max(x, bounds[0]), bounds[1])


def controller_step(cfg: ControllerConfig, state: ControllerState,
                    theta_desired: float, theta_actual: float) -> ControllerState:
    """One update of the pair: push the agonist up and the antagonist down by G|e|.

    The antagonist drops at twice the rate while its pressure is above the
    threshold.
    """
    e = theta_desired - theta_actual
    if e == 0.0:
        return state
    delta = cfg.gain * abs(e)
    if e > 0:
        ago, ant = state.positive, state.negative
    else:
        ago, ant = state.negative, state.positive
    ago = _clamp(ago + delta, cfg.p_bounds)
    ant = _clamp(ant - (2.0 * delta if ant > cfg.p_threshold else delta), cfg.p_bounds)
    if e > 0:
        return ControllerState(ago, ant)
    return ControllerState(ant, ago)


@dataclass(frozen=True)
class Muscle:
    name: str
    spec: FpamSpec
    placement: PlacementParams
    stretch: StretchModel | None = None
    side: int = 1

    def torque(self, pressure_kpa: float, theta: float) -> float:
        """Signed joint torque [N m] at pressure [kPa] and joint angle [rad]."""
        P = pressure_kpa * KPA
        th = self.side * theta
        if self.stretch is None:
            tau = torque(self.spec, P, self.placement, th)[0]
        else:
            tau = stretched_torque(self.spec, P, self.placement, self.stretch, th)
        return self.side * tau


@dataclass(frozen=True)
class PlantConfig:
    """Damped torsional surrogate for one wrist axis driven by an antagonistic pair."""

    positive: Muscle
    negative: Muscle
    b: float = 0.05  # N m s/rad
    k: float = 0.1  # N m/rad
    inertia: float = 0.01  # kg m^2
    limits: tuple[float, float] = (-math.pi / 2, math.pi / 2)  # rad, hard stops
    substeps: int = 4

    def __post_init__(self):
        if not self.b > 0:
            raise ValueError("viscous coefficient b must be positive")
        if self.k < 0:
            raise ValueError("stiffness k must be non-negative")
        if not self.inertia > 0:
            raise ValueError("inertia must be positive")

    def net_torque(self, theta: float, omega: float, pressures: ControllerState) -> float:
        return (self.positive.torque(pressures.positive, theta)
                + self.negative.torque(pressures.negative, theta)
                - self.k * theta - self.b * omega)


def plant_step(plant: PlantConfig, theta: float, omega: float, pressures: ControllerState,
               dt: float) -> tuple[float, float]:
    """Advance (theta [rad], omega [rad/s]) by dt with semi-implicit Euler substeps."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    h = dt / plant.substeps
    lo, hi = plant.limits
    for _ in range(plant.substeps):
        omega += h * plant.net_torque(theta, omega, pressures) / plant.inertia
        if abs(omega) > MAX_OMEGA:
            raise InstabilityError(f"angular velocity {omega:.3g} rad/s exceeds {MAX_OMEGA:g}")
        theta += h * omega
        if theta > hi:
            theta, omega = hi, min(omega, 0.0)
        elif theta < lo:
            theta, omega = lo, max(omega, 0.0)
    return theta, omega


# ---------------------------------------------------------------------------
# trajectories and closed loop
# ---------------------------------------------------------------------------


def staircase_trajectory(levels_deg: Sequence[float], dwell: float = 10.0) -> np.ndarray:
    """(t, fe, ur) samples, one per dwell start; used with zero-order hold."""
    rows = [(i * dwell, lv, 0.0) for i, lv in enumerate(levels_deg)]
    rows.append((len(levels_deg) * dwell, levels_deg[-1], 0.0))
    return np.array(rows, dtype=float)


def paper_staircase_levels() -> list[float]:
    """0 to 30 deg extension, then to 40 deg flexion, in 10 deg steps (flexion positive)."""
    down = [0.0, -10.0, -20.0, -30.0]
    up = [-20.0, -10.0, 0.0, 10.0, 20.0, 30.0, 40.0]
    return down + up


def sinusoid_trajectory(fe_range=(-40.0, 30.0), ur_range=(-10.0, 30.0), period: float = 24.0,
                        periods: int = 3, dt: float = 0.014, phase: float = math.pi / 2) -> np.ndarray:
    """Flexion/extension and deviation sinusoids, ``phase`` apart, sampled about every ``dt``.

    The flexion/extension wave starts at its rising zero crossing so the run
    begins from the zeroed neutral wrist.
    """
    n = int(math.ceil(periods * period / dt - 1e-9))
    t = np.linspace(0.0, periods * period, n + 1)
    w = 2 * math.pi / period
    fe_mid, fe_amp = 0.5 * (fe_range[0] + fe_range[1]), 0.5 * (fe_range[1] - fe_range[0])
    ur_mid, ur_amp = 0.5 * (ur_range[0] + ur_range[1]), 0.5 * (ur_range[1] - ur_range[0])
    off = math.asin(max(-1.0, min(1.0, -fe_mid / fe_amp)))
    fe = fe_mid + fe_amp * np.sin(w * t + off)
    ur = ur_mid + ur_amp * np.sin(w * t + off + phase)
    return np.column_stack([t, fe, ur])


LOG_COLUMNS = ("t_s", "fe_des", "fe_act", "ur_des", "ur_act",
               "p_flex_kpa", "p_ext_kpa", "p_uln_kpa", "p_rad_kpa")


@dataclass
class TrackingLog:
    data: np.ndarray  # rows follow LOG_COLUMNS
    settle: float = 0.0
    columns: tuple = LOG_COLUMNS

    def column(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]

    def rms_error(self, axis: str) -> float:
        t = self.column("t_s")
        mask = t >= t[0] + self.settle
        err = self.column(f"{axis}_des")[mask] - self.column(f"{axis}_act")[mask]
        return float(np.sqrt(np.mean(err ** 2)))


def _hold(traj: np.ndarray, t: float, col: int) -> float:
    i = int(np.searchsorted(traj[:, 0], t + 1e-12, side="right")) - 1
    return float(traj[max(i, 0), col])


def run_tracking(cfg: ControllerConfig, plants: Mapping[str, PlantConfig], trajectory,
                 *, settle: float = 0.0, theta0: Mapping[str, float] | None = None) -> TrackingLog:
    """Closed-loop simulation of both wrist axes.

    ``plants`` maps ``"fe"`` and ``"ur"`` to their plant; a missing axis is
    held at zero with its pressures frozen at ``p_init``.  The desired angle
    is the latest trajectory sample (zero-order hold).  The loop runs until
    the logged time reaches the last trajectory sample.
    """
    traj = np.asarray(trajectory, dtype=float)
    if np.any(np.diff(traj[:, 0]) < 0):
        raise ValueError("trajectory must be time-sorted")
    t0, t_end = traj[0, 0], traj[-1, 0]
    n = int(math.ceil((t_end - t0) / cfg.dt - 1e-9)) + 1
    axes = ("fe", "ur")
    theta = {a: math.radians((theta0 or {}).get(a, 0.0)) for a in axes}
    omega = {a: 0.0 for a in axes}
    setpoint = {a: ControllerState.initial(cfg) for a in axes}
    applied = dict(setpoint)
    rows = np.empty((n, len(LOG_COLUMNS)))
    alpha = 1.0 if not cfg.regulator_lag else 1.0 - math.exp(-cfg.dt / cfg.regulator_lag)
    for k in range(n):
        t = t0 + k * cfg.dt
        des = {"fe": _hold(traj, t, 1), "ur": _hold(traj, t, 2)}
        act = {a: math.degrees(theta[a]) for a in axes}
        rows[k] = (t, des["fe"], act["fe"], des["ur"], act["ur"],
                   setpoint["fe"].positive, setpoint["fe"].negative,
                   setpoint["ur"].positive, setpoint["ur"].negative)
        for a in axes:
            if a not in plants:
                continue
            setpoint[a] = controller_step(cfg, setpoint[a], des[a], act[a])
            prev = applied[a]
            applied[a] = ControllerState(
                prev.positive + alpha * (setpoint[a].positive - prev.positive),
                prev.negative + alpha * (setpoint[a].negative - prev.negative),
            )
            theta[a], omega[a] = plant_step(plants[a], theta[a], omega[a], applied[a], cfg.dt)
    return TrackingLog(rows, settle)
