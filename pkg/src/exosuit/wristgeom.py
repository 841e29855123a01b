"""Planar torque model of one muscle spanning the wrist.

Frame: origin at the wrist center O, x along the forearm toward the hand,
z along the joint axis.  The forearm mount sits at ``P1 = (-d1, w1)``; the
hand mount is ``(d2, w2)`` in the hand frame, rotated by the joint angle
``theta``.  Positive theta turns the hand toward the muscle's side, so the
muscle's own torque is positive.  At negative angles the muscle may wrap
over the wrist circle (radius ``rw``), following a tangent-arc-tangent path.

An opposing muscle of an antagonistic pair is described with the same
positive offsets and evaluated through :func:`muscle_torque` with
``side=-1``, which reflects the frame about the x axis.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Mapping

from .errors import GeometryError, RegimeError
from .fpam import FpamSpec, fpam_force

TANGENT_TOL = 1e-12
PHI_TOL = 1e-9


class Regime(str, enum.Enum):
    STRAIGHT = "straight"
    TANGENT = "tangent"
    WRAPPED = "wrapped"


@dataclass(frozen=True)
class PlacementParams:
    """Mounting geometry of one muscle [m]."""

    d1: float
    w1: float
    d2: float
    w2: float
    rw: float

    def __post_init__(self):
        for name in ("d1", "w1", "d2", "w2", "rw"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise GeometryError(f"{name} must be positive and finite, got {v!r}")
        if not self.rw < self.R1:
            raise GeometryError(f"forearm mount inside wrist circle (R1={self.R1:g}, rw={self.rw:g})")
        if not self.rw < self.R2:
            raise GeometryError(f"hand mount inside wrist circle (R2={self.R2:g}, rw={self.rw:g})")

    @property
    def R1(self) -> float:
        return math.hypot(self.d1, self.w1)

    @property
    def R2(self) -> float:
        return math.hypot(self.d2, self.w2)

    def with_radius(self, rw: float) -> "PlacementParams":
        return replace(self, rw=rw)

    def to_dict(self) -> dict:
        return {"d1_m": self.d1, "w1_m": self.w1, "d2_m": self.d2, "w2_m": self.w2, "rw_m": self.rw}

    @classmethod
    def from_dict(cls, d: Mapping) -> "PlacementParams":
        return cls(d["d1_m"], d["w1_m"], d["d2_m"], d["w2_m"], d["rw_m"])


@dataclass(frozen=True)
class GeometrySolution:
    regime: Regime
    length: float
    moment_arm: float
    psi: float | None = None
    phi: float | None = None
    q1: tuple[float, float] | None = None
    q2: tuple[float, float] | None = None
    phi_clamped: bool = False


def forearm_point(p: PlacementParams) -> tuple[float, float]:
    return (-p.d1, p.w1)


def hand_point(p: PlacementParams, theta: float) -> tuple[float, float]:
    c, s = math.cos(theta), math.sin(theta)
    return (p.d2 * c - p.w2 * s, p.d2 * s + p.w2 * c)


def segment_distance(p: PlacementParams, theta: float) -> float:
    """Distance from O to the segment P1P2."""
    x1, y1 = forearm_point(p)
    x2, y2 = hand_point(p, theta)
    dx, dy = x2 - x1, y2 - y1
    n2 = dx * dx + dy * dy
    if n2 == 0.0:
        raise GeometryError("mounting points coincide")
    u = -(x1 * dx + y1 * dy) / n2
    u = min(1.0, max(0.0, u))
    return math.hypot(x1 + u * dx, y1 + u * dy)


def discriminant(p: PlacementParams, theta: float) -> float:
    """Line/circle discriminant ``(2ab)^2 - 4(1+a^2)(b^2 - rw^2)`` for y = a x + b.

    Undefined for vertical chords; :func:`classify_regime` therefore works
    with the point-to-segment distance, which agrees in sign with D.
    """
    x1, y1 = forearm_point(p)
    x2, y2 = hand_point(p, theta)
    if x2 == x1:
        raise GeometryError("vertical chord: slope form undefined")
    a = (y2 - y1) / (x2 - x1)
    b = y1 - a * x1
    return (2 * a * b) ** 2 - 4 * (1 + a * a) * (b * b - p.rw * p.rw)


def tangency_margin(p: PlacementParams, theta: float) -> float:
    """(rw^2 - dist^2) / rw^2: negative clear of the wrist, 0 tangent, positive crossing."""
    dist = segment_distance(p, theta)
    return (p.rw * p.rw - dist * dist) / (p.rw * p.rw)


def _wrap_angles(p: PlacementParams, theta: float) -> tuple[float, float, tuple[float, float]]:
    R1sq = p.d1 * p.d1 + p.w1 * p.w1
    k = p.rw * p.rw / R1sq
    m = p.rw * math.sqrt(R1sq - p.rw * p.rw) / R1sq
    # tangent point from P1 on the muscle's (positive-w) side
    q1 = (-p.d1 * k + p.w1 * m, p.w1 * k + p.d1 * m)
    psi = math.atan2(q1[0], q1[1])
    R2 = p.R2
    phi = math.pi / 2 - theta - (psi + math.acos(p.rw / R2) + math.asin(p.w2 / R2))
    return psi, phi, q1


def classify_regime(p: PlacementParams, theta: float, tol: float = TANGENT_TOL) -> Regime:
    """Straight, tangent or wrapped path at joint angle ``theta``.

    The chord/circle margin decides tangency.  Past tangency the chord can
    sweep clean across the circle to its far side while the real muscle
    stays wrapped, so a positive wrap arc also counts as Wrapped.
    """
    margin = tangency_margin(p, theta)
    _, phi, _ = _wrap_angles(p, theta)
    if abs(margin) < tol and abs(phi) < 1e-6:
        return Regime.TANGENT
    if phi > 0.0:
        return Regime.WRAPPED
    if margin < 0.0:
        return Regime.STRAIGHT
    raise GeometryError(
        f"chord crosses the wrist circle on the far side at theta={theta:.6g} rad"
    )


def straight_length(p: PlacementParams, theta: float) -> float:
    c, s = math.cos(theta), math.sin(theta)
    return math.hypot(-p.d1 - p.d2 * c + p.w2 * s, p.w1 - p.d2 * s - p.w2 * c)


def straight_moment_arm(p: PlacementParams, theta: float) -> float:
    c, s = math.cos(theta), math.sin(theta)
    num = (p.d1 * p.d2 - p.w1 * p.w2) * s + (p.d1 * p.w2 + p.d2 * p.w1) * c
    return num / straight_length(p, theta)


def straight_torque(F: float, p: PlacementParams, theta: float) -> float:
    """Torque [N m] of tension F pulling the hand mount straight toward the forearm mount."""
    return F * straight_moment_arm(p, theta)


def wrapped_geometry(p: PlacementParams, theta: float) -> GeometrySolution:
    """Tangent-arc-tangent path over the wrist circle.

    ``psi`` is the clockwise angle from +y to the first contact point Q1 and
    ``phi`` the wrapped arc; the last contact point is at clockwise angle
    ``psi + phi``.  An arc longer than pi is clamped and flagged.
    """
    if p.rw >= p.R1 or p.rw >= p.R2:
        raise GeometryError("mounting point inside the wrist circle")
    psi, phi, q1 = _wrap_angles(p, theta)
    if phi < -PHI_TOL:
        raise RegimeError(f"no wrapping at theta={theta:.6g} rad (phi={phi:.3g}); use the straight model")
    clamped = phi > math.pi
    phi = min(max(phi, 0.0), math.pi)
    gamma = psi + phi
    q2 = (p.rw * math.sin(gamma), p.rw * math.cos(gamma))
    length = math.sqrt(p.R1 ** 2 - p.rw ** 2) + p.rw * phi + math.sqrt(p.R2 ** 2 - p.rw ** 2)
    arm = _wrapped_moment_arm(p, theta, gamma)
    return GeometrySolution(Regime.WRAPPED, length, arm, psi, phi, q1, q2, clamped)


def _wrapped_moment_arm(p: PlacementParams, theta: float, gamma: float) -> float:
    c, s = math.cos(theta), math.sin(theta)
    sg, cg = math.sin(gamma), math.cos(gamma)
    hx = p.d2 * c - p.w2 * s
    hy = p.d2 * s + p.w2 * c
    p2q2 = math.hypot(p.rw * sg - hx, p.rw * cg - hy)
    return p.rw * (hx * cg - hy * sg) / p2q2


def wrapped_torque(F: float, p: PlacementParams, theta: float,
                   sol: GeometrySolution | None = None) -> float:
    """Torque [N m] when the muscle leaves the hand mount toward the last contact point."""
    g = sol if sol is not None else wrapped_geometry(p, theta)
    return F * g.moment_arm


def geometry(p: PlacementParams, theta: float) -> GeometrySolution:
    regime = classify_regime(p, theta)
    if regime is Regime.WRAPPED:
        return wrapped_geometry(p, theta)
    return GeometrySolution(regime, straight_length(p, theta), straight_moment_arm(p, theta))


def path_length(p: PlacementParams, theta: float) -> float:
    return geometry(p, theta).length


def torque(spec: FpamSpec, P: float, p: PlacementParams, theta: float) -> tuple[float, GeometrySolution]:
    """Joint torque of one muscle at pressure P [Pa] and angle theta [rad]."""
    g = geometry(p, theta)
    F = fpam_force(spec, P, g.length)
    return F * g.moment_arm, g


def muscle_torque(spec: FpamSpec, P: float, p: PlacementParams, theta: float, side: int = 1) -> float:
    """Signed torque about a shared axis; ``side=-1`` mirrors the muscle's frame."""
    tau, _ = torque(spec, P, p, side * theta)
    return side * tau


def tangency_angle(p: PlacementParams, lo: float = -math.pi / 2, hi: float = math.pi / 2,
                   xtol: float = 1e-14, n_scan: int = 360) -> float:
    """Joint angle where the chord first touches the wrist circle.

    Scans down from ``hi`` for the first sign change of the chord margin and
    bisects inside that cell.
    """
    grid = [hi - (hi - lo) * i / n_scan for i in range(n_scan + 1)]
    prev = grid[0]
    f_prev = tangency_margin(p, prev)
    if f_prev >= 0:
        raise GeometryError("chord already touches the wrist at the upper bracket")
    for th in grid[1:]:
        f = tangency_margin(p, th)
        if f >= 0:
            a, b = th, prev  # margin(a) >= 0 > margin(b)
            break
        prev = th
    else:
        raise GeometryError("no straight/wrapped transition inside the bracket")
    while b - a > xtol:
        mid = 0.5 * (a + b)
        if mid in (a, b):
            break
        if tangency_margin(p, mid) >= 0:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)
