"""Fabric pneumatic artificial muscle (fPAM) force model and identification.

Force is returned as axial tension, positive when the muscle pulls.  The
pressure term is the ideal McKibben cylinder written in its tension-positive
orientation, ``pi P r0^2 (3 (1-eps)^2 / tan^2(a0) - 1 / sin^2(a0))``, so it
is largest at ``eps = 0`` and vanishes at ``eps = eps_max``.  The deflated
fabric adds a linear elastic pull ``2 pi E t (eps0 - eps) r0`` for
``eps <= eps0``.  A slack muscle cannot push, so the total is clipped at 0.

Everything is in SI units (m, Pa, N, rad).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import curve_fit

from .errors import DomainError, FitError

# eps_max above this has no real fiber angle: eps^2 - 2 eps + 2/3 < 0
EPS_MAX_LIMIT = 1.0 - 1.0 / math.sqrt(3.0)

DEFAULT_THICKNESS = 0.08e-3
DEFAULT_MODULUS = 9.06e6


def _as_table(table) -> tuple[tuple[float, float], ...]:
    if isinstance(table, Mapping):
        items = table.items()
    else:
        items = table
    out = tuple(sorted((float(p), float(v)) for p, v in items))
    if len({p for p, _ in out}) != len(out):
        raise ValueError("duplicate pressure in table")
    return out


def _interp_table(table, P: float, extrapolate: bool, what: str) -> float:
    """Piecewise-linear lookup in a sorted ((pressure, value), ...) table."""
    ps = [p for p, _ in table]
    vs = [v for _, v in table]
    lo, hi = ps[0], ps[-1]
    tol = 1e-9 * max(1.0, abs(hi))
    if P < lo - tol or P > hi + tol:
        if not extrapolate:
            raise DomainError(
                f"pressure {P:g} Pa outside calibrated {what} range "
                f"[{lo:g}, {hi:g}] Pa (set extrapolate=True to clamp)"
            )
    if len(ps) == 1 or P <= lo:
        return vs[0]
    if P >= hi:
        return vs[-1]
    return float(np.interp(P, ps, vs))


@dataclass(frozen=True)
class FpamSpec:
    """Actuator geometry, material and per-pressure contraction limits.

    ``eps_max_by_pressure`` maps pressure [Pa] to the free-contraction limit.
    ``r0_by_pressure`` optionally holds identified per-pressure radii; when
    empty the scalar ``r0`` is used at every pressure.
    """

    L0: float
    r0: float
    t: float
    E: float
    eps0: float
    eps_max_by_pressure: tuple = ()
    r0_by_pressure: tuple = ()
    extrapolate: bool = False
    measured_L0: float | None = None
    measured_r0: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "eps_max_by_pressure", _as_table(self.eps_max_by_pressure))
        object.__setattr__(self, "r0_by_pressure", _as_table(self.r0_by_pressure))
        for name in ("L0", "r0", "t", "E"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")
        if not 0.0 <= self.eps0 < 1.0:
            raise ValueError(f"eps0 must lie in [0, 1), got {self.eps0!r}")
        if not self.eps_max_by_pressure:
            raise ValueError("eps_max_by_pressure needs at least one entry")
        for p, e in self.eps_max_by_pressure:
            if p < 0:
                raise ValueError(f"negative pressure {p!r} in eps_max table")
            if not self.eps0 <= e < 1.0:
                raise ValueError(f"eps_max {e!r} at {p:g} Pa must lie in [eps0, 1)")
        for p, r in self.r0_by_pressure:
            if not r > 0:
                raise ValueError(f"r0 {r!r} at {p:g} Pa must be positive")

    def eps_max(self, P: float) -> float:
        return _interp_table(self.eps_max_by_pressure, P, self.extrapolate, "eps_max")

    def radius(self, P: float) -> float:
        if not self.r0_by_pressure:
            return self.r0
        return _interp_table(self.r0_by_pressure, P, self.extrapolate, "r0")

    def contraction(self, L: float) -> float:
        return (self.L0 - L) / self.L0

    def with_length(self, L0: float) -> "FpamSpec":
        return replace(self, L0=L0)

    def to_dict(self) -> dict:
        d = {
            "l0_m": self.L0,
            "r0_m": self.r0,
            "t_m": self.t,
            "e_pa": self.E,
            "eps0": self.eps0,
            "eps_max": [{"p_pa": p, "value": v} for p, v in self.eps_max_by_pressure],
        }
        if self.r0_by_pressure:
            d["r0_by_pressure"] = [{"p_pa": p, "value": v} for p, v in self.r0_by_pressure]
        if self.extrapolate:
            d["extrapolate"] = True
        measured = {}
        if self.measured_L0 is not None:
            measured["l0_m"] = self.measured_L0
        if self.measured_r0 is not None:
            measured["r0_m"] = self.measured_r0
        if measured:
            d["measured"] = measured
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "FpamSpec":
        measured = d.get("measured", {})
        return cls(
            L0=float(d["l0_m"]),
            r0=float(d["r0_m"]),
            t=float(d["t_m"]),
            E=float(d["e_pa"]),
            eps0=float(d["eps0"]),
            eps_max_by_pressure=[(e["p_pa"], e["value"]) for e in d["eps_max"]],
            r0_by_pressure=[(e["p_pa"], e["value"]) for e in d.get("r0_by_pressure", [])],
            extrapolate=bool(d.get("extrapolate", False)),
            measured_L0=measured.get("l0_m"),
            measured_r0=measured.get("r0_m"),
        )


def fiber_orientation(eps_max: float) -> float:
    """Fully stretched fiber angle that puts the pressure-force root at ``eps_max``."""
    if not 0.0 < eps_max < 1.0:
        raise DomainError(f"eps_max must lie in (0, 1), got {eps_max!r}")
    arg = eps_max * eps_max - 2.0 * eps_max + 2.0 / 3.0
    if arg < 0.0:
        if arg > -1e-15:
            arg = 0.0
        else:
            raise DomainError(
                f"eps_max={eps_max!r} exceeds the ideal limit {EPS_MAX_LIMIT:.6f}; "
                "no real fiber orientation exists"
            )
    return -math.asin(math.sqrt(arg) / (eps_max - 1.0))


def pressure_force(P: float, r0: float, alpha0: float, eps: float) -> float:
    """Ideal McKibben pull of a pressurized cylinder (may be negative past eps_max)."""
    s = math.sin(alpha0)
    c = math.cos(alpha0)
    return math.pi * P * r0 * r0 * (3.0 * (1.0 - eps) ** 2 * c * c - 1.0) / (s * s)


def elastic_force(E: float, t: float, r0: float, eps0: float, eps: float) -> float:
    if eps >= eps0:
        return 0.0
    return 2.0 * math.pi * E * t * (eps0 - eps) * r0


def force_at_contraction(spec: FpamSpec, P: float, eps: float) -> float:
    """Muscle tension [N] at pressure ``P`` [Pa] and contraction ratio ``eps``."""
    if eps >= 1.0:
        raise DomainError(f"contraction ratio must be < 1, got {eps!r}")
    if P < 0.0:
        raise DomainError(f"pressure must be non-negative, got {P!r}")
    r0 = spec.radius(P)
    F = elastic_force(spec.E, spec.t, r0, spec.eps0, eps)
    if P > 0.0:
        F += pressure_force(P, r0, fiber_orientation(spec.eps_max(P)), eps)
    return F if F > 0.0 else 0.0


def fpam_force(spec: FpamSpec, P: float, L: float) -> float:
    """Muscle tension [N] at pressure ``P`` [Pa] when held at length ``L`` [m]."""
    if not L > 0.0:
        raise DomainError(f"muscle length must be positive, got {L!r}")
    return force_at_contraction(spec, P, (spec.L0 - L) / spec.L0)


def eps_max_from_orientation(alpha0: float) -> float:
    """Root in (0, 1) of the pressure term for a given fiber angle."""
    c = math.cos(alpha0)
    return 1.0 - 1.0 / (math.sqrt(3.0) * c)


# ---------------------------------------------------------------------------
# tensile data and curve fitting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TensileDataset:
    """Tensile-test samples, ``samples[P]`` is an (n, 2) array of (eps, force)."""

    samples: Mapping[float, np.ndarray]

    def __post_init__(self):
        clean = {}
        for P, arr in self.samples.items():
            a = np.asarray(arr, dtype=float).reshape(-1, 2)
            if len(a) < 10:
                raise ValueError(f"pressure {P:g} Pa has {len(a)} samples, need >= 10")
            if np.any(a[:, 0] < -0.1) or np.any(a[:, 0] >= 1.0):
                raise ValueError(f"contraction ratios at {P:g} Pa outside [-0.1, 1)")
            clean[float(P)] = a
        if not clean:
            raise ValueError("empty tensile dataset")
        object.__setattr__(self, "samples", dict(sorted(clean.items())))

    @property
    def pressure_levels(self) -> list[float]:
        return list(self.samples)


def moving_average(y: np.ndarray, window: int) -> np.ndarray:
    """Centered moving average; the window shrinks symmetrically at the ends."""
    y = np.asarray(y, dtype=float)
    n = len(y)
    half = max(window, 1) // 2
    csum = np.concatenate(([0.0], np.cumsum(y)))
    idx = np.arange(n)
    h = np.minimum(half, np.minimum(idx, n - 1 - idx))
    return (csum[idx + h + 1] - csum[idx - h]) / (2 * h + 1)


def smooth_samples(samples: np.ndarray, window: int = 11) -> tuple[np.ndarray, np.ndarray]:
    """Sort all cycles by eps and average neighbouring samples."""
    order = np.argsort(samples[:, 0], kind="stable")
    eps = samples[order, 0]
    force = samples[order, 1]
    return moving_average(eps, window), moving_average(force, window)


@dataclass(frozen=True)
class PolynomialForceFit:
    pressure: float
    poly: np.polynomial.Polynomial
    eps_range: tuple[float, float]
    rms: float

    def __call__(self, eps):
        return self.poly(eps)

    @property
    def zero_crossing(self) -> float | None:
        """First downward root inside the fitted range, or None."""
        lo, hi = self.eps_range
        span = hi - lo
        lo_s, hi_s = max(lo, 0.0), min(hi + 0.05 * span, 1.0)
        dpoly = self.poly.deriv()
        roots = self.poly.roots()
        real = sorted(
            r.real for r in roots
            if abs(r.imag) < 1e-9 and lo_s < r.real < hi_s and dpoly(r.real) < 0
        )
        return float(real[0]) if real else None


def _exp_branch(u, S, B):
    """``S (exp(B u) - 1) / B``, tending to ``S u`` as B -> 0."""
    u = np.asarray(u, dtype=float)
    if B < 1e-9:
        return S * u
    return S * np.expm1(B * u) / B


@dataclass(frozen=True)
class ExponentialZeroFit:
    """Deflated-muscle force ``A (exp(B (eps0 - eps)) - 1)`` below eps0, 0 above.

    Stored as the slope ``S = A B`` at eps0 so that nearly linear data
    (B -> 0) stays well conditioned.
    """

    S: float
    B: float
    eps0: float
    rms: float = 0.0

    @property
    def A(self) -> float:
        return self.S / self.B if self.B > 0 else math.inf

    def __call__(self, eps):
        eps = np.asarray(eps, dtype=float)
        out = _exp_branch(np.clip(self.eps0 - eps, 0.0, None), self.S, self.B)
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class ForceCurveFit:
    curves: Mapping[float, PolynomialForceFit] = field(default_factory=dict)
    zero: ExponentialZeroFit | None = None

    @property
    def pressures(self) -> list[float]:
        ps = list(self.curves)
        if self.zero is not None:
            ps.append(0.0)
        return sorted(ps)

    def evaluate(self, P: float, eps):
        if P == 0.0 and self.zero is not None:
            return self.zero(eps)
        return self.curves[P](eps)

    def eps_max(self) -> dict[float, float | None]:
        out = {P: c.zero_crossing for P, c in self.curves.items()}
        if self.zero is not None:
            out[0.0] = self.zero.eps0
        return dict(sorted(out.items()))


def fit_polynomial_curve(eps, force, pressure: float, degree: int = 8) -> PolynomialForceFit:
    eps = np.asarray(eps, dtype=float)
    force = np.asarray(force, dtype=float)
    if len(np.unique(eps)) < degree + 1:
        raise FitError(
            f"{len(np.unique(eps))} distinct contraction ratios at {pressure:g} Pa; "
            f"a degree-{degree} fit needs at least {degree + 1}"
        )
    with warnings.catch_warnings():
        warnings.simplefilter("error", np.exceptions.RankWarning)
        try:
            poly, (_, rank, _, _) = np.polynomial.Polynomial.fit(eps, force, degree, full=True)
        except (np.linalg.LinAlgError, np.exceptions.RankWarning) as exc:
            raise FitError(f"singular least-squares system at {pressure:g} Pa") from exc
    if rank < degree + 1:
        raise FitError(f"rank-deficient least-squares system at {pressure:g} Pa")
    rms = float(np.sqrt(np.mean((poly(eps) - force) ** 2)))
    return PolynomialForceFit(pressure, poly, (float(eps.min()), float(eps.max())), rms)


def fit_zero_pressure(eps, force) -> ExponentialZeroFit:
    eps = np.asarray(eps, dtype=float)
    force = np.asarray(force, dtype=float)
    fmax = float(force.max())
    if fmax <= 0.0:
        raise FitError("zero-pressure data never shows positive tension")
    slack = eps[force <= 0.01 * fmax]
    eps0_guess = float(slack.min()) if slack.size else float(eps.max())
    span = max(eps0_guess - float(eps.min()), 1e-3)
    S0 = fmax / span

    def model(x, S, B, e0):
        return _exp_branch(np.clip(e0 - x, 0.0, None), S, B)

    try:
        (S, B, e0), _ = curve_fit(
            model, eps, force, p0=(S0, 1.0, eps0_guess),
            bounds=([0.0, 0.0, float(eps.min())], [np.inf, 1e3, float(eps.max())]),
            max_nfev=20000,
        )
    except (RuntimeError, ValueError) as exc:
        raise FitError(f"zero-pressure exponential fit failed: {exc}") from exc
    rms = float(np.sqrt(np.mean((model(eps, S, B, e0) - force) ** 2)))
    return ExponentialZeroFit(float(S), float(B), float(e0), rms)


def fit_force_curves(data: TensileDataset, window: int = 11, degree: int = 8) -> ForceCurveFit:
    """Fit smoothed force-contraction curves per pressure level.

    Nonzero pressures get a degree-8 least-squares polynomial; the zero-pressure
    level, if present, gets the exponential-plus-zero piecewise model.
    """
    curves = {}
    zero = None
    for P, samples in data.samples.items():
        eps, force = smooth_samples(samples, window)
        if P == 0.0:
            zero = fit_zero_pressure(eps, force)
        else:
            curves[P] = fit_polynomial_curve(eps, force, P, degree)
    return ForceCurveFit(curves, zero)


def _best_radius(a: np.ndarray, b: np.ndarray, y: np.ndarray) -> float:
    """Least-squares r for y ~ a r^2 + b r (stationary points of a cubic)."""
    coeffs = [
        2.0 * np.dot(a, a),
        3.0 * np.dot(a, b),
        np.dot(b, b) - 2.0 * np.dot(a, y),
        -np.dot(b, y),
    ]
    roots = np.roots(coeffs) if coeffs[0] != 0.0 else np.roots(coeffs[2:])
    cands = [r.real for r in roots if abs(r.imag) < 1e-9 * max(1.0, abs(r)) and r.real > 0]
    if not cands:
        raise FitError("no positive radius matches the fitted force curve")
    sse = [np.sum((a * r * r + b * r - y) ** 2) for r in cands]
    return float(cands[int(np.argmin(sse))])


def identify_spec(
    fit: ForceCurveFit,
    measured_L0: float,
    measured_r0: float,
    *,
    t: float = DEFAULT_THICKNESS,
    E: float = DEFAULT_MODULUS,
    eps0: float | None = None,
    n_grid: int = 200,
) -> FpamSpec:
    """Build an FpamSpec from fitted curves.

    eps_max per pressure comes from the curve zero crossings; the radius at
    each pressure is the least-squares match of the model force to the fitted
    curve over ``[0, eps_max]``.  The scalar ``r0`` is their mean.
    """
    if len(fit.pressures) < 2:
        raise FitError("identification needs fits at two or more pressure levels")
    if eps0 is None:
        if fit.zero is None:
            raise FitError("eps0 is unknown: no zero-pressure fit and none given")
        eps0 = fit.zero.eps0
    eps_max = {}
    for P, curve in fit.curves.items():
        root = curve.zero_crossing
        if root is None:
            raise FitError(f"force fit at {P:g} Pa has no zero crossing in (0, 1)")
        eps_max[P] = max(root, eps0)
    if fit.zero is not None:
        eps_max[0.0] = eps0

    radii = {}
    for P, em in eps_max.items():
        grid = np.linspace(0.0, em, n_grid)
        y = np.asarray(fit.evaluate(P, grid), dtype=float)
        b = np.array([2.0 * math.pi * E * t * (eps0 - e) if e < eps0 else 0.0 for e in grid])
        if P > 0.0:
            alpha0 = fiber_orientation(em)
            a = np.array([pressure_force(P, 1.0, alpha0, e) for e in grid])
        else:
            a = np.zeros_like(grid)
        radii[P] = _best_radius(a, b, y)

    return FpamSpec(
        L0=measured_L0,
        r0=float(np.mean(list(radii.values()))),
        t=t,
        E=E,
        eps0=eps0,
        eps_max_by_pressure=eps_max,
        r0_by_pressure=radii,
        measured_L0=measured_L0,
        measured_r0=measured_r0,
    )


def synthetic_tensile_data(
    spec: FpamSpec,
    pressures: Sequence[float],
    n: int = 120,
    eps_lo: float = -0.02,
    overshoot: float = 0.03,
    noise: float = 0.0,
    seed: int = 0,
) -> TensileDataset:
    """Samples of the force law up to just past each zero crossing.

    Past the crossing the clipped model is flat at 0, so samples stop at
    ``eps_max + overshoot`` and use the unclipped pressure term there, as a
    load cell would read slight compression.
    """
    rng = np.random.default_rng(seed)
    out = {}
    for P in pressures:
        em = spec.eps_max(P)
        eps = np.linspace(eps_lo, min(em + overshoot, 0.99), n)
        r0 = spec.radius(P)
        f = np.array([elastic_force(spec.E, spec.t, r0, spec.eps0, e) for e in eps])
        if P > 0:
            alpha0 = fiber_orientation(em)
            f += np.array([pressure_force(P, r0, alpha0, e) for e in eps])
        if noise:
            f = f + rng.normal(0.0, noise, size=f.shape)
        out[P] = np.column_stack([eps, f])
    return TensileDataset(out)
