"""Placement optimization, auxiliary parameter searches and range-of-motion prediction.

The design objective sums the torque deficit of one muscle against a dense
reference profile.  Placement search is a multi-start Nelder-Mead run in a
sin^2 box transform so that optima on the bounds are reachable.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DomainError, GeometryError, InfeasibleError, NoCrossingError
from .fpam import FpamSpec
from .mountstretch import StretchModel, stretched_torque
from .wristgeom import PlacementParams, Regime, classify_regime, path_length, torque

PARAM_NAMES = ("d1", "w1", "d2", "w2")


# ---------------------------------------------------------------------------
# reference profile
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReferenceTorque:
    theta_raw: np.ndarray
    tau_raw: np.ndarray
    theta: np.ndarray
    tau: np.ndarray

    @property
    def n(self) -> int:
        return len(self.theta)


def interpolate_reference(raw: Sequence[tuple[float, float]], n: int = 140) -> ReferenceTorque:
    """Natural cubic spline through (theta [rad], tau [N m]) samples, resampled uniformly."""
    arr = np.asarray(raw, dtype=float).reshape(-1, 2)
    if len(arr) < 4:
        raise ValueError(f"need at least 4 reference samples, got {len(arr)}")
    th, tau = arr[:, 0], arr[:, 1]
    if len(np.unique(th)) != len(th):
        raise ValueError("duplicate joint angle in reference samples")
    if np.any(np.diff(th) <= 0):
        raise ValueError("reference angles must be strictly increasing")
    if n < len(th):
        raise ValueError("dense grid must have at least as many points as the raw samples")
    spline = CubicSpline(th, tau, bc_type="natural")
    dense = np.linspace(th[0], th[-1], n)
    return ReferenceTorque(th, tau, dense, spline(dense))


# ---------------------------------------------------------------------------
# problem definition and objective
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OptimizationProblem:
    """Box-bounded placement search for one muscle.

    ``bounds`` and ``grid`` map parameter names (d1, w1, d2, w2) to (lower,
    upper) and seed spacing [m].  Parameters listed in ``fixed`` are held at
    the given value and excluded from the search.
    """

    bounds: Mapping[str, tuple[float, float]]
    grid: Mapping[str, float]
    pressure: float
    spec: FpamSpec
    rw: float
    theta_sizing: float
    fixed: Mapping[str, float] = field(default_factory=dict)
    max_iter: int = 2000
    xtol: float = 1e-6
    ftol: float = 1e-9

    def __post_init__(self):
        for name in PARAM_NAMES:
            if name in self.fixed:
                continue
            lo, hi = self.bounds[name]
            if not lo < hi:
                raise ValueError(f"bounds for {name} must satisfy lower < upper")
            if not self.grid[name] > 0:
                raise ValueError(f"grid resolution for {name} must be positive")

    @property
    def free(self) -> tuple[str, ...]:
        return tuple(n for n in PARAM_NAMES if n not in self.fixed)

    def lower(self) -> np.ndarray:
        return np.array([self.bounds[n][0] for n in self.free])

    def upper(self) -> np.ndarray:
        return np.array([self.bounds[n][1] for n in self.free])

    def placement(self, x: Sequence[float]) -> PlacementParams:
        vals = dict(self.fixed)
        vals.update(zip(self.free, (float(v) for v in x)))
        return PlacementParams(vals["d1"], vals["w1"], vals["d2"], vals["w2"], self.rw)

    def seeds(self) -> list[tuple[float, ...]]:
        axes = []
        for name in self.free:
            lo, hi = self.bounds[name]
            step = self.grid[name]
            k = int(math.floor((hi - lo) / step + 1e-9))
            axes.append([lo + i * step for i in range(k + 1)])
        return list(itertools.product(*axes))

    def with_pressure(self, pressure: float) -> "OptimizationProblem":
        return replace(self, pressure=pressure)


def size_initial_length(p: PlacementParams, theta_max_stretch: float) -> float:
    """Fully stretched length: the path length at the most stretching joint angle."""
    return path_length(p, theta_max_stretch)


def length_for_limit(p: PlacementParams, theta_limit: float, eps_max: float) -> float:
    """Stretched length that puts the free-contraction limit at ``theta_limit``.

    Valid when the elastic term has vanished at the limit (eps_max >= eps0).
    """
    return path_length(p, theta_limit) / (1.0 - eps_max)


def model_torque_curve(p: PlacementParams, problem: OptimizationProblem,
                       thetas: Sequence[float]) -> np.ndarray:
    spec = problem.spec.with_length(size_initial_length(p, problem.theta_sizing))
    return np.array([torque(spec, problem.pressure, p, th)[0] for th in thetas])


def deficit(tau_ref, tau_mod) -> float:
    """Sum of positive shortfalls of the model below the reference."""
    return float(np.sum(np.maximum(0.0, np.asarray(tau_ref) - np.asarray(tau_mod))))


def objective(x: Sequence[float], ref: ReferenceTorque, problem: OptimizationProblem) -> float:
    """Design objective [N m]; infeasible geometry scores +inf."""
    try:
        p = problem.placement(x)
        tau = model_torque_curve(p, problem, ref.theta)
    except (GeometryError, DomainError):
        return math.inf
    return deficit(ref.tau, tau)


# ---------------------------------------------------------------------------
# bounded Nelder-Mead
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NelderMeadResult:
    x: np.ndarray
    fun: float
    nit: int
    nfev: int
    converged: bool


def _to_box(u, lo, hi):
    return lo + (hi - lo) * np.sin(u) ** 2


def _from_box(x, lo, hi):
    frac = np.clip((np.asarray(x, dtype=float) - lo) / (hi - lo), 0.0, 1.0)
    return np.arcsin(np.sqrt(frac))


def nelder_mead_box(f: Callable[[np.ndarray], float], x0, lo, hi, *, max_iter: int = 2000,
                    xtol: float = 1e-6, ftol: float = 1e-9, snap: float = 1e-6,
                    step: float = 0.3) -> NelderMeadResult:
    """Nelder-Mead on ``x = lo + (hi - lo) sin^2(u)``.

    Stops when the simplex diameter in x space drops below ``xtol`` or the
    spread of vertex values below ``ftol``.  Coordinates within ``snap`` of a
    bound are returned exactly on it.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    n = len(lo)
    nfev = 0

    def fu(u):
        nonlocal nfev
        nfev += 1
        return f(_to_box(u, lo, hi))

    u0 = _from_box(x0, lo, hi)
    simplex = [u0]
    for i in range(n):
        u = u0.copy()
        # step toward the interior so a seed on a bound still spans the box
        u[i] = u[i] + step if u[i] < math.pi / 4 else u[i] - step
        simplex.append(u)
    simplex = np.array(simplex)
    fvals = np.array([fu(u) for u in simplex])

    converged = False
    nit = 0
    for nit in range(1, max_iter + 1):
        order = np.argsort(fvals, kind="stable")
        simplex, fvals = simplex[order], fvals[order]
        xs = _to_box(simplex, lo, hi)
        diam = max(np.max(np.abs(xs[1:] - xs[0]), initial=0.0), 0.0)
        spread = fvals[-1] - fvals[0] if np.all(np.isfinite(fvals)) else math.inf
        if diam < xtol or spread < ftol or np.all(np.isinf(fvals)):
            converged = True
            break
        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]
        ur = centroid + (centroid - worst)
        fr = fu(ur)
        if fr < fvals[0]:
            ue = centroid + 2.0 * (centroid - worst)
            fe = fu(ue)
            if fe < fr:
                simplex[-1], fvals[-1] = ue, fe
            else:
                simplex[-1], fvals[-1] = ur, fr
            continue
        if fr < fvals[-2]:
            simplex[-1], fvals[-1] = ur, fr
            continue
        if fr < fvals[-1]:
            uc = centroid + 0.5 * (ur - centroid)
            fc = fu(uc)
            if fc <= fr:
                simplex[-1], fvals[-1] = uc, fc
                continue
        else:
            uc = centroid + 0.5 * (worst - centroid)
            fc = fu(uc)
            if fc < fvals[-1]:
                simplex[-1], fvals[-1] = uc, fc
                continue
        best = simplex[0]
        simplex[1:] = best + 0.5 * (simplex[1:] - best)
        fvals[1:] = [fu(u) for u in simplex[1:]]

    i = int(np.argmin(fvals))
    x = _to_box(simplex[i], lo, hi)
    x = np.where(np.abs(x - lo) <= snap, lo, x)
    x = np.where(np.abs(x - hi) <= snap, hi, x)
    fx = f(x)
    nfev += 1
    if not fx <= fvals[i]:
        # snapping made it worse; keep the unsnapped point
        x, fx = _to_box(simplex[i], lo, hi), float(fvals[i])
    return NelderMeadResult(x, float(fx), nit, nfev, converged)


@dataclass(frozen=True)
class SeedResult:
    seed: tuple[float, ...]
    seed_value: float
    x: tuple[float, ...]
    value: float
    converged: bool


@dataclass(frozen=True)
class MultiStartResult:
    x: np.ndarray
    fun: float
    trace: list[SeedResult]


def _run_seed(seed, f, lo, hi, kwargs) -> SeedResult:
    x0 = np.asarray(seed, dtype=float)
    f0 = f(x0)
    res = nelder_mead_box(f, x0, lo, hi, **kwargs)
    if f0 <= res.fun:
        return SeedResult(tuple(seed), f0, tuple(seed), f0, res.converged)
    return SeedResult(tuple(seed), f0, tuple(float(v) for v in res.x), res.fun, res.converged)


def multistart_minimize(f: Callable[[np.ndarray], float], seeds, lo, hi, *, workers: int = 1,
                        **nm_kwargs) -> MultiStartResult:
    """Run bounded Nelder-Mead from every seed; best value wins, ties by seed order."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    run = partial(_run_seed, f=f, lo=lo, hi=hi, kwargs=nm_kwargs)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            trace = list(pool.map(run, seeds))
    else:
        trace = [run(s) for s in seeds]
    best = None
    for r in trace:
        if math.isfinite(r.value) and (best is None or r.value < best.value):
            best = r
    if best is None:
        raise InfeasibleError("every seed produced infeasible geometry")
    return MultiStartResult(np.array(best.x), best.value, trace)


# ---------------------------------------------------------------------------
# design operations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OptimizationResult:
    best_params: PlacementParams
    objective_value: float
    trace: list[SeedResult]
    L0: float


def optimize_placement(problem: OptimizationProblem, ref: ReferenceTorque, *,
                       seeds: Sequence[Sequence[float]] | None = None,
                       workers: int = 1) -> OptimizationResult:
    """Multi-start bounded Nelder-Mead over the free placement parameters."""
    f = partial(objective, ref=ref, problem=problem)
    if not problem.free:
        value = f(())
        if not math.isfinite(value):
            raise InfeasibleError("fixed placement has infeasible geometry")
        p = problem.placement(())
        return OptimizationResult(p, value, [SeedResult((), value, (), value, True)],
                                  size_initial_length(p, problem.theta_sizing))
    res = multistart_minimize(
        f, problem.seeds() if seeds is None else seeds, problem.lower(), problem.upper(),
        workers=workers, max_iter=problem.max_iter, xtol=problem.xtol, ftol=problem.ftol,
    )
    p = problem.placement(res.x)
    return OptimizationResult(p, res.fun, res.trace, size_initial_length(p, problem.theta_sizing))


def find_min_pressure(problem: OptimizationProblem, ref: ReferenceTorque, p_max: float, *,
                      p_min: float = 0.0, resolution: float = 1000.0, method: str = "bisect",
                      grid_step: float = 5000.0, workers: int = 1) -> float:
    """Smallest pressure [Pa] whose optimized placement fully covers the reference.

    ``method="grid"`` scans at ``grid_step`` before bisecting inside the first
    feasible cell, for feasibility sets that may not be monotone in pressure.
    """
    cache: dict[float, bool] = {}

    def feasible(P: float) -> bool:
        if P not in cache:
            try:
                res = optimize_placement(problem.with_pressure(P), ref, workers=workers)
                cache[P] = res.objective_value <= 1e-12
            except InfeasibleError:
                cache[P] = False
        return cache[P]

    if not feasible(p_max):
        raise InfeasibleError(f"reference not reachable even at {p_max:g} Pa")
    if feasible(p_min):
        return p_min
    lo, hi = p_min, p_max
    if method == "grid":
        P = p_min + grid_step
        while P < p_max:
            if feasible(P):
                hi = P
                break
            lo = P
            P += grid_step
    elif method != "bisect":
        raise ValueError(f"unknown method {method!r}")
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _modeled(spec, P, p, theta, stretch, side):
    if stretch is None:
        return side * torque(spec, P, p, side * theta)[0]
    return side * stretched_torque(spec, P, p, stretch, side * theta)


def wrist_radius_error(rw: float, measured, spec: FpamSpec, placement: PlacementParams,
                       stretch: StretchModel | None = None, side: int = 1) -> float:
    """Sum over regimes of the RMS torque error at wrist radius ``rw``."""
    try:
        p = placement.with_radius(rw)
    except GeometryError:
        return math.inf
    groups: dict[bool, list[float]] = {True: [], False: []}
    for P, theta, tau in measured:
        try:
            wrapped = classify_regime(p, side * theta) is Regime.WRAPPED
            groups[wrapped].append(tau - _modeled(spec, P, p, theta, stretch, side))
        except (GeometryError, DomainError):
            return math.inf
    return sum(math.sqrt(sum(r * r for r in g) / len(g)) for g in groups.values() if g)


def fit_wrist_radius(measured: Sequence[tuple[float, float, float]], spec: FpamSpec,
                     placement: PlacementParams, *, stretch: StretchModel | None = None,
                     side: int = 1, lo: float = 0.01, hi: float = 0.07,
                     step: float = 1e-4) -> float:
    """Exhaustive scan of the wrist radius [m]; ties go to the smaller radius."""
    if not measured:
        raise ValueError("need at least one torque measurement")
    n = int(round((hi - lo) / step))
    grid = lo + step * np.arange(n + 1)
    errs = [wrist_radius_error(float(r), measured, spec, placement, stretch, side) for r in grid]
    if not np.any(np.isfinite(errs)):
        raise InfeasibleError("no wrist radius in range gives valid geometry")
    return float(grid[int(np.argmin(errs))])


def predict_rom(spec: FpamSpec, P: float, p: PlacementParams, *,
                stretch: StretchModel | None = None, max_angle: float = math.pi / 2,
                scan_step: float = math.radians(0.5), tol: float = 1e-7) -> float:
    """First angle [rad] past neutral where the muscle's own torque drops to zero."""
    def tau(th):
        if stretch is None:
            return torque(spec, P, p, th)[0]
        return stretched_torque(spec, P, p, stretch, th)

    if not tau(0.0) > 0.0:
        raise NoCrossingError("muscle gives no pulling torque at the neutral angle")
    lo = 0.0
    n = int(math.ceil(max_angle / scan_step))
    for i in range(1, n + 1):
        th = min(i * scan_step, max_angle)
        if tau(th) <= 0.0:
            hi = th
            break
        lo = th
    else:
        raise NoCrossingError(f"torque stays positive up to {math.degrees(max_angle):.1f} deg")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if tau(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
