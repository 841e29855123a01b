"""``exosuit`` command line: fit, sweep, optimize and simulate from tidy files.

Numeric flags without a unit in their name take lengths in cm and angles in
degrees (``--units paper``, the default) or metres and radians (``--units si``).
File columns and JSON keys carry their own unit suffixes.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import math
import platform
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import MUSCLE_NAMES, ExosuitConfig
from .control import run_tracking
from .designopt import (
    find_min_pressure, fit_wrist_radius, interpolate_reference, optimize_placement, predict_rom,
)
from .errors import (
    DomainError, FitError, GeometryError, InfeasibleError, InstabilityError, NoCrossingError,
)
from .fpam import DEFAULT_MODULUS, DEFAULT_THICKNESS, FpamSpec, fit_force_curves, identify_spec
from .io import (
    PROFILE_HEADER, TRACE_HEADER, dumps_json, problem_from_dict, read_json, read_measured_torque_csv,
    read_reference_csv, read_stretch_csv, read_tensile_csv, read_trajectory_csv, result_to_dict,
    trace_rows, write_csv,
)
from .mountstretch import fit_coefficients, stretched_placement
from .units import to_si
from .wristgeom import torque

log = logging.getLogger("exosuit")

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_GEOMETRY = 0, 2, 3, 4

ROM_KEYS = {"flexor": "flexion_deg", "extensor": "extension_deg",
            "ulnar": "ulnar_dev_deg", "radial": "radial_dev_deg"}


class UsageError(Exception):
    pass


def _length(args, v: float) -> float:
    return to_si(v, "length", args.units)


def _angle(args, v: float) -> float:
    return to_si(v, "angle", args.units)


def _emit(args, text: str) -> None:
    if args.output is None:
        sys.stdout.write(text)
        return
    Path(args.output).write_text(text, encoding="utf-8", newline="\n")
    meta = {
        "command": args.command,
        "argv": sys.argv[1:],
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "seed": args.seed,
        "units": args.units,
        "finished_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    Path(str(args.output) + ".meta.json").write_text(dumps_json(meta), encoding="utf-8")


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    write_csv(buf, header, rows)
    return buf.getvalue()


def _load_config(path) -> ExosuitConfig:
    return ExosuitConfig.from_dict(read_json(path))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_fit_fpam(args) -> None:
    data = read_tensile_csv(args.tensile)
    fit = fit_force_curves(data, window=args.window, degree=args.degree)
    for P, em in fit.eps_max().items():
        log.info("P = %g kPa: eps_max = %s", P / 1e3, em)
    spec = identify_spec(fit, _length(args, args.l0), _length(args, args.r0),
                         t=args.thickness_m, E=args.modulus_pa, eps0=args.eps0)
    _emit(args, dumps_json(spec.to_dict()))


def _theta_grid(args) -> np.ndarray:
    lo, hi, step = (_angle(args, v) for v in args.theta_range)
    if not step > 0 or hi < lo:
        raise UsageError("--theta-range needs LO <= HI and STEP > 0")
    n = int(math.floor((hi - lo) / step + 1e-9))
    return lo + step * np.arange(n + 1)


def cmd_torque_profile(args) -> None:
    cfg = _load_config(args.config)
    m = cfg.muscle(args.muscle)
    P = args.pressure_kpa * 1e3
    rows = []
    for theta in _theta_grid(args):
        th = m.side * theta
        p = m.placement
        if args.stretch:
            if m.stretch is None:
                raise UsageError(f"muscle {m.name!r} has no stretch model in the config")
            p = stretched_placement(m.spec, P, p, m.stretch, th)
        tau, sol = torque(m.spec, P, p, th)
        rows.append((round(math.degrees(theta), 10), m.side * tau, sol.regime.value,
                     sol.length, sol.moment_arm))
    _emit(args, _csv_text(PROFILE_HEADER, rows))


def _problem(args):
    d = read_json(args.problem)
    if "spec" in d:
        spec = FpamSpec.from_dict(d["spec"])
    elif args.spec is not None:
        spec = FpamSpec.from_dict(read_json(args.spec))
    else:
        from .presets import design_spec
        spec = design_spec()
        log.info("problem has no muscle spec; using the built-in design muscle")
    return problem_from_dict(d, spec)


def cmd_optimize_placement(args) -> None:
    problem = _problem(args)
    ref = interpolate_reference(read_reference_csv(args.reference))
    res = optimize_placement(problem, ref, workers=args.workers)
    log.info("objective %.6g N m from %d seeds", res.objective_value, len(res.trace))
    if args.trace is not None:
        write_csv(args.trace, TRACE_HEADER, trace_rows(res, problem))
    _emit(args, dumps_json(result_to_dict(res, problem)))


def cmd_find_min_pressure(args) -> None:
    problem = _problem(args)
    ref = interpolate_reference(read_reference_csv(args.reference))
    P = find_min_pressure(problem, ref, args.p_max_kpa * 1e3, p_min=args.p_min_kpa * 1e3,
                          resolution=args.resolution_kpa * 1e3, method=args.method,
                          grid_step=args.grid_step_kpa * 1e3, workers=args.workers)
    best = optimize_placement(problem.with_pressure(P), ref, workers=args.workers)
    out = {"min_pressure_kpa": P / 1e3, "resolution_kpa": args.resolution_kpa,
           "result": result_to_dict(best, problem.with_pressure(P))}
    _emit(args, dumps_json(out))


def cmd_fit_stretch(args) -> None:
    model = fit_coefficients(read_stretch_csv(args.records))
    out = model.to_dict()
    out["k1_n_per_cm2"] = model.K1 / 1e4
    out["k2_n_per_cm2"] = model.K2 / 1e4
    _emit(args, dumps_json(out))


def cmd_fit_wrist_radius(args) -> None:
    cfg = _load_config(args.config)
    m = cfg.muscle(args.muscle)
    if args.stretch and m.stretch is None:
        raise UsageError(f"muscle {m.name!r} has no stretch model in the config")
    rw = fit_wrist_radius(read_measured_torque_csv(args.measured), m.spec, m.placement,
                          stretch=m.stretch if args.stretch else None, side=m.side,
                          lo=_length(args, args.lo), hi=_length(args, args.hi),
                          step=_length(args, args.step))
    _emit(args, dumps_json({"muscle": m.name, "rw_m": rw, "rw_cm": rw * 100.0}))


def cmd_predict_rom(args) -> None:
    cfg = _load_config(args.config)
    P = args.pressure_kpa * 1e3
    out = {"pressure_kpa": args.pressure_kpa}
    for name in MUSCLE_NAMES:
        m = cfg.muscle(name)
        stretch = m.stretch if args.stretch else None
        try:
            out[ROM_KEYS[name]] = math.degrees(predict_rom(m.spec, P, m.placement, stretch=stretch))
        except NoCrossingError as exc:
            log.warning("%s: %s", name, exc)
            out[ROM_KEYS[name]] = None
    _emit(args, dumps_json(out))


def cmd_default_config(args) -> None:
    from .config import default_config
    _emit(args, dumps_json(default_config().to_dict()))


def cmd_simulate(args) -> None:
    cfg = _load_config(args.config)
    traj = read_trajectory_csv(args.trajectory)
    res = run_tracking(cfg.controller, cfg.plants(), traj, settle=args.settle)
    log.info("RMS error fe %.3f deg, ur %.3f deg", res.rms_error("fe"), res.rms_error("ur"))
    _emit(args, _csv_text(res.columns, res.data))


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="exosuit", description="Soft wrist exosuit modelling tools.")
    ap.add_argument("--units", choices=("paper", "si"), default="paper",
                    help="units for bare numeric flags: paper = cm/deg, si = m/rad")
    ap.add_argument("--seed", type=int, default=0, help="reserved; no command is stochastic")
    ap.add_argument("--verbose", "-v", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("-o", "--output", default=None, help="output file (default: stdout)")
        p.set_defaults(func=func)
        return p

    p = add("fit-fpam", cmd_fit_fpam, "identify an FpamSpec from tensile-test data")
    p.add_argument("tensile")
    p.add_argument("--l0", type=float, required=True, help="measured resting length")
    p.add_argument("--r0", type=float, required=True, help="measured resting radius")
    p.add_argument("--thickness-m", type=float, default=DEFAULT_THICKNESS)
    p.add_argument("--modulus-pa", type=float, default=DEFAULT_MODULUS)
    p.add_argument("--eps0", type=float, default=None, help="elastic-free contraction ratio")
    p.add_argument("--window", type=int, default=11)
    p.add_argument("--degree", type=int, default=8)

    p = add("torque-profile", cmd_torque_profile, "torque sweep over wrist angle")
    p.add_argument("config")
    p.add_argument("--muscle", choices=MUSCLE_NAMES, default="flexor")
    p.add_argument("--pressure-kpa", type=float, default=137.0)
    p.add_argument("--theta-range", type=float, nargs=3, metavar=("LO", "HI", "STEP"),
                   default=None, help="default -67.5 90 22.5 deg")
    p.add_argument("--stretch", action="store_true", help="apply mount stretching")

    for name, func, help_ in (("optimize-placement", cmd_optimize_placement, "multi-start placement search"),
                              ("find-min-pressure", cmd_find_min_pressure, "lowest sufficient pressure")):
        p = add(name, func, help_)
        p.add_argument("problem")
        p.add_argument("reference")
        p.add_argument("--spec", default=None, help="FpamSpec JSON if the problem has none")
        p.add_argument("--workers", type=int, default=1)
        if name == "optimize-placement":
            p.add_argument("--trace", default=None, help="per-seed trace CSV")
        else:
            p.add_argument("--p-max-kpa", type=float, default=137.0)
            p.add_argument("--p-min-kpa", type=float, default=0.0)
            p.add_argument("--resolution-kpa", type=float, default=1.0)
            p.add_argument("--method", choices=("bisect", "grid"), default="bisect")
            p.add_argument("--grid-step-kpa", type=float, default=5.0)

    p = add("fit-stretch", cmd_fit_stretch, "fit mount stretching coefficients")
    p.add_argument("records")

    p = add("fit-wrist-radius", cmd_fit_wrist_radius, "scan the wrist radius against measured torque")
    p.add_argument("measured")
    p.add_argument("--config", required=True)
    p.add_argument("--muscle", choices=MUSCLE_NAMES, default="flexor")
    p.add_argument("--stretch", action="store_true")
    p.add_argument("--lo", type=float, default=None, help="default 1 cm")
    p.add_argument("--hi", type=float, default=None, help="default 7 cm")
    p.add_argument("--step", type=float, default=None, help="default 0.01 cm")

    p = add("predict-rom", cmd_predict_rom, "zero-torque joint limits of all four muscles")
    p.add_argument("config")
    p.add_argument("--pressure-kpa", type=float, default=137.0)
    p.add_argument("--stretch", action="store_true")

    add("default-config", cmd_default_config, "write the built-in four-muscle config")

    p = add("simulate", cmd_simulate, "closed-loop tracking simulation")
    p.add_argument("config")
    p.add_argument("trajectory")
    p.add_argument("--settle", type=float, default=0.0, help="seconds excluded from the RMS summary")
    return ap


def _apply_defaults(args) -> None:
    paper = args.units == "paper"
    if getattr(args, "theta_range", "absent") is None:
        args.theta_range = [-67.5, 90.0, 22.5] if paper else [math.radians(v) for v in (-67.5, 90.0, 22.5)]
    for name, cm in (("lo", 1.0), ("hi", 7.0), ("step", 0.01)):
        if getattr(args, name, "absent") is None:
            setattr(args, name, cm if paper else cm / 100.0)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    _apply_defaults(args)
    try:
        args.func(args)
    except (UsageError, FileNotFoundError, IsADirectoryError, json.JSONDecodeError, KeyError,
            DomainError) as exc:
        print(f"exosuit: input error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GeometryError as exc:
        print(f"exosuit: infeasible geometry: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY
    except (FitError, InfeasibleError, NoCrossingError, InstabilityError) as exc:
        print(f"exosuit: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"exosuit: input error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
