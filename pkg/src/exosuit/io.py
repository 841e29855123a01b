"""CSV and JSON readers/writers for the exchange formats.

CSV dialect: comma separated, '.' decimal, LF line endings, mandatory header.
Floats are written with ``repr`` so reruns are byte-identical.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .designopt import OptimizationProblem, OptimizationResult
from .fpam import FpamSpec, TensileDataset

TENSILE_HEADER = ("pressure_kpa", "epsilon", "force_n")
PROFILE_HEADER = ("theta_deg", "torque_nm", "regime", "length_m", "moment_arm_m")
STRETCH_HEADER = ("force_n", "dx1_m", "dx2_m")
REFERENCE_HEADER = ("theta_deg", "tau_nm")
MEASURED_HEADER = ("pressure_kpa", "theta_deg", "torque_nm")
TRAJECTORY_HEADER = ("t_s", "theta_fe_deg", "theta_ur_deg")
TRACE_HEADER = ("seed_index", "param", "seed_m", "optimum_m", "seed_objective_nm",
                "objective_nm", "converged")


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path_or_buf, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    if isinstance(path_or_buf, (str, Path)):
        with open(path_or_buf, "w", newline="", encoding="utf-8") as fh:
            write_csv(fh, header, rows)
        return
    w = csv.writer(path_or_buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])


def read_csv(path, header: Sequence[str]) -> list[dict[str, str]]:
    """Rows of a headed CSV; the header must contain every expected column."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValueError(f"{path}: empty file, expected header {','.join(header)}")
        missing = [c for c in header if c not in reader.fieldnames]
        if missing:
            raise ValueError(f"{path}: missing columns {missing}")
        rows = list(reader)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return rows


def _floats(rows, cols) -> np.ndarray:
    try:
        return np.array([[float(r[c]) for c in cols] for r in rows], dtype=float)
    except ValueError as exc:
        raise ValueError(f"non-numeric value: {exc}") from exc


def read_tensile_csv(path) -> TensileDataset:
    arr = _floats(read_csv(path, TENSILE_HEADER), TENSILE_HEADER)
    samples = {}
    for p_kpa in sorted(set(arr[:, 0])):
        samples[p_kpa * 1e3] = arr[arr[:, 0] == p_kpa][:, 1:]
    return TensileDataset(samples)


def write_tensile_csv(path, data: TensileDataset) -> None:
    rows = []
    for P, s in data.samples.items():
        rows.extend((P / 1e3, e, f) for e, f in s)
    write_csv(path, TENSILE_HEADER, rows)


def read_stretch_csv(path) -> list[tuple[float, float, float]]:
    return [tuple(r) for r in _floats(read_csv(path, STRETCH_HEADER), STRETCH_HEADER)]


def read_reference_csv(path) -> list[tuple[float, float]]:
    arr = _floats(read_csv(path, REFERENCE_HEADER), REFERENCE_HEADER)
    return [(math.radians(t), tau) for t, tau in arr]


def read_measured_torque_csv(path) -> list[tuple[float, float, float]]:
    arr = _floats(read_csv(path, MEASURED_HEADER), MEASURED_HEADER)
    return [(p * 1e3, math.radians(t), tau) for p, t, tau in arr]


def read_trajectory_csv(path) -> np.ndarray:
    return _floats(read_csv(path, TRAJECTORY_HEADER), TRAJECTORY_HEADER)


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps_json(obj), encoding="utf-8")


def read_json(path) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    if not text.strip():
        raise ValueError(f"{path}: empty file")
    return json.loads(text)


def read_spec_json(path) -> FpamSpec:
    return FpamSpec.from_dict(read_json(path))


def problem_from_dict(d: dict, spec: FpamSpec) -> OptimizationProblem:
    """Problem JSON: bounds/grid in metres, ``pressure_pa``, ``rw_m``, ``theta_sizing_deg``."""
    return OptimizationProblem(
        bounds={k: (float(v[0]), float(v[1])) for k, v in d["bounds"].items()},
        grid={k: float(v) for k, v in d["grid"].items()},
        pressure=float(d["pressure_pa"]),
        spec=spec,
        rw=float(d["rw_m"]),
        theta_sizing=math.radians(float(d["theta_sizing_deg"])),
        fixed={k: float(v) for k, v in d.get("fixed", {}).items()},
    )


def problem_to_dict(problem: OptimizationProblem) -> dict:
    d = {
        "bounds": {k: list(v) for k, v in problem.bounds.items()},
        "grid": dict(problem.grid),
        "pressure_pa": problem.pressure,
        "rw_m": problem.rw,
        "theta_sizing_deg": math.degrees(problem.theta_sizing),
        "spec": problem.spec.to_dict(),
    }
    if problem.fixed:
        d["fixed"] = dict(problem.fixed)
    return d


def result_to_dict(res: OptimizationResult, problem: OptimizationProblem) -> dict:
    p = res.best_params
    return {
        "best_params": {"d1_m": p.d1, "w1_m": p.w1, "d2_m": p.d2, "w2_m": p.w2, "rw_m": p.rw},
        "l0_m": res.L0,
        "objective_nm": res.objective_value,
        "pressure_pa": problem.pressure,
        "trace": [
            {"seed_m": list(s.seed), "optimum_m": list(s.x), "seed_objective_nm": _jsonable(s.seed_value),
             "objective_nm": _jsonable(s.value), "converged": s.converged}
            for s in res.trace
        ],
    }


def _jsonable(x: float):
    return x if math.isfinite(x) else None


def trace_rows(res: OptimizationResult, problem: OptimizationProblem):
    for i, s in enumerate(res.trace):
        for j, name in enumerate(problem.free):
            yield (i, name, s.seed[j], s.x[j], s.seed_value, s.value, s.converged)

