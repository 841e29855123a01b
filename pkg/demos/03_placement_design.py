"""Choose hand-side mounting points that cover a reference torque profile.

Forearm mounts are fixed; Nelder-Mead from a grid of seeds searches the two
hand-side offsets, then range of motion is predicted for the winner.
"""

import math

import numpy as np

from exosuit.designopt import interpolate_reference, model_torque_curve, optimize_placement, predict_rom
from exosuit.presets import design_problem

problem = design_problem(fixed={"d1": 0.22, "w1": 0.035})
raw = np.radians(np.arange(-67.5, 90.1, 22.5))
target = 1.15 * model_torque_curve(problem.placement((0.05, 0.025)), problem, raw)
ref = interpolate_reference(list(zip(raw, target)))

res = optimize_placement(problem, ref)
best = res.best_params
print(f"{len(res.trace)} seeds; best d2 = {best.d2 * 100:.2f} cm, w2 = {best.w2 * 100:.2f} cm")
print(f"torque shortfall {res.objective_value:.3f} N m summed over {ref.n} angles")
print(f"sized rest length {res.L0 * 100:.2f} cm")
spec = problem.spec.with_length(res.L0)
print(f"predicted flexion limit {math.degrees(predict_rom(spec, problem.pressure, best)):.1f} deg")
