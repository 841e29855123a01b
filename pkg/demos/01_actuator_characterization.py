"""Characterize a flat pneumatic artificial muscle from tensile-test data.

Generates noisy tensile samples from a known actuator, fits smoothed force
curves, and identifies the spec back from the fits.
"""

import math

from exosuit.fpam import fiber_orientation, fit_force_curves, identify_spec, synthetic_tensile_data
from exosuit.presets import flexor_spec

truth = flexor_spec()
pressures = [0.0, 34e3, 68e3, 103e3, 137e3]
data = synthetic_tensile_data(truth, pressures, noise=0.05, seed=1)
fit = fit_force_curves(data)
spec = identify_spec(fit, truth.L0, truth.r0)

print("pressure  eps_max(true)  eps_max(fit)  fiber angle")
for P in pressures:
    em_true, em_fit = truth.eps_max(P), spec.eps_max(P)
    alpha = math.degrees(fiber_orientation(em_fit))
    print(f"{P / 1e3:6.0f} kPa  {em_true:12.4f}  {em_fit:12.4f}  {alpha:8.2f} deg")
print(f"identified mean radius {spec.r0 * 100:.3f} cm")
