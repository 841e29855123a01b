"""Torque of one muscle across the wrist's flexion/extension range.

Compares the fixed-mount model with the mount-stretching model and reports
where the tendon path starts wrapping the wrist.
"""

import math

import numpy as np

from exosuit.mountstretch import stretched_torque
from exosuit.presets import torque_validation_setup
from exosuit.wristgeom import geometry, tangency_angle, torque

spec, placement, stretch = torque_validation_setup()
print(f"path touches the wrist at {math.degrees(tangency_angle(placement)):.2f} deg")
print("theta    regime    fixed [N m]  stretched [N m]")
for P in (68e3, 137e3):
    print(f"-- {P / 1e3:.0f} kPa")
    for deg in np.arange(-67.5, 90.1, 22.5):
        th = math.radians(deg)
        fixed = torque(spec, P, placement, th)[0]
        moved = stretched_torque(spec, P, placement, stretch, th)
        regime = geometry(placement, th).regime.value
        print(f"{deg:6.1f}  {regime:8s}  {fixed:11.3f}  {moved:14.3f}")
