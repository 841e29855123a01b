"""Track a staircase and a sinusoid with the antagonistic pressure controller."""

from exosuit.control import (
    ControllerConfig, paper_staircase_levels, run_tracking, sinusoid_trajectory, staircase_trajectory,
)
from exosuit.presets import default_plants

cfg = ControllerConfig()
plants = default_plants()

levels = paper_staircase_levels()
log = run_tracking(cfg, plants, staircase_trajectory(levels, dwell=10.0))
t, act = log.column("t_s"), log.column("fe_act")
print("staircase: level -> angle at end of dwell")
for i, lv in enumerate(levels):
    k = (t < (i + 1) * 10.0).nonzero()[0][-1]
    print(f"  {lv:6.1f} deg -> {act[k]:7.2f} deg")

log = run_tracking(cfg, plants, sinusoid_trajectory(), settle=24.0)
print(f"sinusoid RMS error after first period: flexion/extension {log.rms_error('fe'):.2f} deg, "
      f"deviation {log.rms_error('ur'):.2f} deg")
