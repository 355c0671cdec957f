"""
Calibrating noise for Burgers data
==================================

The viscous Burgers equation develops a steep front, so its derivatives
span very different magnitudes. With 10% noise in every order we compare a
fit that ignores noise, one shared noise level, and one level per order.
"""

from agrf.experiments import BURGERS_CALIBRATIONS, run_burgers

print("calibration   u         u_x       u_xx      mean")
for name in BURGERS_CALIBRATIONS:
    result = run_burgers(name)
    errs = [result.rle[q] for q in (0, 1, 2)]
    row = "  ".join(f"{e:.2e}" for e in errs)
    print(f"{name:12s}  {row}  {sum(errs) / 3:.3f}")
