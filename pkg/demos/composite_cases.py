"""
Adding derivative data to a sparse sample
=========================================

The function f(x) = x^2 sin(16x - 6) on [0, 1] is observed at four points.
We then add three slope observations, three curvature observations, or
both, and watch the reconstruction of f, f' and f'' improve.
"""

from agrf.datagen import COMPOSITE_CASES, COMPOSITE_PATTERN
from agrf.experiments import run_composite

# where each order is observed
for order, where in COMPOSITE_PATTERN.items():
    print(f"order {order} observed at {where}")

# fit every case and report the relative L2 error on a 201 point grid
print("\ncase   orders      f         f'        f''")
for case, orders in COMPOSITE_CASES.items():
    result = run_composite(case)
    errs = "  ".join(f"{result.rle[q]:.2e}" for q in (0, 1, 2))
    print(f"{case}  {str(orders):10s}  {errs}")

# the hyperparameters chosen for the richest case
model = run_composite("case4").models["agrf"]
print(f"\ncase4 amplitude {model.hyper.amplitude:.4g}, length scale {model.hyper.length_scale:.4g}")
