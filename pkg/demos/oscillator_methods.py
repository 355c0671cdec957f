"""
Three ways to use derivative data
=================================

A damped oscillator is observed through its displacement, velocity and
acceleration at five times. We compare

* ``gp``: separate regressions of displacement and velocity, each from its
  own data only,
* ``gek``: a joint regression of displacement and velocity data,
* ``agrf``: a joint regression that also uses the acceleration data.
"""

from agrf.experiments import OSCILLATOR_METHODS, run_oscillator

print("method   y         y'")
for method in OSCILLATOR_METHODS:
    result = run_oscillator(method)
    print(f"{method:6s}  {result.rle[0]:.3e}  {result.rle[1]:.3e}")

# the posterior of the best method collapses onto the data at the samples
result = run_oscillator("agrf")
grid, sd = result.grid, result.variance[0] ** 0.5
print(f"\nlargest displacement sd: {sd.max():.3g}, at the first sample: {sd[0]:.3g}")
