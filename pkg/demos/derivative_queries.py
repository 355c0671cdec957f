"""
Predicting derivatives that were never observed
===============================================

Once conditioned, the field predicts any derivative order. Here we observe
only values and second derivatives of sin(2 pi x), then ask for the first
and third derivatives together with 95% bands.
"""

import numpy as np

from agrf import Hyperparameters, ObservationSet, condition, predict_curve

w = 2 * np.pi
x0 = np.linspace(0, 1, 7)
x2 = np.linspace(0.05, 0.95, 5)
obs = ObservationSet(
    orders=[0] * x0.size + [2] * x2.size,
    locations=np.concatenate([x0, x2]),
    values=np.concatenate([np.sin(w * x0), -w**2 * np.sin(w * x2)]),
)

# fixed hyperparameters keep the demo fast; fit() would choose them from data
model = condition(obs, Hyperparameters(amplitude=1.0, length_scale=0.2))

grid = [0.1, 0.3, 0.5, 0.7]
truth = {1: lambda x: w * np.cos(w * x), 3: lambda x: -w**3 * np.cos(w * x)}
for p in predict_curve(model, grid, orders=[1, 3]):
    exact = truth[p.order](p.location)
    print(f"order {p.order} at {p.location:.1f}: {p.mean:9.3f} "
          f"in [{p.lower:9.3f}, {p.upper:9.3f}], exact {exact:9.3f}")
