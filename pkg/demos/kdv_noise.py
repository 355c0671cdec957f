"""
Noisy snapshots of a KdV solution
=================================

The Korteweg-de Vries equation is solved spectrally from a cosine initial
state. Twenty noisy samples of u, u_x and u_xx at random grid points are
then regressed jointly, with a separate noise level fitted for each order.
"""

from agrf.experiments import KDV_NOISE, run_kdv

print("noise   u         u_x       u_xx      fitted noise sd per order")
for level, fraction in KDV_NOISE.items():
    result = run_kdv(level)
    hyper = result.models["agrf"].hyper
    errs = "  ".join(f"{result.rle[q]:.2e}" for q in (0, 1, 2))
    deltas = ", ".join(f"{d:.3g}" for d in hyper.noise)
    print(f"{fraction:4.0%}    {errs}  [{deltas}]")
