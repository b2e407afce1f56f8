"""Maximize below the critical exponent and watch the maximizers concentrate."""
import numpy as np

from mtlab import INTERVAL, subcritical_sweep
from mtlab.blowup import blowup_scales, one_over_lambda_mu2

ks = (4, 8, 16, 32)
alphas = [np.pi - 1.0 / k for k in ks]
results = subcritical_sweep(alphas, INTERVAL)

print(f"{'k':>4} {'alpha':>8} {'value':>9} {'mu':>7} {'lambda':>9} {'r':>10} {'1/(lam mu^2)':>13}")
for k, res in zip(ks, results):
    if res is None:
        print(f"{k:4d}  not converged")
        continue
    sc = blowup_scales(res.u, res.lam, res.alpha)
    print(f"{k:4d} {res.alpha:8.5f} {res.value:9.4f} {res.mu:7.3f} {res.lam:9.5f} "
          f"{sc.r:10.3e} {one_over_lambda_mu2(res.u, res.lam):13.4f}")
