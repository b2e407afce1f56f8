"""Rescale a synthetic concentrating family and compare the profile with the limiting bubble."""
from mtlab import SyntheticBlowup, blowup_scales, build_grid
from mtlab.blowup import eta_error, eta_rescale

target = build_grid(5.0, 2001)
for mu in (4.0, 6.0, 8.0):
    s = SyntheticBlowup.build(mu)
    sc = blowup_scales(s, s.lam, s.alpha)
    eta = eta_rescale(s.sample(s.core_grid(radius=6.0)), sc, target)
    print(f"mu={mu:3.0f}  lambda={s.lam:.4e}  r={sc.r:.3e}  sup|eta - bubble| on [-5,5] = "
          f"{eta_error(eta, 5.0):.4f}")
