"""Pairs and packings of bump functions that no algorithm can tell apart cheaply."""

import numpy as np

from padua import hard_pair, kl_budget, packing_family
from padua.hard_instances import packing_separation

hp = hard_pair(K=8, psi0=1.0, nu=2.0, cell=3)
x = np.linspace(-1, 1, 100_001)
print(f"cell width {hp.rho:.3f}, sup|f2| {np.abs(hp.f2(x)).max():.3e}, formula {hp.amplitude:.3e}")
print("f1 identically zero:", not np.any(hp.f1(x)))

fam = packing_family(4, 1.0)
vals = np.array([f(x) for f in fam])
gaps = np.abs(vals[:, None] - vals[None]).max(axis=2)
print(f"{len(fam)} members, min pairwise sup gap {gaps[gaps > 0].min():.4f}, bound {packing_separation(4, 1.0):.4f}")

# KL between the two noisy observation laws, summed over the budget n
for n in (100, 1000, 10_000):
    r = kl_budget(n=n, K=10, psi0=1.0, sigma=1.0, nu=1.0, psi_norm=1.0)
    print(f"n={n:6d}  KL={r.budget:.3g}  testing error >= {r.error_prob_bound:.3f}  K needed {r.min_K}")
