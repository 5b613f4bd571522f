"""The smoothing kernel, its signed split, and unbiased perturbed queries."""

import numpy as np

from padua import KernelTable, circular_convolve, decompose, l1_norm

for N in (8, 16, 32, 64):
    k = KernelTable.vallee_poussin(N)
    dec = decompose(k)
    print(f"N={N:3d}  L1={l1_norm(k):.5f}  beta+={dec.beta_plus:.5f}  beta-={dec.beta_minus:.5f}")

# the kernel is signed; querying g at x + eta for eta from each half
# and recombining gives an unbiased estimate of the smoothed value
N = 8
k = KernelTable.vallee_poussin(N)
dec = decompose(k)
g = lambda y: np.sin(np.pi * y) + 0.3 * np.cos(5 * np.pi * y)  # noqa: E731
rng = np.random.default_rng(0)
x0, draws = 0.2, 200_000
y = dec.beta_plus * g(x0 + dec.sample("plus", rng, draws)) - dec.beta_minus * g(x0 + dec.sample("minus", rng, draws))
exact = float(circular_convolve(g, k, np.array([x0]))[0])
print(f"Monte Carlo {y.mean():.5f} +- {y.std() / np.sqrt(draws):.5f}   exact {exact:.5f}")
