"""Fit a periodic function and its derivative from noisy queries."""

import numpy as np

from padua import PaduaConfig, fit, synthetic_function, noisy_oracle
from padua.bench import sup_error

# a smooth periodic truth on [-1, 1) and a noisy oracle around it
truth = synthetic_function("decay", nu=2.0, T=100, seed=0)
oracle = noisy_oracle(truth, sigma=0.1)

# the degree N is picked from the budget n and the smoothness nu
cfg = PaduaConfig(n=4000, nu=2.0, sigma=0.1, seed=1)
res = fit(oracle, cfg)
print("degree N:", res.N, " coefficients:", res.model.theta.size)
print("queries used:", res.queries_used, "of", cfg.n)

# one model serves the function and its derivatives
for alpha in (0, 1):
    print(f"sup error, derivative order {alpha}: {sup_error(truth, res, alpha):.4f}")

x = np.linspace(-1, 1, 5)
print("f(x)  ", np.round(truth(x), 3))
print("fhat  ", np.round(res.predict(x), 3))
print("f'(x) ", np.round(truth.eval(x, 1), 3))
print("fhat' ", np.round(res.predict(x, 1), 3))

# models round-trip through JSON
again = type(res).from_json(res.to_json())
print("round trip exact:", np.array_equal(again.model.theta, res.model.theta))
