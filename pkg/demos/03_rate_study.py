"""Error against budget for the function and its first derivative."""

from padua.bench import RunSpec, rate_study

spec = RunSpec(
    algorithms=("padua",),
    oracle={"kind": "decay", "nu": 2.0, "T": 100, "seed": 0},
    n_list=(200, 400, 800, 1600, 3200, 6400),
    alphas=(0, 1),
    seeds=(0, 1, 2, 3, 4),
)
res = rate_study(spec)

print(" alpha      n   median sup error")
for row in res.table:
    print(f"{row['alpha']:6d} {row['n']:6d}   {row['median']:.4f}")
for (algo, alpha), s in res.slopes.items():
    print(f"{algo} alpha={alpha}: log-log slope {s['slope']:.3f} (se {s['stderr']:.3f})")
