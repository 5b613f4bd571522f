"""Compare prediction cost and accuracy with local polynomial baselines."""

from padua.bench import RunSpec, rate_study, timing_study

audio = {"kind": "audio", "length": 550, "seed": 0}
spec = RunSpec(algorithms=("padua", "nw", "lpe"), oracle=audio, n_list=(100, 400, 1600, 6400), m=550, seeds=(0,))

# local estimators keep every sample, so their prediction cost grows with n
print("algorithm      n  degree        bytes  predict (s)")
for r in timing_study(spec, reps=5):
    print(f"{r['algorithm']:9s} {r['n']:6d}  {r['degree']:10s} {r['model_bytes']:8d}  {r['predict_time']:.2e}")

errs = rate_study(RunSpec(algorithms=("padua", "lpe"), oracle=audio, n_list=(400, 800, 1600, 3200), m=550, seeds=(0, 1, 2)))
for (algo, alpha), s in errs.slopes.items():
    print(f"{algo}: slope {s['slope']:.3f}")
