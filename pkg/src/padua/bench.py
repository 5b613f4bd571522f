"""Error, rate, timing and model-size measurements.

A :class:`RunSpec` names the algorithms, the ground truth, the sample
sizes and the seeds. Every ``(algorithm, n, seed)`` cell gets its own
generator derived from ``SeedSequence([seed, n])``, so cells can be run in
any order and the error columns of the output are reproducible byte for
byte.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
import warnings as _warnings
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from padua.algorithm import FitResult, PaduaConfig, fit, model_size
from padua.baselines import LocalEstimator, LocalFitConfig
from padua.errors import PaduaError, ValidationError
from padua.oracles import (
    DecayTruth,
    GroundTruth,
    NoisyOracle,
    SplineTruth,
    TrigTruth,
    extract_periodic_segments,
    segment_to_function,
    wav_load,
)
from padua.trig import TrigPoly, feature_indices

SCHEMA_VERSION = 1
MIN_GRID = 256
ALGORITHMS = ("padua", "nw", "lpe")
CSV_FIELDS = (
    "algorithm",
    "n",
    "seed",
    "alpha",
    "sup_error",
    "degree",
    "model_bytes",
    "status",
    "fit_time",
    "predict_time",
)
TIMING_FIELDS = ("fit_time", "predict_time")


def eval_grid(m: int, d: int = 1) -> np.ndarray:
    """``m`` equispaced points on [-1, 1], or ``ceil(m^(1/d))`` per axis."""
    if m < MIN_GRID:
        raise ValidationError(f"evaluation grid needs m >= {MIN_GRID}, got {m}")
    if d == 1:
        return np.linspace(-1.0, 1.0, m)
    k = int(math.ceil(m ** (1.0 / d) - 1e-9))
    axis = np.linspace(-1.0, 1.0, k)
    return np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)


def _call(predictor, x, alpha):
    if hasattr(predictor, "predict"):
        return predictor.predict(x, alpha)
    return predictor(x, alpha)


def sup_error(truth: GroundTruth, predictor, alpha=0, m: int = 4096) -> float:
    """``max |D^alpha truth - predictor(., alpha)|`` over the evaluation grid.

    ``predictor`` is a callable ``(x, alpha)`` or any object with a
    ``predict(x, alpha)`` method.
    """
    x = eval_grid(m, getattr(truth, "d", 1))
    diff = np.asarray(truth.eval(x, alpha), dtype=float) - np.asarray(_call(predictor, x, alpha), dtype=float)
    return float(np.max(np.abs(diff)))


def audio_fixture(length: int = 550, seed: int = 0, harmonics: int = 6) -> SplineTruth:
    """Synthetic audio-like segment: decaying harmonics that vanish at both ends."""
    rng = np.random.default_rng(seed)
    k = np.arange(length)
    amps = rng.uniform(0.3, 1.0, harmonics) / np.arange(1, harmonics + 1)
    freqs = np.arange(1, harmonics + 1)
    s = np.sin(2 * np.pi * np.outer(k, freqs) / length) @ amps
    s *= 0.8 / np.abs(s).max()
    return SplineTruth(s)


def make_truth(spec: dict) -> GroundTruth:
    """Ground truth from a plain spec, e.g. ``{"kind": "decay", "nu": 2}``.

    Kinds: ``decay`` (nu, T, seed), ``trig`` (N, theta; default
    ``sin(pi x) + 0.5 cos(3 pi x)``), ``audio`` (synthetic fixture with
    length and seed), ``wav`` (path, segment).
    """
    kind = spec.get("kind", "decay")
    if kind == "decay":
        return DecayTruth(float(spec.get("nu", 2.0)), int(spec.get("T", 100)), int(spec.get("seed", 0)))
    if kind == "trig":
        if "theta" in spec:
            return TrigTruth(TrigPoly(int(spec["N"]), int(spec.get("d", 1)), np.asarray(spec["theta"], float)))
        return TrigTruth(sin_mix())
    if kind == "audio":
        return audio_fixture(int(spec.get("length", 550)), int(spec.get("seed", 0)))
    if kind == "wav":
        samples, rate = wav_load(spec["path"])
        segs = extract_periodic_segments(samples, sample_rate=rate)
        i = int(spec.get("segment", 0))
        if not segs:
            raise ValidationError(f"no periodic segment found in {spec['path']}")
        if i >= len(segs):
            raise ValidationError(f"segment {i} requested but only {len(segs)} found")
        return segment_to_function(segs[i])
    raise ValidationError(f"unknown oracle kind {kind!r}")


def sin_mix() -> TrigPoly:
    """``sin(pi x) + 0.5 cos(3 pi x)`` as a degree-3 polynomial."""
    idx = feature_indices(3, 1)[:, 0]
    theta = np.zeros(7)
    theta[idx == 1] = 1.0
    theta[idx == -3] = 0.5
    return TrigPoly(3, 1, theta)


@dataclass(frozen=True)
class RunSpec:
    """One experiment: algorithms x sample sizes x seeds, evaluated at ``alphas``."""

    algorithms: tuple = ("padua",)
    oracle: dict = field(default_factory=lambda: {"kind": "decay", "nu": 2.0})
    n_list: tuple = (200, 400, 800, 1600, 3200, 6400)
    m: int = 4096
    alphas: tuple = (0,)
    seeds: tuple = (0, 1, 2, 3, 4)
    sigma: float = 0.1
    nu: float = 2.0
    d: int = 1
    N: object = "auto"
    norm_bound: float = 1.0
    lpe_order: int = 2
    bandwidth_c: float = 1.0
    kernel: str = "epanechnikov"
    out: str | None = None

    def __post_init__(self):
        if self.m < MIN_GRID:
            raise ValidationError(f"m must be >= {MIN_GRID}")
        if not self.seeds:
            raise ValidationError("at least one seed is required")
        if not self.n_list:
            raise ValidationError("at least one sample size is required")
        for a in self.algorithms:
            if a not in ALGORITHMS:
                raise ValidationError(f"unknown algorithm {a!r}; choose from {ALGORITHMS}")
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        object.__setattr__(self, "alphas", tuple(int(a) for a in self.alphas))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))


@dataclass
class ErrorReport:
    algorithm: str
    n: int
    seed: int
    alpha: int
    sup_error: float
    degree: str = ""
    model_bytes: int = 0
    status: str = "ok"
    fit_time: float = float("nan")
    predict_time: float = float("nan")


def cell_seed(seed: int, n: int) -> int:
    """Seed for one ``(n, seed)`` cell; shared by all algorithms in the cell."""
    return int(np.random.SeedSequence([int(seed), int(n)]).generate_state(1, dtype=np.uint32)[0])


def baseline_sample(truth: GroundTruth, n: int, sigma: float, rng: np.random.Generator):
    """Uniform design with Gaussian noise, the setting the local estimators assume."""
    x = rng.uniform(-1.0, 1.0, n)
    y = np.asarray(truth(x), dtype=float) + sigma * rng.standard_normal(n)
    return x, y


def fit_cell(spec: RunSpec, truth: GroundTruth, algo: str, n: int, seed: int):
    """Fit one cell; returns ``(predictor, degree label, model bytes, fit seconds)``."""
    s = cell_seed(seed, n)
    t0 = time.perf_counter()
    if algo == "padua":
        cfg = PaduaConfig(
            n=n, N=spec.N, nu=spec.nu, d=spec.d, sigma=spec.sigma, norm_bound=spec.norm_bound, seed=s
        )
        res = fit(NoisyOracle(truth, spec.sigma), cfg)
        return res, str(res.N), model_size(res), time.perf_counter() - t0
    rng = np.random.default_rng(s)
    x, y = baseline_sample(truth, n, spec.sigma, rng)
    order = 0 if algo == "nw" else spec.lpe_order
    cfg = LocalFitConfig(order=order, h="auto", kernel=spec.kernel, nu=spec.nu, c=spec.bandwidth_c)
    est = LocalEstimator(x, y, cfg, algo)
    # a local estimator has to keep every (x, y) pair
    nbytes = 16 * n
    return est, f"h={cfg.bandwidth(n):.6g}", nbytes, time.perf_counter() - t0


def run_cells(spec: RunSpec, truth: GroundTruth | None = None) -> list[ErrorReport]:
    """All ``(algorithm, n, seed, alpha)`` cells; failures are kept as rows."""
    truth = truth if truth is not None else make_truth(spec.oracle)
    rows = []
    for algo in spec.algorithms:
        for n in spec.n_list:
            for seed in spec.seeds:
                try:
                    pred, deg, nbytes, ft = fit_cell(spec, truth, algo, n, seed)
                except PaduaError as exc:
                    rows.extend(
                        ErrorReport(algo, n, seed, a, float("nan"), status=f"failed: {exc}") for a in spec.alphas
                    )
                    continue
                for a in spec.alphas:
                    if algo == "nw" and a > 0:
                        rows.append(ErrorReport(algo, n, seed, a, float("nan"), deg, nbytes, "failed: NW has no derivatives"))
                        continue
                    t0 = time.perf_counter()
                    err = sup_error(truth, pred, a, spec.m)
                    rows.append(ErrorReport(algo, n, seed, a, err, deg, nbytes, "ok", ft, time.perf_counter() - t0))
    return rows


def loglog_slope(n_values: Sequence[float], errors: Sequence[float]):
    """Least-squares slope of ``log(error)`` on ``log(n)``.

    Returns ``(slope, stderr, warnings)``; nonpositive or non-finite errors
    are dropped with a warning.
    """
    n_values = np.asarray(n_values, dtype=float)
    errors = np.asarray(errors, dtype=float)
    keep = np.isfinite(errors) & (errors > 0)
    notes = []
    if not keep.all():
        notes.append(f"excluded {int((~keep).sum())} zero or failed error values")
    if keep.sum() < 2:
        notes.append("fewer than two usable points; slope undefined")
        return float("nan"), float("nan"), notes
    lx, ly = np.log(n_values[keep]), np.log(errors[keep])
    if np.ptp(ly) == 0.0:
        return 0.0, 0.0, notes
    fitres = stats.linregress(lx, ly)
    se = float(fitres.stderr) if keep.sum() > 2 else float("nan")
    return float(fitres.slope), se, notes


@dataclass
class RateResult:
    rows: list
    table: list
    slopes: dict
    warnings: list

    def median_curve(self, algo: str, alpha: int):
        pts = sorted((r["n"], r["median"]) for r in self.table if r["algorithm"] == algo and r["alpha"] == alpha)
        return np.array([p[0] for p in pts]), np.array([p[1] for p in pts])

    def to_json(self) -> str:
        return summary_json(
            {
                "table": self.table,
                "slopes": {f"{k[0]}:{k[1]}": v for k, v in sorted(self.slopes.items())},
                "warnings": self.warnings,
            }
        )


def aggregate(rows: list[ErrorReport]) -> list[dict]:
    """Median and mean sup error per ``(algorithm, alpha, n)`` over successful seeds."""
    groups: dict = {}
    for r in rows:
        groups.setdefault((r.algorithm, r.alpha, r.n), []).append(r)
    table = []
    for (algo, alpha, n), rs in sorted(groups.items()):
        errs = np.array([r.sup_error for r in rs if r.status == "ok"], dtype=float)
        table.append(
            {
                "algorithm": algo,
                "alpha": alpha,
                "n": n,
                "median": float(np.median(errs)) if errs.size else float("nan"),
                "mean": float(np.mean(errs)) if errs.size else float("nan"),
                "std": float(np.std(errs, ddof=1)) if errs.size > 1 else float("nan"),
                "seeds_ok": int(errs.size),
                "seeds_failed": int(len(rs) - errs.size),
            }
        )
    return table


def rate_study(spec: RunSpec, truth: GroundTruth | None = None) -> RateResult:
    """Median sup error per ``n`` and the log-log slope for each algorithm and order."""
    if len(set(spec.n_list)) < 4:
        raise ValidationError("a rate study needs at least 4 distinct sample sizes")
    if len(spec.seeds) < 3:
        raise ValidationError("a rate study needs at least 3 seeds")
    rows = run_cells(spec, truth)
    table = aggregate(rows)
    slopes = {}
    notes = []
    for algo in spec.algorithms:
        for a in spec.alphas:
            ns = [t["n"] for t in table if t["algorithm"] == algo and t["alpha"] == a]
            med = [t["median"] for t in table if t["algorithm"] == algo and t["alpha"] == a]
            slope, se, w = loglog_slope(ns, med)
            slopes[(algo, a)] = {"slope": slope, "stderr": se}
            notes.extend(f"{algo} alpha={a}: {m}" for m in w)
    for m in notes:
        _warnings.warn(m, RuntimeWarning, stacklevel=2)
    res = RateResult(rows, table, slopes, notes)
    if spec.out:
        write_csv(rows, spec.out)
    return res


def _median_time(func: Callable, reps: int) -> float:
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        func()
        times.append(time.perf_counter() - t0)
    return float(np.median(times))


def timing_study(spec: RunSpec, reps: int = 5, truth: GroundTruth | None = None) -> list[dict]:
    """Warm wall-clock fit and predict times, median over ``reps`` runs.

    Prediction is timed on ``spec.m`` equispaced points for every order in
    ``spec.alphas``.
    """
    if reps < 3:
        raise ValidationError("timing needs at least 3 repetitions")
    truth = truth if truth is not None else make_truth(spec.oracle)
    x = eval_grid(spec.m, spec.d)
    seed = spec.seeds[0]
    out = []
    for algo in spec.algorithms:
        for n in spec.n_list:
            # warm-up fills caches (designs, kernel tables) before timing
            pred, deg, nbytes, _ = fit_cell(spec, truth, algo, n, seed)
            fit_t = _median_time(lambda: fit_cell(spec, truth, algo, n, seed), reps)
            alphas = [a for a in spec.alphas if not (algo == "nw" and a > 0)]

            def run_predict():
                for a in alphas:
                    _call(pred, x, a)

            run_predict()
            pred_t = _median_time(run_predict, reps)
            out.append(
                {
                    "algorithm": algo,
                    "n": n,
                    "m": int(x.shape[0]),
                    "degree": deg,
                    "model_bytes": int(nbytes),
                    "fit_time": fit_t,
                    "predict_time": pred_t,
                    "reps": reps,
                }
            )
    return out


def coefficient_count(fit_result: FitResult) -> int:
    return int(fit_result.model.theta.shape[0])


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(rows, path=None, timing: bool = True) -> str:
    """CSV with a header row; rows sorted by ``(algorithm, n, seed, alpha)``.

    With ``timing=False`` the wall-clock columns are left out, which gives
    byte-identical output for identical specs.
    """
    fields = [f for f in CSV_FIELDS if timing or f not in TIMING_FIELDS]
    recs = [asdict(r) if isinstance(r, ErrorReport) else dict(r) for r in rows]
    recs.sort(key=lambda r: (r["algorithm"], r["n"], r["seed"], r["alpha"]))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for r in recs:
        w.writerow([_fmt(r[f]) for f in fields])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def write_table_csv(records: list[dict], path=None) -> str:
    """Generic CSV for dict records (timing tables, aggregates)."""
    if not records:
        return ""
    fields = list(records[0])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for r in records:
        w.writerow([_fmt(r[f]) for f in fields])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def _jsonable(o):
    if isinstance(o, dict):
        return {str(k): _jsonable(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_jsonable(v) for v in o]
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, float) and not math.isfinite(o):
        return None
    return o


def summary_json(payload: dict) -> str:
    return json.dumps({"schema_version": SCHEMA_VERSION, **_jsonable(payload)}, indent=2, sort_keys=True)
