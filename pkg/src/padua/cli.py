"""Command-line entry point: ``padua <subcommand> [flags]``.

Exit status is 0 on success, 2 on invalid input and 3 when an oracle or a
file cannot be used.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from padua import bench
from padua.algorithm import FitResult, PaduaConfig, build_design, choose_N, fit, n_features
from padua.errors import OracleError, PaduaError, ValidationError
from padua.oracles import NoisyOracle, extract_periodic_segments, wav_load
from padua.trig import KernelTable, decompose, l1_norm

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 2, 3

# flag defaults; a --config file fills in anything not given on the command line
DEFAULTS = {
    "n": "1000",
    "N": "auto",
    "nu": 2.0,
    "d": 1,
    "sigma": 0.1,
    "seed": "0",
    "m": 4096,
    "algo": "padua",
    "out": None,
    "wav": None,
    "oracle": "decay",
    "alpha": "0",
    "norm_bound": 1.0,
    "reps": 5,
    "model": None,
    "segment": 0,
    "tau": None,
}
_TYPES = {"nu": float, "d": int, "sigma": float, "m": int, "norm_bound": float, "reps": int, "segment": int}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _int_list(text) -> list[int]:
    try:
        return [int(float(v)) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise ValidationError(f"expected a comma-separated list of integers, got {text!r}") from None


def _seeds(text) -> list[int]:
    return _int_list(text)


def read_config(path) -> dict:
    """Plain ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise FileNotFoundError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key not in DEFAULTS:
            raise ValidationError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def _resolve(args) -> dict:
    cfg = read_config(args.config) if getattr(args, "config", None) else {}
    merged = {}
    for key, default in DEFAULTS.items():
        v = getattr(args, key, None)
        if v is None:
            v = cfg.get(key, default)
        if v is not None and key in _TYPES:
            try:
                v = _TYPES[key](v)
            except ValueError:
                raise ValidationError(f"invalid value for {key}: {v!r}") from None
        merged[key] = v
    raw_N = str(merged["N"])
    merged["N_list"] = None if raw_N == "auto" else _int_list(raw_N)
    merged["N"] = "auto" if raw_N == "auto" else merged["N_list"][0]
    return merged


def _oracle_spec(o: dict) -> dict:
    kind = o["oracle"]
    if o["wav"] is not None:
        kind = "wav"
    spec = {"kind": kind, "nu": o["nu"]}
    if kind == "wav":
        if o["wav"] is None:
            raise ValidationError("--oracle wav needs --wav PATH")
        spec.update(path=o["wav"], segment=o["segment"])
    return spec


def _emit(text: str, path) -> None:
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_kernel_check(o):
    Ns = o["N_list"] or [8, 16, 32, 64]
    records = []
    for N in Ns:
        table = KernelTable.vallee_poussin(N)
        dec = decompose(table)
        recon = dec.reconstruct()
        rel = float(np.max(np.abs(recon - table.values)) / np.max(np.abs(table.values)))
        records.append(
            {
                "N": table.N,
                "grid_points": int(table.grid.shape[0]),
                "l1_norm": l1_norm(table),
                "beta_plus": dec.beta_plus,
                "beta_minus": dec.beta_minus,
                "beta_difference": dec.beta_plus - dec.beta_minus,
                "reconstruction_error": rel,
            }
        )
    _emit(bench.write_table_csv(records), o["out"])
    return EXIT_OK


def cmd_design(o):
    d = o["d"]
    N = o["N"]
    if N == "auto":
        N = choose_N(_int_list(o["n"])[0], o["nu"], d, o["norm_bound"], o["sigma"])
    design = build_design(int(N), d)
    diag = design.diagnostics()
    diag.update(N=int(N), d=d, epsilon=1.0 / (8 * math.pi * int(N)))
    if o["out"]:
        n_tot = _int_list(o["n"])[0] // 4
        design.to_csv(o["out"], n_tot=n_tot)
    sys.stdout.write(bench.summary_json({"design": diag}) + "\n")
    return EXIT_OK


def _fit_padua(o, truth, n, seed):
    cfg = PaduaConfig(n=n, N=o["N"], nu=o["nu"], d=o["d"], sigma=o["sigma"], norm_bound=o["norm_bound"], seed=seed)
    return fit(NoisyOracle(truth, o["sigma"]), cfg)


def cmd_fit(o):
    truth = bench.make_truth(_oracle_spec(o))
    n = _int_list(o["n"])[0]
    seed = _seeds(o["seed"])[0]
    if o["algo"] != "padua":
        spec = _runspec(o, [n], [seed], [o["algo"]])
        rows = bench.run_cells(spec, truth)
        _emit(bench.write_csv(rows), o["out"])
        return EXIT_OK
    res = _fit_padua(o, truth, n, seed)
    if o["out"]:
        with open(o["out"], "w") as fh:
            fh.write(res.to_json())
    summary = {
        "N": res.N,
        "p": n_features(res.N, res.d),
        "queries_used": res.queries_used,
        "condition_number": res.condition_number,
        "model_bytes": len(res.to_bytes()),
        "warnings": list(res.warnings),
    }
    sys.stdout.write(bench.summary_json({"fit": summary}) + "\n")
    return EXIT_OK


def cmd_eval(o):
    truth = bench.make_truth(_oracle_spec(o))
    alphas = _int_list(o["alpha"])
    if o["model"]:
        try:
            with open(o["model"]) as fh:
                res = FitResult.from_json(fh.read())
        except (OSError, json.JSONDecodeError, KeyError) as exc:
            raise FileNotFoundError(f"cannot load model {o['model']}: {exc}") from exc
    else:
        res = _fit_padua(o, truth, _int_list(o["n"])[0], _seeds(o["seed"])[0])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["alpha", "sup_error", "m"])
    for a in alphas:
        w.writerow([a, repr(bench.sup_error(truth, res, a, o["m"])), o["m"]])
    _emit(buf.getvalue(), o["out"])
    return EXIT_OK


def _runspec(o, n_list, seeds, algos):
    return bench.RunSpec(
        algorithms=tuple(algos),
        oracle=_oracle_spec(o),
        n_list=tuple(n_list),
        m=o["m"],
        alphas=tuple(_int_list(o["alpha"])),
        seeds=tuple(seeds),
        sigma=o["sigma"],
        nu=o["nu"],
        d=o["d"],
        N=o["N"],
        norm_bound=o["norm_bound"],
    )


def cmd_rate(o):
    spec = _runspec(o, _int_list(o["n"]), _seeds(o["seed"]), o["algo"].split(","))
    res = bench.rate_study(spec)
    _emit(bench.write_csv(res.rows), o["out"])
    if o["out"]:
        sys.stdout.write(res.to_json() + "\n")
    return EXIT_OK


def cmd_bench_time(o):
    spec = _runspec(o, _int_list(o["n"]), _seeds(o["seed"]), o["algo"].split(","))
    table = bench.timing_study(spec, reps=o["reps"])
    _emit(bench.write_table_csv(table), o["out"])
    return EXIT_OK


def cmd_audio_extract(o):
    if not o["wav"]:
        raise ValidationError("audio-extract needs --wav PATH")
    samples, rate = wav_load(o["wav"])
    tau = float(o["tau"]) if o["tau"] is not None else None
    segs = extract_periodic_segments(samples, tau=tau, sample_rate=rate)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["segment", "index", "value"])
    for k, seg in enumerate(segs):
        for i, v in enumerate(seg.samples):
            w.writerow([k, seg.source_offset + i, repr(float(v))])
    _emit(buf.getvalue(), o["out"])
    sys.stderr.write(f"{len(segs)} segments from {samples.shape[0]} samples at {rate} Hz\n")
    return EXIT_OK


COMMANDS = {
    "kernel-check": (cmd_kernel_check, "L1 norms and decomposition diagnostics of V_N"),
    "design": (cmd_design, "build and certify a quasi-optimal design"),
    "fit": (cmd_fit, "fit PADUA or a baseline on an oracle"),
    "eval": (cmd_eval, "sup-norm errors of a fitted or saved model"),
    "rate": (cmd_rate, "error-versus-n rate study"),
    "bench-time": (cmd_bench_time, "wall-clock fit and predict times"),
    "audio-extract": (cmd_audio_extract, "split a WAV file into near-periodic segments"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="padua", description="Uniform approximation of functions and derivatives from noisy queries.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--n", help="query budget; comma list for rate/bench-time")
        p.add_argument("--N", help="trigonometric degree or 'auto'; comma list for kernel-check")
        p.add_argument("--nu", help="smoothness order")
        p.add_argument("--d", help="dimension (1-3)")
        p.add_argument("--sigma", help="noise standard deviation")
        p.add_argument("--seed", help="seed; comma list for rate")
        p.add_argument("--m", help="evaluation grid size (>= 256)")
        p.add_argument("--algo", help="padua, nw or lpe (comma list for rate/bench-time)")
        p.add_argument("--out", help="output path (stdout when omitted)")
        p.add_argument("--wav", help="WAV file")
        p.add_argument("--config", help="key=value file; flags override it")
        p.add_argument("--oracle", help="ground truth: decay, trig, audio or wav")
        p.add_argument("--alpha", help="derivative orders, comma list")
        p.add_argument("--norm-bound", dest="norm_bound", help="upper bound on the C^nu norm")
        p.add_argument("--reps", help="timing repetitions")
        p.add_argument("--model", help="saved model (JSON) for eval")
        p.add_argument("--segment", help="segment index for WAV oracles")
        p.add_argument("--tau", help="near-zero threshold for audio-extract")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts = _resolve(args)
        return COMMANDS[args.command][0](opts)
    except (OracleError, FileNotFoundError, OSError) as exc:
        sys.stderr.write(f"padua: {exc}\n")
        return EXIT_IO
    except (PaduaError, ValueError) as exc:
        sys.stderr.write(f"padua: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
