"""Ground-truth functions and noisy query oracles.

Synthetic truths carry analytic derivatives. Audio truths come from WAV
files: a segment that starts and ends near zero is stretched onto
[-1, 1] and interpolated by a periodic cubic spline.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.io import wavfile

from padua.errors import ValidationError, WavFormatError
from padua.trig import Alpha, TrigPoly, _as_points, _normalize_alpha, trig_eval, wrap


class GroundTruth:
    """A periodic function on [-1, 1]^d with derivative access.

    Subclasses implement ``_eval(X, alpha)`` on an ``(m, d)`` array.
    """

    d: int = 1
    nu: float = math.inf
    norm_bound: float = 1.0
    periodic: bool = True

    def eval(self, x, alpha: Alpha = 0):
        X, single = _as_points(x, self.d)
        if np.isscalar(alpha) and self.d > 1:
            if alpha != 0:
                raise ValidationError(f"scalar derivative order given for d={self.d}")
            alpha = (0,) * self.d
        out = np.asarray(self._eval(X, _normalize_alpha(alpha, self.d)), dtype=float)
        return float(out[0]) if single else out

    __call__ = eval

    def _eval(self, X: np.ndarray, alpha: tuple) -> np.ndarray:
        raise NotImplementedError


class TrigTruth(GroundTruth):
    def __init__(self, poly: TrigPoly, norm_bound: float | None = None):
        self.poly = poly
        self.d = poly.d
        self.nu = math.inf
        self.norm_bound = float(np.abs(poly.theta).sum()) if norm_bound is None else norm_bound

    def _eval(self, X, alpha):
        return trig_eval(self.poly, X, alpha)


class DecayTruth(GroundTruth):
    """``sum_{t<=T} t^-(nu+1) cos(t pi x + psi_t)`` with seeded phases."""

    def __init__(self, nu: float, T: int = 100, seed: int = 0):
        self.nu = float(nu)
        self.T = int(T)
        self.seed = seed
        rng = np.random.default_rng(seed)
        self.phases = rng.uniform(0.0, 2 * np.pi, self.T)
        self.t = np.arange(1, self.T + 1)
        self.amps = self.t ** -(self.nu + 1.0)
        self.norm_bound = max(self.derivative_bound(a) for a in range(int(math.floor(self.nu)) + 1))

    def derivative_bound(self, alpha: int) -> float:
        """``sum_t t^(alpha - nu - 1) pi^alpha >= sup |f^(alpha)|``."""
        return float(np.sum(self.t ** (alpha - self.nu - 1.0)) * np.pi**alpha)

    def _eval(self, X, alpha):
        (a,) = alpha
        w = self.t * np.pi
        arg = np.outer(X[:, 0], w) + self.phases + a * np.pi / 2
        return np.cos(arg) @ (self.amps * w**a)


class SplineTruth(GroundTruth):
    """Periodic cubic spline through equispaced samples, closed at x = 1."""

    def __init__(self, values, nu: float = math.inf):
        v = np.asarray(values, dtype=float)
        if v.ndim != 1 or v.shape[0] < 4:
            raise ValidationError("spline truth needs at least four samples")
        self.values = v
        L = v.shape[0]
        self.knots = -1.0 + 2.0 * np.arange(L + 1) / L
        self.spline = CubicSpline(self.knots, np.append(v, v[0]), bc_type="periodic")
        self.nu = nu
        fine = np.linspace(-1, 1, 16 * L + 1)
        self.norm_bound = float(np.abs(self.spline(fine)).max())

    def _eval(self, X, alpha):
        (a,) = alpha
        x = wrap(X[:, 0])
        if a > 3:
            return np.zeros_like(x)
        return self.spline(x, a)


class FunctionTruth(GroundTruth):
    """Wrap a plain callable ``func(X, alpha)`` on ``(m, d)`` points."""

    def __init__(self, func: Callable, d: int = 1, nu: float = math.inf, norm_bound: float = 1.0):
        self.func = func
        self.d = d
        self.nu = nu
        self.norm_bound = norm_bound

    def _eval(self, X, alpha):
        return self.func(X, alpha)


def synthetic_function(kind: str, **kw) -> GroundTruth:
    """``synthetic_function("trig", poly=...)`` or ``("decay", nu=, T=, seed=)``."""
    if kind == "trig":
        poly = kw.get("poly")
        if poly is None:
            poly = TrigPoly(int(kw["N"]), int(kw.get("d", 1)), np.asarray(kw["theta"], float))
        return TrigTruth(poly)
    if kind == "decay":
        return DecayTruth(kw.get("nu", 2.0), kw.get("T", 100), kw.get("seed", 0))
    raise ValidationError(f"unknown synthetic function kind {kind!r}")


@dataclass
class NoisyOracle:
    """``y = g(x) + N(0, sigma^2)``; noise drawn from the caller's generator."""

    truth: GroundTruth
    sigma: float
    calls: int = field(default=0, init=False)

    def __post_init__(self):
        if self.sigma < 0:
            raise ValidationError("sigma must be nonnegative")

    def query(self, x, rng: np.random.Generator):
        X, single = _as_points(x, self.truth.d)
        y = np.asarray(self.truth.eval(X, 0), dtype=float).reshape(-1)
        self.calls += y.shape[0]
        if self.sigma > 0:
            y = y + self.sigma * rng.standard_normal(y.shape[0])
        return float(y[0]) if single else y


def noisy_oracle(g: GroundTruth, sigma: float) -> NoisyOracle:
    return NoisyOracle(g, sigma)


def wav_load(path):
    """Read a PCM WAV file as floats in [-1, 1], downmixing stereo by channel mean.

    Supports 16-bit integer and 32-bit float encodings.
    """
    try:
        rate, data = wavfile.read(path)
    except FileNotFoundError as exc:
        raise WavFormatError(f"no such file: {path}") from exc
    except Exception as exc:  # scipy raises several types on truncated chunks
        raise WavFormatError(f"malformed WAV file {path}: {exc}") from exc
    if data.dtype == np.int16:
        samples = data.astype(float) / 32768.0
    elif data.dtype == np.float32:
        samples = data.astype(float)
    else:
        raise WavFormatError(f"unsupported WAV encoding {data.dtype}")
    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    return samples, int(rate)


@dataclass(frozen=True)
class AudioSegment:
    """Contiguous slice ``source[start:start+len]`` whose end samples are near zero."""

    samples: np.ndarray
    sample_rate: int
    source_offset: int

    def __len__(self) -> int:
        return self.samples.shape[0]

    def to_x(self, index):
        """Affine map from sample index to [-1, 1); index ``len`` wraps to -1."""
        return -1.0 + 2.0 * np.asarray(index, dtype=float) / len(self)

    def to_index(self, x):
        return (np.asarray(x, dtype=float) + 1.0) * len(self) / 2.0

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["index", "value"])
            for i, v in enumerate(self.samples):
                w.writerow([self.source_offset + i, repr(float(v))])


def extract_periodic_segments(
    samples,
    min_len: int = 500,
    max_len: int = 1000,
    tau: float | None = None,
    sample_rate: int = 0,
) -> list[AudioSegment]:
    """Greedy left-to-right segments ``s[i..j]`` with ``|s_i|, |s_j| <= tau``.

    Segment length ``j - i + 1`` lies in ``[min_len, max_len]``; the
    shortest valid ``j`` is taken for each start and the scan resumes at
    ``j + 1``. ``tau`` defaults to ``0.01 * max|s|``.
    """
    s = np.asarray(samples, dtype=float)
    if s.size == 0:
        return []
    if tau is None:
        tau = 0.01 * float(np.abs(s).max())
    near = np.flatnonzero(np.abs(s) <= tau)
    segments = []
    pos = 0
    cursor = 0
    while pos < near.shape[0]:
        i = near[pos]
        if i < cursor:
            pos += 1
            continue
        lo = np.searchsorted(near, i + min_len - 1, side="left")
        if lo < near.shape[0] and near[lo] <= i + max_len - 1:
            j = near[lo]
            segments.append(AudioSegment(s[i : j + 1].copy(), sample_rate, int(i)))
            cursor = j + 1
            pos = lo + 1
        else:
            pos += 1
    return segments


def segment_to_function(seg: AudioSegment) -> SplineTruth:
    """Periodic cubic spline with knot ``k`` at ``x = -1 + 2k/len``."""
    return SplineTruth(seg.samples)
