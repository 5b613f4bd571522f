"""Nadaraya-Watson and local polynomial baselines on [-1, 1].

Both estimators work on data sorted by abscissa. For compact kernels the
window ``|x_i - x0| <= h`` is located by binary search and the kernel
moments are accumulated segment by segment, so a prediction only ever
touches in-window points. Removing points outside the window therefore
leaves predictions bit-for-bit unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from padua.errors import ValidationError

_DENOM_FLOOR = 1e-12
_COND_LIMIT = 1e12
_MAX_ORDER = 6


def epanechnikov(u):
    u = np.asarray(u, dtype=float)
    return np.where(np.abs(u) <= 1.0, 0.75 * (1.0 - u * u), 0.0)


def gaussian(u):
    u = np.asarray(u, dtype=float)
    return np.exp(-0.5 * u * u) / math.sqrt(2 * math.pi)


def uniform(u):
    u = np.asarray(u, dtype=float)
    return np.where(np.abs(u) <= 1.0, 0.5, 0.0)


@dataclass(frozen=True)
class KernelChoice:
    name: str
    func: Callable
    compact: bool

    def __call__(self, u):
        return self.func(u)


KERNELS = {
    "epanechnikov": KernelChoice("epanechnikov", epanechnikov, True),
    "gaussian": KernelChoice("gaussian", gaussian, False),
    "uniform": KernelChoice("uniform", uniform, True),
}


def get_kernel(kernel) -> KernelChoice:
    if isinstance(kernel, KernelChoice):
        return kernel
    try:
        return KERNELS[kernel]
    except KeyError:
        raise ValidationError(f"unknown kernel {kernel!r}; choose from {sorted(KERNELS)}") from None


def default_bandwidth(n: int, nu: float = 2.0, c: float = 1.0) -> float:
    """``c * n^(-1/(2 nu + 1))``, capped at 2."""
    if n < 1:
        raise ValidationError("bandwidth needs n >= 1")
    return min(2.0, c * n ** (-1.0 / (2 * nu + 1)))


@dataclass(frozen=True)
class LocalFitConfig:
    """Order ``ell`` (0 gives Nadaraya-Watson), bandwidth and kernel.

    ``h="auto"`` resolves to :func:`default_bandwidth` with constant
    ``c`` once the sample size is known.
    """

    order: int = 1
    h: Union[float, str] = "auto"
    kernel: str = "epanechnikov"
    nu: float = 2.0
    c: float = 1.0

    def __post_init__(self):
        if int(self.order) != self.order or not 0 <= self.order <= _MAX_ORDER:
            raise ValidationError(f"order must be an integer in [0, {_MAX_ORDER}], got {self.order}")
        if self.h != "auto" and not 0 < float(self.h) <= 2:
            raise ValidationError(f"bandwidth must lie in (0, 2], got {self.h}")
        get_kernel(self.kernel)

    def bandwidth(self, n: int) -> float:
        if self.h == "auto":
            return default_bandwidth(n, self.nu, self.c)
        return float(self.h)


@dataclass
class LocalDiagnostics:
    """Indices (into the query array) where the local system was singular."""

    fallback: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    empty: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))


def _prepare(data):
    x, y = data
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    if x.shape != y.shape:
        raise ValidationError("x and y must have the same length")
    if x.size == 0:
        raise ValidationError("data must be nonempty")
    order = np.argsort(x, kind="stable")
    return x[order], y[order]


def _windows(xs, x0, h, compact):
    if compact:
        lo = np.searchsorted(xs, x0 - h, side="left")
        hi = np.searchsorted(xs, x0 + h, side="right")
    else:
        lo = np.zeros(x0.shape[0], dtype=int)
        hi = np.full(x0.shape[0], xs.shape[0])
    return lo, hi


def _moments(xs, ys, x0, h, kern: KernelChoice, max_pow: int, chunk: int = 1 << 20):
    """Per-query ``S_k = sum K u^k`` (k <= 2 max_pow) and ``T_k = sum K u^k y``.

    Also returns the number of distinct abscissae with positive weight.
    """
    m = x0.shape[0]
    lo, hi = _windows(xs, x0, h, kern.compact)
    sizes = hi - lo
    S = np.zeros((m, 2 * max_pow + 1))
    T = np.zeros((m, max_pow + 1))
    distinct = np.zeros(m, dtype=int)
    newval = np.ones(xs.shape[0], dtype=bool)
    newval[1:] = xs[1:] != xs[:-1]
    start = 0
    while start < m:
        # group queries so that each batch touches about `chunk` samples
        csum = np.cumsum(sizes[start:])
        stop = start + max(1, int(np.searchsorted(csum, chunk, side="right")))
        stop = min(stop, m)
        q = np.arange(start, stop)
        qs = sizes[q]
        nz = q[qs > 0]
        if nz.size:
            lens = sizes[nz]
            offsets = np.concatenate([[0], np.cumsum(lens)[:-1]])
            rel = np.arange(lens.sum()) - np.repeat(offsets, lens)
            idx = np.repeat(lo[nz], lens) + rel
            u = (xs[idx] - np.repeat(x0[nz], lens)) / h
            w = kern(u)
            first = rel == 0
            distinct[nz] = np.add.reduceat(((w > 0) & (newval[idx] | first)).astype(int), offsets)
            pw = w.copy()
            for k in range(2 * max_pow + 1):
                S[nz, k] = np.add.reduceat(pw, offsets)
                if k <= max_pow:
                    T[nz, k] = np.add.reduceat(pw * ys[idx], offsets)
                pw = pw * u
        start = stop
    return S, T, distinct


def _as_queries(x0):
    x0 = np.asarray(x0, dtype=float)
    single = x0.ndim == 0
    return np.atleast_1d(x0).reshape(-1), single


def nw_predict(data, x0, config: LocalFitConfig | None = None):
    """Kernel-weighted average; 0 where the weight sum is below 1e-12.

    ``data`` is a pair ``(x, y)`` of 1-d arrays.
    """
    cfg = config or LocalFitConfig(order=0)
    xs, ys = _prepare(data)
    q, single = _as_queries(x0)
    h = cfg.bandwidth(xs.shape[0])
    S, T, _ = _moments(xs, ys, q, h, get_kernel(cfg.kernel), 0)
    out = _nw_from_moments(S, T)
    return float(out[0]) if single else out


def _nw_from_moments(S, T):
    den = S[:, 0]
    ok = den >= _DENOM_FLOOR
    out = np.zeros(S.shape[0])
    out[ok] = T[ok, 0] / den[ok]
    return out


def lpe_predict(data, x0, alpha: int = 0, config: LocalFitConfig | None = None, diagnostics=None):
    """Local polynomial estimate of the ``alpha``-th derivative at ``x0``.

    Fits ``sum_j theta_j ((x - x0)/h)^j`` (``j <= order``) by kernel-weighted
    least squares and returns ``alpha! theta_alpha / h^alpha``. Where fewer
    than ``order + 1`` distinct points carry weight, or the local Gram
    matrix is numerically singular, the value falls back to NW for
    ``alpha = 0`` and to 0 otherwise; those query indices are recorded in
    ``diagnostics`` if one is passed.

    Raises
    ------
    ValidationError
        If ``alpha`` exceeds the polynomial order.
    """
    cfg = config or LocalFitConfig()
    ell = int(cfg.order)
    if int(alpha) != alpha or alpha < 0:
        raise ValidationError("alpha must be a nonnegative integer")
    alpha = int(alpha)
    if alpha > ell:
        raise ValidationError(f"derivative order {alpha} exceeds polynomial order {ell}")
    xs, ys = _prepare(data)
    q, single = _as_queries(x0)
    h = cfg.bandwidth(xs.shape[0])
    S, T, distinct = _moments(xs, ys, q, h, get_kernel(cfg.kernel), ell)
    out = np.zeros(q.shape[0])
    ok = distinct >= ell + 1
    if ell == 0:
        # order 0 is NW by construction
        ok &= S[:, 0] >= _DENOM_FLOOR
        out[ok] = _nw_from_moments(S[ok], T[ok])
    elif ok.any():
        hank = np.lib.stride_tricks.sliding_window_view(S[ok], ell + 1, axis=1)
        # moments are relative to the scaled variable; rescale for conditioning
        scale = 1.0 / np.sqrt(np.maximum(np.diagonal(hank, axis1=1, axis2=2), 1e-300))
        A = hank * scale[:, :, None] * scale[:, None, :]
        cond = np.linalg.cond(A)
        good = np.isfinite(cond) & (cond < _COND_LIMIT)
        sel = np.flatnonzero(ok)[good]
        if sel.size:
            rhs = T[sel] * scale[good]
            theta = np.linalg.solve(A[good], rhs[..., None])[..., 0] * scale[good]
            out[sel] = math.factorial(alpha) * theta[:, alpha] / h**alpha
        ok[np.flatnonzero(ok)[~good]] = False
    bad = np.flatnonzero(~ok)
    if bad.size:
        if alpha == 0:
            out[bad] = _nw_from_moments(S[bad], T[bad])
        if diagnostics is not None:
            diagnostics.fallback = bad
            diagnostics.empty = bad[S[bad, 0] < _DENOM_FLOOR]
    return float(out[0]) if single else out


class LocalEstimator:
    """Stored-sample predictor used by the benchmark harness.

    There is no training step: every prediction scans the stored data, which
    is what makes the cost grow with the sample size.
    """

    def __init__(self, x, y, config: LocalFitConfig | None = None, algo: str = "lpe"):
        if algo not in ("nw", "lpe"):
            raise ValidationError(f"unknown local estimator {algo!r}")
        self.algo = algo
        self.config = config or LocalFitConfig(order=0 if algo == "nw" else 2)
        self.data = _prepare((x, y))

    @property
    def n(self) -> int:
        return self.data[0].shape[0]

    def predict(self, x, alpha: int = 0):
        if self.algo == "nw":
            if alpha != 0:
                raise ValidationError("Nadaraya-Watson estimates only alpha = 0")
            return nw_predict(self.data, x, self.config)
        return lpe_predict(self.data, x, alpha, self.config)

    __call__ = predict


def tune_bandwidth(x, y, truth, grid=None, config: LocalFitConfig | None = None, m: int = 512):
    """Pick the constant ``c`` in ``h = c n^(-1/(2 nu + 1))`` by sup error on a tuning set.

    Returns the best constant and the error for every candidate.
    """
    base = config or LocalFitConfig(order=2)
    candidates = np.asarray(grid if grid is not None else np.geomspace(0.1, 2.0, 12), dtype=float)
    xs = np.linspace(-1.0, 1.0, m)
    target = truth(xs)
    errs = []
    for c in candidates:
        cfg = LocalFitConfig(base.order, "auto", base.kernel, base.nu, float(c))
        if cfg.bandwidth(len(x)) > 2:
            errs.append(np.inf)
            continue
        errs.append(float(np.max(np.abs(lpe_predict((x, y), xs, 0, cfg) - target))))
    errs = np.asarray(errs)
    return float(candidates[int(np.argmin(errs))]), errs
