"""Lower-bound constructions: mollifier bumps, hard pairs, packing families.

The bump placed in a cell of side ``rho`` is the standard mollifier
rescaled to radius ``rho / 2`` and to unit height,

    b(x) = Psi(2 x / rho) / Psi(0),

so it is supported inside the cell, vanishes with every derivative on the
cell boundary, and peaks at exactly 1. The amplitude
``psi0 * rho^nu / ||Psi||_{C^nu}`` then equals the sup norm of the
instance.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from padua.errors import ValidationError
from padua.oracles import GroundTruth
from padua.trig import Alpha, _as_points, _normalize_alpha

PSI0 = math.exp(-1.0)
FD_STEP = 1e-4
NORM_GRID = 16384


def _psi_parts(X):
    """``Psi``, ``s = |x|^2 - 1`` and the interior mask on an ``(m, d)`` array."""
    r2 = np.sum(X * X, axis=1)
    inside = r2 < 1.0
    s = np.where(inside, r2 - 1.0, -1.0)
    val = np.where(inside, np.exp(1.0 / s), 0.0)
    return val, s, inside


def _mollifier(X: np.ndarray, alpha: tuple) -> np.ndarray:
    order = sum(alpha)
    if order >= 3:
        j = next(i for i, a in enumerate(alpha) if a > 0)
        lower = list(alpha)
        lower[j] -= 1
        e = np.zeros(X.shape[1])
        e[j] = FD_STEP
        return (_mollifier(X + e, tuple(lower)) - _mollifier(X - e, tuple(lower))) / (2 * FD_STEP)
    val, s, inside = _psi_parts(X)
    if order == 0:
        return val
    # d/dx_j of 1/s is -2 x_j / s^2
    axes = [i for i, a in enumerate(alpha) for _ in range(a)]
    g = [-2.0 * X[:, j] / s**2 for j in axes]
    if order == 1:
        out = val * g[0]
    else:
        j, k = axes
        gjk = -2.0 * (j == k) / s**2 + 8.0 * X[:, j] * X[:, k] / s**3
        out = val * (g[0] * g[1] + gjk)
    return np.where(inside, out, 0.0)


def _infer_d(x, alpha, d):
    if d is not None:
        return int(d)
    if not np.isscalar(alpha):
        return len(alpha)
    return np.shape(x)[1] if np.ndim(x) == 2 else 1


def mollifier_eval(x, alpha: Alpha = 0, d: int | None = None):
    """Standard mollifier ``exp(1/(|x|^2 - 1))`` on the unit ball and its derivatives.

    Orders up to 2 are analytic; higher orders use nested central
    differences with step 1e-4. A single d-dimensional point needs ``d``
    (or a tuple ``alpha``), since a flat array is read as 1-d points.
    """
    d = _infer_d(x, alpha, d)
    X, single = _as_points(x, d)
    if np.isscalar(alpha) and d > 1:
        if alpha != 0:
            raise ValidationError(f"scalar derivative order given for d={d}")
        alpha = (0,) * d
    out = _mollifier(X, _normalize_alpha(alpha, d))
    return float(out[0]) if single else out


def squeezed(rho: float, x, alpha: Alpha = 0, d: int | None = None):
    """``Psi(x / rho)`` with derivatives scaled by ``rho^-|alpha|``."""
    if not rho > 0:
        raise ValidationError("rho must be positive")
    order = int(np.sum(alpha))
    return mollifier_eval(np.asarray(x, dtype=float) / rho, alpha, d) * rho ** (-order)


@lru_cache(maxsize=64)
def mollifier_norm(nu: float, grid: int = NORM_GRID) -> float:
    """Grid estimate of ``||Psi||_{C^nu}`` for the 1-d mollifier.

    The norm is ``max(max_{k <= nu_*} sup |Psi^(k)|, L)`` with
    ``nu_* = ceil(nu) - 1`` and ``L`` the Hoelder constant of
    ``Psi^(nu_*)`` with exponent ``nu - nu_*``. For integer ``nu`` that
    constant is ``sup |Psi^(nu)|``; otherwise it is estimated from
    difference quotients over a geometric set of grid lags.
    """
    if not nu > 0:
        raise ValidationError("nu must be positive")
    x = np.linspace(-1.0, 1.0, grid + 1)
    nstar = int(math.ceil(nu)) - 1
    sups = [float(np.max(np.abs(mollifier_eval(x, k)))) for k in range(nstar + 1)]
    gamma = nu - nstar
    if abs(gamma - 1.0) < 1e-12:
        hoelder = float(np.max(np.abs(mollifier_eval(x, nstar + 1))))
    else:
        top = mollifier_eval(x, nstar)
        dx = x[1] - x[0]
        hoelder = 0.0
        lags = np.unique(np.geomspace(1, grid, 64).astype(int))
        for lag in lags:
            q = np.abs(top[lag:] - top[:-lag]) / (lag * dx) ** gamma
            hoelder = max(hoelder, float(q.max()))
    return max(max(sups), hoelder)


def bump(x, rho: float, alpha: Alpha = 0, d: int | None = None):
    """Unit-height bump of radius ``rho / 2``: ``Psi(2x/rho) / Psi(0)``."""
    return squeezed(rho / 2.0, x, alpha, d) / PSI0


def cell_centers(K: int, d: int) -> np.ndarray:
    """Centers of the ``K^d`` cells, row-major over the cell multi-index."""
    c = -1.0 + (2.0 * np.arange(K) + 1.0) / K
    return np.array(list(itertools.product(c, repeat=d)), dtype=float).reshape(-1, d)


def _cell_index(cell, K, d) -> int:
    if np.isscalar(cell):
        idx = int(cell)
    else:
        cell = tuple(int(c) for c in cell)
        if len(cell) != d or any(not 0 <= c < K for c in cell):
            raise ValidationError(f"cell {cell} invalid for K={K}, d={d}")
        idx = int(np.ravel_multi_index(cell, (K,) * d))
    if not 0 <= idx < K**d:
        raise ValidationError(f"cell {cell} out of range for K={K}, d={d}")
    return idx


class BumpSum(GroundTruth):
    """``amplitude * sum_l c_l b(x - q_l)`` over disjoint cells, extended periodically."""

    def __init__(self, K: int, d: int, nu: float, amplitude: float, coeffs):
        self.K, self.d, self.nu = int(K), int(d), float(nu)
        self.rho = 2.0 / self.K
        self.amplitude = float(amplitude)
        self.coeffs = np.asarray(coeffs, dtype=float).reshape(-1)
        if self.coeffs.shape[0] != self.K**self.d:
            raise ValidationError("one coefficient per cell is required")
        self.centers = cell_centers(self.K, self.d)
        self.norm_bound = self.amplitude * float(np.abs(self.coeffs).max()) if self.coeffs.size else 0.0

    def _eval(self, X, alpha):
        # fold into [-1, 1) so the instance is periodic
        Xw = np.mod(X + 1.0, 2.0) - 1.0
        cell = np.clip(np.floor((Xw + 1.0) / self.rho).astype(int), 0, self.K - 1)
        flat = np.ravel_multi_index(tuple(cell.T), (self.K,) * self.d)
        out = np.zeros(X.shape[0])
        active = self.coeffs[flat] != 0
        if active.any():
            local = Xw[active] - self.centers[flat[active]]
            r = self.rho / 2.0
            vals = _mollifier(local / r, alpha) * r ** (-sum(alpha)) / PSI0
            out[active] = self.amplitude * self.coeffs[flat[active]] * vals
        return out


@dataclass(frozen=True)
class HardPair:
    """Two instances that differ only inside one cell."""

    f1: GroundTruth
    f2: BumpSum
    K: int
    rho: float
    psi0: float
    nu: float
    d: int
    cell: int
    cell_center: np.ndarray
    psi_norm: float
    amplitude: float
    f2_norm_bound: float = float("nan")
    notes: tuple = field(default=())

    def to_csv(self, path, m: int = 1024) -> None:
        export_csv(path, {"f1": self.f1, "f2": self.f2}, m)


def _zero_truth(d, nu):
    return BumpSum(1, d, nu, 0.0, np.zeros(1))


def hard_pair(K: int, psi0: float, nu: float, d: int = 1, cell=0) -> HardPair:
    """``f1 = 0`` and ``f2 = psi0 ||Psi||^-1 rho^nu b(x - q)`` in the chosen cell.

    ``sup |f2|`` is exactly ``psi0 rho^nu / ||Psi||_{C^nu}``. The C^nu norm
    of ``f2`` is reported separately as an upper bound: narrowing the bump
    to fit the cell and lifting it to unit height cost a factor up to
    ``2^nu e`` over ``psi0``.
    """
    if int(K) != K or K < 1:
        raise ValidationError("K must be a positive integer")
    if d not in (1, 2, 3):
        raise ValidationError("d must be 1, 2 or 3")
    if not psi0 > 0 or not nu > 0:
        raise ValidationError("psi0 and nu must be positive")
    K = int(K)
    idx = _cell_index(cell, K, d)
    rho = 2.0 / K
    pn = mollifier_norm(nu)
    amp = psi0 * rho**nu / pn
    coeffs = np.zeros(K**d)
    coeffs[idx] = 1.0
    f2 = BumpSum(K, d, nu, amp, coeffs)
    # ||Psi(x/r)||_{C^nu} <= ||Psi|| r^-nu with r = rho/2, over height Psi(0)
    f2_norm = amp * pn * (rho / 2.0) ** (-nu) / PSI0
    return HardPair(
        f1=_zero_truth(d, nu),
        f2=f2,
        K=K,
        rho=rho,
        psi0=float(psi0),
        nu=float(nu),
        d=d,
        cell=idx,
        cell_center=f2.centers[idx],
        psi_norm=pn,
        amplitude=amp,
        f2_norm_bound=f2_norm,
        notes=(f"C^nu norm of f2 is at most {f2_norm:.6g} (psi0 * 2^nu * e)",),
    )


def packing_family(K: int, nu: float, d: int = 1, J: int | None = None) -> list[BumpSum]:
    """``f_j = ||Psi||^-1 rho^nu sum_l bin(j, l) b(x - q_l)`` for ``j < J``.

    Digit ``l`` of ``j`` (least significant first) switches cell ``l``.
    Distinct members differ by at least ``rho^nu / ||Psi||_{C^nu}`` in
    sup norm.
    """
    K = int(K)
    cells = K**d
    cap = min(2**cells, 1024) if cells < 64 else 1024
    J = cap if J is None else int(J)
    if not 1 <= J <= cap:
        raise ValidationError(f"J must lie in [1, {cap}] for K={K}, d={d}")
    rho = 2.0 / K
    amp = rho**nu / mollifier_norm(nu)
    out = []
    for j in range(J):
        bits = np.array([(j >> l) & 1 for l in range(cells)], dtype=float)
        out.append(BumpSum(K, d, nu, amp, bits))
    return out


def packing_separation(K: int, nu: float) -> float:
    return (2.0 / K) ** nu / mollifier_norm(nu)


@dataclass(frozen=True)
class KLBudget:
    budget: float
    min_K: int
    error_prob_bound: float


def kl_budget(n: int, K: int, psi0: float, sigma: float, nu: float, d: int = 1, psi_norm: float | None = None) -> KLBudget:
    """KL bound ``n psi0^2 rho^(2 nu) / (2 K^d ||Psi||^2 sigma^2)`` with ``rho = 2/K``.

    Also returns the smallest integer ``K`` satisfying
    ``K >= (psi0^2 n / (4 sigma^2 ||Psi||^2))^(1/(d + 2 nu))`` and the
    testing-error lower bound ``(1 - sqrt(budget / 2)) / 2`` clipped at 0.
    """
    if not sigma > 0:
        raise ValidationError("sigma must be positive")
    if n < 0 or K < 1:
        raise ValidationError("n must be nonnegative and K positive")
    pn = mollifier_norm(nu) if psi_norm is None else float(psi_norm)
    # rho^(2 nu) / K^d written as 2^(2 nu) / K^(d + 2 nu) to keep exact cases exact
    budget = n * psi0**2 * 2.0 ** (2 * nu) / (2.0 * K ** (d + 2 * nu) * pn**2 * sigma**2)
    kmin = (psi0**2 * n / (4.0 * sigma**2 * pn**2)) ** (1.0 / (d + 2 * nu))
    min_K = max(1, int(math.ceil(kmin - 1e-12)))
    perr = max(0.0, (1.0 - math.sqrt(budget / 2.0)) / 2.0)
    return KLBudget(float(budget), min_K, perr)


def gaussian_kl_mc(v: float, sigma: float, samples: int, rng: np.random.Generator) -> tuple[float, float]:
    """Monte Carlo ``KL(N(0, s^2) || N(v, s^2))`` and its standard error."""
    y = sigma * rng.standard_normal(samples)
    llr = ((y - v) ** 2 - y**2) / (2 * sigma**2)
    return float(llr.mean()), float(llr.std(ddof=1) / math.sqrt(samples))


def export_csv(path, truths: dict, m: int = 1024) -> None:
    """Sample 1-d instances on ``m`` equispaced points as columns ``x, name...``."""
    x = np.linspace(-1.0, 1.0, m)
    cols = {k: np.asarray(g(x), dtype=float) for k, g in truths.items()}
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x"] + list(cols))
        for i in range(m):
            w.writerow([repr(float(x[i]))] + [repr(float(c[i])) for c in cols.values()])
