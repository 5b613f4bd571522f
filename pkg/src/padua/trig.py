"""Trigonometric features, kernels and kernel decompositions on [-1, 1].

Everything here lives on the period-2 torus [-1, 1). Integrals are taken
with respect to the normalized measure ``dmu = dx / 2`` so that the
Dirichlet kernel convolves a function onto its truncated Fourier series and
the de la Vallee Poussin kernel has unit mass.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence, Union

import numpy as np
from scipy.integrate import cumulative_trapezoid

from padua.errors import KernelNonnegative, ValidationError

# |sin(pi x / 2)| below this switches the Dirichlet closed form to the cosine sum
_SINGULARITY_TOL = 1e-8
# elements per chunk in quadrature convolutions
_CHUNK = 2_000_000

Alpha = Union[int, Sequence[int]]


def wrap(x):
    """Reduce ``x`` modulo 2 into [-1, 1)."""
    r = np.mod(np.asarray(x, dtype=float) + 1.0, 2.0) - 1.0
    r = np.where(r >= 1.0, r - 2.0, r)
    return r if r.ndim else float(r)


def soc(t: int, x):
    """Interleaved sine/cosine basis: ``sin(t pi x)`` for t > 0, else ``cos(t pi x)``."""
    x = np.asarray(x, dtype=float)
    out = np.sin(t * np.pi * x) if t > 0 else np.cos(t * np.pi * x)
    return out if out.ndim else float(out)


def _soc_derivative_1d(N: int, x: np.ndarray, order: int) -> np.ndarray:
    """Matrix ``(len(x), 2N+1)`` of the ``order``-th derivative of soc(t, x), t = -N..N."""
    t = np.arange(-N, N + 1)
    w = np.abs(t) * np.pi
    arg = np.outer(x, w)
    s, c = np.sin(arg), np.cos(arg)
    k = order % 4
    # derivative cycles: sin -> cos -> -sin -> -cos ; cos -> -sin -> -cos -> sin
    sin_cycle = (s, c, -s, -c)[k]
    cos_cycle = (c, -s, -c, s)[k]
    out = np.where(t > 0, sin_cycle, cos_cycle)
    if order:
        out = out * w**order
    return out


def _normalize_alpha(alpha: Alpha, d: int) -> tuple[int, ...]:
    if np.isscalar(alpha):
        if d != 1:
            raise ValidationError(f"scalar derivative order given for d={d}")
        alpha = (int(alpha),)
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != d or any(a < 0 for a in alpha):
        raise ValidationError(f"invalid derivative multi-index {alpha} for d={d}")
    return alpha


def _as_points(x, d: int) -> tuple[np.ndarray, bool]:
    """Coerce ``x`` to an ``(m, d)`` array; the flag marks a single-point input."""
    x = np.asarray(x, dtype=float)
    if d == 1:
        if x.ndim == 2 and x.shape[1] == 1:
            return x, False
        return x.reshape(-1, 1), x.ndim == 0
    if x.ndim == 1:
        if x.shape[0] != d:
            raise ValidationError(f"point of length {x.shape[0]} given for d={d}")
        return x.reshape(1, d), True
    if x.ndim != 2 or x.shape[1] != d:
        raise ValidationError(f"points of shape {x.shape} given for d={d}")
    return x, False


def _check_dim(d: int) -> None:
    if d not in (1, 2, 3):
        raise ValidationError(f"dimension must be 1, 2 or 3, got {d}")


def feature_indices(N: int, d: int) -> np.ndarray:
    """Index tuples ``(t_1..t_d)`` in row-major order, shape ``((2N+1)**d, d)``."""
    _check_dim(d)
    return np.array(list(itertools.product(range(-N, N + 1), repeat=d)), dtype=int)


def feature_matrix(N: int, d: int, x, alpha: Alpha | None = None) -> np.ndarray:
    """Tensor-product soc features (or their derivatives) at each row of ``x``.

    Parameters
    ----------
    N : int
        Degree per axis.
    d : int
        Dimension, 1 to 3.
    x : array_like
        Points, shape ``(m,)`` for d = 1 or ``(m, d)``.
    alpha : int or tuple of int, optional
        Derivative multi-index applied to every feature.

    Returns
    -------
    ndarray
        Shape ``(m, (2N+1)**d)``; column order matches :func:`feature_indices`.
    """
    _check_dim(d)
    X, _ = _as_points(x, d)
    orders = (0,) * d if alpha is None else _normalize_alpha(alpha, d)
    out = _soc_derivative_1d(N, X[:, 0], orders[0])
    for j in range(1, d):
        factor = _soc_derivative_1d(N, X[:, j], orders[j])
        out = (out[:, :, None] * factor[:, None, :]).reshape(X.shape[0], -1)
    return out


def feature_vector(N: int, d: int, x) -> np.ndarray:
    """Feature vector of a single point."""
    _check_dim(d)
    X, _ = _as_points(x, d)
    if X.shape[0] != 1:
        raise ValidationError("feature_vector takes a single point")
    return feature_matrix(N, d, X)[0]


@dataclass(frozen=True)
class TrigPoly:
    """Trigonometric polynomial ``phi_N(x) @ theta`` in dimension ``d``."""

    N: int
    d: int
    theta: np.ndarray

    def __post_init__(self):
        _check_dim(self.d)
        theta = np.asarray(self.theta, dtype=float).ravel()
        if theta.shape[0] != (2 * self.N + 1) ** self.d:
            raise ValidationError(
                f"theta has length {theta.shape[0]}, expected {(2 * self.N + 1) ** self.d}"
            )
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)

    @property
    def n_features(self) -> int:
        return self.theta.shape[0]

    @classmethod
    def unit(cls, N: int, t, d: int = 1) -> "TrigPoly":
        """Polynomial with a single unit coefficient on feature index ``t``."""
        t = (t,) if np.isscalar(t) else tuple(t)
        idx = feature_indices(N, d)
        pos = int(np.flatnonzero((idx == np.array(t)).all(axis=1))[0])
        theta = np.zeros(idx.shape[0])
        theta[pos] = 1.0
        return cls(N, d, theta)

    @classmethod
    def random(cls, N: int, rng: np.random.Generator, d: int = 1, scale: float = 1.0):
        return cls(N, d, scale * rng.standard_normal((2 * N + 1) ** d))

    def __call__(self, x, alpha: Alpha = 0):
        return trig_eval(self, x, alpha)


def trig_eval(p: TrigPoly, x, alpha: Alpha = 0):
    """Evaluate ``D^alpha [phi_N^T theta]`` at ``x`` with analytic derivatives."""
    if np.isscalar(alpha) and p.d > 1 and alpha == 0:
        alpha = (0,) * p.d
    X, single = _as_points(x, p.d)
    out = feature_matrix(p.N, p.d, X, alpha) @ p.theta
    if single:
        return float(out[0])
    shape = np.shape(x)
    # 1-d inputs of any shape come back in that shape
    if p.d == 1 and len(shape) > 1 and shape[-1] != 1:
        out = out.reshape(shape)
    return out


def dirichlet(N: int, x):
    """Dirichlet kernel ``1 + 2 sum_{t<=N} cos(t pi x)``."""
    if N < 1:
        raise ValidationError(f"Dirichlet degree must be >= 1, got {N}")
    x = np.asarray(x, dtype=float)
    den = np.sin(np.pi * x / 2)
    near = np.abs(den) < _SINGULARITY_TOL
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.sin((N + 0.5) * np.pi * x) / den
    if np.any(near):
        t = np.arange(1, N + 1)
        xs = x[near] if x.ndim else x.reshape(1)
        sums = 1 + 2 * np.cos(np.pi * np.outer(xs, t)).sum(axis=1)
        if x.ndim:
            out[near] = sums
        else:
            out = sums[0]
    return out if np.ndim(out) else float(out)


def vallee_poussin(N: int, x):
    """De la Vallee Poussin kernel: mean of Dirichlet kernels of degree N/2..N."""
    if N < 2 or N % 2:
        raise ValidationError(f"de la Vallee Poussin degree must be even and >= 2, got {N}")
    x = np.asarray(x, dtype=float)
    out = sum(np.asarray(dirichlet(t, x)) for t in range(N // 2, N + 1)) / (N // 2 + 1)
    return out if np.ndim(out) else float(out)


def even_degree(N: int) -> int:
    """Round an odd degree up to the next even one."""
    N = int(N)
    return N + (N % 2)


def table_size(N: int) -> int:
    """Number of grid points for a kernel of degree N (odd so that 0 is a knot)."""
    return max(4096, 64 * N) + 1


def _half_trapezoid(values: np.ndarray, grid: np.ndarray) -> float:
    """Trapezoid value of ``(1/2) int values dx``."""
    return 0.5 * float(np.trapezoid(values, grid))


@dataclass(frozen=True)
class KernelTable:
    """A periodic kernel tabulated on an equispaced grid covering [-1, 1]."""

    N: int
    grid: np.ndarray
    values: np.ndarray
    name: str = "custom"

    @classmethod
    def vallee_poussin(cls, N: int, M: int | None = None) -> "KernelTable":
        N = even_degree(N)
        grid = np.linspace(-1.0, 1.0, M or table_size(N))
        return cls(N, grid, vallee_poussin(N, grid), "vallee_poussin")

    @classmethod
    def dirichlet(cls, N: int, M: int | None = None) -> "KernelTable":
        grid = np.linspace(-1.0, 1.0, M or table_size(N))
        return cls(N, grid, dirichlet(N, grid), "dirichlet")

    @classmethod
    def from_function(cls, func: Callable, M: int = 4097, N: int = 0, name: str = "custom"):
        grid = np.linspace(-1.0, 1.0, M)
        return cls(N, grid, np.broadcast_to(np.asarray(func(grid), float), grid.shape).copy(), name)

    def __call__(self, x):
        """Periodic linear interpolation of the table."""
        return np.interp(wrap(x), self.grid, self.values)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "value"])
            for xi, vi in zip(self.grid, self.values):
                w.writerow([repr(float(xi)), repr(float(vi))])


def l1_norm(k: KernelTable) -> float:
    """Normalized L1 norm ``(1/2) int |k| dx`` by the trapezoid rule."""
    return _half_trapezoid(np.abs(k.values), k.grid)


def _sample_from_cdf(grid, cdf, rng, size):
    u = rng.random(size)
    idx = np.clip(np.searchsorted(cdf, u, side="right") - 1, 0, len(grid) - 2)
    lo, hi = cdf[idx], cdf[idx + 1]
    frac = (u - lo) / (hi - lo)
    return grid[idx] + frac * (grid[idx + 1] - grid[idx])


@dataclass(frozen=True)
class KernelDecomposition:
    """Split ``k = beta_plus * plus - beta_minus * minus`` into two densities.

    Densities are relative to ``dmu = dx/2``; the CDFs integrate the
    Lebesgue densities ``plus / 2`` and ``minus / 2``.
    """

    N: int
    grid: np.ndarray
    plus_density: np.ndarray
    minus_density: np.ndarray
    beta_plus: float
    beta_minus: float
    plus_cdf: np.ndarray
    minus_cdf: np.ndarray

    @property
    def l1(self) -> float:
        return self.beta_plus + self.beta_minus

    def reconstruct(self) -> np.ndarray:
        return self.beta_plus * self.plus_density - self.beta_minus * self.minus_density

    def sample(self, which: str, rng: np.random.Generator, size=None):
        return sample_eta(self, which, rng, size)


def decompose(k: KernelTable) -> KernelDecomposition:
    """Positive/negative split of a tabulated kernel into normalized densities."""
    pos = np.maximum(k.values, 0.0)
    neg = np.maximum(-k.values, 0.0)
    beta_plus = _half_trapezoid(pos, k.grid)
    beta_minus = _half_trapezoid(neg, k.grid)
    if beta_minus < 1e-12:
        raise KernelNonnegative("kernel is nonnegative; nothing to decompose")
    plus, minus = pos / beta_plus, neg / beta_minus
    cdfs = []
    for dens in (plus, minus):
        c = cumulative_trapezoid(dens / 2.0, k.grid, initial=0.0)
        cdfs.append(c / c[-1])
    return KernelDecomposition(k.N, k.grid, plus, minus, beta_plus, beta_minus, *cdfs)


def sample_eta(dec: KernelDecomposition, which: str, rng: np.random.Generator, size=None):
    """Inverse-transform draws from the plus or minus density of ``dec``."""
    if which == "plus":
        cdf = dec.plus_cdf
    elif which == "minus":
        cdf = dec.minus_cdf
    else:
        raise ValidationError(f"which must be 'plus' or 'minus', got {which!r}")
    out = _sample_from_cdf(dec.grid, cdf, rng, size)
    return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class ProductDecomposition:
    """Decomposition of the tensor-product kernel ``prod_j k(x_j)``.

    The 1-d plus and minus parts have disjoint supports, so the positive
    part of the product is the sum over sign patterns with an even number
    of minus factors, and the negative part the sum over odd patterns.
    """

    base: KernelDecomposition
    d: int
    patterns: np.ndarray = field(init=False, repr=False)
    pattern_mass: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        _check_dim(self.d)
        pats = np.array(list(itertools.product((0, 1), repeat=self.d)), dtype=int)
        b = np.array([self.base.beta_plus, self.base.beta_minus])
        mass = b[pats].prod(axis=1)
        object.__setattr__(self, "patterns", pats)
        object.__setattr__(self, "pattern_mass", mass)

    @property
    def N(self) -> int:
        return self.base.N

    def _parity_mask(self, which: str) -> np.ndarray:
        odd = self.patterns.sum(axis=1) % 2 == 1
        if which == "plus":
            return ~odd
        if which == "minus":
            return odd
        raise ValidationError(f"which must be 'plus' or 'minus', got {which!r}")

    @property
    def beta_plus(self) -> float:
        return float(self.pattern_mass[self._parity_mask("plus")].sum())

    @property
    def beta_minus(self) -> float:
        return float(self.pattern_mass[self._parity_mask("minus")].sum())

    @property
    def l1(self) -> float:
        return self.beta_plus + self.beta_minus

    def density(self, which: str, x) -> np.ndarray:
        """Product-kernel density (w.r.t. ``mu^d``) at points ``x``."""
        X, _ = _as_points(x, self.d)
        b = self.base
        comps = [np.interp(X, b.grid, b.plus_density), np.interp(X, b.grid, b.minus_density)]
        mask = self._parity_mask(which)
        total = np.zeros(X.shape[0])
        for pat, m in zip(self.patterns[mask], self.pattern_mass[mask]):
            prod = np.ones(X.shape[0])
            for j, s in enumerate(pat):
                prod *= comps[s][:, j]
            total += m * prod
        return total / self.pattern_mass[mask].sum()

    def sample(self, which: str, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw ``size`` perturbations, shape ``(size, d)``."""
        mask = self._parity_mask(which)
        pats, mass = self.patterns[mask], self.pattern_mass[mask]
        choice = rng.choice(len(pats), size=size, p=mass / mass.sum())
        plus = sample_eta(self.base, "plus", rng, (size, self.d))
        minus = sample_eta(self.base, "minus", rng, (size, self.d))
        return np.where(pats[choice] == 1, minus, plus)


@lru_cache(maxsize=64)
def vp_decomposition(N: int, d: int = 1) -> ProductDecomposition:
    """Cached decomposition of the (tensor-product) de la Vallee Poussin kernel."""
    return ProductDecomposition(decompose(KernelTable.vallee_poussin(N)), d)


def circular_convolve(f, k: KernelTable, x):
    """Trapezoid value of ``(1/2) int f(y) k(x - y) dy`` with periodic wrapping.

    The integral is taken in the shifted variable ``u = x - y`` over the
    kernel grid, so only ``f`` is evaluated off-grid. ``f`` is a vectorized
    callable or a tabulated pair ``(grid, values)`` (linearly interpolated).
    """
    if not callable(f):
        fgrid, fvals = (np.asarray(a, dtype=float) for a in f)
        f = lambda y, g=fgrid, v=fvals: np.interp(wrap(y), g, v)  # noqa: E731
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    u, kv = k.grid, k.values
    wts = np.full(u.shape, u[1] - u[0])
    wts[0] *= 0.5
    wts[-1] *= 0.5
    wts *= 0.5 * kv
    out = np.empty(xs.shape[0])
    step = max(1, _CHUNK // u.shape[0])
    for s in range(0, xs.shape[0], step):
        block = xs[s : s + step]
        vals = np.asarray(f(wrap(block[:, None] - u[None, :])), dtype=float)
        out[s : s + step] = vals @ wts
    return out if np.ndim(x) else float(out[0])
