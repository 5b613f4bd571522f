"""PADUA: projection with active sampling for uniform approximation.

The learner fixes a quasi-optimal design over an epsilon-cover, then
queries the oracle not at the design points themselves but at
``x + eta_plus`` and ``x + eta_minus``, with ``eta`` drawn from the
positive and negative parts of the de la Vallee Poussin kernel. The
combination ``beta_plus * y_plus - beta_minus * y_minus`` is an unbiased
sample of ``(V_N * f)(x)``, which lies exactly in the span of the
features, so ordinary least squares sees a well-specified linear model.
"""

from __future__ import annotations

import base64
import json
import math
import struct
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Protocol, Union

import numpy as np
import scipy.linalg as sla

from padua.design import Design, allocation_counts, compute_design, epsilon_cover, loglog
from padua.errors import InsufficientBudget, OracleError, ValidationError
from padua.trig import (
    Alpha,
    ProductDecomposition,
    TrigPoly,
    even_degree,
    feature_matrix,
    trig_eval,
    vp_decomposition,
    wrap,
)

SIGMA_FLOOR = 1e-3
MIN_BUDGET = 32
_MAGIC = b"PADU"
_FORMAT_VERSION = 1
# magic, version, d, N, p, seed
_HEADER = struct.Struct("<4sHBIIq")


class Oracle(Protocol):
    """Noisy point queries ``x -> f(x) + noise`` on [-1, 1]^d.

    ``query`` receives an ``(m, d)`` array of points and returns ``m``
    samples; all randomness comes from the supplied generator.
    """

    def query(self, x: np.ndarray, rng: np.random.Generator) -> np.ndarray: ...


def n_features(N: int, d: int) -> int:
    return (2 * N + 1) ** d


def budget_ok(N: int, d: int, n: int) -> bool:
    """``16 p loglog p < n`` with ``p = (2N+1)^d``."""
    p = n_features(N, d)
    return 16 * p * loglog(p) < n


@dataclass(frozen=True)
class PaduaConfig:
    """Run parameters.

    ``N="auto"`` picks the degree from the budget with :func:`choose_N`;
    an explicit odd degree is rounded up to the next even one. ``delta``
    only enters reported bounds. ``epsilon`` overrides the cover radius
    ``1/(8 pi N)``, which is needed for d = 3 where the default cover
    exceeds the point cap.
    """

    n: int
    N: Union[int, str] = "auto"
    nu: float = 2.0
    d: int = 1
    sigma: float = 0.1
    norm_bound: float = 1.0
    delta: float = 0.05
    seed: int = 0
    epsilon: float | None = None

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValidationError(f"d must be 1, 2 or 3, got {self.d}")
        if int(self.n) != self.n or self.n < 1:
            raise ValidationError(f"n must be a positive integer, got {self.n}")
        if self.nu <= 0:
            raise ValidationError("nu must be positive")
        if self.sigma < 0:
            raise ValidationError("sigma must be nonnegative")
        if self.norm_bound <= 0:
            raise ValidationError("norm_bound must be positive")
        if not 0 < self.delta < 1:
            raise ValidationError("delta must lie in (0, 1)")
        if self.N != "auto":
            if int(self.N) != self.N or self.N < 1:
                raise ValidationError(f"N must be a positive integer or 'auto', got {self.N}")
            N = even_degree(self.N)
            object.__setattr__(self, "N", N)
            if not budget_ok(N, self.d, self.n):
                p = n_features(N, self.d)
                raise InsufficientBudget(
                    f"16 p loglog p = {16 * p * loglog(p):.1f} >= n = {self.n} for N={N}, d={self.d}"
                )

    def resolved_N(self) -> int:
        if self.N == "auto":
            return choose_N(self.n, self.nu, self.d, self.norm_bound, self.sigma)
        return int(self.N)


def choose_N(n: int, nu: float, d: int = 1, norm_bound: float = 1.0, sigma: float = 1.0) -> int:
    """Even degree ``(n B^2 / sigma^2)^(1/(2 nu + d))`` clamped to the budget.

    Starting from the rounded value, the degree is decreased by 2 until
    ``16 p loglog p < n`` holds; it never goes below 2. At the floor the
    budget must still leave one repetition per feature (``n >= 4p``).
    """
    if n < MIN_BUDGET:
        raise InsufficientBudget(f"n = {n} is below the minimum budget {MIN_BUDGET}")
    s = max(sigma, SIGMA_FLOOR)
    raw = (n * norm_bound**2 / s**2) ** (1.0 / (2 * nu + d))
    N = max(2, 2 * int(round(raw / 2)))
    while N > 2 and not budget_ok(N, d, n):
        N -= 2
    if not budget_ok(N, d, n) and n < 4 * n_features(N, d):
        raise InsufficientBudget(f"n = {n} cannot support N = 2 in dimension {d}")
    return N


def least_squares(X, y, lam: float | None = None) -> np.ndarray:
    """Ridge-stabilized normal equations ``(X^T X + lam I) theta = X^T y``.

    ``lam`` defaults to ``1e-10 * trace(X^T X) / p``.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValidationError("least_squares received non-finite input")
    p = X.shape[1]
    gram = X.T @ X
    if lam is None:
        lam = 1e-10 * np.trace(gram) / p
    rhs = X.T @ y
    A = gram + lam * np.eye(p)
    try:
        return sla.solve(A, rhs, assume_a="pos")
    except (sla.LinAlgError, ValueError):
        return np.linalg.lstsq(A, rhs, rcond=None)[0]


@lru_cache(maxsize=32)
def _cached_design(N: int, d: int, epsilon: float) -> tuple[Design, np.ndarray]:
    cover = epsilon_cover(d, epsilon)
    feats = feature_matrix(N, d, cover.points)
    return compute_design(feats, points=cover.points), cover.points


def build_design(N: int, d: int = 1, epsilon: float | None = None) -> Design:
    """Quasi-optimal design over the epsilon-cover for degree ``N``."""
    eps = epsilon if epsilon is not None else 1.0 / (8 * math.pi * N)
    return _cached_design(int(N), int(d), float(eps))[0]


def perturbed_targets(
    oracle: Oracle,
    x: np.ndarray,
    count: int,
    dec: ProductDecomposition,
    eta_rng: np.random.Generator,
    noise_rng: np.random.Generator,
):
    """``count`` unbiased samples of ``(V_N * f)(x)`` at a single design point.

    Returns the targets together with the plus and minus query points.
    """
    x = np.asarray(x, dtype=float).reshape(1, -1)
    eta_p = dec.sample("plus", eta_rng, count)
    eta_m = dec.sample("minus", eta_rng, count)
    q_plus = wrap(x + eta_p)
    q_minus = wrap(x + eta_m)
    y = _ask(oracle, np.vstack([q_plus, q_minus]), noise_rng)
    y = dec.beta_plus * y[:count] - dec.beta_minus * y[count:]
    return y, q_plus, q_minus


def _ask(oracle: Oracle, pts: np.ndarray, rng) -> np.ndarray:
    try:
        y = np.asarray(oracle.query(pts, rng), dtype=float).reshape(-1)
    except OracleError:
        raise
    except Exception as exc:  # oracle failure aborts the fit
        raise OracleError(f"oracle query failed: {exc}") from exc
    if y.shape[0] != pts.shape[0] or not np.all(np.isfinite(y)):
        raise OracleError("oracle returned malformed or non-finite samples")
    return y


@dataclass(frozen=True)
class FitResult:
    """Fitted model plus the bookkeeping needed to audit a run."""

    model: TrigPoly
    queries_used: int
    design_diag: dict
    condition_number: float
    seed: int
    n: int
    beta_plus: float = float("nan")
    beta_minus: float = float("nan")
    query_points: np.ndarray | None = field(default=None, repr=False, compare=False)
    warnings: tuple = ()

    @property
    def N(self) -> int:
        return self.model.N

    @property
    def d(self) -> int:
        return self.model.d

    def predict(self, x, alpha: Alpha = 0):
        return predict(self, x, alpha)

    def to_bytes(self) -> bytes:
        """Flat record: fixed header then ``theta`` as little-endian float64."""
        th = np.ascontiguousarray(self.model.theta, dtype="<f8")
        head = _HEADER.pack(_MAGIC, _FORMAT_VERSION, self.d, self.N, th.shape[0], self.seed)
        return head + th.tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "FitResult":
        magic, version, d, N, p, seed = _HEADER.unpack_from(blob)
        if magic != _MAGIC or version != _FORMAT_VERSION:
            raise ValidationError("not a PADUA model record")
        theta = np.frombuffer(blob, dtype="<f8", count=p, offset=_HEADER.size)
        return cls(TrigPoly(N, d, theta.copy()), 0, {}, float("nan"), seed, 0)

    def to_dict(self) -> dict:
        return {
            "schema_version": _FORMAT_VERSION,
            "d": self.d,
            "N": self.N,
            "theta": base64.b64encode(np.asarray(self.model.theta, "<f8").tobytes()).decode(),
            "seed": self.seed,
            "n": self.n,
            "queries_used": self.queries_used,
            "condition_number": self.condition_number,
            "beta_plus": self.beta_plus,
            "beta_minus": self.beta_minus,
            "design": self.design_diag,
            "warnings": list(self.warnings),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, rec: dict) -> "FitResult":
        theta = np.frombuffer(base64.b64decode(rec["theta"]), dtype="<f8").copy()
        return cls(
            TrigPoly(int(rec["N"]), int(rec["d"]), theta),
            int(rec.get("queries_used", 0)),
            dict(rec.get("design", {})),
            float(rec.get("condition_number", float("nan"))),
            int(rec.get("seed", 0)),
            int(rec.get("n", 0)),
            float(rec.get("beta_plus", float("nan"))),
            float(rec.get("beta_minus", float("nan"))),
            warnings=tuple(rec.get("warnings", ())),
        )

    @classmethod
    def from_json(cls, text: str) -> "FitResult":
        return cls.from_dict(json.loads(text))


def fit(oracle: Oracle, config: PaduaConfig) -> FitResult:
    """Run PADUA against ``oracle`` with the budget and seed in ``config``."""
    N = config.resolved_N()
    d = config.d
    p = n_features(N, d)
    eps = config.epsilon if config.epsilon is not None else 1.0 / (8 * math.pi * N)
    design = build_design(N, d, eps)
    dec = vp_decomposition(N, d)

    n_tot = config.n // 4
    counts = allocation_counts(design.weights, n_tot)
    # ceil rounding adds up to one query pair per support point; shrink n_tot
    # until the total stays within budget
    while 2 * counts.sum() > config.n and n_tot > 0:
        n_tot -= 1
        counts = allocation_counts(design.weights, n_tot)
    if counts.sum() < p or 2 * counts.sum() > config.n:
        raise InsufficientBudget(
            f"budget n={config.n} cannot cover a support of {design.support_size} points"
        )

    eta_ss, noise_ss = np.random.SeedSequence(config.seed).spawn(2)
    eta_rng = np.random.default_rng(eta_ss)
    noise_rng = np.random.default_rng(noise_ss)

    # all query locations are drawn before the oracle is consulted
    rows = np.repeat(np.arange(design.support_size), counts)
    m = rows.shape[0]
    eta_p = dec.sample("plus", eta_rng, m)
    eta_m = dec.sample("minus", eta_rng, m)
    xs = design.support[rows]
    q_plus = wrap(xs + eta_p)
    q_minus = wrap(xs + eta_m)
    queries = np.vstack([q_plus, q_minus])
    y = _ask(oracle, queries, noise_rng)
    targets = dec.beta_plus * y[:m] - dec.beta_minus * y[m:]

    X = feature_matrix(N, d, xs)
    theta = least_squares(X, targets)
    gram = X.T @ X
    cond = float(np.linalg.cond(gram))

    warnings = []
    if not design.certified:
        warnings.append("design not certified: max leverage exceeds 2p")
    if not design.support_bound_met:
        warnings.append("design support exceeds 4p loglog p")
    if config.N == "auto" and not budget_ok(N, d, config.n):
        warnings.append("budget below 16 p loglog p at the minimum degree")
    diag = design.diagnostics()
    diag["n_tot"] = int(n_tot)
    diag["epsilon"] = eps
    return FitResult(
        model=TrigPoly(N, d, theta),
        queries_used=int(queries.shape[0]),
        design_diag=diag,
        condition_number=cond,
        seed=config.seed,
        n=config.n,
        beta_plus=dec.beta_plus,
        beta_minus=dec.beta_minus,
        query_points=queries,
        warnings=tuple(warnings),
    )


def predict(r: FitResult, x, alpha: Alpha = 0):
    """Fitted function (or a derivative) at ``x``; cost ``O((2N+1)^d)`` per point."""
    return trig_eval(r.model, x, alpha)


def model_size(r: FitResult) -> int:
    """Bytes in the serialized coefficient record."""
    return len(r.to_bytes())
