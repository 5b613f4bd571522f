"""Epsilon-covers and quasi-optimal (G-optimal) least-squares designs.

The design is found by Fedorov-Wynn (Frank-Wolfe) ascent on ``log det``
of the information matrix. By the Kiefer-Wolfowitz equivalence the
maximum leverage of the D-optimal design equals the feature dimension
``p``; iteration stops as soon as every candidate has leverage at most
``2p``, which is what the least-squares error bound needs.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from padua.errors import CoverTooLarge, DegenerateFeatures, ValidationError

MAX_COVER_POINTS = 10**7
RIDGE = 1e-10
_REFRESH_EVERY = 100


def loglog(p: float) -> float:
    """``log(log(max(p, 3)))``, the support-size factor."""
    return math.log(math.log(max(p, 3)))


def support_bound(p: int) -> float:
    """Target support size ``4 p loglog p``."""
    return 4 * p * loglog(p)


@dataclass(frozen=True)
class CoverGrid:
    d: int
    epsilon: float
    points: np.ndarray
    spacing: float

    def __len__(self) -> int:
        return self.points.shape[0]


def epsilon_cover(d: int, epsilon: float, max_points: int = MAX_COVER_POINTS) -> CoverGrid:
    """Uniform grid on [-1, 1]^d whose nearest point is within L1 distance ``epsilon``.

    The per-axis spacing is ``2 / ceil(2d / epsilon)`` with both endpoints
    included, so the L1 distance to the nearest node is at most
    ``d * spacing / 2 <= epsilon``.
    """
    if d not in (1, 2, 3):
        raise ValidationError(f"dimension must be 1, 2 or 3, got {d}")
    if not 0 < epsilon <= 2:
        raise ValidationError(f"epsilon must lie in (0, 2], got {epsilon}")
    cells = math.ceil(2 * d / epsilon - 1e-9)
    per_axis = cells + 1
    if per_axis**d > max_points:
        raise CoverTooLarge(
            f"cover of {per_axis}^{d} points exceeds {max_points}; reduce N or d"
        )
    axis = np.linspace(-1.0, 1.0, per_axis)
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    points = np.stack(mesh, axis=-1).reshape(-1, d)
    return CoverGrid(d, float(epsilon), points, 2.0 / cells)


@dataclass(frozen=True)
class Design:
    """Discrete design over candidate points with its leverage certificate.

    ``support_index`` refers to rows of the candidate feature matrix passed
    to :func:`compute_design`; ``support`` holds the matching points when
    they were supplied.
    """

    support_index: np.ndarray
    weights: np.ndarray
    max_leverage: float
    info_matrix: np.ndarray
    p: int
    certified: bool
    iterations: int
    support: np.ndarray | None = None
    logdet_history: tuple = ()
    pruned: bool = False
    support_bound_met: bool = False
    notes: tuple = field(default=())

    @property
    def support_size(self) -> int:
        return int(self.weights.shape[0])

    def diagnostics(self) -> dict:
        return {
            "p": self.p,
            "support_size": self.support_size,
            "support_bound": support_bound(self.p),
            "support_bound_met": self.support_bound_met,
            "max_leverage": self.max_leverage,
            "certified": self.certified,
            "iterations": self.iterations,
            "pruned": self.pruned,
            "notes": list(self.notes),
        }

    def to_csv(self, path, n_tot: int | None = None) -> None:
        pts = self.support if self.support is not None else self.support_index[:, None]
        counts = allocation_counts(self.weights, n_tot) if n_tot else None
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            header = [f"x{j + 1}" for j in range(pts.shape[1])] + ["weight"]
            w.writerow(header + (["count"] if counts is not None else []))
            for i in range(self.support_size):
                row = [repr(float(v)) for v in pts[i]] + [repr(float(self.weights[i]))]
                if counts is not None:
                    row.append(int(counts[i]))
                w.writerow(row)


def leverages(features: np.ndarray, info_matrix: np.ndarray) -> np.ndarray:
    """``phi(x)^T Sigma^{-1} phi(x)`` for every row, computed from scratch."""
    p = info_matrix.shape[0]
    chol = sla.cho_factor(info_matrix + RIDGE * np.eye(p))
    sol = sla.cho_solve(chol, features.T)
    return np.einsum("ij,ji->i", features, sol)


def information_matrix(features: np.ndarray, weights: np.ndarray) -> np.ndarray:
    return (features * weights[:, None]).T @ features


def _dedup(features: np.ndarray) -> np.ndarray:
    """Indices of the first occurrence of each distinct feature row."""
    _, first = np.unique(np.round(features, 12), axis=0, return_index=True)
    return np.sort(first)


def _initial_subset(G: np.ndarray) -> np.ndarray:
    """Greedy well-conditioned subset of up to ``2p`` rows by two rounds of pivoted QR."""
    m, p = G.shape
    if m <= 2 * p:
        return np.arange(m)
    _, _, piv = sla.qr(G.T, mode="economic", pivoting=True)
    first = np.sort(piv[:p])
    rest = np.setdiff1d(np.arange(m), first)
    _, _, piv2 = sla.qr(G[rest].T, mode="economic", pivoting=True)
    return np.sort(np.concatenate([first, rest[piv2[:p]]]))


def compute_design(
    features,
    tolerance: float = 1e-9,
    max_iters: int = 10_000,
    points=None,
    prune: bool = True,
) -> Design:
    """Fedorov-Wynn quasi-optimal design over the rows of ``features``.

    Parameters
    ----------
    features : array_like, shape (m, p)
        Candidate feature vectors.
    tolerance : float
        Relative slack allowed when checking ``max leverage <= 2p``.
    max_iters : int
        Iteration cap; a design that misses the certificate is returned
        with ``certified=False``.
    points : array_like, optional
        Candidate points matching the rows of ``features``.
    prune : bool
        Drop small weights afterwards (rolled back if the certificate breaks).

    Returns
    -------
    Design

    Raises
    ------
    DegenerateFeatures
        If the candidates do not span ``R^p``.
    """
    F = np.asarray(features, dtype=float)
    if F.ndim != 2:
        raise ValidationError("features must be a 2-d array")
    p = F.shape[1]
    keep = _dedup(F)
    G = F[keep]
    if G.shape[0] < p:
        raise DegenerateFeatures(f"{G.shape[0]} distinct candidates cannot span p={p}")
    init = _initial_subset(G)
    sv = np.linalg.svd(G[init], compute_uv=False)
    if sv[-1] <= 1e-8 * sv[0]:
        sv = np.linalg.svd(G, compute_uv=False)
        if sv[-1] <= 1e-8 * sv[0]:
            raise DegenerateFeatures("degenerate feature set")

    level = 2.0 * p
    w = np.zeros(G.shape[0])
    w[init] = 1.0 / init.shape[0]

    def refresh(w):
        sigma = information_matrix(G[w > 0], w[w > 0]) + RIDGE * np.eye(p)
        sinv = sla.cho_solve(sla.cho_factor(sigma), np.eye(p))
        sinv = 0.5 * (sinv + sinv.T)
        lev = np.einsum("ij,jk,ik->i", G, sinv, G, optimize=True)
        return sigma, sinv, lev

    sigma, sinv, lev = refresh(w)
    logdet = float(np.linalg.slogdet(sigma)[1])
    history = [logdet]
    it = 0
    while it < max_iters:
        k = int(np.argmax(lev))
        L = float(lev[k])
        if L <= level:
            break
        gamma = (L / p - 1.0) / (L - 1.0)
        u = sinv @ G[k]
        c = gamma / (1.0 - gamma)
        denom = 1.0 + c * L
        gu = G @ u
        lev = (lev - c * gu**2 / denom) / (1.0 - gamma)
        sinv = (sinv - c * np.outer(u, u) / denom) / (1.0 - gamma)
        w *= 1.0 - gamma
        w[k] += gamma
        logdet += p * math.log(1.0 - gamma) + math.log(denom)
        history.append(logdet)
        it += 1
        if it % _REFRESH_EVERY == 0:
            sigma, sinv, lev = refresh(w)

    w = w / w.sum()
    idx = np.flatnonzero(w > 0)
    weights = w[idx]

    def certify(idx, weights):
        info = information_matrix(G[idx], weights)
        lv = leverages(G, info)
        return info, float(lv.max())

    info, max_lev = certify(idx, weights)
    certified = max_lev <= level * (1 + tolerance)
    notes = []
    if not certified:
        notes.append(f"certificate not met after {it} iterations (max leverage {max_lev:.6g})")

    pruned = False
    bound = support_bound(p)
    if prune:
        thr = 1.0 / (16.0 * p * loglog(p))
        small = weights < thr
        if small.any() and (~small).sum() >= p:
            w2 = weights[~small] / weights[~small].sum()
            info2, lev2 = certify(idx[~small], w2)
            if lev2 <= level * (1 + tolerance) or not certified:
                idx, weights, info, max_lev, pruned = idx[~small], w2, info2, lev2, True
            else:
                notes.append("threshold pruning broke the certificate; rolled back")
        if certified and idx.shape[0] > bound:
            idx, weights, info, max_lev, dropped = _reduce_support(
                G, idx, weights, info, max_lev, level * (1 + tolerance), bound
            )
            pruned = pruned or dropped > 0
        certified = max_lev <= level * (1 + tolerance)

    met = idx.shape[0] <= bound
    if not met:
        notes.append(f"support {idx.shape[0]} exceeds 4p loglog p = {bound:.1f}")
    order = np.argsort(keep[idx], kind="stable")
    idx, weights = idx[order], weights[order]
    support_index = keep[idx]
    support = None if points is None else np.asarray(points, dtype=float)[support_index]
    if support is not None and support.ndim == 1:
        support = support[:, None]
    return Design(
        support_index=support_index,
        weights=weights,
        max_leverage=max_lev,
        info_matrix=info,
        p=p,
        certified=bool(certified),
        iterations=it,
        support=support,
        logdet_history=tuple(history),
        pruned=pruned,
        support_bound_met=bool(met),
        notes=tuple(notes),
    )


def _reduce_support(G, idx, weights, info, max_lev, level, bound, max_tries=64):
    """Drop smallest-weight points one at a time while the certificate survives."""
    dropped = 0
    tries = 0
    while idx.shape[0] > bound and idx.shape[0] > G.shape[1] and tries < max_tries:
        tries += 1
        j = int(np.argmin(weights))
        keep = np.ones(idx.shape[0], dtype=bool)
        keep[j] = False
        w2 = weights[keep] / weights[keep].sum()
        info2 = information_matrix(G[idx[keep]], w2)
        lev2 = float(leverages(G, info2).max())
        if lev2 > level:
            break
        idx, weights, info, max_lev = idx[keep], w2, info2, lev2
        dropped += 1
    return idx, weights, info, max_lev, dropped


def allocation_counts(weights, n_tot: int) -> np.ndarray:
    """``ceil(n_tot * w)`` per support point."""
    if n_tot < 0:
        raise ValidationError("n_tot must be nonnegative")
    w = np.asarray(weights, dtype=float)
    # guard against representation error in exact multiples, e.g. 10 * 0.6
    return np.ceil(n_tot * w - 1e-9).astype(int)


def round_allocation(design: Design, n_tot: int) -> list:
    """List of ``(point, count)`` with ``count = ceil(n_tot * rho(x))``."""
    if n_tot < 1:
        raise ValidationError("n_tot must be >= 1")
    counts = allocation_counts(design.weights, n_tot)
    pts = design.support if design.support is not None else design.support_index
    return [(pts[i], int(counts[i])) for i in range(design.support_size)]
