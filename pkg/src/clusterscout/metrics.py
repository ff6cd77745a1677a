"""Distance metrics for clustering: pairwise values and full matrices."""

from __future__ import annotations

import numpy as np

from .errors import DegenerateVector, DimensionMismatch

METRICS = ("euclidean", "cityblock", "cosine", "chebyshev", "correlation")


def _check_pair(a: np.ndarray, b: np.ndarray, metric: str):
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionMismatch(f"vectors must share one dimension, got {a.shape} vs {b.shape}")
    if metric in ("cosine", "correlation"):
        if not np.any(a) or not np.any(b):
            raise DegenerateVector(f"{metric} distance undefined for zero vectors")
    if metric == "correlation":
        if np.ptp(a) == 0 or np.ptp(b) == 0:
            raise DegenerateVector("correlation distance undefined for constant vectors")


def distance(a, b, metric: str = "euclidean") -> float:
    """Distance between two vectors; symmetric and >= 0.

    Cosine and correlation return 0 for positively colinear inputs.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}")
    _check_pair(a, b, metric)
    if metric == "euclidean":
        return float(np.sqrt(np.sum((a - b) ** 2)))
    if metric == "cityblock":
        return float(np.sum(np.abs(a - b)))
    if metric == "chebyshev":
        return float(np.max(np.abs(a - b)))
    if metric == "correlation":
        a = a - a.mean()
        b = b - b.mean()
    sim = float(np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b)))
    return max(0.0, 1.0 - sim)


def pairwise_matrix(x: np.ndarray, metric: str = "euclidean") -> np.ndarray:
    """Dense n x n distance matrix under the chosen metric."""
    x = np.asarray(x, dtype=np.float64)
    if metric == "euclidean":
        sq = np.sum(x * x, axis=1)
        d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
        np.maximum(d2, 0.0, out=d2)
        d = np.sqrt(d2)
    elif metric == "cityblock":
        d = np.abs(x[:, None, :] - x[None, :, :]).sum(axis=2)
    elif metric == "chebyshev":
        d = np.abs(x[:, None, :] - x[None, :, :]).max(axis=2)
    elif metric in ("cosine", "correlation"):
        # angle metrics need >= 2 dimensions: every 1-D vector is colinear
        if x.shape[1] < 2:
            raise DegenerateVector(f"{metric} is degenerate on a single feature")
        y = x - x.mean(axis=1, keepdims=True) if metric == "correlation" else x
        norms = np.linalg.norm(y, axis=1)
        if np.any(norms == 0):
            raise DegenerateVector(
                f"{metric} distance undefined for zero or constant rows")
        unit = y / norms[:, None]
        sim = unit @ unit.T
        d = 1.0 - np.clip(sim, -1.0, 1.0)
        np.maximum(d, 0.0, out=d)
    else:
        raise ValueError(f"unknown metric {metric!r}")
    np.fill_diagonal(d, 0.0)
    return d


def point_to_points(p: np.ndarray, pts: np.ndarray, metric: str = "euclidean") -> np.ndarray:
    """Distances from one vector to each row of a matrix."""
    p = np.asarray(p, dtype=np.float64)
    pts = np.asarray(pts, dtype=np.float64)
    if metric == "euclidean":
        return np.sqrt(np.sum((pts - p) ** 2, axis=1))
    if metric == "cityblock":
        return np.abs(pts - p).sum(axis=1)
    if metric == "chebyshev":
        return np.abs(pts - p).max(axis=1)
    if metric in ("cosine", "correlation"):
        if metric == "correlation":
            p = p - p.mean()
            pts = pts - pts.mean(axis=1, keepdims=True)
        pn = np.linalg.norm(p)
        ns = np.linalg.norm(pts, axis=1)
        safe = np.where(ns > 0, ns, 1.0)
        sim = (pts @ p) / (safe * (pn if pn > 0 else 1.0))
        d = 1.0 - np.clip(sim, -1.0, 1.0)
        d[ns == 0] = 1.0
        return d if pn > 0 else np.ones(len(pts))
    raise ValueError(f"unknown metric {metric!r}")
