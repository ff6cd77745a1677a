"""2D embeddings for the clustering scatterplot.

Projection is display-only: it never feeds clustering. Methods are exact
(no tree approximations); sampling keeps inputs at desk scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, PerplexityTooLarge, TooFewRows
from .metrics import pairwise_matrix

PROJECTION_METHODS = ("pca", "cmds", "tsne")

TSNE_DEFAULT_PERPLEXITY = 30.0
TSNE_DEFAULT_ITERATIONS = 500
TSNE_MIN_ITERATIONS = 50
TSNE_EXAGGERATION = 4.0


@dataclass(frozen=True)
class ProjectionParams:
    method: str = "pca"
    metric: str = "euclidean"  # cmds only
    perplexity: float = TSNE_DEFAULT_PERPLEXITY
    iterations: int = TSNE_DEFAULT_ITERATIONS
    seed: int = 0

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class Embedding:
    coords: np.ndarray  # n x 2
    params: ProjectionParams
    explained_variance: tuple[float, float] | None = None  # pca only
    kl_history: list[float] = field(default_factory=list)  # tsne only


def _pca_axes(x: np.ndarray, n_axes: int = 2):
    """Principal axes with a deterministic sign convention: the loading of
    largest magnitude on each axis is positive."""
    centered = x - x.mean(axis=0)
    cov = np.cov(centered, rowvar=False)
    cov = np.atleast_2d(cov)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1]
    evals = np.maximum(evals[order], 0.0)
    evecs = evecs[:, order]
    for j in range(evecs.shape[1]):
        lead = np.argmax(np.abs(evecs[:, j]))
        if evecs[lead, j] < 0:
            evecs[:, j] = -evecs[:, j]
    return centered, evals, evecs[:, :n_axes]


def _project_pca(x: np.ndarray, params: ProjectionParams) -> Embedding:
    centered, evals, axes = _pca_axes(x)
    coords = centered @ axes
    if coords.shape[1] < 2:
        coords = np.column_stack([coords, np.zeros(len(coords))])
    total = evals.sum()
    ev = (float(evals[0] / total), float(evals[1] / total)) if total > 0 and len(evals) > 1 \
        else (1.0, 0.0)
    return Embedding(coords=coords, params=params, explained_variance=ev)


def _project_cmds(x: np.ndarray, params: ProjectionParams) -> Embedding:
    d = pairwise_matrix(x, params.metric)
    n = len(d)
    j = np.eye(n) - np.ones((n, n)) / n
    b = -0.5 * j @ (d ** 2) @ j  # Torgerson double centering
    evals, evecs = np.linalg.eigh(b)
    order = np.argsort(evals)[::-1]
    evals = evals[order][:2]
    evecs = evecs[:, order][:, :2]
    coords = evecs * np.sqrt(np.maximum(evals, 0.0))
    for col in range(2):
        lead = np.argmax(np.abs(coords[:, col])) if np.any(coords[:, col]) else 0
        if coords[lead, col] < 0:
            coords[:, col] = -coords[:, col]
    return Embedding(coords=coords, params=params)


def _perplexity_probabilities(d2: np.ndarray, perplexity: float) -> np.ndarray:
    """Row-conditional gaussian affinities with per-point precision found by
    bisection so each row's entropy matches log(perplexity)."""
    n = len(d2)
    target = np.log(perplexity)
    p = np.zeros((n, n))
    for i in range(n):
        row = np.delete(d2[i], i)
        beta, beta_lo, beta_hi = 1.0, 0.0, np.inf
        for _ in range(64):
            w = np.exp(-row * beta)
            total = w.sum()
            if total <= 0:
                h = 0.0
                probs = np.zeros_like(w)
            else:
                probs = w / total
                h = float(-np.sum(probs[probs > 0] * np.log(probs[probs > 0])))
            if abs(h - target) < 1e-7:
                break
            if h > target:
                beta_lo = beta
                beta = beta * 2 if beta_hi == np.inf else (beta + beta_hi) / 2
            else:
                beta_hi = beta
                beta = (beta + beta_lo) / 2
        p[i, np.arange(n) != i] = probs
    return p


def _project_tsne(x: np.ndarray, params: ProjectionParams) -> Embedding:
    n = len(x)
    if params.perplexity >= (n - 1) / 3:
        raise PerplexityTooLarge(
            f"perplexity {params.perplexity} must be < (n-1)/3 = {(n - 1) / 3:.2f}")
    iters = max(params.iterations, TSNE_MIN_ITERATIONS)
    sq = np.sum(x * x, axis=1)
    d2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * x @ x.T, 0.0)
    cond = _perplexity_probabilities(d2, params.perplexity)
    p = (cond + cond.T) / (2.0 * n)
    p = np.maximum(p, 1e-12)

    # deterministic PCA init scaled down to the usual 1e-4 spread
    y = _project_pca(x, params).coords.copy()
    spread = y[:, 0].std()
    y = y / spread * 1e-4 if spread > 0 else \
        np.random.Generator(np.random.PCG64(params.seed)).normal(0, 1e-4, (n, 2))

    exag_until = min(100, iters // 2)
    lr = max(n / TSNE_EXAGGERATION / 4.0, 50.0)
    update = np.zeros_like(y)
    gains = np.ones_like(y)
    kl_history = []
    for it in range(iters):
        peff = p * TSNE_EXAGGERATION if it < exag_until else p
        ysq = np.sum(y * y, axis=1)
        yd2 = np.maximum(ysq[:, None] + ysq[None, :] - 2.0 * y @ y.T, 0.0)
        w = 1.0 / (1.0 + yd2)
        np.fill_diagonal(w, 0.0)
        q = np.maximum(w / max(w.sum(), 1e-12), 1e-12)
        pq = (peff - q) * w
        grad = 4.0 * (pq.sum(axis=1)[:, None] * y - pq @ y)
        momentum = 0.5 if it < exag_until else 0.8
        inc = np.sign(grad) != np.sign(update)
        gains = np.where(inc, gains + 0.2, gains * 0.8)
        np.maximum(gains, 0.01, out=gains)
        update = momentum * update - lr * gains * grad
        y = y + update
        y = y - y.mean(axis=0)
        kl_history.append(float(np.sum(p * np.log(p / q))))
    return Embedding(coords=y, params=params, kl_history=kl_history)


def project(rows: np.ndarray, params: ProjectionParams) -> Embedding:
    """Embed a rows x features matrix into 2D with the chosen method."""
    x = np.asarray(rows, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 3:
        raise TooFewRows("projection needs at least 3 rows")
    if params.method == "pca":
        return _project_pca(x, params)
    if params.method == "cmds":
        return _project_cmds(x, params)
    if params.method == "tsne":
        return _project_tsne(x, params)
    raise ValueError(f"unknown projection method {params.method!r}")


def _coords_of(e) -> np.ndarray:
    return np.asarray(e.coords if isinstance(e, Embedding) else e, dtype=np.float64)


def procrustes_residual(a, b) -> float:
    """Minimal RMS discrepancy between two point sets after optimal
    translation, uniform scaling, rotation and reflection."""
    xa, xb = _coords_of(a), _coords_of(b)
    if xa.shape != xb.shape:
        raise DimensionMismatch(f"shape mismatch {xa.shape} vs {xb.shape}")
    xa = xa - xa.mean(axis=0)
    xb = xb - xb.mean(axis=0)
    na, nb = np.linalg.norm(xa), np.linalg.norm(xb)
    if na == 0 or nb == 0:
        return 0.0 if na == nb else float(np.sqrt(np.mean(np.sum((xa - xb) ** 2, axis=1))))
    xa /= na
    xb /= nb
    u, s, vt = np.linalg.svd(xa.T @ xb)
    rotation = u @ vt
    aligned = xa @ rotation * s.sum()
    return float(np.sqrt(np.mean(np.sum((aligned - xb) ** 2, axis=1))))
