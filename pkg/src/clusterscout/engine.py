"""Clustering algorithms producing labeled instances from parameter sets.

All runs are deterministic for a fixed (dataset, params): restart seeds
derive from params.seed and label ids follow a canonical largest-first
ordering so every downstream view agrees.
"""

from __future__ import annotations

import hashlib
import json
from collections import deque
from dataclasses import dataclass, replace

import numpy as np

from .dataset import Dataset, Selection, sample_rows
from .errors import InvalidCombination, TooFewRows
from .metrics import pairwise_matrix

ALGORITHMS = ("kmeans", "agglomerative", "dbscan")
METRICS = ("euclidean", "cityblock", "cosine", "chebyshev", "correlation")
LINKAGES = ("single", "complete", "average", "ward")

KMEANS_RESTARTS = 10
KMEANS_MAX_ITER = 300
KMEANS_TOL = 1e-6

NOISE = -1

# incremented on every actual clustering execution; caching layers rely on
# this to prove a hit did not recompute
RUN_STATS = {"runs": 0}


@dataclass(frozen=True)
class ClusteringParams:
    feature_subset: frozenset[int]
    algorithm: str = "kmeans"
    metric: str = "euclidean"
    linkage: str = "complete"
    k: int = 3
    eps: float = 0.5
    min_pts: int = 5
    sample_rate: float = 1.0
    seed: int = 0
    standardize: bool = True

    def validate(self):
        if self.algorithm not in ALGORITHMS:
            raise InvalidCombination(f"unknown algorithm {self.algorithm!r}")
        if self.metric not in METRICS:
            raise InvalidCombination(f"unknown metric {self.metric!r}")
        if not self.feature_subset:
            raise InvalidCombination("feature_subset must be non-empty")
        if self.algorithm == "kmeans" and self.metric != "euclidean":
            raise InvalidCombination("kmeans requires the euclidean metric")
        if self.algorithm == "agglomerative":
            if self.linkage not in LINKAGES:
                raise InvalidCombination(f"unknown linkage {self.linkage!r}")
            if self.linkage == "ward" and self.metric != "euclidean":
                raise InvalidCombination("ward linkage requires the euclidean metric")
        if self.algorithm in ("kmeans", "agglomerative") and self.k < 1:
            raise InvalidCombination("k must be >= 1")
        if self.algorithm == "dbscan":
            if self.eps <= 0:
                raise InvalidCombination("eps must be > 0")
            if self.min_pts < 1:
                raise InvalidCombination("min_pts must be >= 1")

    def canonical_dict(self) -> dict:
        """Semantic form: fields irrelevant to the algorithm are normalized
        out so equivalent parameter sets share one cache key."""
        d = {
            "algorithm": self.algorithm,
            "features": sorted(self.feature_subset),
            "sample_rate": self.sample_rate,
            "seed": self.seed,
            "standardize": self.standardize,
        }
        if self.algorithm == "kmeans":
            d.update(metric="euclidean", k=self.k)
        elif self.algorithm == "agglomerative":
            d.update(metric=self.metric, linkage=self.linkage, k=self.k)
        else:
            d.update(metric=self.metric, eps=self.eps, min_pts=self.min_pts)
        return d

    def to_dict(self) -> dict:
        d = self.__dict__.copy()
        d["feature_subset"] = sorted(self.feature_subset)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ClusteringParams":
        d = dict(d)
        d["feature_subset"] = frozenset(d["feature_subset"])
        return cls(**d)


def admissible_metrics(algorithm: str, linkage: str = "complete") -> tuple[str, ...]:
    if algorithm == "kmeans" or (algorithm == "agglomerative" and linkage == "ward"):
        return ("euclidean",)
    return METRICS


def admissible_linkages(metric: str) -> tuple[str, ...]:
    return LINKAGES if metric == "euclidean" else tuple(l for l in LINKAGES if l != "ward")


@dataclass(frozen=True)
class Labeling:
    labels: tuple[int, ...]
    k_effective: int

    @property
    def noise_count(self) -> int:
        return sum(1 for l in self.labels if l == NOISE)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.labels, dtype=int)


@dataclass
class ClusteringInstance:
    params: ClusteringParams
    labeling: Labeling
    row_indices: tuple[int, ...]  # dataset rows the labels refer to
    centroids: np.ndarray  # k_effective x |features|, in clustering space
    inertia: float
    cache_key: str
    dataset_fingerprint: str
    score: float = 0.0

    @property
    def cluster_sizes(self) -> list[int]:
        arr = self.labeling.as_array()
        return [int((arr == j).sum()) for j in range(self.labeling.k_effective)]


def canonicalize_labels(raw: np.ndarray) -> Labeling:
    """Renumber non-noise clusters 0..k-1 by descending size, ties broken
    by the smallest member row index. Noise keeps the -1 id."""
    raw = np.asarray(raw, dtype=int)
    ids = [int(c) for c in np.unique(raw) if c != NOISE]
    order = sorted(ids, key=lambda c: (-int((raw == c).sum()),
                                       int(np.flatnonzero(raw == c)[0])))
    remap = {old: new for new, old in enumerate(order)}
    remap[NOISE] = NOISE
    labels = tuple(remap[int(c)] for c in raw)
    return Labeling(labels=labels, k_effective=len(order))


def feature_matrix(ds: Dataset, params: ClusteringParams) -> tuple[np.ndarray, tuple[int, ...]]:
    """Rows x selected-features matrix in clustering space.

    Applies the params' row sampling and, when standardize is set,
    z-scores each feature over the sampled rows (zero-variance features
    collapse to 0).
    """
    sel = sample_rows(ds, params.sample_rate, params.seed)
    feats = sorted(params.feature_subset)
    x = ds.values[np.asarray(sel.row_indices, dtype=int)][:, feats].astype(np.float64)
    if params.standardize:
        mean = x.mean(axis=0)
        std = x.std(axis=0)
        std[std == 0] = 1.0
        x = (x - mean) / std
    return x, sel.row_indices


# --- k-means ---------------------------------------------------------------

def _sq_dist_to_centers(x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d2 = (np.sum(x * x, axis=1)[:, None] + np.sum(centers * centers, axis=1)[None, :]
          - 2.0 * x @ centers.T)
    np.maximum(d2, 0.0, out=d2)
    return d2


def _kmeans_pp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(x)
    centers = np.empty((k, x.shape[1]))
    centers[0] = x[rng.integers(n)]
    d2 = np.sum((x - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = rng.choice(n, p=d2 / total)
        else:
            idx = rng.integers(n)
        centers[j] = x[idx]
        d2 = np.minimum(d2, np.sum((x - centers[j]) ** 2, axis=1))
    return centers


def _fix_empty_clusters(x, labels, centers, d2):
    n = len(x)
    for j in range(len(centers)):
        if np.any(labels == j):
            continue
        # re-seed on the farthest point whose cluster can spare a member
        counts = np.bincount(labels, minlength=len(centers))
        dist_own = np.where(counts[labels] > 1, d2[np.arange(n), labels], -np.inf)
        far = int(np.argmax(dist_own))
        centers[j] = x[far]
        labels[far] = j
        d2[:, j] = np.sum((x - centers[j]) ** 2, axis=1)
    return labels, centers, d2


def _lloyd(x: np.ndarray, k: int, rng: np.random.Generator):
    centers = _kmeans_pp_init(x, k, rng)
    prev_labels = None
    prev_inertia = np.inf
    labels = np.zeros(len(x), dtype=int)
    for _ in range(KMEANS_MAX_ITER):
        d2 = _sq_dist_to_centers(x, centers)
        labels = np.argmin(d2, axis=1)
        labels, centers, d2 = _fix_empty_clusters(x, labels, centers, d2)
        new_centers = np.vstack([x[labels == j].mean(axis=0) for j in range(k)])
        inertia = float(np.sum((x - new_centers[labels]) ** 2))
        centers = new_centers
        if prev_labels is not None and np.array_equal(labels, prev_labels):
            break
        if prev_inertia - inertia <= KMEANS_TOL * max(prev_inertia, 1e-12):
            break
        prev_labels = labels.copy()
        prev_inertia = inertia
    return labels, centers, inertia


def _kmeans(x: np.ndarray, k: int, seed: int) -> np.ndarray:
    best_labels, best_inertia = None, np.inf
    for child in np.random.SeedSequence(seed).spawn(KMEANS_RESTARTS):
        rng = np.random.Generator(np.random.PCG64(child))
        labels, _, inertia = _lloyd(x, k, rng)
        if inertia < best_inertia:
            best_labels, best_inertia = labels, inertia
    return best_labels


# --- agglomerative (Lance-Williams) -----------------------------------------

def _agglomerative(x: np.ndarray, k: int, metric: str, linkage: str) -> np.ndarray:
    n = len(x)
    d = pairwise_matrix(x, metric)
    if linkage == "ward":
        d = d ** 2  # the recurrence operates on squared euclidean distances
    np.fill_diagonal(d, np.inf)
    size = np.ones(n)
    dead = np.zeros(n, dtype=bool)
    members: list[list[int]] = [[i] for i in range(n)]

    for _ in range(n - k):
        flat = int(np.argmin(d))  # row-major first minimum = deterministic tie-break
        i, j = divmod(flat, n)
        if i > j:
            i, j = j, i
        dij = d[i, j]
        alive = ~dead
        alive[i] = alive[j] = False
        m = np.flatnonzero(alive)
        if linkage == "single":
            merged = np.minimum(d[i, m], d[j, m])
        elif linkage == "complete":
            merged = np.maximum(d[i, m], d[j, m])
        elif linkage == "average":
            merged = (size[i] * d[i, m] + size[j] * d[j, m]) / (size[i] + size[j])
        else:  # ward
            tot = size[i] + size[j] + size[m]
            merged = ((size[i] + size[m]) * d[i, m] + (size[j] + size[m]) * d[j, m]
                      - size[m] * dij) / tot
        d[i, m] = merged
        d[m, i] = merged
        d[j, :] = np.inf
        d[:, j] = np.inf
        size[i] += size[j]
        members[i].extend(members[j])
        dead[j] = True

    labels = np.empty(n, dtype=int)
    for new_id, root in enumerate(np.flatnonzero(~dead)):
        labels[members[root]] = new_id
    return labels


# --- dbscan ------------------------------------------------------------------

def _dbscan(x: np.ndarray, eps: float, min_pts: int, metric: str) -> np.ndarray:
    n = len(x)
    d = pairwise_matrix(x, metric)
    neighbors = [np.flatnonzero(d[i] <= eps) for i in range(n)]  # includes self
    core = np.array([len(nb) >= min_pts for nb in neighbors])
    labels = np.full(n, NOISE, dtype=int)
    cluster = 0
    for i in range(n):
        if labels[i] != NOISE or not core[i]:
            continue
        labels[i] = cluster
        queue = deque([i])
        while queue:
            p = queue.popleft()
            for q in neighbors[p]:
                if labels[q] == NOISE:
                    labels[q] = cluster
                    if core[q]:
                        queue.append(q)
        cluster += 1
    return labels


# --- public entry points ------------------------------------------------------

def cache_key_for(ds_fingerprint: str, params: ClusteringParams) -> str:
    payload = json.dumps({"ds": ds_fingerprint, "p": params.canonical_dict()},
                         sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()[:24]


def run_clustering(ds: Dataset, params: ClusteringParams) -> ClusteringInstance:
    """Execute one clustering configuration against a dataset."""
    params.validate()
    x, row_indices = feature_matrix(ds, params)
    n = len(x)
    if params.algorithm in ("kmeans", "agglomerative") and n < params.k:
        raise TooFewRows(f"{n} sampled rows < k={params.k}")
    if params.algorithm == "dbscan" and n < params.min_pts:
        raise TooFewRows(f"{n} sampled rows < min_pts={params.min_pts}")

    RUN_STATS["runs"] += 1
    if params.algorithm == "kmeans":
        raw = _kmeans(x, params.k, params.seed)
    elif params.algorithm == "agglomerative":
        raw = _agglomerative(x, params.k, params.metric, params.linkage)
    else:
        raw = _dbscan(x, params.eps, params.min_pts, params.metric)

    labeling = canonicalize_labels(raw)
    arr = labeling.as_array()
    cents = []
    inertia = 0.0
    for j in range(labeling.k_effective):
        pts = x[arr == j]
        c = pts.mean(axis=0)
        cents.append(c)
        inertia += float(np.sum((pts - c) ** 2))
    centroids = np.vstack(cents) if cents else np.zeros((0, x.shape[1]))
    return ClusteringInstance(
        params=params,
        labeling=labeling,
        row_indices=tuple(int(i) for i in row_indices),
        centroids=centroids,
        inertia=inertia,
        cache_key=cache_key_for(ds.fingerprint(), params),
        dataset_fingerprint=ds.fingerprint(),
    )


def isolate_and_recluster(ds: Dataset, instance: ClusteringInstance,
                          sel: Selection, params: ClusteringParams) -> ClusteringInstance:
    """Re-cluster only the selected rows; the parent instance is untouched.

    Row indices in the result refer to the original dataset.
    """
    if len(sel) == 0:
        raise TooFewRows("isolation selection is empty")
    clustered = set(instance.row_indices)
    if not set(sel.row_indices) <= clustered:
        raise TooFewRows("selection must lie within the instance's clustered rows")
    keep = sorted(sel.row_indices)
    sub = ds.restrict_rows(keep)
    result = run_clustering(sub, params)
    mapped = tuple(keep[i] for i in result.row_indices)
    return replace(result, row_indices=mapped,
                   cache_key=cache_key_for(sub.fingerprint(), params),
                   dataset_fingerprint=ds.fingerprint())
