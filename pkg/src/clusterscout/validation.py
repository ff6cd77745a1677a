"""Internal validity indices, chance-adjusted agreement, k-scans and the
measure-suitability filter.

Conventions that tests rely on:
  - dbscan noise (-1) is one ordinary class when labelings are compared,
    but is excluded from internal indices and silhouette means;
  - AMI normalizes by max(H(a), H(b)) with the exact hypergeometric E[MI];
  - two single-class labelings have AMI 1 (identical partitions).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .dataset import Dataset
from .engine import (ClusteringInstance, ClusteringParams, Labeling, NOISE,
                     admissible_linkages, admissible_metrics, feature_matrix,
                     run_clustering)
from .errors import LengthMismatch, NotApplicable, SingleCluster
from .metrics import pairwise_matrix

MEASURE_ORDER = ("silhouette", "calinski_harabasz", "davies_bouldin", "sdbw")


@dataclass(frozen=True)
class MeasureId:
    name: str
    direction: str  # maximize | minimize
    optimum_rule: str  # max | min | elbow


MEASURES = {
    "silhouette": MeasureId("silhouette", "maximize", "max"),
    "calinski_harabasz": MeasureId("calinski_harabasz", "maximize", "max"),
    "davies_bouldin": MeasureId("davies_bouldin", "minimize", "min"),
    "sdbw": MeasureId("sdbw", "minimize", "min"),
}

# condition -> measures whose readings degrade under it; encodes the two
# documented failure cases plus conservative defaults, kept as data so it
# can be reconfigured
SUITABILITY_FAILURES = {
    "silhouette": frozenset({"subclusters"}),
    "calinski_harabasz": frozenset({"noise", "skewed_distributions"}),
    "davies_bouldin": frozenset({"noise", "varying_density"}),
    "sdbw": frozenset(),
}


@dataclass(frozen=True)
class ConditionFlags:
    skewed_distributions: bool = False
    subclusters: bool = False
    varying_density: bool = False
    noise: bool = False
    monotonicity: bool = False

    def active(self) -> frozenset[str]:
        return frozenset(k for k, v in self.__dict__.items() if v)


@dataclass
class KScan:
    k_values: list[int]
    scores: dict[str, list[float]]
    inertia: list[float]
    suggestions: dict[str, int]
    suggested_k: int
    confidence: str  # high | low


def _labels_of(labeling) -> np.ndarray:
    if isinstance(labeling, Labeling):
        return labeling.as_array()
    return np.asarray(labeling, dtype=int)


# --- agreement measures -------------------------------------------------------

def _dense_codes(v: np.ndarray) -> tuple[np.ndarray, int]:
    """Relabel to 0..k-1 without sorting (labels are small integers)."""
    shifted = v - v.min()
    counts = np.bincount(shifted)
    present = np.flatnonzero(counts)
    if len(present) == len(counts):
        return shifted, len(counts)
    remap = np.zeros(len(counts), dtype=np.intp)
    remap[present] = np.arange(len(present))
    return remap[shifted], len(present)


def _contingency(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ai, ka = _dense_codes(a)
    bi, kb = _dense_codes(b)
    return np.bincount(ai * kb + bi, minlength=ka * kb).reshape(ka, kb)


@lru_cache(maxsize=65536)
def expected_mutual_info(margins_a: tuple, margins_b: tuple, n: int) -> float:
    """Exact E[MI] under the permutation (hypergeometric) model."""
    gln = gammaln(np.arange(n + 2))
    log_n = math.log(n)
    emi = 0.0
    for ai in margins_a:
        for bj in margins_b:
            lo, hi = max(1, ai + bj - n), min(ai, bj)
            if hi < lo:
                continue
            nij = np.arange(lo, hi + 1)
            terms = nij / n * (np.log(nij) + log_n - math.log(ai) - math.log(bj))
            lpmf = (gln[ai + 1] + gln[bj + 1] + gln[n - ai + 1] + gln[n - bj + 1]
                    - gln[n + 1] - gln[nij + 1] - gln[ai - nij + 1]
                    - gln[bj - nij + 1] - gln[n - ai - bj + nij + 1])
            emi += float(np.sum(terms * np.exp(lpmf)))
    return emi


def _entropy(margins: np.ndarray, n: int) -> float:
    p = margins[margins > 0] / n
    return float(-np.sum(p * np.log(p)))


def ami(a, b) -> float:
    """Adjusted Mutual Information, max-entropy normalization."""
    la, lb = _labels_of(a), _labels_of(b)
    if la.shape != lb.shape or la.size < 2:
        raise LengthMismatch("labelings must share a length >= 2")
    c = _contingency(la, lb)
    am = c.sum(axis=1)
    bm = c.sum(axis=0)
    n = int(c.sum())
    # identical partitions (up to relabeling): exactly one nonzero per row
    # and column of a square contingency table
    if c.shape[0] == c.shape[1] and \
            np.all((c > 0).sum(axis=1) == 1) and np.all((c > 0).sum(axis=0) == 1):
        return 1.0
    nz = c > 0
    pij = c[nz] / n
    outer = np.outer(am, bm)[nz] / (n * n)
    mi = float(np.sum(pij * np.log(pij / outer)))
    h_max = max(_entropy(am, n), _entropy(bm, n))
    emi = expected_mutual_info(tuple(sorted(int(v) for v in am)),
                               tuple(sorted(int(v) for v in bm)), n)
    denom = h_max - emi
    if abs(denom) < 1e-15:
        return 1.0 if abs(mi - h_max) < 1e-12 else 0.0
    return (mi - emi) / denom


def ari(a, b) -> float:
    """Adjusted Rand Index (pair-counting, hypergeometric adjustment)."""
    la, lb = _labels_of(a), _labels_of(b)
    if la.shape != lb.shape or la.size < 2:
        raise LengthMismatch("labelings must share a length >= 2")
    c = _contingency(la, lb)
    n = int(c.sum())
    sum_ij = sum(math.comb(int(v), 2) for v in c.flat)
    sum_a = sum(math.comb(int(v), 2) for v in c.sum(axis=1))
    sum_b = sum(math.comb(int(v), 2) for v in c.sum(axis=0))
    total = math.comb(n, 2)
    expected = sum_a * sum_b / total
    max_index = (sum_a + sum_b) / 2
    denom = max_index - expected
    if abs(denom) < 1e-15:
        return 1.0
    return (sum_ij - expected) / denom


def delta_l(a, b) -> float:
    """Semantic distance between two labelings: 1 - AMI."""
    return 1.0 - ami(a, b)


# --- silhouette ------------------------------------------------------------------

def silhouette_values(x: np.ndarray, labels, metric: str = "euclidean"):
    """Per-point silhouettes and their mean over non-noise points.

    Noise points get 0 and never enter the mean; singleton clusters score 0
    by convention; a == b == 0 collapses to 0.
    """
    x = np.asarray(x, dtype=np.float64)
    labels = _labels_of(labels)
    mask = labels != NOISE
    ids = np.unique(labels[mask])
    if ids.size < 2:
        raise SingleCluster("silhouette needs at least two clusters")
    sub = x[mask]
    sub_labels = labels[mask]
    d = pairwise_matrix(sub, metric)
    onehot = np.stack([(sub_labels == j).astype(float) for j in ids], axis=1)
    sums = d @ onehot  # point x cluster total distance
    counts = onehot.sum(axis=0)
    m = len(sub)
    s = np.zeros(m)
    for idx in range(m):
        own = int(np.flatnonzero(ids == sub_labels[idx])[0])
        if counts[own] <= 1:
            s[idx] = 0.0
            continue
        a = sums[idx, own] / (counts[own] - 1)
        others = [sums[idx, j] / counts[j] for j in range(len(ids)) if j != own]
        b = min(others)
        top = max(a, b)
        s[idx] = 0.0 if top == 0 else (b - a) / top
    per_point = np.zeros(len(labels))
    per_point[mask] = s
    return per_point, float(s.mean())


def silhouette(x, labeling, metric: str = "euclidean"):
    return silhouette_values(x, labeling, metric)


# --- internal indices ---------------------------------------------------------

def _split_clusters(x: np.ndarray, labels: np.ndarray):
    mask = labels != NOISE
    pts = x[mask]
    lab = labels[mask]
    ids = np.unique(lab)
    groups = [pts[lab == j] for j in ids]
    return pts, groups


def _calinski_harabasz(x: np.ndarray, labels: np.ndarray) -> float:
    pts, groups = _split_clusters(x, labels)
    n, k = len(pts), len(groups)
    overall = pts.mean(axis=0)
    between = sum(len(g) * float(np.sum((g.mean(axis=0) - overall) ** 2)) for g in groups)
    within = sum(float(np.sum((g - g.mean(axis=0)) ** 2)) for g in groups)
    if between == 0:
        return 0.0
    if within == 0 or n == k:
        return float("inf")
    return (between / (k - 1)) / (within / (n - k))


def _davies_bouldin(x: np.ndarray, labels: np.ndarray) -> float:
    _, groups = _split_clusters(x, labels)
    cents = [g.mean(axis=0) for g in groups]
    scatter = [float(np.mean(np.linalg.norm(g - c, axis=1))) for g, c in zip(groups, cents)]
    k = len(groups)
    worst = []
    for i in range(k):
        ratios = []
        for j in range(k):
            if i == j:
                continue
            sep = float(np.linalg.norm(cents[i] - cents[j]))
            num = scatter[i] + scatter[j]
            ratios.append(0.0 if num == 0 else (np.inf if sep == 0 else num / sep))
        worst.append(max(ratios))
    return float(np.mean(worst))


def _sdbw(x: np.ndarray, labels: np.ndarray) -> float:
    """S_Dbw: average scattering + inter-cluster density, hypersphere radius
    set to the average cluster standard deviation."""
    pts, groups = _split_clusters(x, labels)
    k = len(groups)
    var_all = np.linalg.norm(pts.var(axis=0))
    var_clusters = [np.linalg.norm(g.var(axis=0)) for g in groups]
    scat = float(np.mean([v / var_all if var_all > 0 else 0.0 for v in var_clusters]))
    stdev = math.sqrt(sum(var_clusters)) / k

    def density(center: np.ndarray, cloud: np.ndarray) -> int:
        return int(np.sum(np.linalg.norm(cloud - center, axis=1) <= stdev))

    cents = [g.mean(axis=0) for g in groups]
    dens = 0.0
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            union = np.vstack([groups[i], groups[j]])
            mid = (cents[i] + cents[j]) / 2
            denom = max(density(cents[i], union), density(cents[j], union))
            dens += density(mid, union) / denom if denom > 0 else 0.0
    dens /= k * (k - 1)
    return scat + dens


_INTERNAL = {
    "calinski_harabasz": _calinski_harabasz,
    "davies_bouldin": _davies_bouldin,
    "sdbw": _sdbw,
}


def internal_measure(x, labeling, measure: str) -> float:
    """One internal validity index over non-noise points (euclidean)."""
    labels = _labels_of(labeling)
    x = np.asarray(x, dtype=np.float64)
    ids = np.unique(labels[labels != NOISE])
    if ids.size < 2:
        raise SingleCluster(f"{measure} needs at least two clusters")
    if measure == "silhouette":
        return silhouette_values(x, labels)[1]
    if measure not in _INTERNAL:
        raise ValueError(f"unknown measure {measure!r}")
    return float(_INTERNAL[measure](x, labels))


# --- combined score -----------------------------------------------------------

def _minmax_column(values: list[float | None]) -> list[float]:
    """Min-max normalize over the valid entries; a constant column gives
    everyone 0.5; None entries (violators) normalize to 0."""
    finite = [v for v in values if v is not None and math.isfinite(v)]
    hi_sub = max(finite) + 1.0 if finite else 1.0
    lo_sub = min(finite) - 1.0 if finite else 0.0
    subbed = [None if v is None else
              (hi_sub if v == math.inf else lo_sub if v == -math.inf else v)
              for v in values]
    valid = [v for v in subbed if v is not None]
    if not valid:
        return [0.0 for _ in values]
    lo, hi = min(valid), max(valid)
    if hi - lo < 1e-15:
        return [0.0 if v is None else 0.5 for v in subbed]
    return [0.0 if v is None else (v - lo) / (hi - lo) for v in subbed]


def combined_score(ds: Dataset, candidates: list[ClusteringInstance]) -> list[float]:
    """The scalar quality score: equal-weight mean of min-max-normalized
    silhouette, -Davies-Bouldin and Calinski-Harabasz across the candidate
    set. Candidates with fewer than two clusters score 0."""
    sil, dbn, ch = [], [], []
    for inst in candidates:
        if inst.labeling.k_effective < 2:
            sil.append(None), dbn.append(None), ch.append(None)
            continue
        x, _ = feature_matrix(ds, inst.params)
        labels = inst.labeling.as_array()
        sil.append(silhouette_values(x, labels, inst.params.metric)[1])
        db = _davies_bouldin(x, labels)
        dbn.append(-db if math.isfinite(db) else -math.inf)
        ch.append(_calinski_harabasz(x, labels))
    cols = [_minmax_column(sil), _minmax_column(dbn), _minmax_column(ch)]
    out = []
    for i, inst in enumerate(candidates):
        if inst.labeling.k_effective < 2:
            out.append(0.0)
        else:
            out.append(float(np.mean([c[i] for c in cols])))
    return out


def score_projection(embedding, labeling) -> float:
    """Mean 2D silhouette of the embedded points under the given labels."""
    coords = np.asarray(embedding.coords if hasattr(embedding, "coords") else embedding)
    return silhouette_values(coords, labeling, "euclidean")[1]


# --- k scans and the elbow rule --------------------------------------------------

def elbow_point(k_values, scores) -> int:
    """k at the maximum perpendicular distance from the (axis-normalized)
    curve to its chord; ties break to the smallest k."""
    ks = np.asarray(k_values, dtype=float)
    ys = np.asarray(scores, dtype=float)
    if len(ks) < 3:
        return int(k_values[0])
    kx = (ks - ks.min()) / (ks.max() - ks.min())
    span = ys.max() - ys.min()
    yy = (ys - ys.min()) / span if span > 0 else np.zeros_like(ys)
    x0, y0 = kx[0], yy[0]
    x1, y1 = kx[-1], yy[-1]
    norm = math.hypot(x1 - x0, y1 - y0)
    dist = np.abs((y1 - y0) * kx - (x1 - x0) * yy + x1 * y0 - y1 * x0) / norm
    return int(k_values[int(np.argmax(dist))])


def k_scan(ds: Dataset, base_params: ClusteringParams, k_range,
           measures=("silhouette",), cache=None) -> KScan:
    """Score one clustering per k and suggest the best cluster count.

    Each measure applies its own optimum rule; confidence drops to low when
    even the best silhouette in the scan stays under 0.25.
    """
    k_values = sorted(int(k) for k in k_range)
    if len(k_values) > 32:
        raise ValueError("k_range capped at 32 values")
    if k_values[0] < 2 or k_values[-1] > ds.n_rows - 1:
        raise ValueError("k_range must lie within [2, n-1]")
    x, _ = feature_matrix(ds, base_params)
    wanted = list(dict.fromkeys(measures))
    score_names = wanted if "silhouette" in wanted else wanted + ["silhouette"]
    scores: dict[str, list[float]] = {m: [] for m in score_names}
    inertia = []
    for k in k_values:
        params = replace(base_params, k=k)
        if cache is not None:
            inst = cache.get_or_compute(ds, params)
        else:
            inst = run_clustering(ds, params)
        inertia.append(inst.inertia)
        labels = inst.labeling.as_array()
        for m in score_names:
            try:
                scores[m].append(internal_measure(x, labels, m))
            except SingleCluster:
                scores[m].append(math.nan)

    suggestions: dict[str, int] = {}
    for m in wanted:
        rule = MEASURES[m].optimum_rule
        vals = np.asarray(scores[m])
        ok = ~np.isnan(vals)
        kv = [k for k, good in zip(k_values, ok) if good]
        vv = vals[ok]
        if len(kv) == 0:
            suggestions[m] = k_values[0]
        elif rule == "max":
            suggestions[m] = int(kv[int(np.argmax(vv))])
        elif rule == "min":
            suggestions[m] = int(kv[int(np.argmin(vv))])
        else:
            suggestions[m] = elbow_point(kv, vv)
    suggestions["inertia"] = elbow_point(k_values, inertia)

    sil = np.asarray(scores["silhouette"])
    best_sil = np.nanmax(sil) if np.any(~np.isnan(sil)) else -1.0
    if "silhouette" not in wanted:
        scores.pop("silhouette")
    return KScan(
        k_values=k_values,
        scores={m: [float(v) for v in vs] for m, vs in scores.items()},
        inertia=inertia,
        suggestions=suggestions,
        suggested_k=suggestions[wanted[0]],
        confidence="low" if best_sil < 0.25 else "high",
    )


# --- suitability -----------------------------------------------------------------

def detect_conditions(ds: Dataset, instance: ClusteringInstance) -> ConditionFlags:
    """Infer the data-detectable condition flags from a clustering."""
    from scipy import stats as sps

    skewed = any(abs(float(sps.skew(ds.values[:, f]))) > 1
                 for f in sorted(ds.enabled_features)
                 if ds.values[:, f].std() > 0)

    x, _ = feature_matrix(ds, instance.params)
    labels = instance.labeling.as_array()
    intra = []
    for j in range(instance.labeling.k_effective):
        pts = x[labels == j]
        if len(pts) >= 2:
            d = pairwise_matrix(pts, "euclidean")
            intra.append(float(d[np.triu_indices(len(pts), 1)].mean()))
    varying = len(intra) >= 2 and min(intra) > 0 and max(intra) / min(intra) > 3

    subclusters = False
    for j in range(instance.labeling.k_effective):
        pts = x[labels == j]
        if len(pts) < 4:
            continue
        sub = run_clustering(
            _matrix_dataset(pts),
            ClusteringParams(feature_subset=frozenset(range(pts.shape[1])),
                             algorithm="kmeans", k=2, seed=instance.params.seed,
                             standardize=False))
        if silhouette_values(pts, sub.labeling.as_array())[1] > 0.4:
            subclusters = True
            break
    return ConditionFlags(skewed_distributions=skewed, subclusters=subclusters,
                          varying_density=varying)


def _matrix_dataset(x: np.ndarray) -> Dataset:
    return Dataset([f"f{i}" for i in range(x.shape[1])],
                   [str(i) for i in range(len(x))],
                   np.asarray(x, dtype=np.float64),
                   frozenset(range(x.shape[1])))


def suitable_measures(conditions: ConditionFlags,
                      prefs: ConditionFlags | None = None) -> list[MeasureId]:
    """Filter measures whose readings degrade under the active conditions.

    Detection supplies the three data-driven flags; noise and monotonicity
    only ever come from user preferences. An empty result is allowed; the
    caller falls back to the full list with a warning.
    """
    active = set(conditions.active())
    if prefs is not None:
        active |= set(prefs.active())
    return [MEASURES[m] for m in MEASURE_ORDER
            if not (SUITABILITY_FAILURES[m] & active)]


# --- parameter suggestion --------------------------------------------------------

def suggest_parameter(ds: Dataset, instance: ClusteringInstance, kind: str,
                      cache=None):
    """Re-run the clustering varying one parameter over its admissible
    values and rank the variants by combined score."""
    params = instance.params
    if kind == "linkage":
        if params.algorithm != "agglomerative":
            raise NotApplicable("linkage only applies to agglomerative clustering")
        values = admissible_linkages(params.metric)
        variants = [replace(params, linkage=v) for v in values]
    elif kind == "metric":
        values = admissible_metrics(params.algorithm, params.linkage)
        variants = [replace(params, metric=v) for v in values]
    else:
        raise NotApplicable(f"cannot suggest parameter {kind!r}")
    instances, ok_values, failed = [], [], []
    for value, p in zip(values, variants):
        try:
            inst = cache.get_or_compute(ds, p) if cache is not None \
                else run_clustering(ds, p)
        except Exception:
            failed.append(value)
            continue
        ok_values.append(value)
        instances.append(inst)
    if not instances:
        raise NotApplicable(f"no admissible {kind} value succeeded")
    scores = combined_score(ds, instances)
    ranked = sorted(zip(ok_values, scores),
                    key=lambda t: (-t[1], values.index(t[0])))
    ranked += [(v, -math.inf) for v in failed]
    return ranked[0][0], ranked
