"""Cluster explanation: feature relevance, the heatmap aggregate matrix,
decision-tree rules, textual descriptions, uncertainty and the
agreement-ranked reassignment search.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy import stats as sps

from .dataset import Dataset, Selection
from .engine import (ALGORITHMS, ClusteringInstance, ClusteringParams, NOISE,
                     admissible_linkages, admissible_metrics, feature_matrix,
                     run_clustering)
from .errors import MissingLabels, TooFewFeatures, UnknownCluster
from .validation import ami, silhouette_values

RANKING_METHODS = ("variance", "anova_f", "correlation_filter", "pca_loading")

Z_CLIP = 2.5
UNCERTAIN_SILHOUETTE = 0.1
QUALIFIER_VERY = 1.5
QUALIFIER_MODERATE = 0.75


@dataclass
class FeatureRanking:
    method: str
    ranked: list[tuple[int, float, float | None]]  # (feature, score, p_value)

    def features(self) -> list[int]:
        return [f for f, _, _ in self.ranked]


@dataclass
class FeatureDendrogram:
    feature_indices: list[int]
    merges: list[tuple[int, int, float]]  # scipy-style node ids, height = 1 - |r|


@dataclass
class AggregateCell:
    cluster_mean: float
    z: float
    p_value: float


@dataclass
class AggregateMatrix:
    cells: list[list[AggregateCell]]  # [cluster][feature position]
    cluster_order: list[int]
    cluster_sizes: list[int]
    feature_order: list[int]
    feature_names: list[str]
    feature_p: list[float]  # per-feature ANOVA p, aligned with feature_order


# --- feature relevance ---------------------------------------------------------

def _anova_per_feature(x: np.ndarray, labels: np.ndarray):
    mask = labels != NOISE
    pts, lab = x[mask], labels[mask]
    ids = np.unique(lab)
    out = []
    for f in range(x.shape[1]):
        groups = [pts[lab == j, f] for j in ids]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            try:
                stat, p = sps.f_oneway(*groups)
            except Exception:
                stat, p = math.nan, math.nan
        if not math.isfinite(stat):
            stat, p = 0.0, 1.0
        out.append((float(stat), float(p)))
    return out


def rank_features(ds: Dataset, method: str, labeling=None,
                  row_indices=None, features=None) -> FeatureRanking:
    """Rank features by one relevance method.

    anova_f requires a labeling (aligned with row_indices when given);
    the other methods ignore it.
    """
    feats = sorted(features if features is not None else ds.enabled_features)
    rows = np.asarray(row_indices, dtype=int) if row_indices is not None \
        else np.arange(ds.n_rows)
    x = ds.values[rows][:, feats]

    if method == "variance":
        scored = [(f, float(x[:, i].var()), None) for i, f in enumerate(feats)]
        scored.sort(key=lambda t: (-t[1], t[0]))
        return FeatureRanking("variance", scored)

    if method == "anova_f":
        if labeling is None:
            raise MissingLabels("anova_f ranking needs a labeling")
        labels = labeling.as_array() if hasattr(labeling, "as_array") \
            else np.asarray(labeling, dtype=int)
        stats = _anova_per_feature(x, labels)
        scored = [(f, s, p) for f, (s, p) in zip(feats, stats)]
        scored.sort(key=lambda t: (-t[1], t[0]))
        return FeatureRanking("anova_f", scored)

    if method == "correlation_filter":
        variances = x.var(axis=0)
        order = sorted(range(len(feats)), key=lambda i: (-variances[i], i))
        corr = np.abs(np.corrcoef(x, rowvar=False)) if len(feats) > 1 else np.ones((1, 1))
        corr = np.nan_to_num(corr, nan=0.0)
        kept: list[int] = []
        remaining = list(order)
        scored = []
        while remaining:
            if not kept:
                pick = remaining[0]
                score = 1.0
            else:
                best = None
                for i in remaining:
                    s = 1.0 - max(corr[i, j] for j in kept)
                    if best is None or s > best[1] + 1e-15:
                        best = (i, s)
                pick, score = best
            scored.append((feats[pick], float(score), None))
            kept.append(pick)
            remaining.remove(pick)
        return FeatureRanking("correlation_filter", scored)

    if method == "pca_loading":
        mean = x.mean(axis=0)
        std = x.std(axis=0)
        std[std == 0] = 1.0
        z = (x - mean) / std
        cov = np.atleast_2d(np.cov(z, rowvar=False))
        evals, evecs = np.linalg.eigh(cov)
        first = evecs[:, int(np.argmax(evals))]
        scored = [(f, float(abs(first[i])), None) for i, f in enumerate(feats)]
        scored.sort(key=lambda t: (-t[1], t[0]))
        return FeatureRanking("pca_loading", scored)

    raise ValueError(f"unknown ranking method {method!r}")


def feature_agglomeration(ds: Dataset) -> FeatureDendrogram:
    """Average-linkage clustering of features under 1 - |pearson r|."""
    feats = [f for f in sorted(ds.enabled_features) if ds.values[:, f].std() > 0]
    if len(feats) < 2:
        raise TooFewFeatures("need at least two non-constant features")
    corr = np.abs(np.corrcoef(ds.values[:, feats], rowvar=False))
    d = 1.0 - np.clip(corr, 0.0, 1.0)
    m = len(feats)
    np.fill_diagonal(d, np.inf)
    size = np.ones(m)
    node_id = list(range(m))
    alive = np.ones(m, dtype=bool)
    merges = []
    for step in range(m - 1):
        flat = int(np.argmin(d))
        i, j = divmod(flat, m)
        if i > j:
            i, j = j, i
        merges.append((node_id[i], node_id[j], float(max(d[i, j], 0.0))))
        others = np.flatnonzero(alive)
        others = others[(others != i) & (others != j)]
        merged = (size[i] * d[i, others] + size[j] * d[j, others]) / (size[i] + size[j])
        d[i, others] = merged
        d[others, i] = merged
        d[j, :] = np.inf
        d[:, j] = np.inf
        size[i] += size[j]
        node_id[i] = m + step
        alive[j] = False
    return FeatureDendrogram(feature_indices=feats, merges=merges)


# --- aggregate matrix ------------------------------------------------------------

def _welch_p(a: np.ndarray, b: np.ndarray) -> float:
    if len(a) < 2 or len(b) < 2:
        return 1.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = sps.ttest_ind(a, b, equal_var=False)
    p = float(res.pvalue)
    return p if math.isfinite(p) else 1.0


def aggregate_matrix(ds: Dataset, instance: ClusteringInstance,
                     top_m: int | None = None,
                     features: list[int] | None = None) -> AggregateMatrix:
    """Clusters x features summary behind the heatmap.

    Columns are clusters (largest first, the canonical id order); rows are
    the most relevant features (ANOVA rank, cap top_m, overridable). Cell z
    is the cluster mean standardized against the clustered population and
    clipped to +-2.5; the cell p-value is a Welch t-test of cluster vs rest.
    """
    rows = np.asarray(instance.row_indices, dtype=int)
    feats = sorted(instance.params.feature_subset)
    labels = instance.labeling.as_array()
    k = instance.labeling.k_effective
    mask = labels != NOISE
    raw = ds.values[rows][:, feats]

    if features is not None:
        ordered = [f for f in features if f in feats]
    else:
        if k >= 2:
            ranking = rank_features(ds, "anova_f", labeling=labels,
                                    row_indices=rows, features=feats)
        else:
            ranking = rank_features(ds, "variance", row_indices=rows, features=feats)
        ordered = ranking.features()
    if top_m is not None:
        ordered = ordered[:top_m]

    anova = dict(zip(feats, _anova_per_feature(raw, labels)))
    # 1D reductions per column so a cluster covering the population yields
    # bitwise-identical means and an exact z of 0
    pop_mean = {pos: float(raw[mask, pos].mean()) for pos in range(len(feats))}
    pop_std = {pos: float(raw[mask, pos].std()) for pos in range(len(feats))}

    cells = []
    sizes = []
    for j in range(k):
        member = labels == j
        sizes.append(int(member.sum()))
        row_cells = []
        for f in ordered:
            pos = feats.index(f)
            vals = raw[member, pos]
            rest = raw[mask & ~member, pos]
            cmean = float(vals.mean())
            std = pop_std[pos]
            z = 0.0 if std == 0 else (cmean - pop_mean[pos]) / std
            z = float(np.clip(z, -Z_CLIP, Z_CLIP))
            row_cells.append(AggregateCell(cluster_mean=cmean, z=z,
                                           p_value=_welch_p(vals, rest)))
        cells.append(row_cells)

    return AggregateMatrix(
        cells=cells,
        cluster_order=list(range(k)),
        cluster_sizes=sizes,
        feature_order=ordered,
        feature_names=[ds.feature_names[f] for f in ordered],
        feature_p=[anova[f][1] for f in ordered],
    )


# --- decision-tree rules -----------------------------------------------------------

@dataclass
class TreeNode:
    histogram: dict[int, int]
    prediction: int
    feature: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


@dataclass
class RuleTree:
    root: TreeNode
    feature_names: list[str]
    feature_indices: list[int]
    max_depth: int
    training_fidelity: float


def _gini(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts / total
    return float(1.0 - np.sum(p * p))


def _best_split(x: np.ndarray, y: np.ndarray, n_classes: int):
    """Lowest-weighted-Gini split; ties resolve to the lowest feature index,
    then the lowest threshold (first found wins under strict improvement)."""
    n = len(y)
    best = None  # (gini, feature, threshold)
    onehot = np.eye(n_classes, dtype=float)[y]
    for f in range(x.shape[1]):
        order = np.argsort(x[:, f], kind="stable")
        xs = x[order, f]
        left_counts = np.cumsum(onehot[order], axis=0)
        total = left_counts[-1]
        distinct = np.flatnonzero(np.diff(xs) > 0)
        for cut in distinct:
            lc = left_counts[cut]
            rc = total - lc
            nl = cut + 1
            g = (nl * _gini(lc) + (n - nl) * _gini(rc)) / n
            if best is None or g < best[0] - 1e-12:
                best = (g, f, float((xs[cut] + xs[cut + 1]) / 2))
    return best


def _grow(x, y, n_classes, depth, max_depth) -> TreeNode:
    counts = np.bincount(y, minlength=n_classes)
    histogram = {int(c): int(v) for c, v in enumerate(counts) if v > 0}
    prediction = int(np.argmax(counts))  # argmax ties to the smallest class id
    node = TreeNode(histogram=histogram, prediction=prediction)
    if depth >= max_depth or len(histogram) <= 1:
        return node
    found = _best_split(x, y, n_classes)
    if found is None:
        return node
    gain = _gini(counts) - found[0]
    if gain <= 1e-12:
        return node
    _, f, t = found
    mask = x[:, f] <= t
    node.feature, node.threshold = f, t
    node.left = _grow(x[mask], y[mask], n_classes, depth + 1, max_depth)
    node.right = _grow(x[~mask], y[~mask], n_classes, depth + 1, max_depth)
    return node


def _predict_one(node: TreeNode, row: np.ndarray) -> int:
    while not node.is_leaf:
        node = node.left if row[node.feature] <= node.threshold else node.right
    return node.prediction


def build_rule_tree(x: np.ndarray, labels, feature_names: list[str],
                    max_depth: int = 3,
                    feature_indices: list[int] | None = None) -> RuleTree:
    """CART with Gini impurity on raw feature values; noise rows excluded."""
    x = np.asarray(x, dtype=np.float64)
    y = labels.as_array() if hasattr(labels, "as_array") else np.asarray(labels, dtype=int)
    mask = y != NOISE
    x, y = x[mask], y[mask]
    n_classes = int(y.max()) + 1 if len(y) else 1
    root = _grow(x, y, n_classes, 0, max_depth)
    correct = sum(_predict_one(root, row) == lab for row, lab in zip(x, y))
    fidelity = correct / len(y) if len(y) else 1.0
    return RuleTree(root=root, feature_names=list(feature_names),
                    feature_indices=feature_indices or list(range(x.shape[1])),
                    max_depth=max_depth, training_fidelity=float(fidelity))


def fit_rule_tree(ds: Dataset, instance: ClusteringInstance,
                  max_depth: int = 3) -> RuleTree:
    """Tree over the instance's clustered rows in raw feature units."""
    rows = np.asarray(instance.row_indices, dtype=int)
    feats = sorted(instance.params.feature_subset)
    return build_rule_tree(ds.values[rows][:, feats], instance.labeling,
                           [ds.feature_names[f] for f in feats], max_depth,
                           feature_indices=feats)


def _format_threshold(v: float) -> str:
    return f"{v:g}"


def _leaf_paths(node: TreeNode, bounds: dict):
    if node.is_leaf:
        yield bounds, node
        return
    left = {k: v for k, v in bounds.items()}
    lo, hi = left.get(node.feature, (-math.inf, math.inf))
    left[node.feature] = (lo, min(hi, node.threshold))
    yield from _leaf_paths(node.left, left)
    right = {k: v for k, v in bounds.items()}
    lo, hi = right.get(node.feature, (-math.inf, math.inf))
    right[node.feature] = (max(lo, node.threshold), hi)
    yield from _leaf_paths(node.right, right)


def _conjunction(bounds: dict, names: list[str]) -> str:
    parts = []
    for f in sorted(bounds):
        lo, hi = bounds[f]
        if lo > -math.inf:
            parts.append(f"{names[f]} > {_format_threshold(lo)}")
        if hi < math.inf:
            parts.append(f"{names[f]} <= {_format_threshold(hi)}")
    return " & ".join(parts) if parts else "always"


def extract_rules(tree: RuleTree) -> dict[int, list[str]]:
    """Per-cluster rule strings: one merged-interval conjunction per leaf."""
    rules: dict[int, list[str]] = {}
    for bounds, leaf in _leaf_paths(tree.root, {}):
        rules.setdefault(leaf.prediction, []).append(
            _conjunction(bounds, tree.feature_names))
    return rules


def _dominant_rule(tree: RuleTree, cluster_id: int) -> str | None:
    best = None
    for bounds, leaf in _leaf_paths(tree.root, {}):
        if leaf.prediction != cluster_id:
            continue
        weight = leaf.histogram.get(cluster_id, 0)
        if best is None or weight > best[0]:
            best = (weight, _conjunction(bounds, tree.feature_names))
    return best[1] if best else None


# --- textual description -------------------------------------------------------------

def _qualify(z: float) -> str | None:
    mag = abs(z)
    if mag > QUALIFIER_VERY:
        strength = "very"
    elif mag > QUALIFIER_MODERATE:
        strength = "moderately"
    else:
        return None
    return f"{strength} {'high' if z > 0 else 'low'}"


def describe_cluster(matrix: AggregateMatrix, cluster_id: int,
                     rules: RuleTree | None = None) -> str:
    """Deterministic template text for one cluster."""
    if cluster_id not in matrix.cluster_order:
        raise UnknownCluster(f"no cluster {cluster_id}")
    pos = matrix.cluster_order.index(cluster_id)
    size = matrix.cluster_sizes[pos]
    cells = list(zip(matrix.feature_names, matrix.cells[pos]))
    highs = sorted((c for c in cells if c[1].z > QUALIFIER_MODERATE),
                   key=lambda c: -c[1].z)[:3]
    lows = sorted((c for c in cells if c[1].z < -QUALIFIER_MODERATE),
                  key=lambda c: c[1].z)[:3]
    traits = [f"{_qualify(cell.z)} {name}" for name, cell in highs + lows]
    noun = "member" if size == 1 else "members"
    if traits:
        text = f"Cluster {cluster_id} ({size} {noun}): " + ", ".join(traits) + "."
    else:
        text = f"Cluster {cluster_id} ({size} {noun}): no distinctive features."
    if rules is not None:
        path = _dominant_rule(rules, cluster_id)
        if path:
            text += f" Typical rule: {path}."
    return text


def representative_row(ds: Dataset, instance: ClusteringInstance,
                       cluster_id: int) -> str:
    """Row id of the member nearest the cluster centroid (the default
    cluster name)."""
    if not 0 <= cluster_id < instance.labeling.k_effective:
        raise UnknownCluster(f"no cluster {cluster_id}")
    x, rows = feature_matrix(ds, instance.params)
    labels = instance.labeling.as_array()
    member_pos = np.flatnonzero(labels == cluster_id)
    centroid = instance.centroids[cluster_id]
    dists = np.linalg.norm(x[member_pos] - centroid, axis=1)
    best = member_pos[int(np.argmin(dists))]
    return ds.row_ids[rows[best]]


# --- uncertainty ---------------------------------------------------------------------

def uncertain_points(x: np.ndarray, labeling, metric: str = "euclidean"):
    """Low-confidence assignments: silhouette < 0.1, capped at the bottom
    decile. Returns (flagged Selection over x's rows, per-point confidence)."""
    labels = labeling.as_array() if hasattr(labeling, "as_array") \
        else np.asarray(labeling, dtype=int)
    per_point, _ = silhouette_values(x, labels, metric)
    confidence = (per_point + 1.0) / 2.0
    confidence[labels == NOISE] = 0.0
    n = len(labels)
    candidates = [i for i in range(n)
                  if labels[i] != NOISE and per_point[i] < UNCERTAIN_SILHOUETTE]
    cap = max(1, n // 10)
    if len(candidates) > cap:
        candidates.sort(key=lambda i: (per_point[i], i))
        candidates = sorted(candidates[:cap])
    return Selection(tuple(candidates)), confidence


# --- reassignment search ----------------------------------------------------------------

def default_grid(base: ClusteringParams) -> list[tuple[str, str, str]]:
    """Every admissible (algorithm, metric, linkage) combination, canonical
    order."""
    grid = []
    for algo in ALGORITHMS:
        for metric in admissible_metrics(algo, "single"):
            if algo == "agglomerative":
                for link in admissible_linkages(metric):
                    grid.append((algo, metric, link))
            else:
                grid.append((algo, metric, base.linkage))
    return grid


def reassignment_search(ds: Dataset, desired, base_params: ClusteringParams,
                        grid: list[tuple[str, str, str]] | None = None,
                        cache=None) -> list[tuple[ClusteringParams, float]]:
    """Try each grid combination (k fixed) and rank by agreement with the
    desired labeling; failed combinations sink to the tail with -inf."""
    desired_arr = desired.as_array() if hasattr(desired, "as_array") \
        else np.asarray(desired, dtype=int)
    combos = grid if grid is not None else default_grid(base_params)
    results = []
    for order, (algo, metric, link) in enumerate(combos):
        params = replace(base_params, algorithm=algo, metric=metric, linkage=link)
        try:
            inst = cache.get_or_compute(ds, params) if cache is not None \
                else run_clustering(ds, params)
            if len(inst.labeling.labels) != len(desired_arr):
                raise ValueError("row count mismatch")
            score = ami(inst.labeling.as_array(), desired_arr)
        except Exception:
            score = -math.inf
        results.append((order, params, score))
    results.sort(key=lambda t: (-t[2], t[0]))
    return [(p, s) for _, p, s in results]
