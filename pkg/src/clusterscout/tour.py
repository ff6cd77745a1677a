"""Feedback-driven navigation of the clustering-solution graph.

Solutions are nodes in an undirected graph whose edge lengths are the
semantic distance between labelings (1 - AMI). Exploration jumps far,
"like" switches to refining the neighborhood of the liked node, and
"bad" backtracks and departs in a different direction. Runs are fully
deterministic for a fixed seed and feedback history.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .dataset import Dataset
from .engine import (ALGORITHMS, LINKAGES, METRICS, ClusteringInstance,
                     ClusteringParams, admissible_linkages,
                     admissible_metrics, feature_matrix, run_clustering)
from .errors import AllParamsFixed, NoViableCandidate
from .insight import RANKING_METHODS, rank_features
from .metrics import pairwise_matrix
from .projection import Embedding, ProjectionParams, project
from .validation import combined_score, delta_l, score_projection

PARAMETERS = ("feature_subset", "k", "algorithm", "metric", "linkage", "standardize")

FEEDBACK_GENERATE = "generate"
FEEDBACK_LIKE = "like"
FEEDBACK_BAD = "bad"


@dataclass(frozen=True)
class TourConfig:
    batch: int = 8
    probes_per_param: int = 3
    k_range: tuple[int, int] = (2, 10)
    tabu_radius: float = 0.05  # candidates this close to a tabu node are discarded
    departure_target: float = 0.3  # wanted distance from a freshly disliked node
    redraws: int = 3
    exclude_top_prob: float = 0.5
    second_param_prob: float = 0.5
    embedding_iterations: int = 250


@dataclass
class TourConstraints:
    fixed: dict[str, object] = field(default_factory=dict)
    free: set[str] = field(default_factory=set)  # accepted for interface parity

    def __post_init__(self):
        for name in list(self.fixed) + list(self.free):
            if name not in PARAMETERS:
                raise ValueError(f"unknown tour parameter {name!r}")
        if len(self.fixed) >= len(PARAMETERS):
            raise AllParamsFixed("at least one parameter must stay variable")

    def is_fixed(self, name: str) -> bool:
        return name in self.fixed

    def to_dict(self) -> dict:
        fixed = {k: (sorted(v) if isinstance(v, (set, frozenset)) else v)
                 for k, v in self.fixed.items()}
        return {"fixed": fixed, "free": sorted(self.free)}

    @classmethod
    def from_dict(cls, d: dict) -> "TourConstraints":
        fixed = dict(d.get("fixed", {}))
        if "feature_subset" in fixed:
            fixed["feature_subset"] = frozenset(fixed["feature_subset"])
        return cls(fixed=fixed, free=set(d.get("free", [])))


@dataclass
class TourNode:
    node_id: int
    instance: ClusteringInstance
    parent: int | None
    feedback: str = "none"
    embedding: Embedding | None = None
    embedding_method: str | None = None


@dataclass
class TourEdge:
    a: int
    b: int
    delta_p: float
    delta_l: float
    delta_s: float


@dataclass
class TourState:
    ds: Dataset
    nodes: dict[int, TourNode]
    edges: list[TourEdge]
    weights: dict[str, float]
    constraints: TourConstraints
    current: int
    mode: str  # explore | refine
    rng_seed: int
    rng: np.random.Generator
    config: TourConfig
    cache: object | None = None
    tabu: set[int] = field(default_factory=set)
    liked: int | None = None
    last_disliked: int | None = None
    feature_cycle: int = 0
    next_id: int = 1
    entry_view_id: str | None = None

    @property
    def current_node(self) -> TourNode:
        return self.nodes[self.current]

    def node_keys(self) -> set[str]:
        return {n.instance.cache_key for n in self.nodes.values()}


def _run(state: TourState, params: ClusteringParams) -> ClusteringInstance:
    if state.cache is not None:
        return state.cache.get_or_compute(state.ds, params)
    return run_clustering(state.ds, params)


def init_tour(ds: Dataset, entry: ClusteringInstance,
              constraints: TourConstraints | None = None, seed: int = 0,
              config: TourConfig | None = None, cache=None) -> TourState:
    """Start a tour at the given entry instance; weights stay uniform until
    estimate_weights runs."""
    constraints = constraints or TourConstraints()
    config = config or TourConfig()
    root = TourNode(node_id=0, instance=entry, parent=None)
    free = [p for p in PARAMETERS if not constraints.is_fixed(p)]
    uniform = {p: (1.0 / len(free) if p in free else 0.0) for p in PARAMETERS}
    return TourState(
        ds=ds, nodes={0: root}, edges=[], weights=uniform,
        constraints=constraints, current=0, mode="explore",
        rng_seed=seed, rng=np.random.Generator(np.random.PCG64(seed)),
        config=config, cache=cache,
    )


# --- single-parameter perturbation ------------------------------------------------

def _auto_eps(state: TourState, params: ClusteringParams) -> float:
    """k-distance heuristic: median distance to the min_pts-th neighbor.
    Falls back to the default radius when the metric is degenerate here."""
    try:
        x, _ = feature_matrix(state.ds, params)
        d = pairwise_matrix(x, params.metric)
    except Exception:
        return 0.5
    kth = min(params.min_pts, len(x) - 1)
    knn = np.sort(d, axis=1)[:, kth]
    eps = float(np.median(knn))
    return eps if eps > 0 else 0.5


def _choice(rng: np.random.Generator, options: list):
    return options[int(rng.integers(len(options)))]


def _perturb(state: TourState, params: ClusteringParams,
             name: str) -> ClusteringParams | None:
    """A random admissible change of one parameter; None when the parameter
    cannot vary in this configuration."""
    rng = state.rng
    cfg = state.config
    if name == "k":
        if params.algorithm == "dbscan":
            return None
        lo, hi = cfg.k_range
        hi = min(hi, state.ds.n_rows - 1)
        options = [k for k in range(lo, hi + 1) if k != params.k]
        if not options:
            return None
        return replace(params, k=_choice(rng, options))
    if name == "algorithm":
        options = []
        for algo in ALGORITHMS:
            if algo == params.algorithm:
                continue
            if algo == "kmeans" and \
                    state.constraints.fixed.get("metric", "euclidean") != "euclidean":
                continue
            options.append(algo)
        if not options:
            return None
        algo = _choice(rng, options)
        p = replace(params, algorithm=algo)
        # dependent parameters are re-drawn among the admissible values of
        # the target algorithm (unless the user fixed them)
        fixed = state.constraints.fixed
        if algo == "kmeans":
            p = replace(p, metric="euclidean")
        elif algo == "agglomerative":
            link = fixed.get("linkage") or _choice(rng, list(admissible_linkages(
                fixed.get("metric", p.metric)) if "metric" in fixed else LINKAGES))
            metric = fixed.get("metric") or _choice(
                rng, list(admissible_metrics(algo, link)))
            p = replace(p, linkage=link, metric=metric)
        else:  # dbscan
            metric = fixed.get("metric") or _choice(rng, list(METRICS))
            p = replace(p, metric=metric)
            p = replace(p, eps=_auto_eps(state, p))
        return p
    if name == "metric":
        admissible = [m for m in admissible_metrics(params.algorithm, params.linkage)
                      if m != params.metric]
        if not admissible:
            return None
        return replace(params, metric=_choice(rng, admissible))
    if name == "linkage":
        if params.algorithm != "agglomerative":
            return None
        admissible = [l for l in admissible_linkages(params.metric)
                      if l != params.linkage]
        if not admissible:
            return None
        return replace(params, linkage=_choice(rng, admissible))
    if name == "standardize":
        return replace(params, standardize=not params.standardize)
    if name == "feature_subset":
        current = set(params.feature_subset)
        pool = sorted(set(range(state.ds.n_features)) & set(state.ds.enabled_features))
        outside = [f for f in pool if f not in current]
        if len(current) >= 2 and (not outside or rng.random() < 0.5):
            dropped = _choice(rng, sorted(current))
            return replace(params, feature_subset=frozenset(current - {dropped}))
        if outside:
            added = _choice(rng, outside)
            return replace(params, feature_subset=frozenset(current | {added}))
        return None
    raise ValueError(f"unknown parameter {name!r}")


# --- weight estimation --------------------------------------------------------------

def estimate_weights(state: TourState, probes_per_param: int | None = None) -> dict[str, float]:
    """Probe each variable parameter with single-parameter perturbations and
    weigh it by the mean labeling change it produces."""
    probes = probes_per_param or state.config.probes_per_param
    base = state.current_node.instance
    raw: dict[str, float] = {}
    for name in PARAMETERS:
        if state.constraints.is_fixed(name):
            raw[name] = 0.0
            continue
        deltas = []
        for _ in range(probes):
            candidate = _perturb(state, base.params, name)
            if candidate is None:
                deltas.append(0.0)
                continue
            try:
                candidate.validate()
                inst = _run(state, candidate)
                deltas.append(max(0.0, delta_l(base.labeling.as_array(),
                                               inst.labeling.as_array())))
            except Exception:
                deltas.append(0.0)
        raw[name] = float(np.mean(deltas)) if deltas else 0.0
    total = sum(raw.values())
    free = [p for p in PARAMETERS if not state.constraints.is_fixed(p)]
    if total <= 1e-12:
        weights = {p: (1.0 / len(free) if p in free else 0.0) for p in PARAMETERS}
    else:
        weights = {p: raw[p] / total for p in PARAMETERS}
    state.weights = weights
    return weights


# --- candidate generation ------------------------------------------------------------

_CHANGE_UNIT = 1.0  # categorical flips count as one unit of change


def param_change_magnitudes(a: ClusteringParams, b: ClusteringParams,
                            k_range: tuple[int, int]) -> dict[str, float]:
    width = max(1, k_range[1] - k_range[0])
    union = a.feature_subset | b.feature_subset
    inter = a.feature_subset & b.feature_subset
    return {
        "feature_subset": 1.0 - len(inter) / len(union) if union else 0.0,
        "k": abs(a.k - b.k) / width,
        "algorithm": _CHANGE_UNIT if a.algorithm != b.algorithm else 0.0,
        "metric": _CHANGE_UNIT if a.metric != b.metric else 0.0,
        "linkage": _CHANGE_UNIT if (a.algorithm == "agglomerative"
                                    and b.algorithm == "agglomerative"
                                    and a.linkage != b.linkage) else 0.0,
        "standardize": _CHANGE_UNIT if a.standardize != b.standardize else 0.0,
    }


def delta_p(state: TourState, a: ClusteringParams, b: ClusteringParams) -> float:
    mags = param_change_magnitudes(a, b, state.config.k_range)
    return float(sum(state.weights.get(p, 0.0) * c for p, c in mags.items()))


def _weighted_params(state: TourState, pool: list[str], count: int) -> list[str]:
    chosen: list[str] = []
    remaining = list(pool)
    for _ in range(min(count, len(remaining))):
        w = np.array([max(state.weights.get(p, 0.0), 1e-9) for p in remaining])
        probs = w / w.sum()
        pick = remaining[int(state.rng.choice(len(remaining), p=probs))]
        chosen.append(pick)
        remaining.remove(pick)
    return chosen


def _cycled_feature_subset(state: TourState, base: ClusteringParams) -> frozenset[int]:
    """Next ranking method in the cycle supplies the subset; the top-ranked
    feature is excluded with probability 0.5 to avoid single-feature bias."""
    node = state.current_node
    method = RANKING_METHODS[state.feature_cycle % len(RANKING_METHODS)]
    state.feature_cycle += 1
    pool = sorted(state.ds.enabled_features)
    labels = node.instance.labeling
    if method == "anova_f" and labels.k_effective < 2:
        method = "variance"
    try:
        ranking = rank_features(state.ds, method, labeling=labels,
                                row_indices=list(node.instance.row_indices),
                                features=pool)
    except Exception:
        ranking = rank_features(state.ds, "variance", features=pool)
    ranked = ranking.features()
    m = min(max(1, len(base.feature_subset)), len(ranked))
    if state.rng.random() < state.config.exclude_top_prob and len(ranked) >= 2:
        ranked = ranked[1:]
    return frozenset(ranked[:m])


def _apply_constraints(state: TourState, params: ClusteringParams) -> ClusteringParams:
    fixed = state.constraints.fixed
    updates = {}
    for name, value in fixed.items():
        if name == "feature_subset":
            updates[name] = frozenset(value)
        else:
            updates[name] = value
    return replace(params, **updates) if updates else params


def _explore_candidate(state: TourState) -> ClusteringParams | None:
    base = state.current_node.instance.params
    free = [p for p in PARAMETERS if not state.constraints.is_fixed(p)]
    if not free:
        raise AllParamsFixed("no variable parameters")
    count = 1 + (1 if state.rng.random() < state.config.second_param_prob else 0)
    params = base
    changed = False
    for name in _weighted_params(state, free, count):
        if name == "feature_subset":
            subset = _cycled_feature_subset(state, params)
            if subset != params.feature_subset:
                params = replace(params, feature_subset=subset)
                changed = True
        else:
            nxt = _perturb(state, params, name)
            if nxt is not None:
                params = nxt
                changed = True
    return _apply_constraints(state, params) if changed else None


def _refine_candidate(state: TourState, relax: bool = False) -> ClusteringParams | None:
    """One-parameter variation of the liked node. The top half of the
    parameters by weight (always feature_subset and k) stays frozen; when
    that pool is exhausted only feature_subset and k remain frozen and a
    second chained perturbation may widen the reachable family."""
    liked = state.nodes[state.liked].instance.params
    free = [p for p in PARAMETERS if not state.constraints.is_fixed(p)]
    if relax:
        frozen = {"feature_subset", "k"}
    else:
        ordered = sorted(free, key=lambda p: -state.weights.get(p, 0.0))
        frozen = set(ordered[:max(1, len(ordered) // 2)]) | {"feature_subset", "k"}
    perturbable = [p for p in free if p not in frozen]
    if not perturbable:
        raise NoViableCandidate("every parameter is frozen in refine mode")
    name = _choice(state.rng, perturbable)
    params = _perturb(state, liked, name)
    if relax:
        chained = params if params is not None else liked
        others = [p for p in perturbable if p != name]
        if others and state.rng.random() < 0.5:
            second = _perturb(state, chained, _choice(state.rng, others))
            if second is not None:
                params = second
    if params is None:
        return None
    return _apply_constraints(state, params)


def generate_candidates(state: TourState, batch: int | None = None
                        ) -> list[tuple[ClusteringParams, ClusteringInstance]]:
    """Draw, run and vet a batch of candidate solutions.

    Candidates duplicating existing nodes, sitting within the tabu radius
    of a disliked node, or collapsing below two clusters are redrawn (three
    redraws per slot); after a backtrack they must also clear the departure
    distance from the freshly disliked node while redraws remain.
    """
    batch = batch or state.config.batch
    taken = state.node_keys()
    out: list[tuple[ClusteringParams, ClusteringInstance]] = []
    departure_from = state.last_disliked
    attempts_total = 1 + state.config.redraws
    for _ in range(batch):
        accepted = None
        fallback = None
        for attempt in range(attempts_total):
            if state.mode == "refine":
                # late attempts unfreeze the low-weight frozen parameters
                params = _refine_candidate(state,
                                           relax=attempt >= attempts_total // 2)
            else:
                params = _explore_candidate(state)
            if params is None:
                continue
            try:
                params.validate()
                inst = _run(state, params)
            except Exception:
                continue
            if inst.cache_key in taken:
                continue
            if inst.labeling.k_effective < 2:
                continue
            labels = inst.labeling.as_array()
            near_tabu = any(
                delta_l(labels, state.nodes[t].instance.labeling.as_array())
                < state.config.tabu_radius
                for t in state.tabu)
            if near_tabu:
                continue
            if departure_from is not None:
                dep = delta_l(labels,
                              state.nodes[departure_from].instance.labeling.as_array())
                if dep < state.config.departure_target:
                    fallback = (params, inst)  # legal but not distant enough
                    continue
            accepted = (params, inst)
            break
        chosen = accepted or fallback
        if chosen is not None:
            taken.add(chosen[1].cache_key)
            out.append(chosen)
    if not out:
        raise NoViableCandidate("no candidate survived the redraw budget")
    return out


# --- stepping -------------------------------------------------------------------------

def _add_node(state: TourState, inst: ClusteringInstance, parent: int) -> TourNode:
    node = TourNode(node_id=state.next_id, instance=inst, parent=parent)
    state.nodes[node.node_id] = node
    state.next_id += 1
    return node


def step(state: TourState, feedback: str) -> TourNode:
    """Advance the tour with one unit of user feedback; returns the node
    that becomes current."""
    if feedback == FEEDBACK_LIKE:
        node = state.current_node
        node.feedback = "liked"
        state.liked = node.node_id
        state.mode = "refine"
        return node

    if feedback == FEEDBACK_BAD:
        node = state.current_node
        node.feedback = "disliked"
        state.tabu.add(node.node_id)
        state.last_disliked = node.node_id
        if node.parent is not None:
            state.current = node.parent
        state.mode = "explore"
        return state.current_node

    if feedback != FEEDBACK_GENERATE:
        raise ValueError(f"unknown feedback {feedback!r}")

    origin = state.current_node
    candidates = generate_candidates(state)
    batch_nodes = [_add_node(state, inst, origin.node_id) for _, inst in candidates]

    if state.mode == "refine":
        pool = [n.instance for n in batch_nodes] + [origin.instance]
        scores = combined_score(state.ds, pool)
        for inst, s in zip(pool, scores):
            inst.score = float(s)

    origin_labels = origin.instance.labeling.as_array()
    best, best_key = None, None
    for node in batch_nodes:
        dl = max(0.0, delta_l(origin_labels, node.instance.labeling.as_array()))
        dp = delta_p(state, origin.instance.params, node.instance.params)
        ds_ = node.instance.score - origin.instance.score
        state.edges.append(TourEdge(a=origin.node_id, b=node.node_id,
                                    delta_p=dp, delta_l=dl, delta_s=ds_))
        key = ds_ if state.mode == "refine" else dl
        if best is None or key > best_key:
            best, best_key = node, key
    state.last_disliked = None  # departure constraint applies to one batch
    state.current = best.node_id
    return best


def accept(state: TourState) -> ClusteringParams:
    """Hand back the current node's parameters; the tour stays resumable."""
    return state.current_node.instance.params


def choose_embedding(state_or_ds, instance: ClusteringInstance,
                     iterations: int = 250, seed: int = 0):
    """Project with every method and keep the one whose 2D silhouette is
    best; ties prefer pca, then cmds, then tsne."""
    ds = state_or_ds.ds if isinstance(state_or_ds, TourState) else state_or_ds
    x, _ = feature_matrix(ds, instance.params)
    labels = instance.labeling.as_array()
    n = len(x)
    results = []
    for method in ("pca", "cmds", "tsne"):
        params = ProjectionParams(method=method, seed=seed, iterations=iterations,
                                  perplexity=min(30.0, max(2.0, (n - 1) / 3 - 1)))
        try:
            emb = project(x, params)
            score = score_projection(emb, labels)
        except Exception:
            continue
        results.append((method, emb, score))
    if not results:
        raise NoViableCandidate("no projection method succeeded")
    best = results[0]
    for cand in results[1:]:
        if cand[2] > best[2]:
            best = cand
    return best[1], best[0], {m: s for m, _, s in results}


def ensure_embedding(state: TourState, node_id: int) -> TourNode:
    node = state.nodes[node_id]
    if node.embedding is None:
        emb, method, _ = choose_embedding(state, node.instance,
                                          iterations=state.config.embedding_iterations,
                                          seed=state.rng_seed)
        node.embedding = emb
        node.embedding_method = method
    return node


# --- serialization ---------------------------------------------------------------------

def tour_to_dict(state: TourState) -> dict:
    def _inst(inst: ClusteringInstance) -> dict:
        return {
            "params": inst.params.to_dict(),
            "labels": list(inst.labeling.labels),
            "k_effective": inst.labeling.k_effective,
            "row_indices": list(inst.row_indices),
            "inertia": inst.inertia,
            "score": inst.score,
            "cache_key": inst.cache_key,
            "dataset_fingerprint": inst.dataset_fingerprint,
        }

    return {
        "nodes": [{
            "node_id": n.node_id, "parent": n.parent, "feedback": n.feedback,
            "instance": _inst(n.instance),
        } for n in sorted(state.nodes.values(), key=lambda n: n.node_id)],
        "edges": [e.__dict__ for e in state.edges],
        "weights": state.weights,
        "constraints": state.constraints.to_dict(),
        "current": state.current,
        "mode": state.mode,
        "rng_seed": state.rng_seed,
        "rng_state": _encode_rng(state.rng),
        "tabu": sorted(state.tabu),
        "liked": state.liked,
        "last_disliked": state.last_disliked,
        "feature_cycle": state.feature_cycle,
        "next_id": state.next_id,
        "entry_view_id": state.entry_view_id,
        "config": state.config.__dict__ | {"k_range": list(state.config.k_range)},
    }


def _encode_rng(rng: np.random.Generator) -> dict:
    st = rng.bit_generator.state
    return {"state": int(st["state"]["state"]), "inc": int(st["state"]["inc"]),
            "has_uint32": int(st["has_uint32"]), "uinteger": int(st["uinteger"])}


def _decode_rng(seed: int, payload: dict) -> np.random.Generator:
    rng = np.random.Generator(np.random.PCG64(seed))
    st = rng.bit_generator.state
    st["state"]["state"] = payload["state"]
    st["state"]["inc"] = payload["inc"]
    st["has_uint32"] = payload["has_uint32"]
    st["uinteger"] = payload["uinteger"]
    rng.bit_generator.state = st
    return rng


def tour_from_dict(ds: Dataset, payload: dict, cache=None) -> TourState:
    from .engine import Labeling

    def _inst(d: dict) -> ClusteringInstance:
        params = ClusteringParams.from_dict(d["params"])
        labeling = Labeling(labels=tuple(d["labels"]), k_effective=d["k_effective"])
        x, _ = feature_matrix(ds.restrict_rows(d["row_indices"]),
                              replace(params, sample_rate=1.0))
        labels = labeling.as_array()
        cents = [x[labels == j].mean(axis=0) for j in range(labeling.k_effective)]
        centroids = np.vstack(cents) if cents else np.zeros((0, x.shape[1]))
        return ClusteringInstance(
            params=params, labeling=labeling,
            row_indices=tuple(d["row_indices"]), centroids=centroids,
            inertia=d["inertia"], cache_key=d["cache_key"],
            dataset_fingerprint=d["dataset_fingerprint"], score=d["score"])

    cfg_raw = dict(payload["config"])
    cfg_raw["k_range"] = tuple(cfg_raw["k_range"])
    config = TourConfig(**cfg_raw)
    nodes = {}
    for nd in payload["nodes"]:
        node = TourNode(node_id=nd["node_id"], instance=_inst(nd["instance"]),
                        parent=nd["parent"], feedback=nd["feedback"])
        nodes[node.node_id] = node
    state = TourState(
        ds=ds, nodes=nodes,
        edges=[TourEdge(**e) for e in payload["edges"]],
        weights=dict(payload["weights"]),
        constraints=TourConstraints.from_dict(payload["constraints"]),
        current=payload["current"], mode=payload["mode"],
        rng_seed=payload["rng_seed"],
        rng=_decode_rng(payload["rng_seed"], payload["rng_state"]),
        config=config, cache=cache,
        tabu=set(payload["tabu"]), liked=payload["liked"],
        last_disliked=payload.get("last_disliked"),
        feature_cycle=payload["feature_cycle"], next_id=payload["next_id"],
        entry_view_id=payload.get("entry_view_id"),
    )
    return state
