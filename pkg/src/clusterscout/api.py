"""HTTP/JSON service: datasets, instances, guidance, tours and sessions.

Every mutating endpoint routes through the session operation log, so any
sequence of API calls can be undone, redone, saved and replayed.
"""

from __future__ import annotations

import math
import threading
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Query, Request, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import filters, insight, session as session_mod, tour as tour_mod, validation
from .cache import PrecomputeCache, precompute_k_range
from .dataset import (Dataset, Selection, detect_outliers, feature_stats,
                      load_csv, sampling_advice, top_correlations)
from .engine import (ClusteringInstance, ClusteringParams, isolate_and_recluster)
from .errors import (AllParamsFixed, ClusterScoutError, CorruptPayload,
                     DimensionMismatch, EmptySelection, InvalidCombination,
                     InvalidRate, LengthMismatch, MalformedInput,
                     MissingLabels, NotApplicable, NothingToRedo,
                     NothingToUndo, ParseError, SchemaMismatch,
                     UnknownCluster, UnknownFeature, UnknownId)
from .projection import ProjectionParams, project

API = "/api/v1"

_INPUT_ERRORS = (MalformedInput, ParseError, UnknownFeature, InvalidRate,
                 InvalidCombination, NotApplicable, LengthMismatch,
                 SchemaMismatch, CorruptPayload, AllParamsFixed, EmptySelection,
                 MissingLabels, DimensionMismatch)
_NOT_FOUND = (UnknownId, UnknownCluster)
_CONFLICT = (NothingToUndo, NothingToRedo)


class AppState:
    def __init__(self, cache_capacity: int = 256):
        self.datasets: dict[str, Dataset] = {}
        self.cache = PrecomputeCache(cache_capacity)
        self.sessions: dict[str, session_mod.SessionState] = {}
        self.instance_session: dict[str, str] = {}
        self.instance_dataset: dict[str, str] = {}
        self.tour_session: dict[str, str] = {}
        self._tour_counter = 0
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def new_tour_id(self) -> str:
        with self._locks_guard:
            self._tour_counter += 1
            return f"t{self._tour_counter}"

    def write_lock(self, session_id: str) -> threading.Lock:
        """Sessions are single-writer: every mutating endpoint serializes
        through its session's lock."""
        with self._locks_guard:
            if session_id not in self._locks:
                self._locks[session_id] = threading.Lock()
            return self._locks[session_id]

    def session(self, session_id: str) -> session_mod.SessionState:
        if session_id not in self.sessions:
            st = session_mod.SessionState(cache=self.cache)
            self.sessions[session_id] = st
        return self.sessions[session_id]

    def dataset(self, dataset_id: str) -> Dataset:
        if dataset_id not in self.datasets:
            raise UnknownId(f"no dataset {dataset_id}")
        return self.datasets[dataset_id]

    def view(self, instance_id: str):
        sid = self.instance_session.get(instance_id)
        if sid is None:
            raise UnknownId(f"no instance {instance_id}")
        sess = self.sessions[sid]
        if instance_id not in sess.views:
            raise UnknownId(f"instance {instance_id} is gone (undone?)")
        ds = self.dataset(self.instance_dataset[instance_id])
        return sess, ds, sess.views[instance_id].instance


class ParamsBody(BaseModel):
    algorithm: str = "kmeans"
    metric: str = "euclidean"
    linkage: str = "complete"
    k: int = 3
    eps: float = 0.5
    min_pts: int = 5
    features: list[int] | None = None
    sample_rate: float = 1.0
    seed: int = 0
    standardize: bool = True


class InstanceBody(BaseModel):
    dataset_id: str
    params: ParamsBody = ParamsBody()
    session: str = "default"


class FilterBody(BaseModel):
    expression: str


class IsolateBody(BaseModel):
    row_indices: list[int]
    params: ParamsBody | None = None


class ReassignBody(BaseModel):
    desired_labels: list[int]


class TourBody(BaseModel):
    entry_instance_id: str
    constraints: dict = {}
    seed: int = 0
    batch: int | None = None


class StepBody(BaseModel):
    feedback: str


class NameBody(BaseModel):
    name: str | None


class PatchParamsBody(BaseModel):
    k: int | None = None
    algorithm: str | None = None
    metric: str | None = None
    linkage: str | None = None
    eps: float | None = None
    min_pts: int | None = None
    features: list[int] | None = None
    sample_rate: float | None = None
    seed: int | None = None
    standardize: bool | None = None


def _params_from_body(body: ParamsBody, ds: Dataset) -> ClusteringParams:
    features = body.features if body.features is not None \
        else sorted(ds.enabled_features)
    return ClusteringParams(
        feature_subset=frozenset(int(f) for f in features),
        algorithm=body.algorithm, metric=body.metric, linkage=body.linkage,
        k=body.k, eps=body.eps, min_pts=body.min_pts,
        sample_rate=body.sample_rate, seed=body.seed,
        standardize=body.standardize)


def _json_safe(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def _instance_payload(app_state: AppState, instance_id: str,
                      sess: session_mod.SessionState, ds: Dataset,
                      inst: ClusteringInstance) -> dict:
    names = dict(sess.cluster_names.get(instance_id, {}))
    defaults = {}
    for cid in range(inst.labeling.k_effective):
        defaults[cid] = names.get(cid) or insight.representative_row(ds, inst, cid)
    return {
        "instance_id": instance_id,
        "dataset_id": ds.fingerprint(),
        "params": inst.params.to_dict(),
        "labels": list(inst.labeling.labels),
        "k_effective": inst.labeling.k_effective,
        "row_indices": list(inst.row_indices),
        "cluster_sizes": inst.cluster_sizes,
        "cluster_names": {str(c): n for c, n in defaults.items()},
        "centroids": [[_json_safe(float(v)) for v in row] for row in inst.centroids],
        "inertia": inst.inertia,
        "score": inst.score,
        "cache_key": inst.cache_key,
    }


def create_app(cache_capacity: int = 256, frontend_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="clusterscout", version="0.1.0")
    state = AppState(cache_capacity)
    app.state.scout = state

    @app.exception_handler(ClusterScoutError)
    async def _scout_error(request: Request, exc: ClusterScoutError):
        if isinstance(exc, _NOT_FOUND):
            code = 404
        elif isinstance(exc, _CONFLICT):
            code = 409
        elif isinstance(exc, _INPUT_ERRORS):
            code = 400
        else:
            code = 422
        body = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        if isinstance(exc, ParseError):
            body["error"]["pos"] = exc.pos
        return JSONResponse(status_code=code, content=body)

    @app.get(API + "/health")
    def health():
        return {"status": "ok"}

    # --- datasets -----------------------------------------------------------

    @app.post(API + "/datasets")
    async def upload_dataset(request: Request, session: str = "default"):
        ds = load_csv(await request.body())
        did = ds.fingerprint()
        state.datasets[did] = ds
        sess = state.session(session)
        if sess.dataset is None:
            sess.dataset = ds
            sess.enabled_features = sorted(ds.enabled_features)
        return {
            "dataset_id": did,
            "rows": ds.n_rows,
            "features": ds.n_features,
            "feature_names": ds.feature_names,
            "dropped_rows": ds.dropped_rows,
            "dropped_columns": ds.dropped_columns,
            "sampling": sampling_advice(ds),
        }

    @app.get(API + "/datasets/{dataset_id}")
    def dataset_info(dataset_id: str):
        ds = state.dataset(dataset_id)
        return {
            "dataset_id": dataset_id, "rows": ds.n_rows,
            "features": ds.n_features, "feature_names": ds.feature_names,
            "row_ids": ds.row_ids, "values": [list(map(float, r)) for r in ds.values],
            "enabled_features": sorted(ds.enabled_features),
            "dropped_rows": ds.dropped_rows,
            "sampling": sampling_advice(ds),
        }

    @app.get(API + "/datasets/{dataset_id}/stats")
    def dataset_stats(dataset_id: str, selection: str | None = None):
        ds = state.dataset(dataset_id)
        sel = None
        if selection:
            idx = tuple(int(i) for i in selection.split(",") if i != "")
            sel = Selection(idx)
        stats = feature_stats(ds, sel)
        return {"stats": [{
            "feature": s.feature, "name": ds.feature_names[s.feature],
            "mean": s.mean, "std": s.std, "min": s.min, "max": s.max,
            "q1": s.q1, "median": s.median, "q3": s.q3,
            "histogram": s.histogram, "bin_edges": s.bin_edges,
            "skewness": s.skewness,
        } for s in stats]}

    @app.get(API + "/datasets/{dataset_id}/correlations")
    def dataset_correlations(dataset_id: str, k: int = 5):
        ds = state.dataset(dataset_id)
        pairs = top_correlations(ds, k)
        return {"correlations": [{"a": a, "b": b, "r": r} for a, b, r in pairs]}

    @app.get(API + "/datasets/{dataset_id}/outliers")
    def dataset_outliers(dataset_id: str, feature: int):
        ds = state.dataset(dataset_id)
        return {"feature": feature, "flags": detect_outliers(ds, feature)}

    @app.post(API + "/datasets/{dataset_id}/filter")
    def dataset_filter(dataset_id: str, body: FilterBody):
        ds = state.dataset(dataset_id)
        sel = filters.evaluate(filters.parse_filter(body.expression), ds)
        return {"row_indices": list(sel.row_indices)}

    # --- instances -----------------------------------------------------------

    @app.post(API + "/instances")
    def create_instance(body: InstanceBody):
        ds = state.dataset(body.dataset_id)
        sess = state.session(body.session)
        if sess.dataset is None:
            sess.dataset = ds
            sess.enabled_features = sorted(ds.enabled_features)
        params = _params_from_body(body.params, ds)
        inst = state.cache.get_or_compute(ds, params)
        inst.score = validation.combined_score(ds, [inst])[0]
        with state.write_lock(body.session):
            view_id = sess.new_id("v")
            session_mod.apply_op(sess, {
                "name": "add_view", "view_id": view_id,
                "instance": session_mod._instance_to_dict(inst)})
            state.instance_session[view_id] = body.session
            state.instance_dataset[view_id] = body.dataset_id
        return _instance_payload(state, view_id, sess, ds, sess.views[view_id].instance)

    @app.get(API + "/instances/{instance_id}")
    def get_instance(instance_id: str):
        sess, ds, inst = state.view(instance_id)
        return _instance_payload(state, instance_id, sess, ds, inst)

    @app.post(API + "/instances/{instance_id}/params")
    def patch_instance(instance_id: str, body: PatchParamsBody):
        sess, ds, inst = state.view(instance_id)
        updates = {k: v for k, v in body.model_dump().items() if v is not None}
        if "features" in updates:
            updates["feature_subset"] = frozenset(int(f) for f in updates.pop("features"))
        from dataclasses import replace as _replace
        params = _replace(inst.params, **updates)
        new_inst = state.cache.get_or_compute(ds, params)
        new_inst.score = validation.combined_score(ds, [new_inst])[0]
        with state.write_lock(state.instance_session[instance_id]):
            session_mod.apply_op(sess, {
                "name": "set_view_instance", "view_id": instance_id,
                "instance": session_mod._instance_to_dict(new_inst)})
        return _instance_payload(state, instance_id, sess, ds,
                                 sess.views[instance_id].instance)

    @app.post(API + "/instances/{instance_id}/precompute")
    def precompute(instance_id: str, k_from: int = Query(2, alias="from"),
                   k_to: int = Query(8, alias="to")):
        _, ds, inst = state.view(instance_id)
        report = precompute_k_range(ds, inst.params, range(k_from, k_to + 1),
                                    state.cache)
        return report

    @app.get(API + "/instances/{instance_id}/aggregate")
    def aggregate(instance_id: str, top_m: int | None = None):
        _, ds, inst = state.view(instance_id)
        mat = insight.aggregate_matrix(ds, inst, top_m=top_m)
        tree = insight.fit_rule_tree(ds, inst) if inst.labeling.k_effective >= 1 else None
        descriptions = [insight.describe_cluster(mat, cid, tree)
                        for cid in mat.cluster_order]
        return {
            "cluster_order": mat.cluster_order,
            "cluster_sizes": mat.cluster_sizes,
            "feature_order": mat.feature_order,
            "feature_names": mat.feature_names,
            "feature_p": [_json_safe(p) for p in mat.feature_p],
            "cells": [[{"cluster_mean": c.cluster_mean, "z": c.z,
                        "p_value": _json_safe(c.p_value)} for c in row]
                      for row in mat.cells],
            "descriptions": descriptions,
        }

    @app.get(API + "/instances/{instance_id}/embedding")
    def embedding(instance_id: str, method: str = "pca", seed: int = 0,
                  perplexity: float = 30.0, iterations: int = 500):
        _, ds, inst = state.view(instance_id)
        from .engine import feature_matrix
        x, _ = feature_matrix(ds, inst.params)
        if method == "auto":
            emb, chosen, scores = tour_mod.choose_embedding(ds, inst, seed=seed)
            return {"method": chosen, "coords": emb.coords.tolist(),
                    "scores": scores}
        if method == "tsne":
            perplexity = min(perplexity, max(2.0, (len(x) - 1) / 3 - 1e-9))
        params = ProjectionParams(method=method, seed=seed,
                                  perplexity=perplexity, iterations=iterations)
        key = f"emb:{inst.cache_key}:{params.to_dict()}"
        emb = state.cache.get_or_compute_value(key, lambda: project(x, params))
        out = {"method": method, "coords": emb.coords.tolist()}
        if emb.explained_variance is not None:
            out["explained_variance"] = list(emb.explained_variance)
        return out

    @app.get(API + "/instances/{instance_id}/kscan")
    def kscan(instance_id: str, k_from: int = Query(2, alias="from"),
              k_to: int = Query(8, alias="to"),
              measures: str = "silhouette"):
        _, ds, inst = state.view(instance_id)
        wanted = [m.strip() for m in measures.split(",") if m.strip()]
        scan = validation.k_scan(ds, inst.params, range(k_from, k_to + 1),
                                 wanted, cache=state.cache)
        return {
            "k_values": scan.k_values,
            "scores": {m: [_json_safe(v) for v in vs] for m, vs in scan.scores.items()},
            "inertia": scan.inertia,
            "suggestions": scan.suggestions,
            "suggested_k": scan.suggested_k,
            "confidence": scan.confidence,
        }

    @app.get(API + "/instances/{instance_id}/rules")
    def rules(instance_id: str, max_depth: int = 3):
        _, ds, inst = state.view(instance_id)
        tree = insight.fit_rule_tree(ds, inst, max_depth=max_depth)
        return {
            "max_depth": tree.max_depth,
            "training_fidelity": tree.training_fidelity,
            "rules": {str(c): rs for c, rs in sorted(insight.extract_rules(tree).items())},
        }

    @app.get(API + "/instances/{instance_id}/uncertain")
    def uncertain(instance_id: str):
        _, ds, inst = state.view(instance_id)
        from .engine import feature_matrix
        x, _ = feature_matrix(ds, inst.params)
        flagged, confidence = insight.uncertain_points(x, inst.labeling,
                                                       inst.params.metric)
        return {
            "flagged_positions": list(flagged.row_indices),
            "flagged_rows": [inst.row_indices[i] for i in flagged.row_indices],
            "confidence": [float(c) for c in confidence],
        }

    @app.get(API + "/instances/{instance_id}/suggest")
    def suggest(instance_id: str, kind: str):
        _, ds, inst = state.view(instance_id)
        if kind in ("metric", "linkage"):
            best, ranked = validation.suggest_parameter(ds, inst, kind,
                                                        cache=state.cache)
            return {"kind": kind, "best": best,
                    "scores": [{"value": v, "score": s} for v, s in ranked]}
        if kind == "projection":
            emb, method, scores = tour_mod.choose_embedding(ds, inst)
            return {"kind": kind, "best": method, "scores": scores,
                    "coords": emb.coords.tolist()}
        if kind == "measures":
            conditions = validation.detect_conditions(ds, inst)
            suited = validation.suitable_measures(conditions)
            fallback = not suited
            names = [m.name for m in (suited or
                     [validation.MEASURES[n] for n in validation.MEASURE_ORDER])]
            return {"kind": kind, "conditions": conditions.__dict__,
                    "measures": names, "fallback": fallback}
        raise NotApplicable(f"cannot suggest {kind!r}")

    @app.post(API + "/instances/{instance_id}/isolate")
    def isolate(instance_id: str, body: IsolateBody):
        sess, ds, inst = state.view(instance_id)
        params = _params_from_body(body.params, ds) if body.params else inst.params
        sub = isolate_and_recluster(ds, inst, Selection(tuple(body.row_indices)), params)
        with state.write_lock(state.instance_session[instance_id]):
            view_id = sess.new_id("v")
            session_mod.apply_op(sess, {
                "name": "add_view", "view_id": view_id,
                "instance": session_mod._instance_to_dict(sub)})
            state.instance_session[view_id] = state.instance_session[instance_id]
            state.instance_dataset[view_id] = state.instance_dataset[instance_id]
        return _instance_payload(state, view_id, sess, ds, sess.views[view_id].instance)

    @app.post(API + "/instances/{instance_id}/reassign")
    def reassign(instance_id: str, body: ReassignBody):
        _, ds, inst = state.view(instance_id)
        if len(body.desired_labels) != len(inst.labeling.labels):
            raise LengthMismatch("desired labels must cover the clustered rows")
        ranked = insight.reassignment_search(ds, np.asarray(body.desired_labels),
                                             inst.params, cache=state.cache)
        return {"results": [{
            "params": p.to_dict(), "ami": _json_safe(s),
        } for p, s in ranked]}

    @app.post(API + "/instances/{instance_id}/clusters/{cluster_id}/name")
    def name_cluster(instance_id: str, cluster_id: int, body: NameBody):
        sess, ds, inst = state.view(instance_id)
        if not 0 <= cluster_id < inst.labeling.k_effective:
            raise UnknownCluster(f"no cluster {cluster_id}")
        with state.write_lock(state.instance_session[instance_id]):
            session_mod.apply_op(sess, {
                "name": "name_cluster", "view_id": instance_id,
                "cluster_id": cluster_id, "cluster_name": body.name})
        return {"instance_id": instance_id, "cluster_id": cluster_id,
                "name": body.name}

    # --- tour ------------------------------------------------------------------

    def _tour(tour_id: str):
        sid = state.tour_session.get(tour_id)
        if sid is not None and tour_id in state.sessions[sid].tours:
            return state.sessions[sid], state.sessions[sid].tours[tour_id]
        for sid, sess in state.sessions.items():  # sessions loaded via PUT
            if tour_id in sess.tours:
                state.tour_session[tour_id] = sid
                return sess, sess.tours[tour_id]
        raise UnknownId(f"no tour {tour_id}")

    def _node_payload(t: tour_mod.TourState, node: tour_mod.TourNode,
                      with_embedding: bool = False) -> dict:
        out = {
            "node_id": node.node_id,
            "parent": node.parent,
            "feedback": node.feedback,
            "params": node.instance.params.to_dict(),
            "k_effective": node.instance.labeling.k_effective,
            "cluster_sizes": node.instance.cluster_sizes,
            "score": node.instance.score,
            "labels": list(node.instance.labeling.labels),
        }
        if with_embedding:
            tour_mod.ensure_embedding(t, node.node_id)
            out["embedding"] = {
                "method": node.embedding_method,
                "coords": node.embedding.coords.tolist(),
            }
        return out

    @app.post(API + "/tour")
    def create_tour(body: TourBody):
        sess, ds, inst = state.view(body.entry_instance_id)
        constraints = tour_mod.TourConstraints.from_dict(body.constraints)
        config = tour_mod.TourConfig(batch=body.batch) if body.batch \
            else tour_mod.TourConfig()
        t = tour_mod.init_tour(ds, inst, constraints, seed=body.seed,
                               config=config, cache=state.cache)
        t.entry_view_id = body.entry_instance_id
        tour_mod.estimate_weights(t)
        tid = state.new_tour_id()
        with state.write_lock(state.instance_session[body.entry_instance_id]):
            session_mod.apply_op(sess, {
                "name": "put_tour", "tour_id": tid,
                "snapshot": tour_mod.tour_to_dict(t)})
            state.tour_session[tid] = state.instance_session[body.entry_instance_id]
        return {"tour_id": tid, "weights": t.weights, "mode": t.mode,
                "current": t.current}

    @app.post(API + "/tour/{tour_id}/step")
    def tour_step(tour_id: str, body: StepBody, embedding: bool = False):
        if body.feedback not in ("generate", "like", "bad"):
            raise NotApplicable(f"unknown feedback {body.feedback!r}")
        sess, t = _tour(tour_id)
        with state.write_lock(state.tour_session.get(tour_id, "default")):
            before = tour_mod.tour_to_dict(t)
            node = tour_mod.step(t, body.feedback)
            sess.log.record("put_tour",
                            {"tour_id": tour_id,
                             "snapshot": tour_mod.tour_to_dict(t)},
                            {"name": "put_tour", "tour_id": tour_id,
                             "snapshot": before})
        return {"tour_id": tour_id, "mode": t.mode, "current": t.current,
                "weights": t.weights,
                "node": _node_payload(t, node, with_embedding=embedding)}

    @app.get(API + "/tour/{tour_id}/history")
    def tour_history(tour_id: str):
        _, t = _tour(tour_id)
        return {
            "tour_id": tour_id, "mode": t.mode, "current": t.current,
            "weights": t.weights,
            "nodes": [_node_payload(t, n) for n in
                      sorted(t.nodes.values(), key=lambda n: n.node_id)],
            "edges": [e.__dict__ for e in t.edges],
            "tabu": sorted(t.tabu),
        }

    @app.post(API + "/tour/{tour_id}/accept")
    def tour_accept(tour_id: str):
        sess, t = _tour(tour_id)
        params = tour_mod.accept(t)
        view_id = t.entry_view_id
        inst = state.cache.get_or_compute(t.ds, params)
        if view_id and view_id in sess.views:
            with state.write_lock(state.tour_session.get(tour_id, "default")):
                session_mod.apply_op(sess, {
                    "name": "set_view_instance", "view_id": view_id,
                    "instance": session_mod._instance_to_dict(inst)})
        return {"tour_id": tour_id, "params": params.to_dict(),
                "view_id": view_id}

    # --- sessions -----------------------------------------------------------------

    @app.post(API + "/sessions/{session_id}/undo")
    def session_undo(session_id: str):
        sess = state.session(session_id)
        with state.write_lock(session_id):
            session_mod.undo(sess)
        return {"session": session_id, "cursor": sess.log.cursor,
                "entries": len(sess.log.entries)}

    @app.post(API + "/sessions/{session_id}/redo")
    def session_redo(session_id: str):
        sess = state.session(session_id)
        with state.write_lock(session_id):
            session_mod.redo(sess)
        return {"session": session_id, "cursor": sess.log.cursor,
                "entries": len(sess.log.entries)}

    @app.get(API + "/sessions/{session_id}")
    def session_save(session_id: str):
        sess = state.session(session_id)
        return Response(content=session_mod.save_session(sess),
                        media_type="application/json")

    @app.put(API + "/sessions/{session_id}")
    async def session_load(session_id: str, request: Request,
                           dataset_id: str | None = None):
        payload = await request.body()
        if dataset_id is None:
            import json as _json
            try:
                dataset_id = _json.loads(payload).get("dataset_fingerprint")
            except Exception:
                raise CorruptPayload("cannot read dataset fingerprint")
        ds = state.dataset(dataset_id)
        sess = session_mod.load_session(payload, ds, cache=state.cache)
        with state.write_lock(session_id):
            state.sessions[session_id] = sess
            for vid in sess.views:
                state.instance_session[vid] = session_id
                state.instance_dataset[vid] = dataset_id
            for tid in sess.tours:
                state.tour_session[tid] = session_id
        return {"session": session_id, "views": list(sess.view_order),
                "tours": sorted(sess.tours)}

    @app.get(API + "/sessions/{session_id}/log")
    def session_log(session_id: str):
        sess = state.session(session_id)
        return {"cursor": sess.log.cursor,
                "entries": [{"op": e.op_name, "timestamp": e.timestamp}
                            for e in sess.log.entries]}

    if frontend_dir and Path(frontend_dir).is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=frontend_dir, html=True),
                  name="frontend")

    return app


def serve(host: str = "127.0.0.1", port: int = 8000,
          frontend_dir: str | None = None):
    """Run the HTTP service (blocking)."""
    import uvicorn
    default_front = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    app = create_app(frontend_dir=frontend_dir or
                     (str(default_front) if default_front.is_dir() else None))
    uvicorn.run(app, host=host, port=port)
