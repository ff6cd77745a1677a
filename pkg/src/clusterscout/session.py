"""Session state with a linear operation log, undo/redo and save/load.

Every mutating operation is logged together with its inverse; undoing an
operation applies the inverse and moves the cursor, redo replays forward,
and any new operation discards the redo tail. The serialized form embeds
instance labels so sessions reload without recomputation.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .dataset import Dataset
from .engine import (ClusteringInstance, ClusteringParams, Labeling,
                     feature_matrix)
from .errors import (CorruptPayload, NothingToRedo, NothingToUndo,
                     SchemaMismatch, UnknownId)
from . import tour as tour_mod

SCHEMA_VERSION = 1


@dataclass
class LogEntry:
    timestamp: float
    op_name: str
    params: dict
    inverse: dict  # op dict that undoes this entry


@dataclass
class SessionLog:
    entries: list[LogEntry] = field(default_factory=list)
    cursor: int = 0  # entries[:cursor] are applied

    def record(self, op_name: str, params: dict, inverse: dict) -> None:
        del self.entries[self.cursor:]  # linear history: drop the redo tail
        self.entries.append(LogEntry(time.time(), op_name, params, inverse))
        self.cursor = len(self.entries)


@dataclass
class View:
    view_id: str
    instance: ClusteringInstance


@dataclass
class SessionState:
    dataset: Dataset | None = None
    views: dict[str, View] = field(default_factory=dict)
    view_order: list[str] = field(default_factory=list)
    active_view: str | None = None
    cluster_names: dict[str, dict[int, str]] = field(default_factory=dict)
    enabled_features: list[int] = field(default_factory=list)
    tours: dict[str, tour_mod.TourState] = field(default_factory=dict)
    log: SessionLog = field(default_factory=SessionLog)
    schema_version: int = SCHEMA_VERSION
    cache: object = None  # runtime-only; never serialized
    _counter: int = 0

    def new_id(self, prefix: str) -> str:
        self._counter += 1
        return f"{prefix}{self._counter}"


# --- operation application -------------------------------------------------------

def _instance_to_dict(inst: ClusteringInstance) -> dict:
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


def _instance_from_dict(ds: Dataset, d: dict) -> ClusteringInstance:
    params = ClusteringParams.from_dict(d["params"])
    labeling = Labeling(labels=tuple(d["labels"]), k_effective=d["k_effective"])
    rows = list(d["row_indices"])
    x, _ = feature_matrix(ds.restrict_rows(rows), replace(params, sample_rate=1.0))
    labels = labeling.as_array()
    cents = [x[labels == j].mean(axis=0) for j in range(labeling.k_effective)]
    centroids = np.vstack(cents) if cents else np.zeros((0, x.shape[1]))
    return ClusteringInstance(params=params, labeling=labeling,
                              row_indices=tuple(rows), centroids=centroids,
                              inertia=d["inertia"], cache_key=d["cache_key"],
                              dataset_fingerprint=d["dataset_fingerprint"],
                              score=d["score"])


def _apply(state: SessionState, op: dict) -> dict:
    """Apply one operation dict {name, ...}; returns the inverse op."""
    name = op["name"]
    if name == "add_view":
        view_id = op["view_id"]
        state.views[view_id] = View(view_id, _instance_from_dict(state.dataset, op["instance"]))
        state.view_order.append(view_id)
        prev_active = state.active_view
        state.active_view = view_id
        return {"name": "remove_view", "view_id": view_id,
                "restore_active": prev_active}
    if name == "remove_view":
        view_id = op["view_id"]
        if view_id not in state.views:
            raise UnknownId(f"no view {view_id}")
        view = state.views.pop(view_id)
        pos = state.view_order.index(view_id)
        state.view_order.remove(view_id)
        names = state.cluster_names.pop(view_id, None)
        prev_active = state.active_view
        if state.active_view == view_id:
            fallback = state.view_order[-1] if state.view_order else None
            wanted = op.get("restore_active", fallback)
            state.active_view = wanted if wanted in state.views else fallback
        return {"name": "restore_view", "view_id": view_id,
                "instance": _instance_to_dict(view.instance), "position": pos,
                "cluster_names": names, "prev_active": prev_active}
    if name == "restore_view":
        view_id = op["view_id"]
        before_active = state.active_view
        state.views[view_id] = View(view_id, _instance_from_dict(state.dataset, op["instance"]))
        state.view_order.insert(op["position"], view_id)
        if op.get("cluster_names"):
            state.cluster_names[view_id] = {int(k): v for k, v
                                            in op["cluster_names"].items()}
        state.active_view = op["prev_active"]
        return {"name": "remove_view", "view_id": view_id,
                "restore_active": before_active}
    if name == "set_active":
        prev = state.active_view
        if op["view_id"] is not None and op["view_id"] not in state.views:
            raise UnknownId(f"no view {op['view_id']}")
        state.active_view = op["view_id"]
        return {"name": "set_active", "view_id": prev}
    if name == "set_view_instance":
        view_id = op["view_id"]
        if view_id not in state.views:
            raise UnknownId(f"no view {view_id}")
        prev = _instance_to_dict(state.views[view_id].instance)
        state.views[view_id].instance = _instance_from_dict(state.dataset, op["instance"])
        return {"name": "set_view_instance", "view_id": view_id, "instance": prev}
    if name == "name_cluster":
        view_id, cid = op["view_id"], int(op["cluster_id"])
        if view_id not in state.views:
            raise UnknownId(f"no view {view_id}")
        names = state.cluster_names.setdefault(view_id, {})
        prev = names.get(cid)
        if op["cluster_name"] is None:
            names.pop(cid, None)
        else:
            names[cid] = op["cluster_name"]
        return {"name": "name_cluster", "view_id": view_id, "cluster_id": cid,
                "cluster_name": prev}
    if name == "set_enabled_features":
        prev = list(state.enabled_features)
        state.enabled_features = sorted(int(f) for f in op["features"])
        if state.dataset is not None:
            state.dataset = state.dataset.with_enabled(set(state.enabled_features))
        return {"name": "set_enabled_features", "features": prev}
    if name == "put_tour":
        tid = op["tour_id"]
        prev = tour_mod.tour_to_dict(state.tours[tid]) if tid in state.tours else None
        if op["snapshot"] is None:
            state.tours.pop(tid, None)
        else:
            state.tours[tid] = tour_mod.tour_from_dict(
                state.dataset, op["snapshot"], cache=state.cache)
        return {"name": "put_tour", "tour_id": tid, "snapshot": prev}
    raise ValueError(f"unknown operation {name!r}")


def apply_op(state: SessionState, op: dict) -> SessionState:
    """Apply and log one mutating operation."""
    inverse = _apply(state, op)
    state.log.record(op["name"], {k: v for k, v in op.items() if k != "name"}, inverse)
    return state


def undo(state: SessionState) -> SessionState:
    if state.log.cursor <= 0:
        raise NothingToUndo("nothing to undo")
    entry = state.log.entries[state.log.cursor - 1]
    _apply(state, entry.inverse)
    state.log.cursor -= 1
    return state


def redo(state: SessionState) -> SessionState:
    if state.log.cursor >= len(state.log.entries):
        raise NothingToRedo("nothing to redo")
    entry = state.log.entries[state.log.cursor]
    inverse = _apply(state, dict(entry.params, name=entry.op_name))
    state.log.entries[state.log.cursor] = LogEntry(
        entry.timestamp, entry.op_name, entry.params, inverse)
    state.log.cursor += 1
    return state


# --- fingerprint & serialization ---------------------------------------------------

def state_fingerprint(state: SessionState) -> str:
    """Canonical serialization of the analytic state: the log and the id
    counter (both monotonic bookkeeping) are excluded so undo sequences can
    be compared for exact restoration."""
    doc = _state_doc(state, include_log=False)
    doc.pop("counter", None)
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def _state_doc(state: SessionState, include_log: bool = True) -> dict:
    doc = {
        "schema_version": state.schema_version,
        "dataset_fingerprint": state.dataset.fingerprint() if state.dataset else None,
        "enabled_features": list(state.enabled_features),
        "views": [{
            "view_id": vid,
            "instance": _instance_to_dict(state.views[vid].instance),
        } for vid in state.view_order],
        "active_view": state.active_view,
        "cluster_names": {vid: {str(c): n for c, n in names.items()}
                          for vid, names in sorted(state.cluster_names.items())
                          if names},
        "tours": {tid: tour_mod.tour_to_dict(t)
                  for tid, t in sorted(state.tours.items())},
        "counter": state._counter,
    }
    if include_log:
        doc["log"] = {
            "cursor": state.log.cursor,
            "entries": [{
                "timestamp": e.timestamp, "op_name": e.op_name,
                "params": e.params, "inverse": e.inverse,
            } for e in state.log.entries],
        }
    return doc


def save_session(state: SessionState) -> bytes:
    """Versioned structured-text export; labels embedded so loading never
    recomputes clusterings."""
    return json.dumps(_state_doc(state), sort_keys=True,
                      separators=(",", ":")).encode()


def load_session(data: bytes, dataset: Dataset, cache=None) -> SessionState:
    try:
        doc = json.loads(data.decode())
    except (ValueError, UnicodeDecodeError) as e:
        raise CorruptPayload(f"not a session document: {e}") from None
    if not isinstance(doc, dict) or "schema_version" not in doc:
        raise CorruptPayload("missing schema_version")
    if doc["schema_version"] != SCHEMA_VERSION:
        raise SchemaMismatch(f"schema {doc['schema_version']} != {SCHEMA_VERSION}")
    want = doc.get("dataset_fingerprint")
    if want is not None and want != dataset.fingerprint():
        raise SchemaMismatch("dataset fingerprint does not match the session")
    try:
        state = SessionState(dataset=dataset, schema_version=doc["schema_version"],
                             cache=cache)
        state.enabled_features = [int(f) for f in doc["enabled_features"]]
        if state.enabled_features:
            state.dataset = dataset.with_enabled(set(state.enabled_features))
        for v in doc["views"]:
            state.views[v["view_id"]] = View(
                v["view_id"], _instance_from_dict(state.dataset, v["instance"]))
            state.view_order.append(v["view_id"])
        state.active_view = doc["active_view"]
        state.cluster_names = {vid: {int(c): n for c, n in names.items()}
                               for vid, names in doc["cluster_names"].items()}
        state.tours = {tid: tour_mod.tour_from_dict(state.dataset, td, cache=cache)
                       for tid, td in doc["tours"].items()}
        state._counter = doc["counter"]
        log = doc.get("log", {"cursor": 0, "entries": []})
        state.log = SessionLog(
            entries=[LogEntry(e["timestamp"], e["op_name"], e["params"], e["inverse"])
                     for e in log["entries"]],
            cursor=log["cursor"],
        )
        return state
    except (KeyError, TypeError, ValueError) as e:
        raise CorruptPayload(f"malformed session document: {e}") from None
