import json

import numpy as np
import pytest

from clusterscout.cache import PrecomputeCache, precompute_k_range
from clusterscout.engine import (ClusteringParams, RUN_STATS, cache_key_for,
                                 run_clustering)
from clusterscout.errors import (CorruptPayload, NothingToRedo, NothingToUndo,
                                 SchemaMismatch)
from clusterscout.session import (SessionState, _instance_to_dict, apply_op,
                                  load_session, redo, save_session,
                                  state_fingerprint, undo)
from clusterscout import tour as tour_mod

from conftest import make_blobs, matrix_dataset


@pytest.fixture
def ds():
    values, _ = make_blobs([[0, 0], [6, 0], [0, 6]], n_per=40, sigma=0.1,
                           seed=0)
    return matrix_dataset(values)


def fresh_session(ds):
    state = SessionState(dataset=ds, cache=PrecomputeCache())
    state.enabled_features = sorted(ds.enabled_features)
    return state


def instance_op(ds, state, k=3, seed=0):
    inst = run_clustering(ds, ClusteringParams(
        feature_subset=frozenset({0, 1}), algorithm="kmeans", k=k, seed=seed))
    view_id = state.new_id("v")
    return {"name": "add_view", "view_id": view_id,
            "instance": _instance_to_dict(inst)}


class TestUndoRedo:
    def test_add_then_undo(self, ds):
        state = fresh_session(ds)
        before = state_fingerprint(state)
        apply_op(state, instance_op(ds, state))
        assert state.views
        undo(state)
        assert state_fingerprint(state) == before

    def test_set_k_then_undo_restores(self, ds):
        state = fresh_session(ds)
        apply_op(state, instance_op(ds, state, k=3))
        view_id = state.view_order[0]
        mid = state_fingerprint(state)
        inst5 = run_clustering(ds, ClusteringParams(
            feature_subset=frozenset({0, 1}), algorithm="kmeans", k=5))
        apply_op(state, {"name": "set_view_instance", "view_id": view_id,
                         "instance": _instance_to_dict(inst5)})
        assert state.views[view_id].instance.params.k == 5
        undo(state)
        assert state.views[view_id].instance.params.k == 3
        assert state_fingerprint(state) == mid

    def test_new_op_discards_redo(self, ds):
        state = fresh_session(ds)
        apply_op(state, instance_op(ds, state))           # A
        apply_op(state, {"name": "set_active", "view_id": None})  # B
        undo(state)
        apply_op(state, instance_op(ds, state, k=4))      # C
        with pytest.raises(NothingToRedo):
            redo(state)

    def test_undo_empty_raises(self, ds):
        with pytest.raises(NothingToUndo):
            undo(fresh_session(ds))

    def test_redo_after_undo(self, ds):
        state = fresh_session(ds)
        apply_op(state, instance_op(ds, state))
        after = state_fingerprint(state)
        undo(state)
        redo(state)
        assert state_fingerprint(state) == after

    def test_name_cluster_roundtrip(self, ds):
        state = fresh_session(ds)
        apply_op(state, instance_op(ds, state))
        vid = state.view_order[0]
        apply_op(state, {"name": "name_cluster", "view_id": vid,
                         "cluster_id": 0, "cluster_name": "alpha"})
        assert state.cluster_names[vid][0] == "alpha"
        undo(state)
        assert state.cluster_names.get(vid, {}).get(0) is None

    def test_random_ops_then_full_undo(self, ds):
        rng = np.random.Generator(np.random.PCG64(99))
        state = fresh_session(ds)
        initial = state_fingerprint(state)
        applied = 0
        for _ in range(100):
            choice = rng.integers(5)
            try:
                if choice == 0 or not state.view_order:
                    apply_op(state, instance_op(ds, state,
                                                k=int(rng.integers(2, 6)),
                                                seed=int(rng.integers(3))))
                elif choice == 1:
                    vid = state.view_order[int(rng.integers(len(state.view_order)))]
                    apply_op(state, {"name": "set_active", "view_id": vid})
                elif choice == 2:
                    vid = state.view_order[int(rng.integers(len(state.view_order)))]
                    apply_op(state, {"name": "name_cluster", "view_id": vid,
                                     "cluster_id": 0,
                                     "cluster_name": f"n{rng.integers(100)}"})
                elif choice == 3:
                    vid = state.view_order[int(rng.integers(len(state.view_order)))]
                    apply_op(state, {"name": "remove_view", "view_id": vid})
                else:
                    feats = [0, 1] if rng.random() < 0.5 else [0]
                    apply_op(state, {"name": "set_enabled_features",
                                     "features": feats})
                applied += 1
            except Exception:
                raise
        assert applied == 100
        for _ in range(100):
            undo(state)
        assert state_fingerprint(state) == initial
        # and redo all the way forward is stable too
        forward = None
        for _ in range(100):
            redo(state)
        forward = state_fingerprint(state)
        for _ in range(100):
            undo(state)
        assert state_fingerprint(state) == initial
        for _ in range(100):
            redo(state)
        assert state_fingerprint(state) == forward


class TestSaveLoad:
    def test_fresh_round_trip(self, ds):
        state = fresh_session(ds)
        payload = save_session(state)
        loaded = load_session(payload, ds)
        assert save_session(loaded) == payload

    def test_views_and_tour_round_trip(self, ds):
        state = fresh_session(ds)
        apply_op(state, instance_op(ds, state, k=3))
        apply_op(state, instance_op(ds, state, k=4))
        entry = state.views[state.view_order[0]].instance
        t = tour_mod.init_tour(ds, entry, seed=1, cache=state.cache)
        tour_mod.estimate_weights(t)
        tour_mod.step(t, "generate")
        state.tours["t1"] = t
        payload = save_session(state)
        loaded = load_session(payload, ds, cache=state.cache)
        assert save_session(loaded) == payload
        assert list(loaded.views) == list(state.views)
        assert loaded.tours["t1"].current == t.current

    def test_schema_mismatch(self, ds):
        state = fresh_session(ds)
        doc = json.loads(save_session(state))
        doc["schema_version"] = 999
        with pytest.raises(SchemaMismatch):
            load_session(json.dumps(doc).encode(), ds)

    def test_corrupt_payload(self, ds):
        with pytest.raises(CorruptPayload):
            load_session(b"not json at all {", ds)
        with pytest.raises(CorruptPayload):
            load_session(b"[1,2,3]", ds)

    def test_wrong_dataset_rejected(self, ds):
        state = fresh_session(ds)
        payload = save_session(state)
        other = matrix_dataset(np.zeros((5, 2)))
        with pytest.raises(SchemaMismatch):
            load_session(payload, other)

    def test_loaded_session_continues(self, ds):
        state = fresh_session(ds)
        apply_op(state, instance_op(ds, state))
        loaded = load_session(save_session(state), ds)
        undo(loaded)
        assert not loaded.views


class TestCache:
    def test_hit_returns_same_object(self, ds):
        cache = PrecomputeCache()
        params = ClusteringParams(feature_subset=frozenset({0, 1}), k=3)
        first = cache.get_or_compute(ds, params)
        second = cache.get_or_compute(ds, params)
        assert first is second
        assert cache.hits == 1
        assert cache.computes == 1

    def test_cached_equals_fresh(self, ds):
        cache = PrecomputeCache()
        params = ClusteringParams(feature_subset=frozenset({0, 1}), k=4)
        cached = cache.get_or_compute(ds, params)
        fresh = run_clustering(ds, params)
        assert cached.labeling.labels == fresh.labeling.labels
        assert cached.cache_key == fresh.cache_key

    def test_lru_eviction(self, ds):
        cache = PrecomputeCache(capacity=2)
        for k in (2, 3, 4):
            cache.get_or_compute(ds, ClusteringParams(
                feature_subset=frozenset({0, 1}), k=k))
        assert len(cache) == 2
        key2 = cache_key_for(ds.fingerprint(), ClusteringParams(
            feature_subset=frozenset({0, 1}), k=2))
        assert cache.get(key2) is None

    def test_precompute_k_range(self, ds):
        cache = PrecomputeCache()
        base = ClusteringParams(feature_subset=frozenset({0, 1}), k=3)
        report = precompute_k_range(ds, base, range(2, 9), cache)
        assert report["computed"] == 7
        assert report["cached"] == 0
        again = precompute_k_range(ds, base, range(2, 9), cache)
        assert again["computed"] == 0
        assert again["cached"] == 7

    def test_slider_sweep_no_recompute(self, ds):
        cache = PrecomputeCache()
        base = ClusteringParams(feature_subset=frozenset({0, 1}), k=3)
        precompute_k_range(ds, base, range(2, 9), cache)
        runs_before = RUN_STATS["runs"]
        from dataclasses import replace
        for k in (5, 2, 8, 3, 5, 7):
            cache.get_or_compute(ds, replace(base, k=k))
        assert RUN_STATS["runs"] == runs_before
