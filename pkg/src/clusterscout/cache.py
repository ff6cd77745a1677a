"""Bounded LRU cache for clustering instances and embeddings.

A hit returns the very object stored at compute time, so cached and fresh
results are bitwise identical; the hit/compute counters let tests prove
precomputation actually prevents re-execution.
"""

from __future__ import annotations

import threading
from collections import OrderedDict
from dataclasses import replace

from .dataset import Dataset
from .engine import ClusteringInstance, ClusteringParams, cache_key_for, run_clustering

DEFAULT_CAPACITY = 256


class PrecomputeCache:
    def __init__(self, capacity: int = DEFAULT_CAPACITY):
        self.capacity = capacity
        self._store: OrderedDict[str, object] = OrderedDict()
        self._lock = threading.Lock()
        self.hits = 0
        self.computes = 0

    def __len__(self) -> int:
        return len(self._store)

    def get(self, key: str):
        with self._lock:
            if key in self._store:
                self._store.move_to_end(key)
                return self._store[key]
            return None

    def put(self, key: str, value) -> None:
        with self._lock:
            self._store[key] = value
            self._store.move_to_end(key)
            while len(self._store) > self.capacity:
                self._store.popitem(last=False)

    def get_or_compute(self, ds: Dataset, params: ClusteringParams) -> ClusteringInstance:
        key = cache_key_for(ds.fingerprint(), params)
        hit = self.get(key)
        if hit is not None:
            with self._lock:
                self.hits += 1
            return hit
        inst = run_clustering(ds, params)
        with self._lock:
            self.computes += 1
        self.put(key, inst)
        return inst

    def get_or_compute_value(self, key: str, fn):
        """Generic variant for embeddings and other derived artifacts."""
        hit = self.get(key)
        if hit is not None:
            with self._lock:
                self.hits += 1
            return hit
        value = fn()
        with self._lock:
            self.computes += 1
        self.put(key, value)
        return value


def precompute_k_range(ds: Dataset, base_params: ClusteringParams, k_range,
                       cache: PrecomputeCache) -> dict:
    """Populate the cache with one instance per k; returns what was new."""
    computed, cached = 0, 0
    before = cache.computes
    for k in sorted(int(k) for k in k_range):
        params = replace(base_params, k=k)
        already = cache.get(cache_key_for(ds.fingerprint(), params)) is not None
        cache.get_or_compute(ds, params)
        if already:
            cached += 1
        else:
            computed += 1
    assert cache.computes - before == computed
    return {"computed": computed, "cached": cached,
            "k_values": sorted(int(k) for k in k_range)}
