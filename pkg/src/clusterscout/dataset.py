"""Dataset ingestion, per-feature statistics, outlier flags and sampling.

The Dataset is the substrate every other module consumes. It is immutable
after load; all operations here are pure and safe for concurrent reads.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

from .errors import EmptySelection, InvalidRate, MalformedInput

HISTOGRAM_BINS = 20
SAMPLING_ADVICE_THRESHOLD = 10_000


@dataclass(frozen=True)
class Dataset:
    feature_names: list[str]
    row_ids: list[str]
    values: np.ndarray  # rows x features, float64
    enabled_features: frozenset[int]
    dropped_rows: int = 0
    dropped_columns: list[str] = field(default_factory=list)

    def __post_init__(self):
        n, d = self.values.shape
        if n != len(self.row_ids) or d != len(self.feature_names):
            raise MalformedInput("values shape does not match row/feature names")
        if len(set(self.feature_names)) != d or any(not f for f in self.feature_names):
            raise MalformedInput("feature names must be unique and non-empty")
        if not all(0 <= i < d for i in self.enabled_features):
            raise MalformedInput("enabled_features out of range")

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]

    def fingerprint(self) -> str:
        """Content hash identifying this dataset (used for cache keys)."""
        h = hashlib.sha256()
        h.update("\x1f".join(self.feature_names).encode())
        h.update("\x1f".join(self.row_ids).encode())
        h.update(np.ascontiguousarray(self.values).tobytes())
        return h.hexdigest()[:16]

    def feature_index(self, name: str) -> int | None:
        """Case-insensitive feature lookup; None when absent."""
        lowered = name.lower()
        for i, f in enumerate(self.feature_names):
            if f.lower() == lowered:
                return i
        return None

    def with_enabled(self, enabled: set[int]) -> "Dataset":
        return Dataset(self.feature_names, self.row_ids, self.values,
                       frozenset(enabled), self.dropped_rows, self.dropped_columns)

    def restrict_rows(self, row_indices: list[int]) -> "Dataset":
        """Row-restricted copy (isolation); feature set unchanged."""
        idx = list(row_indices)
        return Dataset(self.feature_names,
                       [self.row_ids[i] for i in idx],
                       self.values[idx],
                       self.enabled_features,
                       self.dropped_rows, self.dropped_columns)


@dataclass(frozen=True)
class FeatureStats:
    feature: int
    mean: float
    std: float
    min: float
    max: float
    q1: float
    median: float
    q3: float
    histogram: list[int]
    bin_edges: list[float]
    skewness: float


@dataclass(frozen=True)
class Selection:
    """Ordered, duplicate-free set of row indices bound to one dataset."""
    row_indices: tuple[int, ...]

    def __post_init__(self):
        if len(set(self.row_indices)) != len(self.row_indices):
            raise MalformedInput("selection contains duplicate row indices")

    def __len__(self) -> int:
        return len(self.row_indices)


def load_csv(data: bytes) -> Dataset:
    """Parse RFC-4180-style CSV bytes (UTF-8, '.' decimals) into a Dataset.

    The first row is the header. The first non-numeric column supplies
    row ids; further non-numeric columns are dropped and reported. Rows
    with missing numeric cells are dropped and counted.
    """
    text = data.decode("utf-8-sig", errors="strict") if data else ""
    if not text.strip():
        raise MalformedInput("empty input")
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r]  # ignore completely blank lines
    if len(rows) < 2:
        raise MalformedInput("need a header row and at least one data row")
    header, body = rows[0], rows[1:]
    width = len(header)
    if any(len(r) != width for r in body):
        raise MalformedInput("ragged rows: all rows must match the header width")
    if len(set(header)) != width or any(not h.strip() for h in header):
        raise MalformedInput("header names must be unique and non-empty")

    _TEXT = object()  # sentinel: cell is not numeric at all

    def _as_float(cell: str):
        cell = cell.strip()
        if not cell:
            return None  # missing
        try:
            v = float(cell)
        except ValueError:
            return _TEXT
        return None if math.isnan(v) else v  # literal nan counts as missing

    numeric_cols, text_cols = [], []
    for j in range(width):
        parsed = [_as_float(r[j]) for r in body]
        if any(v is _TEXT for v in parsed):
            text_cols.append(j)
        else:
            numeric_cols.append((j, parsed))
    if not numeric_cols:
        raise MalformedInput("no numeric columns found")

    id_col = text_cols[0] if text_cols else None
    dropped_columns = [header[j] for j in text_cols[1:]]

    kept_values, kept_ids, dropped = [], [], 0
    for i, row in enumerate(body):
        vals = [parsed[i] for _, parsed in numeric_cols]
        if any(v is None for v in vals):
            dropped += 1
            continue
        kept_values.append(vals)
        kept_ids.append(row[id_col].strip() if id_col is not None else str(i))
    if not kept_values:
        raise MalformedInput("all data rows were dropped (missing values)")

    names = [header[j].strip() for j, _ in numeric_cols]
    values = np.asarray(kept_values, dtype=np.float64)
    return Dataset(names, kept_ids, values, frozenset(range(len(names))),
                   dropped_rows=dropped, dropped_columns=dropped_columns)


def _selection_indices(ds: Dataset, sel: Selection | None) -> np.ndarray:
    if sel is None:
        return np.arange(ds.n_rows)
    idx = np.asarray(sel.row_indices, dtype=int)
    if idx.size == 0:
        raise EmptySelection("selection is empty")
    if idx.min() < 0 or idx.max() >= ds.n_rows:
        raise EmptySelection("selection indices out of range")
    return idx


def feature_stats(ds: Dataset, sel: Selection | None = None) -> list[FeatureStats]:
    """Per-feature statistics over the selected rows (or the whole dataset).

    Quartiles use linear interpolation (type-7). Histogram bins are fixed
    over the whole dataset's [min, max] so selection and full-population
    histograms are directly comparable.
    """
    idx = _selection_indices(ds, sel)
    out = []
    for f in sorted(ds.enabled_features):
        col = ds.values[idx, f]
        full = ds.values[:, f]
        lo, hi = float(full.min()), float(full.max())
        edges = np.linspace(lo, hi, HISTOGRAM_BINS + 1) if hi > lo else \
            np.linspace(lo - 0.5, lo + 0.5, HISTOGRAM_BINS + 1)
        counts, _ = np.histogram(col, bins=edges)
        q1, med, q3 = np.percentile(col, [25, 50, 75])
        skew = float(sps.skew(col)) if col.std() > 0 else 0.0
        out.append(FeatureStats(
            feature=f,
            mean=float(col.mean()), std=float(col.std()),
            min=float(col.min()), max=float(col.max()),
            q1=float(q1), median=float(med), q3=float(q3),
            histogram=[int(c) for c in counts],
            bin_edges=[float(e) for e in edges],
            skewness=skew,
        ))
    return out


def detect_outliers(ds: Dataset, feature: int) -> list[str]:
    """Tukey-fence flags per row: 'high', 'low' or 'none'.

    IQR = 0 flags nothing (constant or heavily tied columns).
    """
    col = ds.values[:, feature]
    q1, q3 = np.percentile(col, [25, 75])
    iqr = q3 - q1
    if iqr <= 0:
        return ["none"] * len(col)
    hi, lo = q3 + 1.5 * iqr, q1 - 1.5 * iqr
    return ["high" if v > hi else "low" if v < lo else "none" for v in col]


def sample_rows(ds: Dataset, rate: float, seed: int) -> Selection:
    """Uniform sample without replacement of ceil(rate * n) rows.

    Deterministic for a fixed seed; rate == 1 returns all rows in order.
    """
    if not (0.0 < rate <= 1.0):
        raise InvalidRate(f"sample rate must be in (0, 1], got {rate}")
    n = ds.n_rows
    if rate == 1.0:
        return Selection(tuple(range(n)))
    m = math.ceil(rate * n)
    rng = np.random.Generator(np.random.PCG64(seed))
    picked = rng.choice(n, size=m, replace=False)
    return Selection(tuple(int(i) for i in np.sort(picked)))


def top_correlations(ds: Dataset, k: int) -> list[tuple[str, str, float]]:
    """Top-k feature pairs by |Pearson r|, ties broken by name order.

    Zero-variance features are skipped.
    """
    feats = [f for f in sorted(ds.enabled_features) if ds.values[:, f].std() > 0]
    pairs = []
    for a_pos, fa in enumerate(feats):
        for fb in feats[a_pos + 1:]:
            r = float(np.corrcoef(ds.values[:, fa], ds.values[:, fb])[0, 1])
            name_a, name_b = sorted([ds.feature_names[fa], ds.feature_names[fb]])
            pairs.append((name_a, name_b, r))
    pairs.sort(key=lambda p: (-abs(p[2]), p[0], p[1]))
    return pairs[:k]


def sampling_advice(ds: Dataset) -> dict:
    """Suggest sampling for large datasets (over 10,000 rows)."""
    recommended = ds.n_rows > SAMPLING_ADVICE_THRESHOLD
    rate = min(1.0, SAMPLING_ADVICE_THRESHOLD / ds.n_rows) if recommended else 1.0
    return {"recommended": recommended, "suggested_rate": round(rate, 4),
            "rows": ds.n_rows, "threshold": SAMPLING_ADVICE_THRESHOLD}
