import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from clusterscout.dataset import (detect_outliers, feature_stats, load_csv,
                                  sample_rows, sampling_advice,
                                  top_correlations, Selection)
from clusterscout.errors import EmptySelection, InvalidRate, MalformedInput

from conftest import matrix_dataset


class TestLoadCsv:
    def test_toy_csv(self, toy_csv):
        ds = load_csv(toy_csv)
        assert ds.n_rows == 8
        assert ds.n_features == 3
        assert ds.feature_names == ["gdp", "employment", "education"]
        assert ds.row_ids[0] == "Australia"
        assert ds.dropped_rows == 0
        assert ds.enabled_features == frozenset({0, 1, 2})

    def test_empty_input(self):
        with pytest.raises(MalformedInput):
            load_csv(b"")

    def test_missing_cell_drops_row(self):
        rows = ["name,x,y"] + [f"r{i},{i},{i*2}" for i in range(9)] + ["r9,,18"]
        ds = load_csv("\n".join(rows).encode())
        assert ds.n_rows == 9
        assert ds.dropped_rows == 1

    def test_ragged_rows(self):
        with pytest.raises(MalformedInput):
            load_csv(b"a,b\n1,2\n3\n")

    def test_no_numeric_columns(self):
        with pytest.raises(MalformedInput):
            load_csv(b"a,b\nx,y\n")

    def test_extra_text_columns_dropped(self):
        ds = load_csv(b"name,x,comment\nr0,1,hello\nr1,2,world\n")
        assert ds.feature_names == ["x"]
        assert ds.dropped_columns == ["comment"]

    def test_no_id_column_uses_row_numbers(self):
        ds = load_csv(b"x,y\n1,2\n3,4\n")
        assert ds.row_ids == ["0", "1"]


class TestFeatureStats:
    def test_constant_column(self):
        ds = matrix_dataset([[5.0], [5.0], [5.0], [5.0]])
        s = feature_stats(ds)[0]
        assert s.std == 0
        assert s.min == s.max == 5

    def test_symmetric_column(self):
        ds = matrix_dataset([[1.0], [2.0], [3.0], [4.0]])
        s = feature_stats(ds)[0]
        assert s.mean == pytest.approx(2.5)
        assert s.median == pytest.approx(2.5)

    def test_skewed_column_against_oracle(self):
        # frozen from an independent type-7 quantile / moment computation
        ds = matrix_dataset([[v] for v in [1, 2, 3, 4, 5, 6, 7, 8, 9, 100]])
        s = feature_stats(ds)[0]
        assert s.q3 == pytest.approx(7.75, abs=1e-12)
        assert s.q1 == pytest.approx(3.25, abs=1e-12)
        assert s.skewness == pytest.approx(2.6300838238836732, abs=1e-12)

    def test_histogram_sums_to_selection(self, toy_csv):
        ds = load_csv(toy_csv)
        sel = Selection((0, 2, 4))
        for s in feature_stats(ds, sel):
            assert sum(s.histogram) == 3

    def test_selection_bins_match_full_population(self, toy_csv):
        ds = load_csv(toy_csv)
        full = feature_stats(ds)
        sel = feature_stats(ds, Selection((1, 3)))
        for a, b in zip(full, sel):
            assert a.bin_edges == b.bin_edges

    def test_empty_selection(self, toy_csv):
        ds = load_csv(toy_csv)
        with pytest.raises(EmptySelection):
            feature_stats(ds, Selection(()))


class TestOutliers:
    def test_high_outlier(self):
        ds = matrix_dataset([[v] for v in [1, 2, 3, 4, 5, 6, 7, 8, 9, 100]])
        flags = detect_outliers(ds, 0)
        assert flags[-1] == "high"
        assert flags[:-1] == ["none"] * 9

    def test_low_outlier(self):
        ds = matrix_dataset([[v] for v in [-100, 1, 2, 3, 4, 5, 6, 7, 8, 9]])
        flags = detect_outliers(ds, 0)
        assert flags[0] == "low"
        assert flags[1:] == ["none"] * 9

    def test_constant_column_all_none(self):
        ds = matrix_dataset([[7.0]] * 6)
        assert detect_outliers(ds, 0) == ["none"] * 6

    def test_flag_partition(self):
        rng = np.random.Generator(np.random.PCG64(3))
        ds = matrix_dataset(rng.normal(size=(50, 2)))
        for f in range(2):
            flags = detect_outliers(ds, f)
            assert len(flags) == 50
            assert all(f in ("high", "low", "none") for f in flags)


class TestSampling:
    def test_rate_one_identity(self, toy_csv):
        ds = load_csv(toy_csv)
        sel = sample_rows(ds, 1.0, seed=1)
        assert sel.row_indices == tuple(range(8))

    def test_deterministic(self, toy_csv):
        ds = load_csv(toy_csv)
        assert sample_rows(ds, 0.5, 7) == sample_rows(ds, 0.5, 7)

    def test_ceiling_cardinality(self):
        ds = matrix_dataset(np.arange(10000, dtype=float).reshape(-1, 1))
        assert len(sample_rows(ds, 0.1, 0)) == 1000

    def test_invalid_rate(self, toy_csv):
        ds = load_csv(toy_csv)
        for rate in (0.0, -0.5, 1.5):
            with pytest.raises(InvalidRate):
                sample_rows(ds, rate, 0)

    @given(rate=st.floats(0.01, 1.0), seed=st.integers(0, 2**31))
    @settings(max_examples=30, deadline=None)
    def test_subset_property(self, rate, seed):
        ds = matrix_dataset(np.arange(37, dtype=float).reshape(-1, 1))
        sel = sample_rows(ds, rate, seed)
        assert len(sel) == int(np.ceil(rate * 37))
        assert set(sel.row_indices) <= set(range(37))
        assert sel == sample_rows(ds, rate, seed)


class TestCorrelations:
    def test_perfect_linear(self):
        rng = np.random.Generator(np.random.PCG64(0))
        a = rng.normal(size=100)
        ds = matrix_dataset(np.column_stack([a, 2 * a, rng.normal(size=100)]))
        pairs = top_correlations(ds, 3)
        assert pairs[0][0] == "f0" and pairs[0][1] == "f1"
        assert pairs[0][2] == pytest.approx(1.0)

    def test_negated(self):
        a = np.linspace(0, 1, 50)
        ds = matrix_dataset(np.column_stack([a, -a]))
        pairs = top_correlations(ds, 1)
        assert pairs[0][2] == pytest.approx(-1.0)

    def test_independent_columns_low_r(self):
        rng = np.random.Generator(np.random.PCG64(5))
        ds = matrix_dataset(rng.uniform(size=(1000, 2)))
        pairs = top_correlations(ds, 1)
        assert abs(pairs[0][2]) < 0.1

    def test_zero_variance_skipped(self):
        ds = matrix_dataset(np.column_stack([np.ones(10), np.arange(10.0),
                                             np.arange(10.0) ** 2]))
        pairs = top_correlations(ds, 10)
        names = {n for p in pairs for n in p[:2]}
        assert "f0" not in names

    def test_self_correlation_is_one(self):
        rng = np.random.Generator(np.random.PCG64(1))
        col = rng.normal(size=60)
        r = float(np.corrcoef(col, col)[0, 1])
        assert r == pytest.approx(1.0)


def test_sampling_advice_threshold():
    small = matrix_dataset(np.zeros((100, 1)))
    big = matrix_dataset(np.arange(20000, dtype=float).reshape(-1, 1))
    assert sampling_advice(small)["recommended"] is False
    assert sampling_advice(big)["recommended"] is True
    assert sampling_advice(big)["suggested_rate"] == pytest.approx(0.5)
