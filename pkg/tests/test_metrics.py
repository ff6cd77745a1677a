import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from clusterscout.errors import DegenerateVector, DimensionMismatch
from clusterscout.metrics import METRICS, distance, pairwise_matrix


class TestDistance:
    def test_euclidean_345(self):
        assert distance([0, 0], [3, 4], "euclidean") == pytest.approx(5.0)

    def test_cityblock(self):
        assert distance([0, 0], [3, 4], "cityblock") == pytest.approx(7.0)

    def test_chebyshev(self):
        assert distance([0, 0], [3, 4], "chebyshev") == pytest.approx(4.0)

    def test_cosine_colinear(self):
        v = np.array([1.0, 2.0, 3.0])
        assert distance(v, 2 * v, "cosine") == pytest.approx(0.0, abs=1e-12)

    def test_cosine_opposite(self):
        v = np.array([1.0, 0.0])
        assert distance(v, -v, "cosine") == pytest.approx(2.0)

    def test_correlation_shift_invariant(self):
        a = np.array([1.0, 2.0, 4.0])
        assert distance(a, a + 10, "correlation") == pytest.approx(0.0, abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            distance([1, 2], [1, 2, 3], "euclidean")

    def test_zero_vector_cosine(self):
        with pytest.raises(DegenerateVector):
            distance([0, 0], [1, 2], "cosine")

    def test_constant_vector_correlation(self):
        with pytest.raises(DegenerateVector):
            distance([3, 3, 3], [1, 2, 4], "correlation")

    @given(st.lists(st.floats(-50, 50), min_size=2, max_size=6))
    @settings(max_examples=40, deadline=None)
    def test_symmetry_and_identity(self, vals):
        a = np.asarray(vals)
        b = a[::-1].copy()
        for metric in ("euclidean", "cityblock", "chebyshev"):
            d_ab = distance(a, b, metric)
            assert d_ab == pytest.approx(distance(b, a, metric))
            assert d_ab >= 0
            assert distance(a, a, metric) == 0


class TestPairwiseMatrix:
    @pytest.mark.parametrize("metric", METRICS)
    def test_matches_pair_function(self, metric):
        rng = np.random.Generator(np.random.PCG64(0))
        x = rng.normal(size=(8, 3)) + 1.0  # offset avoids degenerate rows
        m = pairwise_matrix(x, metric)
        for i in range(8):
            for j in range(8):
                assert m[i, j] == pytest.approx(m[j, i], abs=1e-12)
                if i != j:
                    assert m[i, j] == pytest.approx(
                        distance(x[i], x[j], metric), abs=1e-9)
        assert np.all(np.diag(m) == 0)
