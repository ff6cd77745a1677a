import numpy as np
import pytest

from clusterscout.engine import ClusteringParams, run_clustering
from clusterscout.errors import (MissingLabels, TooFewFeatures, UnknownCluster)
from clusterscout.insight import (aggregate_matrix, build_rule_tree,
                                  default_grid, describe_cluster,
                                  extract_rules, feature_agglomeration,
                                  fit_rule_tree, rank_features,
                                  reassignment_search, representative_row,
                                  uncertain_points)

from conftest import make_blobs, matrix_dataset


def blob_instance(ds, k=3, feats=(0, 1), **kw):
    params = ClusteringParams(feature_subset=frozenset(feats),
                              algorithm="kmeans", k=k, seed=0, **kw)
    return run_clustering(ds, params)


class TestRankFeatures:
    def test_variance_constant_last(self):
        rng = np.random.Generator(np.random.PCG64(0))
        values = np.column_stack([rng.normal(size=50), np.full(50, 3.0),
                                  rng.normal(scale=5, size=50)])
        ds = matrix_dataset(values)
        ranking = rank_features(ds, "variance")
        assert ranking.ranked[-1][0] == 1
        assert ranking.ranked[-1][1] == 0.0
        assert ranking.ranked[0][0] == 2

    def test_variance_row_shuffle_invariant(self):
        rng = np.random.Generator(np.random.PCG64(1))
        values = rng.normal(size=(40, 4))
        ds = matrix_dataset(values)
        shuffled = matrix_dataset(values[rng.permutation(40)])
        a = [f for f, _, _ in rank_features(ds, "variance").ranked]
        b = [f for f, _, _ in rank_features(shuffled, "variance").ranked]
        assert a == b

    def test_anova_separating_feature_first(self):
        rng = np.random.Generator(np.random.PCG64(2))
        n = 90
        labels = np.repeat([0, 1, 2], 30)
        f1 = labels * 5.0 + rng.normal(0, 0.1, n)  # separates clusters
        noise = rng.normal(size=(n, 3))
        ds = matrix_dataset(np.column_stack([noise[:, 0], f1, noise[:, 1:]]))
        ranking = rank_features(ds, "anova_f", labeling=labels)
        assert ranking.ranked[0][0] == 1
        assert ranking.ranked[0][2] < 1e-6  # p-value

    def test_anova_requires_labels(self):
        ds = matrix_dataset(np.zeros((10, 2)))
        with pytest.raises(MissingLabels):
            rank_features(ds, "anova_f")

    def test_correlation_filter_dedups(self):
        rng = np.random.Generator(np.random.PCG64(3))
        a = rng.normal(size=60)
        b = rng.normal(size=60)
        ds = matrix_dataset(np.column_stack([a, a.copy(), b]))
        ranking = rank_features(ds, "correlation_filter")
        scores = dict((f, s) for f, s, _ in ranking.ranked)
        # the duplicate of the kept column scores 0
        assert min(scores[0], scores[1]) == pytest.approx(0.0, abs=1e-9)
        assert scores[2] > 0.5

    def test_correlation_filter_scores_descending(self):
        rng = np.random.Generator(np.random.PCG64(4))
        ds = matrix_dataset(rng.normal(size=(80, 5)))
        scores = [s for _, s, _ in rank_features(ds, "correlation_filter").ranked]
        assert all(a >= b - 1e-12 for a, b in zip(scores, scores[1:]))

    def test_pca_loading_all_features_once(self):
        rng = np.random.Generator(np.random.PCG64(5))
        ds = matrix_dataset(rng.normal(size=(50, 4)))
        ranking = rank_features(ds, "pca_loading")
        assert sorted(f for f, _, _ in ranking.ranked) == [0, 1, 2, 3]


class TestFeatureAgglomeration:
    def test_duplicate_merges_first_at_zero(self):
        rng = np.random.Generator(np.random.PCG64(6))
        a = rng.normal(size=60)
        b = rng.normal(size=60)
        ds = matrix_dataset(np.column_stack([a, a.copy(), b]))
        dendro = feature_agglomeration(ds)
        assert dendro.merges[0][:2] == (0, 1)
        assert dendro.merges[0][2] == pytest.approx(0.0, abs=1e-9)

    def test_negated_merges_at_zero(self):
        rng = np.random.Generator(np.random.PCG64(7))
        a = rng.normal(size=60)
        ds = matrix_dataset(np.column_stack([a, -a, rng.normal(size=60)]))
        dendro = feature_agglomeration(ds)
        assert dendro.merges[0][2] == pytest.approx(0.0, abs=1e-9)

    def test_independent_features_merge_high(self):
        rng = np.random.Generator(np.random.PCG64(8))
        ds = matrix_dataset(rng.normal(size=(1000, 4)))
        dendro = feature_agglomeration(ds)
        assert all(h > 0.8 for _, _, h in dendro.merges)

    def test_heights_non_decreasing(self):
        rng = np.random.Generator(np.random.PCG64(9))
        ds = matrix_dataset(rng.normal(size=(100, 6)))
        heights = [h for _, _, h in feature_agglomeration(ds).merges]
        assert all(a <= b + 1e-12 for a, b in zip(heights, heights[1:]))
        assert all(0 <= h <= 1 + 1e-12 for h in heights)

    def test_too_few_features(self):
        ds = matrix_dataset(np.column_stack([np.arange(10.0), np.ones(10)]))
        with pytest.raises(TooFewFeatures):
            feature_agglomeration(ds)


class TestAggregateMatrix:
    def test_single_cluster_all_z_zero(self, blob_dataset):
        ds, _ = blob_dataset
        inst = blob_instance(ds, k=1)
        mat = aggregate_matrix(ds, inst)
        for row in mat.cells:
            for cell in row:
                assert cell.z == 0.0

    def test_z_clipping(self):
        # one tiny far-out cluster forces |z| beyond the clip
        values = np.vstack([np.random.Generator(np.random.PCG64(10)).normal(
            0, 0.1, size=(50, 1)), [[30.0]], [[30.1]]])
        ds = matrix_dataset(values)
        inst = blob_instance(ds, k=2, feats=(0,), standardize=False)
        mat = aggregate_matrix(ds, inst)
        small_cluster = mat.cluster_sizes.index(2)
        assert mat.cells[small_cluster][0].z == pytest.approx(2.5)

    def test_columns_ordered_by_size(self):
        values = np.array([[0.0]] * 5 + [[10.0]] * 3)
        ds = matrix_dataset(values)
        inst = blob_instance(ds, k=2, feats=(0,), standardize=False)
        mat = aggregate_matrix(ds, inst)
        assert mat.cluster_sizes == [5, 3]
        assert mat.cluster_order == [0, 1]

    def test_weighted_mean_invariant(self, blob_dataset):
        ds, _ = blob_dataset
        inst = blob_instance(ds, k=3)
        mat = aggregate_matrix(ds, inst)
        rows = np.asarray(inst.row_indices)
        feats = sorted(inst.params.feature_subset)
        raw = ds.values[rows][:, feats]
        total = sum(mat.cluster_sizes)
        for pos, f in enumerate(mat.feature_order):
            fpos = feats.index(f)
            weighted = sum(mat.cells[c][pos].cluster_mean * mat.cluster_sizes[c]
                           for c in range(len(mat.cluster_sizes))) / total
            assert weighted == pytest.approx(float(raw[:, fpos].mean()),
                                             abs=1e-9)

    def test_top_m_caps_features(self, blob_dataset):
        ds, _ = blob_dataset
        inst = blob_instance(ds, k=3)
        mat = aggregate_matrix(ds, inst, top_m=1)
        assert len(mat.feature_order) == 1
        assert len(mat.cells[0]) == 1

    def test_p_values_in_range(self, blob_dataset):
        ds, _ = blob_dataset
        inst = blob_instance(ds, k=3)
        mat = aggregate_matrix(ds, inst)
        for row in mat.cells:
            for cell in row:
                assert 0.0 <= cell.p_value <= 1.0


class TestRuleTree:
    def test_clean_1d_split(self):
        x = np.array([[1.0], [2.0], [3.0], [7.0], [8.0], [9.0]])
        labels = [0, 0, 0, 1, 1, 1]
        tree = build_rule_tree(x, labels, ["f"], max_depth=3)
        assert tree.training_fidelity == 1.0
        assert tree.root.feature == 0
        assert tree.root.threshold == pytest.approx(5.0)
        assert tree.root.left.is_leaf and tree.root.right.is_leaf

    def test_k1_root_leaf(self):
        x = np.array([[1.0], [2.0]])
        tree = build_rule_tree(x, [0, 0], ["f"], max_depth=3)
        assert tree.root.is_leaf
        assert tree.training_fidelity == 1.0
        assert extract_rules(tree) == {0: ["always"]}

    def test_three_blobs_5d_fidelity(self):
        values, labels = make_blobs(
            [[0] * 5, [6] * 5, [0, 6, 0, 6, 0]], n_per=100, sigma=0.1, seed=11)
        tree = build_rule_tree(values, labels, [f"f{i}" for i in range(5)],
                               max_depth=3)
        assert tree.training_fidelity >= 0.95

    def test_rules_partition_training_space(self):
        values, labels = make_blobs([[0, 0], [5, 0], [0, 5]], n_per=40,
                                    sigma=0.3, seed=12)
        tree = build_rule_tree(values, labels, ["a", "b"], max_depth=3)
        rules = extract_rules(tree)

        def matches(row, conj):
            if conj == "always":
                return True
            for clause in conj.split(" & "):
                name, op, val = clause.rsplit(" ", 2)[0], None, None
                if " > " in clause:
                    name, val = clause.split(" > ")
                    ok = row[["a", "b"].index(name)] > float(val)
                else:
                    name, val = clause.split(" <= ")
                    ok = row[["a", "b"].index(name)] <= float(val)
                if not ok:
                    return False
            return True

        for row in values:
            hits = sum(matches(row, conj)
                       for conjs in rules.values() for conj in conjs)
            assert hits == 1

    def test_deterministic_tie_break_lowest_feature(self):
        # duplicated feature: both split equally well; feature 0 must win
        x = np.array([[1.0, 1.0], [2.0, 2.0], [8.0, 8.0], [9.0, 9.0]])
        tree = build_rule_tree(x, [0, 0, 1, 1], ["a", "b"], max_depth=1)
        assert tree.root.feature == 0

    def test_fit_from_instance(self, blob_dataset):
        ds, _ = blob_dataset
        inst = blob_instance(ds, k=3)
        tree = fit_rule_tree(ds, inst, max_depth=3)
        assert tree.training_fidelity >= 0.95
        rules = extract_rules(tree)
        assert set(rules) <= {0, 1, 2}


class TestDescribe:
    def _matrix(self):
        values = np.vstack([
            np.random.Generator(np.random.PCG64(13)).normal(0, 1, (40, 2)),
            np.random.Generator(np.random.PCG64(14)).normal(0, 1, (10, 2))
            + [8.0, -8.0],
        ])
        ds = matrix_dataset(values)
        ds = matrix_dataset(values)
        inst = blob_instance(ds, k=2, standardize=False)
        return ds, inst

    def test_qualifiers_present(self):
        ds, inst = self._matrix()
        mat = aggregate_matrix(ds, inst)
        small = mat.cluster_sizes.index(10)
        text = describe_cluster(mat, small)
        assert "very high f0" in text
        assert "very low f1" in text
        assert "10 members" in text

    def test_no_distinctive_features(self):
        values = np.array([[1.0], [1.0], [1.0], [1.0]])
        ds = matrix_dataset(values)
        inst = blob_instance(ds, k=2, feats=(0,), standardize=False)
        mat = aggregate_matrix(ds, inst)
        text = describe_cluster(mat, 0)
        assert "no distinctive features" in text

    def test_singleton_cluster_size(self):
        values = np.array([[0.0], [0.1], [50.0]])
        ds = matrix_dataset(values)
        inst = blob_instance(ds, k=2, feats=(0,), standardize=False)
        mat = aggregate_matrix(ds, inst)
        small = mat.cluster_sizes.index(1)
        assert "1 member" in describe_cluster(mat, small)

    def test_unknown_cluster(self):
        ds, inst = self._matrix()
        mat = aggregate_matrix(ds, inst)
        with pytest.raises(UnknownCluster):
            describe_cluster(mat, 99)

    def test_includes_rule_path(self):
        ds, inst = self._matrix()
        mat = aggregate_matrix(ds, inst)
        tree = fit_rule_tree(ds, inst)
        text = describe_cluster(mat, 0, tree)
        assert "Typical rule:" in text

    def test_representative_row(self):
        values = np.array([[0.0], [0.2], [0.1], [9.0]])
        ds = matrix_dataset(values)
        inst = blob_instance(ds, k=2, feats=(0,), standardize=False)
        # centroid of big cluster = 0.1 -> row "2" is nearest
        assert representative_row(ds, inst, 0) == "2"


class TestUncertainPoints:
    def test_confident_instance_empty(self):
        values, labels = make_blobs([[0, 0], [9, 9]], n_per=30, sigma=0.1,
                                    seed=15)
        flagged, confidence = uncertain_points(values, labels)
        assert len(flagged) == 0
        assert np.all(confidence[labels != -1] > 0.5)

    def test_midpoint_flagged(self):
        values, labels = make_blobs([[0, 0], [10, 0]], n_per=30, sigma=0.1,
                                    seed=16)
        values = np.vstack([values, [[5.0, 0.0]]])
        labels = np.append(labels, 0)
        flagged, _ = uncertain_points(values, labels)
        assert 60 in flagged.row_indices

    def test_decile_cap(self):
        rng = np.random.Generator(np.random.PCG64(17))
        # 100 points, heavily overlapping clusters -> many low silhouettes
        values = rng.normal(size=(100, 2))
        labels = rng.integers(0, 2, size=100)
        flagged, _ = uncertain_points(values, labels)
        assert len(flagged) <= 10

    def test_confidence_rescaling(self):
        values, labels = make_blobs([[0, 0], [9, 9]], n_per=10, sigma=0.1,
                                    seed=18)
        _, confidence = uncertain_points(values, labels)
        assert np.all(confidence >= 0.0)
        assert np.all(confidence <= 1.0)


class TestReassignment:
    def test_current_labels_rank_first(self, blob_dataset):
        ds, _ = blob_dataset
        inst = blob_instance(ds, k=3)
        ranked = reassignment_search(ds, inst.labeling, inst.params)
        top_params, top_ami = ranked[0]
        assert top_ami == pytest.approx(1.0)
        assert all(s <= top_ami + 1e-12 for _, s in ranked)

    def test_sorted_descending(self, blob_dataset):
        ds, _ = blob_dataset
        inst = blob_instance(ds, k=3)
        ranked = reassignment_search(ds, inst.labeling, inst.params)
        scores = [s for _, s in ranked]
        assert scores == sorted(scores, reverse=True)

    def test_custom_grid_exhaustive(self, blob_dataset):
        ds, _ = blob_dataset
        inst = blob_instance(ds, k=3)
        grid = [("kmeans", "euclidean", "complete"),
                ("agglomerative", "euclidean", "ward"),
                ("agglomerative", "cityblock", "average")]
        ranked = reassignment_search(ds, inst.labeling, inst.params, grid=grid)
        assert len(ranked) == 3

    def test_default_grid_size(self, blob_dataset):
        ds, _ = blob_dataset
        inst = blob_instance(ds, k=3)
        grid = default_grid(inst.params)
        # kmeans:1, agglomerative: 4 + 4*3 = 16, dbscan: 5
        assert len(grid) == 22

    def test_achievable_partition_found(self):
        values = np.array([[0.0], [0.1], [10.0], [10.1]])
        ds = matrix_dataset(values)
        base = ClusteringParams(feature_subset=frozenset({0}),
                                algorithm="kmeans", k=2, seed=0,
                                standardize=False)
        desired = np.array([0, 0, 1, 1])
        ranked = reassignment_search(ds, desired, base)
        assert ranked[0][1] == pytest.approx(1.0)
