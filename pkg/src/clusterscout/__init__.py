"""Guided clustering exploration: run clustering pipelines, validate and
explain the results, and navigate the space of alternative solutions with
feedback-driven recommendations."""

from .dataset import (Dataset, FeatureStats, Selection, detect_outliers,
                      feature_stats, load_csv, sample_rows, sampling_advice,
                      top_correlations)
from .engine import (ClusteringInstance, ClusteringParams, Labeling,
                     isolate_and_recluster, run_clustering)
from .filters import evaluate, parse_filter
from .projection import Embedding, ProjectionParams, procrustes_residual, project
from .validation import (ami, ari, combined_score, delta_l, elbow_point,
                         internal_measure, k_scan, score_projection,
                         silhouette, suggest_parameter, suitable_measures)
from .insight import (aggregate_matrix, build_rule_tree, describe_cluster,
                      extract_rules, feature_agglomeration, fit_rule_tree,
                      rank_features, reassignment_search, uncertain_points)
from .tour import (TourConfig, TourConstraints, TourState, accept,
                   choose_embedding, estimate_weights, generate_candidates,
                   init_tour, step)
from .cache import PrecomputeCache, precompute_k_range
from .session import (SessionState, apply_op, load_session, redo,
                      save_session, state_fingerprint, undo)

__version__ = "0.1.0"
