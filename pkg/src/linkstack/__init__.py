"""Stacked link prediction for undirected networks.

Level-0 predictors (topological, model-based, embedding) feed a random
forest meta-learner; synthetic benchmarks with known generative structure
certify the stacks against exact or Monte-Carlo optimal-AUC bounds.
"""

from .community import (
    Partition,
    description_length,
    fit_modularity,
    fit_sbm_mdl,
    fit_spectral_nb,
    score_modularity,
    score_sbm,
)
from .embedding import Embedding, deepwalk_embed, pair_embed_features
from .graph import Graph, GraphError, from_edge_list, non_edges, read_edge_list, remove_edges
from .holdout import HoldoutSplit, LabeledPairs, build_training_instance, kfold, sample_holdout
from .kernels import BACKEND as KERNEL_BACKEND
from .metrics import (
    EvalReport,
    auc,
    family_entropy,
    fit_top_x,
    importance_entropy,
    lorenz_gini,
    precision_recall,
    saturation_curve,
)
from .oracle import OracleEstimate, optimal_auc, optimal_auc_exact, optimal_auc_mc
from .stacking import Forest, StackedModel, gini_importances, majority_vote, predict_scores, train_forest, train_stack
from .synth import PlantedGraph, SyntheticSpec, builtin_suite, generate, sample_degree_sequence
from .table import PairFeatureTable
from .topology import global_features, low_rank_approx, node_features, pairwise_scores, topological_table

__version__ = "0.1.0"

__all__ = [
    "Graph", "GraphError", "from_edge_list", "read_edge_list", "non_edges", "remove_edges",
    "HoldoutSplit", "LabeledPairs", "sample_holdout", "build_training_instance", "kfold",
    "PairFeatureTable", "topological_table", "global_features", "pairwise_scores",
    "node_features", "low_rank_approx",
    "Partition", "fit_modularity", "score_modularity", "fit_sbm_mdl", "score_sbm",
    "fit_spectral_nb", "description_length",
    "Embedding", "deepwalk_embed", "pair_embed_features",
    "Forest", "StackedModel", "train_forest", "train_stack", "predict_scores",
    "gini_importances", "majority_vote",
    "SyntheticSpec", "PlantedGraph", "generate", "builtin_suite", "sample_degree_sequence",
    "OracleEstimate", "optimal_auc", "optimal_auc_exact", "optimal_auc_mc",
    "EvalReport", "auc", "precision_recall", "importance_entropy", "fit_top_x",
    "family_entropy", "lorenz_gini", "saturation_curve",
    "KERNEL_BACKEND", "__version__",
]
