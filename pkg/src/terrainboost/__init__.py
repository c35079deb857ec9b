"""Gradient boosted decision trees over structured categorical variables.

Categorical structure is declared as a terrain: the set of level subsets
it makes sense to average over, usually induced by a connected graph
over the levels. Trees split on maximally coarse conforming partitions
of each node's surviving levels.
"""

from .baselines import OrdinalMap, SiloedTable, encode_one_hot, encode_ordinal, fit_siloed
from .boosting import (
    BoostedEnsemble,
    BoostParams,
    evaluate_logloss,
    fit_ensemble,
    load_model,
    logloss_grad_hess,
    predict_proba,
    save_model,
)
from .dataset import (
    Dataset,
    FeatureSchema,
    FeatureSpec,
    bin_numeric,
    load_dataset,
    split_train_test,
)
from .enumeration import (
    BinarySplitCandidate,
    PartitionCache,
    cache_lookup_or_enumerate,
    connected_sets,
    count_connected_sets,
    maximally_coarse_partitions,
    maximally_coarse_partitions_explicit,
)
from .graph import (
    LevelGraph,
    build_graph,
    builtin_graph,
    induced_subgraph,
    is_connected,
    load_graph,
    parse_graph_spec,
)
from .synth import SyntheticRainConfig, generate_synthetic
from .terrain import Partition, Terrain, conforms, contains, is_coarsening, load_terrain, restrict
from .tree import ScdtNode, ScdtTree, TreeFeature, TreeParams, fit_tree, predict_tree, split_gain

__version__ = "0.1.0"

__all__ = [
    "BinarySplitCandidate",
    "BoostParams",
    "BoostedEnsemble",
    "Dataset",
    "FeatureSchema",
    "FeatureSpec",
    "LevelGraph",
    "OrdinalMap",
    "Partition",
    "PartitionCache",
    "ScdtNode",
    "ScdtTree",
    "SiloedTable",
    "SyntheticRainConfig",
    "Terrain",
    "TreeFeature",
    "TreeParams",
    "bin_numeric",
    "build_graph",
    "builtin_graph",
    "cache_lookup_or_enumerate",
    "conforms",
    "connected_sets",
    "contains",
    "count_connected_sets",
    "encode_one_hot",
    "encode_ordinal",
    "evaluate_logloss",
    "fit_ensemble",
    "fit_siloed",
    "fit_tree",
    "generate_synthetic",
    "induced_subgraph",
    "is_coarsening",
    "is_connected",
    "load_dataset",
    "load_graph",
    "load_model",
    "load_terrain",
    "logloss_grad_hess",
    "maximally_coarse_partitions",
    "maximally_coarse_partitions_explicit",
    "parse_graph_spec",
    "predict_proba",
    "predict_tree",
    "restrict",
    "save_model",
    "split_gain",
    "split_train_test",
]
