"""Balance-constrained k-center / k-median clustering via fairlet decomposition."""

from .core import (Clustering, Color, ColoredDataset, MetricKind, Objective,
                   Rational, balance_of_clustering, balance_of_dataset,
                   balance_of_subset, distance, kcenter_cost, kmedian_cost)
from .fairlets import (Fairlet, FairletDecomposition, InfeasibleBalanceError,
                       balanced_partition, brute_force_optimal_decomposition,
                       build_fairlet_network, decompose_11_center,
                       decompose_11_median, decompose_1t_center,
                       decompose_1t_median, decomposition_cost, extract_stars)
from .clustering import (WeightedPointSet, brute_force_fair_clustering,
                         cluster_fairlets, cost_composition, fair_cluster,
                         gonzalez_kcenter, local_search_kmedian)

__all__ = [
    "Clustering", "Color", "ColoredDataset", "MetricKind", "Objective",
    "Rational", "balance_of_clustering", "balance_of_dataset",
    "balance_of_subset", "distance", "kcenter_cost", "kmedian_cost",
    "Fairlet", "FairletDecomposition", "InfeasibleBalanceError",
    "balanced_partition", "brute_force_optimal_decomposition",
    "build_fairlet_network", "decompose_11_center", "decompose_11_median",
    "decompose_1t_center", "decompose_1t_median", "decomposition_cost",
    "extract_stars", "WeightedPointSet", "brute_force_fair_clustering",
    "cluster_fairlets", "cost_composition", "fair_cluster",
    "gonzalez_kcenter", "local_search_kmedian",
]
