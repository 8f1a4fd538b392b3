"""Globally optimal base-station clustering for interference-alignment networks.

Finds the cell clustering maximizing a long-term throughput objective by
best-first branch and bound over set partitions, alongside a greedy merge
heuristic, an exhaustive oracle, and a desk-scale network simulator.
"""

from .bnb import (
    BnbNode,
    NodeBound,
    Solution,
    SolverConfig,
    SolverStats,
    TraceRecord,
    branch,
    cluster_size_bound,
    objective_upper_bound,
    sinr_upper_bound,
    solve,
    subtree_leaf_count,
    throughput_upper_bound,
)
from .estimators import BranchAndBoundClustering, ExhaustiveClustering, GreedyClustering
from .heuristic import PairList, baseline_partition, exhaustive_solve, heuristic_cluster
from .network import (
    Network,
    NetworkConfig,
    calibrate_powers,
    check_network,
    generate_network,
    load_network,
    pathloss_db,
    save_network,
)
from .partition import (
    PartialRgs,
    RestrictedGrowthString,
    SetPartition,
    bell_number,
    enumerate_partitions,
    is_valid_rgs,
    parse_rgs,
    partition_to_rgs,
    rgs_to_partition,
)
from .throughput import (
    INFEASIBLE,
    MODEL_TAGS,
    OBJECTIVE_TAGS,
    Objective,
    ThroughputModel,
    evaluate_partition,
    exp_rate,
    objective_value,
    sinr,
    throughput,
)

__version__ = "0.1.0"

__all__ = [
    "BnbNode",
    "BranchAndBoundClustering",
    "ExhaustiveClustering",
    "GreedyClustering",
    "INFEASIBLE",
    "MODEL_TAGS",
    "Network",
    "NetworkConfig",
    "NodeBound",
    "OBJECTIVE_TAGS",
    "Objective",
    "PairList",
    "PartialRgs",
    "RestrictedGrowthString",
    "SetPartition",
    "Solution",
    "SolverConfig",
    "SolverStats",
    "ThroughputModel",
    "TraceRecord",
    "baseline_partition",
    "bell_number",
    "branch",
    "calibrate_powers",
    "check_network",
    "cluster_size_bound",
    "enumerate_partitions",
    "evaluate_partition",
    "exhaustive_solve",
    "exp_rate",
    "generate_network",
    "heuristic_cluster",
    "is_valid_rgs",
    "load_network",
    "objective_upper_bound",
    "objective_value",
    "parse_rgs",
    "partition_to_rgs",
    "pathloss_db",
    "rgs_to_partition",
    "save_network",
    "sinr",
    "sinr_upper_bound",
    "solve",
    "subtree_leaf_count",
    "throughput",
    "throughput_upper_bound",
    "__version__",
]
