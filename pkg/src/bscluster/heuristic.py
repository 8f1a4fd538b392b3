"""Greedy merge clustering, trivial baselines, and the exhaustive oracle."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bnb import Solution, SolverStats
from .network import Network
from .partition import (
    RestrictedGrowthString,
    SetPartition,
    feasible_label_vectors,
)
from .throughput import (
    ModelEvaluator,
    Objective,
    ThroughputModel,
    _evaluate_label_batch,
    _evaluate_labels,
)

#: Cell counts above this need an explicit override; the enumeration grows
#: with the Bell numbers (B_12 is already 4.2 million partitions).
EXHAUSTIVE_GUARD = 12


@dataclass(frozen=True)
class PairList:
    """Directed candidate pairs for the greedy merge, strongest first.

    The score of ``(i, j)`` is the summed log gain that cell ``i``'s MSs
    receive from BS ``j``; both directions of every pair are present and are
    consumed independently, exactly one merge attempt each.
    """

    pairs: tuple[tuple[int, int], ...]
    scores: np.ndarray  # (I, I), score of (i, j) at [i-1, j-1]

    @classmethod
    def from_network(cls, network: Network) -> "PairList":
        num_cells, per_cell = network.num_cells, network.ms_per_cell
        gain_over_noise = network.gains * network.bs_power[np.newaxis, :] / (
            network.noise_power[:, np.newaxis]
        )
        per_ms = np.log1p(gain_over_noise)
        scores = per_ms.reshape(num_cells, per_cell, num_cells).sum(axis=1)
        candidates = [
            (i, j)
            for i in range(1, num_cells + 1)
            for j in range(1, num_cells + 1)
            if i != j
        ]
        # Highest score first; ties fall back to the smallest (i, j).
        candidates.sort(key=lambda pair: (-scores[pair[0] - 1, pair[1] - 1], pair))
        return cls(pairs=tuple(candidates), scores=scores)


def heuristic_cluster(network: Network, max_cluster_size: int | None = None) -> SetPartition:
    """Agglomerative merge of the strongest interfering cell pairs.

    Starts from singletons and repeatedly merges the clusters of the top
    remaining pair whenever the union respects the size limit; pairs already
    co-clustered reduce to a no-op size check.  Deterministic for a given
    network.
    """
    limit = network.config.max_cluster_size if max_cluster_size is None else max_cluster_size
    if limit < 1:
        raise ValueError("max_cluster_size must be >= 1")
    clusters: dict[int, frozenset[int]] = {
        i: frozenset((i,)) for i in range(1, network.num_cells + 1)
    }
    for i, j in PairList.from_network(network).pairs:
        merged = clusters[i] | clusters[j]
        if len(merged) <= limit:
            for cell in merged:
                clusters[cell] = merged
    return SetPartition(set(clusters.values()))


def baseline_partition(kind: str, num_cells: int) -> SetPartition:
    """The trivial reference partitions: ``singletons`` or ``grand``."""
    if num_cells < 1:
        raise ValueError("num_cells must be >= 1")
    if kind == "singletons":
        return SetPartition([(i,) for i in range(1, num_cells + 1)])
    if kind == "grand":
        return SetPartition([tuple(range(1, num_cells + 1))])
    raise ValueError(f"unknown baseline {kind!r}, expected 'singletons' or 'grand'")


def exhaustive_solve(
    network: Network,
    model: ThroughputModel,
    objective: Objective,
    max_cluster_size: int | None = None,
    max_cells: int = EXHAUSTIVE_GUARD,
) -> Solution:
    """Scan every feasible partition and return the best one.

    Ties go to the first maximizer in lexicographic RGS order.  Refuses cell
    counts above ``max_cells`` unless the guard is raised explicitly.
    """
    num_cells = network.num_cells
    if num_cells > max_cells:
        raise ValueError(
            f"exhaustive search over {num_cells} cells refused "
            f"(guard is {max_cells}; pass max_cells explicitly to override)"
        )
    limit = network.config.max_cluster_size if max_cluster_size is None else max_cluster_size
    if limit < 1:
        raise ValueError("max_cluster_size must be >= 1")

    evaluator = ModelEvaluator(model, network)
    candidates = feasible_label_vectors(num_cells, limit)
    labels = np.asarray(candidates, dtype=int) - 1
    values = _evaluate_label_batch(objective, evaluator, labels)
    winner = int(np.argmax(values))  # first maximizer = lexicographically first

    # Re-evaluate the winner through the single-partition path so the
    # reported value and throughputs match the solver's leaf evaluations.
    best_value, best_throughputs = _evaluate_labels(
        objective, evaluator, labels[winner], limit
    )
    evaluated = len(candidates)
    rgs = RestrictedGrowthString(candidates[winner])
    stats = SolverStats(iterations=evaluated, explored_leaves=evaluated, total_leaves=evaluated)
    return Solution(
        partition=rgs.to_partition(),
        rgs=rgs,
        objective_value=float(best_value),
        per_ms_throughput=best_throughputs,
        gap=0.0,
        stats=stats,
    )
