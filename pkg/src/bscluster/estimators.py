"""Scikit-learn style estimators wrapping the clustering solvers.

The estimators follow the usual clustering protocol: hyperparameters in
``__init__`` (so ``get_params`` / ``set_params`` / ``clone`` work), ``fit``
producing trailing-underscore attributes, and ``fit_predict`` returning
0-based cluster labels, one per cell.  ``X`` is a ``Network`` scenario (or a
path to a saved one) rather than a samples-by-features matrix: the solvers
need link gains, powers and noise, not feature vectors.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin

from .bnb import SolverConfig, solve
from .heuristic import exhaustive_solve, heuristic_cluster, EXHAUSTIVE_GUARD
from .network import Network, check_network
from .partition import partition_to_rgs
from .throughput import (
    MODEL_TAGS,
    OBJECTIVE_TAGS,
    Objective,
    ThroughputModel,
    evaluate_partition,
)


class _NetworkClusteringMixin(ClusterMixin, BaseEstimator):
    """Shared input resolution for the network clustering estimators."""

    def _resolve(self, X) -> tuple[Network, ThroughputModel, Objective, int]:
        network = check_network(X)
        if self.model not in MODEL_TAGS:
            raise ValueError(f"model must be one of {MODEL_TAGS}, got {self.model!r}")
        if self.objective not in OBJECTIVE_TAGS:
            raise ValueError(
                f"objective must be one of {OBJECTIVE_TAGS}, got {self.objective!r}"
            )
        model = ThroughputModel.from_config(self.model, network.config)
        if self.weights is None:
            objective = Objective.uniform(self.objective, network.num_ms)
        else:
            objective = Objective(self.objective, np.asarray(self.weights, dtype=float))
        limit = (
            network.config.max_cluster_size
            if self.max_cluster_size is None
            else self.max_cluster_size
        )
        return network, model, objective, limit

    def _store(self, partition, value, throughputs, gap, stats) -> None:
        self.partition_ = partition
        self.rgs_ = partition_to_rgs(partition)
        self.labels_ = np.asarray(self.rgs_.symbols, dtype=int) - 1
        self.objective_value_ = float(value)
        self.per_ms_throughput_ = np.asarray(throughputs, dtype=float)
        self.gap_ = float(gap)
        self.stats_ = stats


class BranchAndBoundClustering(_NetworkClusteringMixin):
    """Globally optimal cell clustering via best-first branch and bound.

    Parameters
    ----------
    model : {"orth-ts", "spectrum", "composite"}
        Throughput model used for the objective and the bounds.
    objective : {"wsr", "minwt"}
        Weighted sum rate or minimum weighted throughput.
    weights : array-like of shape (n_ms,), optional
        Per-MS objective weights; uniform when omitted.
    epsilon : float, default 0.0
        Absolute optimality gap at which the search may stop.
    max_cluster_size : int, optional
        Cluster-size limit; the network's configured limit when omitted.
    initial : {"greedy", "singletons"}, default "greedy"
        Source of the initial incumbent.

    Attributes
    ----------
    labels_ : ndarray of shape (n_cells,)
        0-based cluster index per cell.
    partition_, rgs_, objective_value_, per_ms_throughput_, gap_, stats_,
    n_iter_ : search results, see ``bscluster.bnb.Solution``.
    """

    def __init__(
        self,
        model: str = "composite",
        objective: str = "wsr",
        weights=None,
        epsilon: float = 0.0,
        max_cluster_size: int | None = None,
        initial: str = "greedy",
    ):
        self.model = model
        self.objective = objective
        self.weights = weights
        self.epsilon = epsilon
        self.max_cluster_size = max_cluster_size
        self.initial = initial

    def fit(self, X, y=None):
        network, model, objective, limit = self._resolve(X)
        if self.initial == "greedy":
            incumbent = partition_to_rgs(heuristic_cluster(network, limit))
        elif self.initial == "singletons":
            incumbent = None
        else:
            raise ValueError(f"initial must be 'greedy' or 'singletons', got {self.initial!r}")
        solution = solve(
            network,
            model,
            objective,
            SolverConfig(epsilon=self.epsilon, max_cluster_size=limit),
            initial_incumbent=incumbent,
        )
        self._store(
            solution.partition,
            solution.objective_value,
            solution.per_ms_throughput,
            solution.gap,
            solution.stats,
        )
        self.n_iter_ = solution.stats.iterations
        return self


class GreedyClustering(_NetworkClusteringMixin):
    """Low-complexity agglomerative clustering of strongly coupled cells.

    The model/objective parameters only affect the reported objective value;
    the merge order depends on the link gains alone.
    """

    def __init__(
        self,
        model: str = "composite",
        objective: str = "wsr",
        weights=None,
        max_cluster_size: int | None = None,
    ):
        self.model = model
        self.objective = objective
        self.weights = weights
        self.max_cluster_size = max_cluster_size

    def fit(self, X, y=None):
        network, model, objective, limit = self._resolve(X)
        partition = heuristic_cluster(network, limit)
        value, throughputs = evaluate_partition(model, objective, network, partition, limit)
        self._store(partition, value, throughputs, np.nan, None)
        return self


class ExhaustiveClustering(_NetworkClusteringMixin):
    """Oracle clustering by enumerating every feasible partition."""

    def __init__(
        self,
        model: str = "composite",
        objective: str = "wsr",
        weights=None,
        max_cluster_size: int | None = None,
        max_cells: int = EXHAUSTIVE_GUARD,
    ):
        self.model = model
        self.objective = objective
        self.weights = weights
        self.max_cluster_size = max_cluster_size
        self.max_cells = max_cells

    def fit(self, X, y=None):
        network, model, objective, limit = self._resolve(X)
        solution = exhaustive_solve(network, model, objective, limit, max_cells=self.max_cells)
        self._store(
            solution.partition,
            solution.objective_value,
            solution.per_ms_throughput,
            solution.gap,
            solution.stats,
        )
        return self
