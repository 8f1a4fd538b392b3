"""Best-first branch and bound over set partitions of the cells.

The search tree has one node per partial restricted growth string: at depth
``l`` the first ``l`` cells are committed to clusters and the rest are free.
Each node carries an upper bound on the objective of every complete partition
below it, built from two relaxations evaluated per MS:

* an SINR bound ``rho_check``: the best long-term SINR any completion could
  give the MS, found by letting its cluster absorb the strongest remaining
  interferers without enforcing disjointness (exact by greedy selection,
  since the interference terms are fixed nonnegative numbers);
* a cluster-size bound ``B_check``: the best achievable cluster size for the
  MS given how many cells could still join, snapped toward the unimodal
  optimum ``B_star`` of the throughput model.

Nodes are explored best-bound-first; a subtree is pruned as soon as its bound
falls to or below the incumbent objective.  With ``epsilon = 0`` the search
is exact.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np

from .network import Network
from .partition import (
    PartialRgs,
    RestrictedGrowthString,
    SetPartition,
    bell_number,
)
from .throughput import (
    ModelEvaluator,
    Objective,
    ThroughputModel,
    _evaluate_labels,
    _rho_excluding,
)


@dataclass(frozen=True)
class SolverConfig:
    """Absolute optimality gap and cluster-size limit for one solve."""

    epsilon: float = 0.0
    max_cluster_size: int | None = None

    def __post_init__(self) -> None:
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.max_cluster_size is not None and self.max_cluster_size < 1:
            raise ValueError("max_cluster_size must be >= 1")


@dataclass(frozen=True)
class BnbNode:
    """Live search node: a partial string with its cached objective bound."""

    partial: PartialRgs
    upper_bound: float


@dataclass
class SolverStats:
    """Search counters and convergence traces.

    Leaf-weighted counters attribute every leaf of the full search tree to
    the event that removed it from consideration, so their sum (plus the
    explored leaves) accounts for the whole tree.
    """

    iterations: int = 0
    nodes_bounded: int = 0
    nodes_pruned: int = 0
    pruned_leaves: int = 0      # leaves under subtrees cut by the bound test
    infeasible_leaves: int = 0  # leaves under children skipped by the size limit
    explored_leaves: int = 0    # complete strings evaluated exactly
    terminal_leaves: int = 0    # leaves still live when the gap test fired
    total_leaves: int = 0
    incumbent_trace: list[tuple[int, float]] = field(default_factory=list)
    bound_trace: list[tuple[int, float]] = field(default_factory=list)

    @property
    def fraction_pruned(self) -> float:
        if self.total_leaves == 0:
            return 0.0
        removed = self.pruned_leaves + self.infeasible_leaves + self.terminal_leaves
        return removed / self.total_leaves


@dataclass(frozen=True)
class TraceRecord:
    """Per-iteration snapshot emitted to the optional trace callback."""

    iteration: int
    best_bound: float
    incumbent_value: float
    live_size: int
    nodes_pruned: int
    fraction_pruned: float


@dataclass(frozen=True)
class Solution:
    """Result of a solve: the clustering, its value, and the search record."""

    partition: SetPartition
    rgs: RestrictedGrowthString
    objective_value: float
    per_ms_throughput: np.ndarray
    gap: float
    stats: SolverStats


@lru_cache(maxsize=None)
def _completion_count(remaining: int, max_label: int) -> int:
    # Number of full-tree leaf completions of a partial string with
    # `remaining` free cells and current maximum label `max_label`.
    if remaining == 0:
        return 1
    return max_label * _completion_count(remaining - 1, max_label) + _completion_count(
        remaining - 1, max_label + 1
    )


def subtree_leaf_count(partial: PartialRgs) -> int:
    """Exact number of complete strings below a search-tree node."""
    return _completion_count(partial.total_cells - partial.length, partial.max_label)


def branch(parent: PartialRgs, max_cluster_size: int | None = None) -> list[PartialRgs]:
    """Children of a node: the next cell joins each allowed cluster.

    Labels run over ``1 .. 1 + max(parent)``; children whose target cluster
    would exceed ``max_cluster_size`` are not constructed.
    """
    if parent.is_complete:
        raise ValueError(f"cannot branch on complete string {parent}")
    max_label = parent.max_label
    if max_cluster_size is None:
        return [parent.extended(b) for b in range(1, max_label + 2)]
    sizes = parent.cluster_sizes()
    children = []
    for label in range(1, max_label + 2):
        if label <= max_label and sizes[label - 1] >= max_cluster_size:
            continue
        children.append(parent.extended(label))
    return children


def _resolve_limit(network: Network, max_cluster_size: int | None) -> int:
    limit = network.config.max_cluster_size if max_cluster_size is None else max_cluster_size
    if limit < 1:
        raise ValueError("max_cluster_size must be >= 1")
    return limit


def _check_partial(network: Network, partial: PartialRgs) -> None:
    if partial.total_cells != network.num_cells:
        raise ValueError(
            f"partial string over {partial.total_cells} cells, network has {network.num_cells}"
        )


def sinr_upper_bound(
    network: Network,
    ms: tuple[int, int],
    partial: PartialRgs,
    max_cluster_size: int | None = None,
) -> float:
    """Best long-term SINR of one MS over all completions of ``partial``.

    The MS's cluster keeps its committed members and greedily absorbs the
    strongest remaining interferers (unconstrained cells, or any cell of a
    non-full cluster if the serving cell is itself unconstrained) up to the
    size limit.  Disjointness is not enforced, which is what makes this an
    upper bound; the greedy choice is exact because it simply removes the
    largest interference terms from the denominator.
    """
    _check_partial(network, partial)
    limit = _resolve_limit(network, max_cluster_size)
    cell = ms[0]
    row = network.ms_index(*ms)
    weights = network.interference_power[row]
    length = partial.length

    if cell <= length:
        members = partial.cluster_cells(partial.label_of(cell))
        if len(members) > limit:
            raise ValueError(f"cluster {members} already exceeds the size limit {limit}")
        mandatory = set(members)
        pool = list(partial.unconstrained_cells)
        budget = limit - len(members)
    else:
        sizes = partial.cluster_sizes()
        open_cells = [
            c for c in partial.constrained_cells if sizes[partial.label_of(c) - 1] < limit
        ]
        mandatory = set()
        pool = open_cells + list(partial.unconstrained_cells)
        budget = limit

    pool.sort(key=lambda c: (-weights[c - 1], c))
    included = frozenset(mandatory | set(pool[:budget]))
    return _rho_excluding(network, row, included)


def cluster_size_bound(
    model: ThroughputModel,
    network: Network,
    ms: tuple[int, int],
    partial: PartialRgs,
    rho_bound: float,
    max_cluster_size: int | None = None,
) -> int:
    """Optimistic cluster size for one MS given its SINR bound.

    ``B_star`` is the smallest maximizer of ``v(b, rho_bound)`` over feasible
    sizes; the result keeps the committed size if it already passed the peak,
    and otherwise moves toward ``B_star`` as far as the free cells allow.
    """
    _check_partial(network, partial)
    limit = _resolve_limit(network, max_cluster_size)
    cell = ms[0]
    row = network.ms_index(*ms)
    snr_ms = float(network.snr[row])
    length = partial.length
    free = partial.total_cells - length

    # Sizes above the cell count are unreachable; by unimodality the capped
    # scan yields the same bound as scanning all of 1..limit.
    scan_max = min(limit, partial.total_cells)
    best_size, best_value = 1, -np.inf
    for b in range(1, scan_max + 1):
        value = model.value(b, rho_bound, snr_ms)
        if value > best_value:
            best_size, best_value = b, value

    if cell <= length:
        size = len(partial.cluster_cells(partial.label_of(cell)))
        if size >= best_size:
            return size
        return min(size + free, best_size)
    if 1 >= best_size:
        return 1
    open_cells = sum(s for s in partial.cluster_sizes() if s < limit)
    return min(open_cells + free, best_size)


def throughput_upper_bound(
    model: ThroughputModel,
    network: Network,
    ms: tuple[int, int],
    partial: PartialRgs,
    max_cluster_size: int | None = None,
) -> float:
    """Per-MS throughput bound ``v(B_check, rho_check)``; tight at leaves."""
    rho_bound = sinr_upper_bound(network, ms, partial, max_cluster_size)
    size_bound = cluster_size_bound(model, network, ms, partial, rho_bound, max_cluster_size)
    row = network.ms_index(*ms)
    return model.value(size_bound, rho_bound, float(network.snr[row]))


class NodeBound(NamedTuple):
    objective_bound: float
    throughput_bounds: np.ndarray
    sinr_bounds: np.ndarray
    size_bounds: np.ndarray


class _Bounder:
    """Vectorized per-node bound evaluation over all MSs at once.

    At a complete string the computation reduces, operation for operation, to
    the partition evaluation path, so leaf bounds match exact objectives to
    the last bit.
    """

    def __init__(
        self,
        network: Network,
        evaluator: ModelEvaluator,
        objective: Objective,
        max_cluster_size: int,
    ):
        self.network = network
        self.evaluator = evaluator
        self.objective = objective
        self.limit = max_cluster_size
        self.weights = network.interference_power
        self.noise = network.noise_power
        self.signal = network.signal_power
        self.serving = network.serving_cells
        scan_max = min(max_cluster_size, network.num_cells)
        size_column = np.arange(1, scan_max + 1, dtype=float).reshape(-1, 1)
        self.prelog_column = evaluator.model.prelog(size_column)
        self.rows = np.arange(network.num_ms)
        # Everything that depends on the node only through its depth.
        self._depth_cache: dict[int, tuple] = {}

    def _depth_data(self, length: int) -> tuple:
        cached = self._depth_cache.get(length)
        if cached is None:
            constrained = self.serving < length
            # Ascending prefix sums over the not-yet-constrained cells: entry
            # [r, t] is the interference at MS r from all but its t strongest
            # absorbable free cells.
            free = self.network.num_cells - length
            pool_prefix = np.zeros((self.network.num_ms, free + 1))
            np.cumsum(np.sort(self.weights[:, length:], axis=1), axis=1, out=pool_prefix[:, 1:])
            cached = (constrained, np.where(constrained)[0], pool_prefix)
            self._depth_cache[length] = cached
        return cached

    def node_bound(self, partial: PartialRgs) -> NodeBound:
        num_cells = self.network.num_cells
        num_ms = self.network.num_ms
        length = partial.length
        labels = np.asarray(partial.symbols, dtype=int) - 1
        num_labels = int(labels.max()) + 1
        label_sizes = np.bincount(labels, minlength=num_labels)
        if label_sizes.max() > self.limit:
            raise ValueError(f"{partial} violates the size limit {self.limit}")

        rows = self.rows
        free = num_cells - length
        constrained, constrained_rows, pool_prefix = self._depth_data(length)
        own = np.zeros(num_ms, dtype=int)
        own[constrained] = labels[self.serving[constrained]]

        # Interference left over from other committed clusters.
        indicator = np.zeros((length, num_labels))
        indicator[np.arange(length), labels] = 1.0
        per_label = self.weights[:, :length] @ indicator
        per_label[constrained_rows, own[constrained]] = 0.0
        committed_interference = per_label.sum(axis=1)

        # Each MS's cluster absorbs the strongest free cells it can still take.
        budget = np.minimum(self.limit - label_sizes[own], free)
        den = self.noise + committed_interference + pool_prefix[rows, free - budget]

        if constrained.all():
            open_count = free + int(label_sizes[label_sizes < self.limit].sum())
        else:
            # Unconstrained serving cell: only cells of full clusters are
            # guaranteed interferers; everything else is up for absorption.
            full_cell = label_sizes[labels] >= self.limit
            locked = self.weights[:, :length][:, full_cell].sum(axis=1)
            open_weights = np.concatenate(
                [self.weights[:, :length][:, ~full_cell], self.weights[:, length:]], axis=1
            )
            open_count = open_weights.shape[1]
            take = min(self.limit, open_count)
            open_prefix = np.zeros((num_ms, open_count + 1))
            np.cumsum(np.sort(open_weights, axis=1), axis=1, out=open_prefix[:, 1:])
            den_unconstrained = self.noise + locked + open_prefix[:, open_count - take]
            den = np.where(constrained, den, den_unconstrained)
        rho_check = self.signal / den

        value_table = self.evaluator.compose(self.prelog_column, rho_check)
        b_star = 1 + np.argmax(value_table, axis=0)
        committed_size = np.where(constrained, label_sizes[own], 1)
        grow_cap = np.where(constrained, committed_size + free, open_count)
        b_check = np.where(
            committed_size >= b_star, committed_size, np.minimum(grow_cap, b_star)
        )
        t_check = value_table[b_check - 1, rows]
        return NodeBound(
            objective_bound=self.objective.evaluate(t_check),
            throughput_bounds=t_check,
            sinr_bounds=rho_check,
            size_bounds=b_check,
        )

    def batch_bounds(self, parent: PartialRgs, children: list[PartialRgs]) -> np.ndarray:
        """Objective bounds for sibling interior nodes, in one vectorized pass.

        The children share the parent's prefix and differ only in the label of
        the newly committed cell, so all parent-level structures are built
        once.  Agrees with ``node_bound`` per child up to summation-order
        rounding; leaf nodes never go through here.
        """
        num_cells = self.network.num_cells
        num_ms = self.network.num_ms
        limit = self.limit
        length = parent.length + 1
        free = num_cells - length
        count = len(children)
        rows = self.rows
        child_range = np.arange(count)

        parent_labels = np.asarray(parent.symbols, dtype=int) - 1
        child_labels = np.array([c.symbols[-1] for c in children], dtype=int) - 1
        num_labels = int(max(parent_labels.max(), child_labels.max())) + 1

        sizes = np.tile(np.bincount(parent_labels, minlength=num_labels), (count, 1))
        sizes[child_range, child_labels] += 1

        constrained, _, pool_prefix = self._depth_data(length)
        newly = self.serving == parent.length
        own = np.zeros((count, num_ms), dtype=int)
        previously = self.serving < parent.length
        own[:, previously] = parent_labels[self.serving[previously]]
        own[:, newly] = child_labels[:, np.newaxis]

        indicator = np.zeros((parent.length, num_labels))
        indicator[np.arange(parent.length), parent_labels] = 1.0
        shared_per_label = self.weights[:, : parent.length] @ indicator
        per_label = np.repeat(shared_per_label[np.newaxis], count, axis=0)
        per_label[child_range, :, child_labels] += self.weights[:, parent.length]
        constrained_rows = np.where(constrained)[0]
        per_label[
            child_range[:, np.newaxis], constrained_rows[np.newaxis, :], own[:, constrained_rows]
        ] = 0.0
        committed = per_label.sum(axis=2)

        own_size = sizes[child_range[:, np.newaxis], own]
        budget = np.minimum(limit - own_size, free)
        den = self.noise + committed + pool_prefix[rows, free - budget]

        if constrained.all():
            open_counts = np.where(sizes < limit, sizes, 0).sum(axis=1) + free
        else:
            # Children that do not fill their target cluster all leave the
            # same set of cells open, so one sorted prefix serves them; only
            # the (rare) filling children need their own pass.
            free_rows = np.where(~constrained)[0]
            parent_sizes = np.bincount(parent_labels, minlength=num_labels)
            filling = parent_sizes[child_labels] + 1 >= limit
            base_full = (parent_sizes >= limit)[parent_labels]
            noise_u = self.noise[free_rows]
            unconstrained_w = self.weights[free_rows]
            committed_w = unconstrained_w[:, : parent.length]
            new_cell_w = unconstrained_w[:, parent.length : length]
            free_w = unconstrained_w[:, length:]

            base_locked = committed_w[:, base_full].sum(axis=1)
            base_open = np.concatenate([committed_w[:, ~base_full], new_cell_w, free_w], axis=1)
            base_count = base_open.shape[1]
            base_keep = base_count - min(limit, base_count)
            base_remaining = np.sort(base_open, axis=1)[:, :base_keep].sum(axis=1)
            den_base = noise_u + base_locked + base_remaining

            open_counts = np.full(count, base_count)
            den[:, free_rows] = den_base
            for c in np.where(filling)[0]:
                full = base_full | (parent_labels == child_labels[c])
                locked = committed_w[:, full].sum(axis=1) + new_cell_w[:, 0]
                open_weights = np.concatenate([committed_w[:, ~full], free_w], axis=1)
                open_count = open_weights.shape[1]
                keep = open_count - min(limit, open_count)
                remaining = np.sort(open_weights, axis=1)[:, :keep].sum(axis=1)
                den[c, free_rows] = noise_u + locked + remaining
                open_counts[c] = open_count
        rho_check = self.signal / den

        value_table = self.evaluator.compose(
            self.prelog_column[np.newaxis, :, :], rho_check[:, np.newaxis, :]
        )
        b_star = 1 + np.argmax(value_table, axis=1)
        committed_size = np.where(constrained[np.newaxis, :], own_size, 1)
        grow_cap = np.where(
            constrained[np.newaxis, :], committed_size + free, open_counts[:, np.newaxis]
        )
        b_check = np.where(
            committed_size >= b_star, committed_size, np.minimum(grow_cap, b_star)
        )
        t_check = value_table[
            child_range[:, np.newaxis], b_check - 1, rows[np.newaxis, :]
        ]
        if self.objective.kind == "wsr":
            return t_check @ self.objective.weights
        return (t_check * self.objective.weights).min(axis=1)


def objective_upper_bound(
    model: ThroughputModel,
    objective: Objective,
    network: Network,
    partial: PartialRgs,
    max_cluster_size: int | None = None,
) -> float:
    """Upper bound on the objective over every completion of ``partial``."""
    _check_partial(network, partial)
    limit = _resolve_limit(network, max_cluster_size)
    bounder = _Bounder(network, ModelEvaluator(model, network), objective, limit)
    return bounder.node_bound(partial).objective_bound


def solve(
    network: Network,
    model: ThroughputModel,
    objective: Objective,
    config: SolverConfig | None = None,
    initial_incumbent: RestrictedGrowthString | None = None,
    trace_callback: Callable[[TraceRecord], None] | None = None,
) -> Solution:
    """Find an epsilon-optimal cell clustering by best-first branch and bound.

    The live set is a max-priority queue on the node bound, with ties broken
    toward longer strings and then lexicographically, so runs are fully
    deterministic.  The search stops when the best live bound is within
    ``epsilon`` of the incumbent, or when the queue empties (gap 0).

    ``initial_incumbent`` must be feasible under the size limit; it defaults
    to the all-singleton partition.  Pass the greedy heuristic's result for a
    warmer start.
    """
    cfg = config if config is not None else SolverConfig()
    limit = _resolve_limit(network, cfg.max_cluster_size)
    num_cells = network.num_cells

    if initial_incumbent is None:
        initial_incumbent = RestrictedGrowthString(tuple(range(1, num_cells + 1)))
    elif not isinstance(initial_incumbent, RestrictedGrowthString):
        initial_incumbent = RestrictedGrowthString(tuple(initial_incumbent))
    if len(initial_incumbent) != num_cells:
        raise ValueError(
            f"incumbent covers {len(initial_incumbent)} cells, network has {num_cells}"
        )
    incumbent_labels = np.asarray(initial_incumbent.symbols, dtype=int) - 1
    if np.bincount(incumbent_labels).max() > limit:
        raise ValueError(f"initial incumbent {initial_incumbent} violates the size limit {limit}")

    evaluator = ModelEvaluator(model, network)
    incumbent_value, incumbent_throughputs = _evaluate_labels(
        objective, evaluator, incumbent_labels, limit
    )
    incumbent_symbols = initial_incumbent.symbols

    bounder = _Bounder(network, evaluator, objective, limit)
    stats = SolverStats(total_leaves=bell_number(num_cells))
    stats.incumbent_trace.append((0, incumbent_value))

    root = PartialRgs((1,), num_cells)
    root_bound = float(bounder.node_bound(root).objective_bound)
    stats.nodes_bounded += 1
    live: list[tuple[float, int, tuple[int, ...], BnbNode]] = []
    heapq.heappush(live, (-root_bound, -1, root.symbols, BnbNode(root, root_bound)))

    gap = 0.0
    while live:
        stats.iterations += 1
        iteration = stats.iterations
        neg_bound, _, symbols, node = heapq.heappop(live)
        best_bound = -neg_bound
        stats.bound_trace.append((iteration, best_bound))

        if best_bound - incumbent_value < cfg.epsilon:
            gap = max(0.0, best_bound - incumbent_value)
            stats.terminal_leaves += subtree_leaf_count(node.partial)
            for _, _, _, leftover in live:
                stats.terminal_leaves += subtree_leaf_count(leftover.partial)
            live.clear()
            if trace_callback is not None:
                trace_callback(_record(iteration, best_bound, incumbent_value, live, stats))
            break

        parent = node.partial
        if parent.is_complete:
            # Only reachable for single-cell networks, where the root is a leaf.
            labels = np.asarray(parent.symbols, dtype=int) - 1
            value, throughputs = _evaluate_labels(objective, evaluator, labels, limit)
            stats.explored_leaves += 1
            if value > incumbent_value:
                incumbent_value, incumbent_throughputs = value, throughputs
                incumbent_symbols = parent.symbols
                stats.incumbent_trace.append((iteration, incumbent_value))
            if trace_callback is not None:
                trace_callback(_record(iteration, best_bound, incumbent_value, live, stats))
            continue

        children = branch(parent, limit)
        stats.nodes_bounded += len(children)
        skipped = (parent.max_label + 1) - len(children)
        if skipped:
            stats.infeasible_leaves += skipped * _completion_count(
                num_cells - parent.length - 1, parent.max_label
            )

        interior = []
        for child in children:
            if child.is_complete:
                labels = np.asarray(child.symbols, dtype=int) - 1
                value, throughputs = _evaluate_labels(objective, evaluator, labels, limit)
                stats.explored_leaves += 1
                if value > incumbent_value:
                    incumbent_value, incumbent_throughputs = value, throughputs
                    incumbent_symbols = child.symbols
                    stats.incumbent_trace.append((iteration, incumbent_value))
                else:
                    stats.nodes_pruned += 1
            else:
                interior.append(child)
        if interior:
            bounds = bounder.batch_bounds(parent, interior)
            for child, bound in zip(interior, bounds):
                # The parent bound also caps the subtree; taking the minimum
                # keeps the best-bound trace monotone under floating-point
                # noise.
                child_bound = min(float(bound), best_bound)
                if child_bound > incumbent_value:
                    heapq.heappush(
                        live,
                        (-child_bound, -child.length, child.symbols, BnbNode(child, child_bound)),
                    )
                else:
                    stats.nodes_pruned += 1
                    stats.pruned_leaves += subtree_leaf_count(child)

        if trace_callback is not None:
            trace_callback(_record(iteration, best_bound, incumbent_value, live, stats))

    rgs = RestrictedGrowthString(incumbent_symbols)
    return Solution(
        partition=rgs.to_partition(),
        rgs=rgs,
        objective_value=incumbent_value,
        per_ms_throughput=incumbent_throughputs,
        gap=float(gap),
        stats=stats,
    )


def _record(
    iteration: int,
    best_bound: float,
    incumbent_value: float,
    live: list,
    stats: SolverStats,
) -> TraceRecord:
    return TraceRecord(
        iteration=iteration,
        best_bound=float(best_bound),
        incumbent_value=float(incumbent_value),
        live_size=len(live),
        nodes_pruned=stats.nodes_pruned,
        fraction_pruned=stats.fraction_pruned,
    )
