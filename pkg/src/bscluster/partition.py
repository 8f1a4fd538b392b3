"""Set partitions of cells and their restricted-growth-string encoding.

A partition of the cells ``{1, ..., I}`` into clusters is encoded by a
restricted growth string (RGS) ``a_1 ... a_I`` where ``a_i`` is the cluster
label of cell ``i``, labels are assigned in order of first appearance, and
``a_i <= 1 + max(a_1, ..., a_{i-1})`` with ``a_1 = 1``.  This makes the
encoding a bijection, which is what lets the search tree use strings as node
identities.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence


def is_valid_rgs(symbols: Sequence[int]) -> bool:
    """Return True iff ``symbols`` is a restricted growth string."""
    if len(symbols) == 0 or symbols[0] != 1:
        return False
    running_max = 1
    for label in symbols[1:]:
        if not 1 <= label <= running_max + 1:
            return False
        if label > running_max:
            running_max = label
    return True


def _format_symbols(symbols: Sequence[int]) -> str:
    # Digits are concatenated while unambiguous, comma-separated otherwise.
    if max(symbols) <= 9:
        return "".join(str(s) for s in symbols)
    return ",".join(str(s) for s in symbols)


def parse_rgs(text: str) -> "RestrictedGrowthString":
    """Parse the textual RGS form, e.g. ``"1213"`` or ``"1,2,1,10"``."""
    text = text.strip()
    if "," in text:
        symbols = tuple(int(part) for part in text.split(","))
    else:
        symbols = tuple(int(ch) for ch in text)
    return RestrictedGrowthString(symbols)


@dataclass(frozen=True)
class RestrictedGrowthString:
    """Canonical complete encoding of a set partition, one label per cell."""

    symbols: tuple[int, ...]

    def __post_init__(self) -> None:
        symbols = tuple(int(s) for s in self.symbols)
        object.__setattr__(self, "symbols", symbols)
        if not is_valid_rgs(symbols):
            raise ValueError(f"not a restricted growth string: {symbols}")

    def __len__(self) -> int:
        return len(self.symbols)

    def __getitem__(self, index: int) -> int:
        return self.symbols[index]

    def __iter__(self) -> Iterator[int]:
        return iter(self.symbols)

    def __str__(self) -> str:
        return _format_symbols(self.symbols)

    @property
    def num_cells(self) -> int:
        return len(self.symbols)

    @property
    def num_clusters(self) -> int:
        return max(self.symbols)

    def to_partition(self) -> "SetPartition":
        return rgs_to_partition(self)


@dataclass(frozen=True)
class PartialRgs:
    """Prefix of an RGS: only the first ``len(symbols)`` cells are clustered.

    Identifies an interior node of the search tree; the remaining
    ``total_cells - len(symbols)`` cells are still unconstrained.
    """

    symbols: tuple[int, ...]
    total_cells: int

    def __post_init__(self) -> None:
        symbols = tuple(int(s) for s in self.symbols)
        object.__setattr__(self, "symbols", symbols)
        if not 1 <= len(symbols) <= self.total_cells:
            raise ValueError(
                f"partial string length {len(symbols)} outside [1, {self.total_cells}]"
            )
        if not is_valid_rgs(symbols):
            raise ValueError(f"not a restricted growth string: {symbols}")

    def __len__(self) -> int:
        return len(self.symbols)

    def __str__(self) -> str:
        return _format_symbols(self.symbols)

    @property
    def length(self) -> int:
        return len(self.symbols)

    @property
    def max_label(self) -> int:
        return max(self.symbols)

    @property
    def is_complete(self) -> bool:
        return len(self.symbols) == self.total_cells

    @property
    def constrained_cells(self) -> range:
        """Cells already assigned to a cluster (1-based)."""
        return range(1, len(self.symbols) + 1)

    @property
    def unconstrained_cells(self) -> range:
        """Cells not yet assigned (1-based)."""
        return range(len(self.symbols) + 1, self.total_cells + 1)

    def label_of(self, cell: int) -> int:
        """Cluster label of a constrained cell (1-based)."""
        if not 1 <= cell <= len(self.symbols):
            raise ValueError(f"cell {cell} is not constrained by {self}")
        return self.symbols[cell - 1]

    def cluster_sizes(self) -> tuple[int, ...]:
        """Sizes of the constrained clusters, indexed by label - 1."""
        counts = [0] * self.max_label
        for label in self.symbols:
            counts[label - 1] += 1
        return tuple(counts)

    def cluster_cells(self, label: int) -> tuple[int, ...]:
        """Constrained cells carrying ``label`` (1-based)."""
        return tuple(i + 1 for i, s in enumerate(self.symbols) if s == label)

    def extended(self, label: int) -> "PartialRgs":
        """Child string with the next cell assigned to ``label``."""
        if self.is_complete:
            raise ValueError(f"cannot extend complete string {self}")
        if not 1 <= label <= self.max_label + 1:
            raise ValueError(f"label {label} violates the growth rule for {self}")
        child = object.__new__(PartialRgs)
        object.__setattr__(child, "symbols", self.symbols + (label,))
        object.__setattr__(child, "total_cells", self.total_cells)
        return child

    def to_rgs(self) -> RestrictedGrowthString:
        if not self.is_complete:
            raise ValueError(f"{self} is partial ({self.length} of {self.total_cells})")
        return RestrictedGrowthString(self.symbols)


class SetPartition:
    """Partition of cells ``{1..I}`` into disjoint, non-empty clusters.

    Clusters are stored sorted by their smallest cell, which matches the
    label order of the canonical RGS encoding.
    """

    __slots__ = ("clusters", "num_cells", "_cluster_index")

    def __init__(self, clusters: Iterable[Iterable[int]]):
        normalized = tuple(
            tuple(sorted(int(c) for c in cluster)) for cluster in clusters
        )
        if not normalized or any(len(c) == 0 for c in normalized):
            raise ValueError("clusters must be non-empty")
        normalized = tuple(sorted(normalized, key=lambda c: c[0]))
        cells = [c for cluster in normalized for c in cluster]
        num_cells = len(cells)
        if sorted(cells) != list(range(1, num_cells + 1)):
            raise ValueError(f"clusters must partition 1..I exactly: {normalized}")
        index: dict[int, int] = {}
        for pos, cluster in enumerate(normalized):
            for cell in cluster:
                index[cell] = pos
        self.clusters = normalized
        self.num_cells = num_cells
        self._cluster_index = index

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SetPartition) and self.clusters == other.clusters

    def __hash__(self) -> int:
        return hash(self.clusters)

    def __len__(self) -> int:
        return len(self.clusters)

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        return iter(self.clusters)

    def __repr__(self) -> str:
        body = ",".join("{" + ",".join(map(str, c)) + "}" for c in self.clusters)
        return "{" + body + "}"

    def cluster_of(self, cell: int) -> tuple[int, ...]:
        """The unique cluster containing ``cell``."""
        try:
            return self.clusters[self._cluster_index[cell]]
        except KeyError:
            raise ValueError(f"cell {cell} not in partition of 1..{self.num_cells}")

    @property
    def max_cluster_size(self) -> int:
        return max(len(c) for c in self.clusters)

    def labels(self) -> tuple[int, ...]:
        """Canonical 1-based cluster label per cell (the RGS symbols)."""
        return tuple(self._cluster_index[i] + 1 for i in range(1, self.num_cells + 1))

    def to_rgs(self) -> RestrictedGrowthString:
        return partition_to_rgs(self)


def rgs_to_partition(rgs: RestrictedGrowthString | Sequence[int]) -> SetPartition:
    """Decode an RGS: cell ``i`` joins the cluster labeled ``symbols[i-1]``."""
    if not isinstance(rgs, RestrictedGrowthString):
        rgs = RestrictedGrowthString(tuple(rgs))
    groups: dict[int, list[int]] = {}
    for cell, label in enumerate(rgs.symbols, start=1):
        groups.setdefault(label, []).append(cell)
    return SetPartition(groups.values())


def partition_to_rgs(partition: SetPartition) -> RestrictedGrowthString:
    """Canonical RGS of a partition (labels in order of first appearance)."""
    return RestrictedGrowthString(partition.labels())


def enumerate_partitions(
    num_cells: int, max_cluster_size: int | None = None
) -> Iterator[RestrictedGrowthString]:
    """Yield every RGS of length ``num_cells`` once, in lexicographic order.

    With ``max_cluster_size`` set, strings containing an oversized cluster are
    skipped during generation rather than filtered afterwards.
    """
    if num_cells < 1:
        raise ValueError("num_cells must be >= 1")
    if max_cluster_size is not None and max_cluster_size < 1:
        raise ValueError("max_cluster_size must be >= 1")
    for symbols in _rgs_tuples(num_cells, max_cluster_size):
        rgs = object.__new__(RestrictedGrowthString)
        object.__setattr__(rgs, "symbols", symbols)
        yield rgs


def _rgs_tuples(
    num_cells: int, max_cluster_size: int | None
) -> Iterator[tuple[int, ...]]:
    limit = num_cells if max_cluster_size is None else max_cluster_size
    prefix = [1]
    counts = [0] * (num_cells + 2)
    counts[1] = 1

    def extend(length: int, max_label: int) -> Iterator[tuple[int, ...]]:
        if length == num_cells:
            yield tuple(prefix)
            return
        for label in range(1, max_label + 2):
            if counts[label] >= limit:
                continue
            counts[label] += 1
            prefix.append(label)
            yield from extend(length + 1, max(max_label, label))
            prefix.pop()
            counts[label] -= 1

    if limit >= 1:
        yield from extend(1, 1)


@lru_cache(maxsize=8)
def feasible_label_vectors(
    num_cells: int, max_cluster_size: int | None = None
) -> tuple[tuple[int, ...], ...]:
    """All feasible RGS symbol tuples, materialized once per (I, D)."""
    return tuple(_rgs_tuples(num_cells, max_cluster_size))


def bell_number(n: int) -> int:
    """Number of set partitions of an ``n``-element set, exact."""
    if n < 0:
        raise ValueError("n must be >= 0")
    # Bell triangle: each row starts with the previous row's last entry.
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for value in row:
            nxt.append(nxt[-1] + value)
        row = nxt
    return row[0]
