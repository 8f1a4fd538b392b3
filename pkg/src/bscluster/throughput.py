"""Long-term SINR, the three throughput models, and system-level objectives.

All throughputs are long-term quantities in nats/symbol built from the
large-scale gains only.  Every model maps ``(cluster size, long-term SINR)``
to a rate ``v(size, rho)`` that is unimodal in the size (overhead eventually
dominates) and non-decreasing in the SINR; negative pre-log factors are
clamped to zero.  Those two shape properties are exactly what the
branch-and-bound upper bounds rely on.

Internally every model is decomposed as

    v(size, rho) = max(0, prelog(size) * snr_rate + sinr_rate(rho))

where ``snr_rate`` depends only on the MS's static interference-free SNR.
The solver exploits this by precomputing ``snr_rate`` once per network.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.special import exp1 as _exp1

from .network import Network, NetworkConfig
from .partition import SetPartition

MODEL_TAGS = ("orth-ts", "spectrum", "composite")
OBJECTIVE_TAGS = ("wsr", "minwt")

#: Objective value reported for partitions violating the cluster-size limit.
#: Distinct from 0 so that feasible all-zero partitions still dominate.
INFEASIBLE = float("-inf")

# Above this argument the unscaled E1 approaches the subnormal range (E1
# underflows near x ~ 705) and the e^x factor approaches overflow, so the
# scaled continued fraction takes over; it needs only a few terms there.
_E1_DIRECT_CUTOFF = 600.0


def _e1_scaled_large(x: np.ndarray) -> np.ndarray:
    # e^x * E1(x) for large x via the modified Lentz continued fraction;
    # evaluating the scaled product directly avoids exp overflow/underflow.
    tiny = 1e-300
    b = x + 1.0
    c = np.full_like(x, 1.0 / tiny)
    d = 1.0 / b
    h = d.copy()
    for i in range(1, 200):
        a = -float(i * i)
        b = b + 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h *= delta
        if np.all(np.abs(delta - 1.0) < 1e-15):
            break
    return h


def _e1_scaled(x: np.ndarray) -> np.ndarray:
    large = x > _E1_DIRECT_CUTOFF
    if not large.any():
        return np.exp(x) * _exp1(x)
    # Clamping keeps the direct product finite; clamped lanes are overwritten.
    clamped = np.minimum(x, _E1_DIRECT_CUTOFF)
    out = np.exp(clamped) * _exp1(clamped)
    out[large] = _e1_scaled_large(x[large])
    return out


def exp_rate(rho, streams: int = 1):
    """Long-term spectrum-sharing rate ``d * e^(1/rho) * E1(1/rho)``.

    Continuous and strictly increasing in ``rho`` with ``exp_rate(0) = 0``
    (the vanishing-SINR limit).  Accurate to better than 1e-12 relative over
    ``rho`` in [1e-3, 1e6]; accepts scalars or arrays.
    """
    arr = np.asarray(rho, dtype=float)
    if np.any(arr < 0):
        raise ValueError("rho must be >= 0")
    positive = arr > 0
    out = np.zeros_like(arr)
    if np.any(positive):
        out[positive] = _e1_scaled(1.0 / arr[positive])
    out *= streams
    return float(out) if np.ndim(rho) == 0 else out


def sinr(network: Network, ms: tuple[int, int], cluster: Iterable[int]) -> float:
    """Long-term SINR of MS ``(i, k)`` when cells ``cluster`` align jointly.

    Interference from every cell outside the cluster is summed at full BS
    power; intracluster interference is assumed perfectly canceled.
    """
    cell = ms[0]
    members = frozenset(int(c) for c in cluster)
    if cell not in members:
        raise ValueError(f"serving cell {cell} not in cluster {sorted(members)}")
    if not members <= set(range(1, network.num_cells + 1)):
        raise ValueError(f"cluster {sorted(members)} outside 1..{network.num_cells}")
    row = network.ms_index(*ms)
    return _rho_excluding(network, row, members)


def _rho_excluding(network: Network, row: int, included_cells: frozenset[int]) -> float:
    # Canonical SINR evaluation: interference summed in cell-index order.
    # Shared by the reference bound ops so exact-equality contracts hold.
    w = network.interference_power[row]
    interference = 0.0
    for j in range(network.num_cells):
        if (j + 1) not in included_cells:
            interference += w[j]
    return float(network.signal_power[row] / (network.noise_power[row] + interference))


@dataclass(frozen=True)
class ThroughputModel:
    """One of the three long-term throughput models, with its parameters.

    ``orth-ts``    time-shared orthogonal clusters, quadratic CSI feedback
                   overhead, rate from the interference-free SNR.
    ``spectrum``   spectrum sharing, no overhead accounting, rate from the
                   long-term SINR.
    ``composite``  time-sharing phase plus spectrum-sharing phase, CSI
                   acquisition overhead in the pre-log, exponential-integral
                   long-term rates in both phases.
    """

    variant: str
    num_cells: int
    ms_per_cell: int
    streams_per_ms: int
    bs_antennas: int
    ms_antennas: int
    coherence_length: float

    def __post_init__(self) -> None:
        if self.variant not in MODEL_TAGS:
            raise ValueError(f"unknown model {self.variant!r}, expected one of {MODEL_TAGS}")

    @classmethod
    def from_config(cls, variant: str, config: NetworkConfig) -> "ThroughputModel":
        return cls(
            variant=variant,
            num_cells=config.num_cells,
            ms_per_cell=config.ms_per_cell,
            streams_per_ms=config.streams_per_ms,
            bs_antennas=config.bs_antennas,
            ms_antennas=config.ms_antennas,
            coherence_length=config.coherence_length,
        )

    def prelog(self, cluster_size) -> np.ndarray:
        """Fraction of the coherence time left for phase-one data."""
        b = np.asarray(cluster_size, dtype=float)
        if self.variant == "orth-ts":
            return b / self.num_cells - b * b / self.coherence_length
        if self.variant == "spectrum":
            return np.zeros_like(b)
        m, k = self.bs_antennas, self.ms_per_cell
        linear = float(m + k * (self.ms_antennas + self.streams_per_ms))
        quadratic = float(k * m)
        return b / self.num_cells - (linear * b + quadratic * b * b) / self.coherence_length

    def snr_rate(self, snr) -> np.ndarray:
        """Phase-one rate from the static interference-free SNR."""
        if self.variant == "orth-ts":
            return self.streams_per_ms * np.log1p(np.asarray(snr, dtype=float))
        if self.variant == "spectrum":
            return np.zeros_like(np.asarray(snr, dtype=float))
        return exp_rate(snr, self.streams_per_ms)

    def sinr_rate(self, rho) -> np.ndarray:
        """Phase-two rate from the long-term SINR (callers ensure rho >= 0)."""
        arr = np.asarray(rho, dtype=float)
        if self.variant == "orth-ts":
            return np.zeros_like(arr)
        if self.variant == "spectrum":
            return self.streams_per_ms * np.log1p(arr)
        out = np.zeros_like(arr)
        positive = arr > 0
        if positive.all():
            out = _e1_scaled(1.0 / arr)
        elif positive.any():
            out[positive] = _e1_scaled(1.0 / arr[positive])
        out *= self.streams_per_ms
        return out

    def value(self, cluster_size, rho, snr):
        """Clamped rate ``max(0, v(cluster_size, rho))`` for this model.

        ``snr`` is the MS's interference-free SNR (used by the models whose
        first phase ignores intercluster interference).  All three arguments
        broadcast, so a (D, 1) size column against (R,) SINR rows yields the
        full size-by-MS table used by the solver bounds.
        """
        result = np.maximum(
            0.0, self.prelog(cluster_size) * self.snr_rate(snr) + self.sinr_rate(rho)
        )
        if np.ndim(cluster_size) == 0 and np.ndim(rho) == 0 and np.ndim(snr) == 0:
            return float(result)
        return result


class ModelEvaluator:
    """A throughput model bound to one network, with the static part cached.

    ``throughputs(sizes, rho)`` computes the same expression as
    ``ThroughputModel.value`` with the per-MS SNR rates precomputed, so the
    solver pays one exponential-integral evaluation per node instead of two.
    """

    __slots__ = ("model", "network", "static_rate")

    def __init__(self, model: ThroughputModel, network: Network):
        if model.num_cells != network.num_cells or model.ms_per_cell != network.ms_per_cell:
            raise ValueError("model parameters disagree with the network dimensions")
        self.model = model
        self.network = network
        self.static_rate = model.snr_rate(network.snr)

    def throughputs(self, cluster_sizes, rho) -> np.ndarray:
        """Per-MS clamped rates; sizes and SINRs broadcast."""
        return self.compose(self.model.prelog(cluster_sizes), rho)

    def compose(self, prelog, rho) -> np.ndarray:
        """Same rates from an already-computed pre-log factor."""
        return np.maximum(0.0, prelog * self.static_rate + self.model.sinr_rate(rho))


def throughput(
    model: ThroughputModel,
    network: Network,
    partition: SetPartition,
    ms: tuple[int, int],
) -> float:
    """Long-term throughput of one MS under a complete partition."""
    cluster = partition.cluster_of(ms[0])
    rho = sinr(network, ms, cluster)
    row = network.ms_index(*ms)
    return model.value(len(cluster), rho, float(network.snr[row]))


@dataclass(frozen=True)
class Objective:
    """System objective: weighted sum or weighted minimum of MS throughputs."""

    kind: str
    weights: np.ndarray

    def __post_init__(self) -> None:
        if self.kind not in OBJECTIVE_TAGS:
            raise ValueError(f"unknown objective {self.kind!r}, expected one of {OBJECTIVE_TAGS}")
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or np.any(w < 0) or not np.any(w > 0):
            raise ValueError("weights must be a 1-D array, >= 0, with at least one > 0")
        w = w.copy()
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, kind: str, num_ms: int) -> "Objective":
        return cls(kind=kind, weights=np.ones(num_ms))

    def evaluate(self, throughputs: Sequence[float] | np.ndarray) -> float:
        """Aggregate per-MS throughputs into the scalar objective."""
        t = np.asarray(throughputs, dtype=float)
        if t.shape != self.weights.shape:
            raise ValueError(f"expected {self.weights.shape[0]} throughputs, got {t.shape}")
        if self.kind == "wsr":
            return float(self.weights @ t)
        return float(np.min(self.weights * t))


def objective_value(objective: Objective, throughputs) -> float:
    return objective.evaluate(throughputs)


def _evaluate_label_batch(
    objective: Objective,
    evaluator: ModelEvaluator,
    labels: np.ndarray,
    chunk_size: int = 16384,
) -> np.ndarray:
    """Objective values for a (P, I) matrix of feasible 0-based label rows.

    Vectorizes the partition evaluation over P at once (chunked to bound
    memory); callers must guarantee the size limit, which the enumeration
    with a size cap already does.
    """
    network = evaluator.network
    w = network.interference_power
    serving = network.serving_cells
    rows = np.arange(network.num_ms)[np.newaxis, :]
    values = np.empty(labels.shape[0])
    for start in range(0, labels.shape[0], chunk_size):
        block = labels[start : start + chunk_size]
        count, num_cells = block.shape
        num_labels = int(block.max()) + 1
        one_hot = np.zeros((count, num_cells, num_labels))
        part = np.arange(count)[:, np.newaxis]
        one_hot[part, np.arange(num_cells)[np.newaxis, :], block] = 1.0
        per_label = np.einsum("ri,pil->prl", w, one_hot)
        own = block[:, serving]
        per_label[part, rows, own] = 0.0
        interference = per_label.sum(axis=2)
        rho = network.signal_power / (network.noise_power + interference)
        sizes = np.take_along_axis(one_hot.sum(axis=1), own, axis=1)
        throughputs = evaluator.throughputs(sizes, rho)
        if objective.kind == "wsr":
            values[start : start + count] = throughputs @ objective.weights
        else:
            values[start : start + count] = (throughputs * objective.weights).min(axis=1)
    return values


def _evaluate_labels(
    objective: Objective,
    evaluator: ModelEvaluator,
    labels: np.ndarray,
    max_cluster_size: int,
) -> tuple[float, np.ndarray]:
    """Evaluate a partition given as a 0-based label vector over all cells.

    This is the single evaluation path shared by the exhaustive oracle and
    the solver's leaf handling, so both report bit-identical objectives.
    """
    network = evaluator.network
    num_labels = int(labels.max()) + 1
    sizes = np.bincount(labels, minlength=num_labels)

    indicator = np.zeros((network.num_cells, num_labels))
    indicator[np.arange(network.num_cells), labels] = 1.0
    per_label = network.interference_power @ indicator

    own = labels[network.serving_cells]
    rows = np.arange(network.num_ms)
    per_label[rows, own] = 0.0
    interference = per_label.sum(axis=1)

    rho = network.signal_power / (network.noise_power + interference)
    throughputs = evaluator.throughputs(sizes[own].astype(float), rho)

    if sizes.max() > max_cluster_size:
        return INFEASIBLE, throughputs
    return objective.evaluate(throughputs), throughputs


def evaluate_partition(
    model: ThroughputModel,
    objective: Objective,
    network: Network,
    partition: SetPartition,
    max_cluster_size: int | None = None,
) -> tuple[float, np.ndarray]:
    """Objective value and per-MS throughputs of a complete partition.

    Partitions with any cluster above the size limit get the ``INFEASIBLE``
    sentinel (their throughputs are still reported for inspection).
    """
    if partition.num_cells != network.num_cells:
        raise ValueError(
            f"partition covers {partition.num_cells} cells, network has {network.num_cells}"
        )
    limit = network.config.max_cluster_size if max_cluster_size is None else max_cluster_size
    labels = np.asarray(partition.labels(), dtype=int) - 1
    return _evaluate_labels(objective, ModelEvaluator(model, network), labels, limit)
