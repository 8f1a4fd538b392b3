"""Multicell scenario model: geometry, large-scale link gains, powers, noise.

A ``Network`` is a static snapshot: each of ``I`` base stations serves ``K``
mobile stations, and the only channel state kept is the average large-scale
power gain of every BS-to-MS link.  Gains are stored in dB (the persisted
representation); the linear views used by the solvers are derived and cached.

MS rows are ordered row-major: MS ``(i, k)`` (both 1-based) occupies row
``(i - 1) * K + (k - 1)`` of every per-MS array.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, replace
from functools import cached_property
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1

_MIN_DISTANCE_M = 1.0  # distance floor so the log-distance path loss stays finite


@dataclass(frozen=True)
class NetworkConfig:
    """Scenario parameters; defaults reproduce the benchmark setting."""

    num_cells: int = 16
    ms_per_cell: int = 2
    streams_per_ms: int = 1
    bs_antennas: int = 8
    ms_antennas: int = 2
    max_cluster_size: int = 4
    coherence_length: float = 2700.0
    snr_db: float = 20.0
    square_side: float = 2000.0
    bs_ms_distance: float = 250.0
    pathloss_offset_db: float = 15.3
    pathloss_exponent_db_per_decade: float = 37.6
    shadow_std_db: float = 8.0

    def __post_init__(self) -> None:
        counts = {
            "num_cells": self.num_cells,
            "ms_per_cell": self.ms_per_cell,
            "streams_per_ms": self.streams_per_ms,
            "bs_antennas": self.bs_antennas,
            "ms_antennas": self.ms_antennas,
            "max_cluster_size": self.max_cluster_size,
        }
        for name, value in counts.items():
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value}")
        if self.coherence_length <= 0:
            raise ValueError("coherence_length must be > 0")
        if self.square_side <= 0:
            raise ValueError("square_side must be > 0")
        if self.bs_ms_distance <= 0:
            raise ValueError("bs_ms_distance must be > 0")
        if self.shadow_std_db < 0:
            raise ValueError("shadow_std_db must be >= 0")

    @property
    def num_ms(self) -> int:
        return self.num_cells * self.ms_per_cell


def pathloss_db(config: NetworkConfig, distance_m: float | np.ndarray) -> float | np.ndarray:
    """Log-distance path loss in dB; distances are floored at 1 m."""
    d = np.maximum(np.asarray(distance_m, dtype=float), _MIN_DISTANCE_M)
    loss = config.pathloss_offset_db + config.pathloss_exponent_db_per_decade * np.log10(d)
    return float(loss) if np.ndim(distance_m) == 0 else loss


@dataclass(frozen=True, eq=False)
class Network:
    """Immutable scenario: geometry, per-link gains, powers and noise."""

    config: NetworkConfig
    seed: int
    bs_positions: np.ndarray  # (I, 2) meters
    ms_positions: np.ndarray  # (I*K, 2) meters
    gains_db: np.ndarray      # (I*K, I) large-scale gain, dB
    tx_power: np.ndarray      # (I*K,) per-MS transmit power, linear
    noise_power: np.ndarray   # (I*K,) per-MS noise power, linear

    def __post_init__(self) -> None:
        I, K = self.config.num_cells, self.config.ms_per_cell
        arrays = {
            "bs_positions": (self.bs_positions, (I, 2)),
            "ms_positions": (self.ms_positions, (I * K, 2)),
            "gains_db": (self.gains_db, (I * K, I)),
            "tx_power": (self.tx_power, (I * K,)),
            "noise_power": (self.noise_power, (I * K,)),
        }
        for name, (raw, shape) in arrays.items():
            arr = np.asarray(raw, dtype=float)
            if arr.shape != shape:
                raise ValueError(f"{name} has shape {arr.shape}, expected {shape}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite entries")
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if np.any(self.tx_power <= 0):
            raise ValueError("tx_power must be strictly positive")
        if np.any(self.noise_power <= 0):
            raise ValueError("noise_power must be strictly positive")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Network):
            return NotImplemented
        return (
            self.config == other.config
            and self.seed == other.seed
            and np.array_equal(self.bs_positions, other.bs_positions)
            and np.array_equal(self.ms_positions, other.ms_positions)
            and np.array_equal(self.gains_db, other.gains_db)
            and np.array_equal(self.tx_power, other.tx_power)
            and np.array_equal(self.noise_power, other.noise_power)
        )

    @property
    def num_cells(self) -> int:
        return self.config.num_cells

    @property
    def ms_per_cell(self) -> int:
        return self.config.ms_per_cell

    @property
    def num_ms(self) -> int:
        return self.config.num_ms

    def ms_index(self, cell: int, k: int) -> int:
        """Row index of MS ``(cell, k)`` (both 1-based)."""
        I, K = self.num_cells, self.ms_per_cell
        if not (1 <= cell <= I and 1 <= k <= K):
            raise ValueError(f"MS ({cell},{k}) outside ({I} cells, {K} MSs per cell)")
        return (cell - 1) * K + (k - 1)

    @cached_property
    def gains(self) -> np.ndarray:
        """Linear large-scale gains, shape (I*K, I)."""
        g = 10.0 ** (self.gains_db / 10.0)
        g.flags.writeable = False
        return g

    @cached_property
    def bs_power(self) -> np.ndarray:
        """Total transmit power per BS (sum over its served MSs)."""
        p = self.tx_power.reshape(self.num_cells, self.ms_per_cell).sum(axis=1)
        p.flags.writeable = False
        return p

    @cached_property
    def serving_cells(self) -> np.ndarray:
        """0-based serving-cell index per MS row."""
        s = np.repeat(np.arange(self.num_cells), self.ms_per_cell)
        s.flags.writeable = False
        return s

    @cached_property
    def interference_power(self) -> np.ndarray:
        """Received power from each BS at full load: gains * bs_power, (I*K, I)."""
        w = self.gains * self.bs_power[np.newaxis, :]
        w.flags.writeable = False
        return w

    @cached_property
    def signal_power(self) -> np.ndarray:
        """Desired-link received power per MS: serving gain times own power."""
        rows = np.arange(self.num_ms)
        s = self.gains[rows, self.serving_cells] * self.tx_power
        s.flags.writeable = False
        return s

    @cached_property
    def snr(self) -> np.ndarray:
        """Interference-free SNR per MS: signal_power / noise_power."""
        rho = self.signal_power / self.noise_power
        rho.flags.writeable = False
        return rho


def generate_network(config: NetworkConfig, seed: int) -> Network:
    """Draw a random scenario; deterministic given ``(config, seed)``.

    BS positions are i.i.d. uniform in the square, each MS sits at
    ``bs_ms_distance`` from its serving BS at an independent uniform angle,
    and every link gets independent log-normal shadowing on top of the
    log-distance path loss.  Powers are then calibrated to ``config.snr_db``.

    The RNG is a Philox counter-based generator keyed by ``seed``; the draw
    order is fixed (BS positions, MS angles, shadowing), so adding or removing
    shadowing does not perturb the geometry.
    """
    rng = np.random.Generator(np.random.Philox(key=seed))
    I, K = config.num_cells, config.ms_per_cell

    bs = rng.uniform(0.0, config.square_side, size=(I, 2))
    angles = rng.uniform(0.0, 2.0 * math.pi, size=I * K)
    shadow = rng.standard_normal(size=(I * K, I)) * config.shadow_std_db

    offsets = config.bs_ms_distance * np.column_stack([np.cos(angles), np.sin(angles)])
    ms = np.repeat(bs, K, axis=0) + offsets

    dist = np.linalg.norm(ms[:, np.newaxis, :] - bs[np.newaxis, :, :], axis=2)
    gains_db = -pathloss_db(config, dist) + shadow

    placeholder = np.ones(I * K)
    network = Network(
        config=config,
        seed=int(seed),
        bs_positions=bs,
        ms_positions=ms,
        gains_db=gains_db,
        tx_power=placeholder,
        noise_power=placeholder,
    )
    return calibrate_powers(network, config.snr_db)


def calibrate_powers(network: Network, snr_db: float) -> Network:
    """Set powers so the path-loss-only received SNR at the serving distance
    equals ``snr_db``.

    Noise is normalized to 1 and all MSs get equal transmit power
    ``10^((snr_db + PL(d_serving)) / 10)``; shadowing is deliberately excluded
    from the reference so the calibration is deterministic.
    """
    config = network.config
    reference_loss = pathloss_db(config, config.bs_ms_distance)
    power = 10.0 ** ((snr_db + reference_loss) / 10.0)
    n = network.num_ms
    return replace(
        network,
        config=replace(config, snr_db=float(snr_db)),
        tx_power=np.full(n, power),
        noise_power=np.ones(n),
    )


def save_network(network: Network, path: str | os.PathLike) -> None:
    """Write the network as a versioned JSON document."""
    doc = {
        "schema_version": SCHEMA_VERSION,
        "config": asdict(network.config),
        "seed": network.seed,
        "bs_positions": network.bs_positions.tolist(),
        "ms_positions": network.ms_positions.tolist(),
        "gains_db": network.gains_db.tolist(),
        "tx_power": network.tx_power.tolist(),
        "noise_power": network.noise_power.tolist(),
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(doc, handle, indent=1)
        handle.write("\n")


def load_network(path: str | os.PathLike) -> Network:
    """Read a network JSON document, validating schema and invariants."""
    with open(path, "r", encoding="utf-8") as handle:
        doc = json.load(handle)
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: not a network document")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(f"{path}: unsupported schema_version {version!r}")
    try:
        config = NetworkConfig(**doc["config"])
        return Network(
            config=config,
            seed=int(doc["seed"]),
            bs_positions=np.asarray(doc["bs_positions"], dtype=float),
            ms_positions=np.asarray(doc["ms_positions"], dtype=float),
            gains_db=np.asarray(doc["gains_db"], dtype=float),
            tx_power=np.asarray(doc["tx_power"], dtype=float),
            noise_power=np.asarray(doc["noise_power"], dtype=float),
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"{path}: malformed network document: {exc}") from exc


def check_network(obj: "Network | str | os.PathLike") -> Network:
    """Accept a Network instance or a path to a saved one."""
    if isinstance(obj, Network):
        return obj
    if isinstance(obj, (str, Path, os.PathLike)):
        return load_network(obj)
    raise TypeError(f"expected a Network or a path to one, got {type(obj).__name__}")
