"""SINR, throughput-model, and objective tests.

The exponential-integral rate is checked against an adaptive-quadrature
oracle: substituting u = t - 1/rho turns d*e^(1/rho) * integral of
t^-1 e^-t from 1/rho to infinity into the numerically benign
integral of e^-u / (u + 1/rho) from 0 to infinity.
"""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from bscluster.network import Network, NetworkConfig, generate_network
from bscluster.partition import SetPartition, rgs_to_partition
from bscluster.throughput import (
    INFEASIBLE,
    ModelEvaluator,
    Objective,
    ThroughputModel,
    evaluate_partition,
    exp_rate,
    objective_value,
    sinr,
    throughput,
)


def quadrature_rate(rho, streams=1):
    x = 1.0 / rho
    value, _ = quad(lambda u: math.exp(-u) / (u + x), 0.0, np.inf,
                    epsabs=0.0, epsrel=1e-13, limit=300)
    return streams * value


def toy_network(gains_db, tx_power, noise_power, **config_kwargs):
    """Hand-built scenario with one MS per cell."""
    gains_db = np.asarray(gains_db, dtype=float)
    num_cells = gains_db.shape[1]
    config = NetworkConfig(
        num_cells=num_cells,
        ms_per_cell=1,
        shadow_std_db=0.0,
        **config_kwargs,
    )
    positions = np.zeros((num_cells, 2))
    return Network(
        config=config,
        seed=0,
        bs_positions=positions,
        ms_positions=positions.copy(),
        gains_db=gains_db,
        tx_power=np.asarray(tx_power, dtype=float),
        noise_power=np.asarray(noise_power, dtype=float),
    )


class TestExpRate:
    def test_zero_limit(self):
        assert exp_rate(0.0) == 0.0

    def test_frozen_reference_points(self):
        # Computed with the quadrature oracle (and cross-checked in mpmath).
        assert exp_rate(1.0) == pytest.approx(0.5963473623231941, rel=1e-12)
        assert exp_rate(10.0) == pytest.approx(2.0146425447084515, rel=1e-12)
        assert exp_rate(1e-3) == pytest.approx(0.0009990019940238806, rel=1e-12)
        assert exp_rate(1e6) == pytest.approx(13.238309131365003, rel=1e-12)

    def test_accuracy_against_quadrature_grid(self):
        for rho in np.logspace(-3, 6, 30):
            assert exp_rate(float(rho)) == pytest.approx(quadrature_rate(float(rho)), rel=1e-10)

    def test_strictly_increasing(self):
        grid = np.logspace(-4, 7, 200)
        values = exp_rate(grid)
        assert np.all(np.diff(values) > 0)
        assert exp_rate(1e-12) > 0

    def test_streams_scale_linearly(self):
        rng = np.random.default_rng(7)
        for rho in rng.uniform(0.01, 100.0, size=20):
            assert exp_rate(rho, streams=3) == pytest.approx(3.0 * exp_rate(rho), rel=1e-15)

    def test_array_input(self):
        out = exp_rate(np.array([0.0, 1.0]))
        assert out.shape == (2,)
        assert out[0] == 0.0

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            exp_rate(-1.0)
        with pytest.raises(ValueError):
            exp_rate(np.array([1.0, -2.0]))


class TestSinr:
    def test_grand_cluster_is_interference_free(self):
        network = generate_network(NetworkConfig(num_cells=4, ms_per_cell=2), seed=1)
        cluster = range(1, 5)
        for cell in range(1, 5):
            for k in (1, 2):
                row = network.ms_index(cell, k)
                assert sinr(network, (cell, k), cluster) == pytest.approx(
                    float(network.snr[row]), rel=1e-15
                )

    def test_zero_cross_gain_equals_snr(self):
        network = toy_network(
            gains_db=[[0.0, -400.0], [-400.0, 0.0]],
            tx_power=[2.0, 2.0],
            noise_power=[1.0, 1.0],
        )
        assert sinr(network, (1, 1), {1}) == pytest.approx(2.0, rel=1e-12)

    def test_two_cell_hand_value(self):
        # gamma_11 = 1, gamma_12 = 0.5, P = 2 each, sigma^2 = 1:
        # rho = 1*2 / (1 + 0.5*2) = 1.
        network = toy_network(
            gains_db=[[0.0, 10.0 * math.log10(0.5)], [-400.0, 0.0]],
            tx_power=[2.0, 2.0],
            noise_power=[1.0, 1.0],
        )
        assert sinr(network, (1, 1), {1}) == pytest.approx(1.0, rel=1e-12)

    def test_serving_cell_must_be_in_cluster(self):
        network = generate_network(NetworkConfig(num_cells=3, ms_per_cell=1), seed=1)
        with pytest.raises(ValueError):
            sinr(network, (1, 1), {2, 3})

    def test_monotone_under_cluster_growth(self):
        rng = np.random.default_rng(42)
        network = generate_network(NetworkConfig(num_cells=8, ms_per_cell=2), seed=5)
        for _ in range(200):
            cell = int(rng.integers(1, 9))
            k = int(rng.integers(1, 3))
            others = [c for c in range(1, 9) if c != cell]
            rng.shuffle(others)
            take = int(rng.integers(0, 8))
            inner = {cell, *others[:take]}
            outer = inner | {*others[: min(take + int(rng.integers(1, 3)), 7)]}
            assert sinr(network, (cell, k), inner) <= sinr(network, (cell, k), outer) * (1 + 1e-12)


class TestModels:
    def test_orthogonal_time_sharing_formula(self):
        # (2/4 - 4/100) * 1 * log(1 + snr) with log(1+snr) = 1.
        model = ThroughputModel(
            variant="orth-ts", num_cells=4, ms_per_cell=1, streams_per_ms=1,
            bs_antennas=8, ms_antennas=2, coherence_length=100.0,
        )
        snr = math.e - 1.0
        assert model.value(2, 0.0, snr) == pytest.approx(0.46, rel=1e-12)

    def test_orthogonal_independent_of_sinr(self):
        model = ThroughputModel(
            variant="orth-ts", num_cells=4, ms_per_cell=1, streams_per_ms=1,
            bs_antennas=8, ms_antennas=2, coherence_length=100.0,
        )
        assert model.value(2, 0.0, 5.0) == model.value(2, 1e6, 5.0)

    def test_spectrum_sharing_formula(self):
        model = ThroughputModel(
            variant="spectrum", num_cells=4, ms_per_cell=1, streams_per_ms=2,
            bs_antennas=8, ms_antennas=2, coherence_length=100.0,
        )
        assert model.value(3, math.e - 1.0, 123.0) == pytest.approx(2.0, rel=1e-12)
        assert model.value(1, 0.0, 123.0) == 0.0

    def test_spectrum_independent_of_size(self):
        model = ThroughputModel(
            variant="spectrum", num_cells=4, ms_per_cell=1, streams_per_ms=1,
            bs_antennas=8, ms_antennas=2, coherence_length=100.0,
        )
        assert model.value(1, 2.0, 1.0) == model.value(4, 2.0, 1.0)

    def test_composite_prelog_reference(self):
        # 4/16 - (14*4 + 16*16)/2700 at the benchmark parameters.
        model = ThroughputModel.from_config("composite", NetworkConfig())
        assert model.prelog(4) == pytest.approx(4 / 16 - 312 / 2700, rel=1e-12)

    def test_composite_combines_both_phases(self):
        model = ThroughputModel.from_config("composite", NetworkConfig())
        rho, snr = 2.0, 100.0
        expected = model.prelog(4) * exp_rate(snr) + exp_rate(rho)
        assert model.value(4, rho, snr) == pytest.approx(expected, rel=1e-12)

    def test_negative_prelog_clamps_to_zero(self):
        model = ThroughputModel(
            variant="orth-ts", num_cells=4, ms_per_cell=1, streams_per_ms=1,
            bs_antennas=8, ms_antennas=2, coherence_length=10.0,
        )
        assert model.value(4, 0.0, 100.0) == 0.0

    def test_unimodal_in_size_for_benchmark_parameters(self):
        for variant in ("orth-ts", "spectrum", "composite"):
            model = ThroughputModel.from_config(variant, NetworkConfig())
            values = [model.value(b, 3.0, 50.0) for b in range(1, 17)]
            diffs = np.diff(values)
            decreasing = False
            for d in diffs:
                if d < -1e-12:
                    decreasing = True
                else:
                    assert not (decreasing and d > 1e-12), f"{variant} not unimodal: {values}"

    def test_unknown_variant_rejected(self):
        with pytest.raises(ValueError):
            ThroughputModel.from_config("bogus", NetworkConfig())

    def test_evaluator_matches_value(self):
        network = generate_network(NetworkConfig(num_cells=5, ms_per_cell=2), seed=8)
        model = ThroughputModel.from_config("composite", network.config)
        evaluator = ModelEvaluator(model, network)
        rho = np.linspace(0.1, 30.0, network.num_ms)
        sizes = np.arange(1, network.num_ms + 1, dtype=float) % 4 + 1
        via_evaluator = evaluator.throughputs(sizes, rho)
        via_value = model.value(sizes, rho, network.snr)
        np.testing.assert_array_equal(via_evaluator, via_value)


class TestObjective:
    def test_weighted_sum_uniform(self):
        objective = Objective.uniform("wsr", 32)
        assert objective.evaluate(np.full(32, 1.5)) == pytest.approx(48.0)

    def test_weighted_min(self):
        objective = Objective.uniform("minwt", 3)
        assert objective.evaluate([1.0, 2.0, 3.0]) == 1.0

    def test_weighted_sum_dot_product(self):
        objective = Objective("wsr", np.array([0.0, 5.0]))
        assert objective.evaluate([1.0, 2.0]) == pytest.approx(10.0)
        assert objective_value(objective, [1.0, 2.0]) == pytest.approx(10.0)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            Objective.uniform("wsr", 4).evaluate([1.0, 2.0])

    def test_invalid_weights_rejected(self):
        with pytest.raises(ValueError):
            Objective("wsr", np.array([-1.0, 1.0]))
        with pytest.raises(ValueError):
            Objective("wsr", np.zeros(4))
        with pytest.raises(ValueError):
            Objective("max", np.ones(4))

    def test_argument_wise_non_decreasing(self):
        rng = np.random.default_rng(3)
        for kind in ("wsr", "minwt"):
            objective = Objective(kind, rng.uniform(0.0, 2.0, size=8) + 0.01)
            for _ in range(200):
                t = rng.uniform(0.0, 5.0, size=8)
                bumped = t.copy()
                bumped[rng.integers(0, 8)] += rng.uniform(0.0, 1.0)
                assert objective.evaluate(bumped) >= objective.evaluate(t) - 1e-12


class TestEvaluatePartition:
    def test_all_singletons_uses_full_interference(self):
        network = generate_network(NetworkConfig(num_cells=3, ms_per_cell=2), seed=2)
        model = ThroughputModel.from_config("spectrum", network.config)
        objective = Objective.uniform("wsr", network.num_ms)
        partition = SetPartition([{1}, {2}, {3}])
        value, per_ms = evaluate_partition(model, objective, network, partition)
        for cell in (1, 2, 3):
            for k in (1, 2):
                row = network.ms_index(cell, k)
                assert per_ms[row] == pytest.approx(
                    throughput(model, network, partition, (cell, k)), rel=1e-12
                )
        assert value == pytest.approx(per_ms.sum(), rel=1e-12)

    def test_oversized_cluster_gets_sentinel(self):
        network = generate_network(NetworkConfig(num_cells=6, ms_per_cell=1), seed=2)
        model = ThroughputModel.from_config("composite", network.config)
        objective = Objective.uniform("wsr", network.num_ms)
        grand = SetPartition([set(range(1, 7))])
        value, per_ms = evaluate_partition(model, objective, network, grand)
        assert value == INFEASIBLE
        assert value != 0.0
        assert np.all(np.isfinite(per_ms))

    def test_recomposes_per_ms_throughputs(self):
        network = generate_network(NetworkConfig(num_cells=3, ms_per_cell=2), seed=6)
        for variant in ("orth-ts", "spectrum", "composite"):
            model = ThroughputModel.from_config(variant, network.config)
            objective = Objective.uniform("minwt", network.num_ms)
            partition = rgs_to_partition((1, 2, 1))
            value, per_ms = evaluate_partition(model, objective, network, partition)
            singles = [
                throughput(model, network, partition, (cell, k))
                for cell in (1, 2, 3)
                for k in (1, 2)
            ]
            np.testing.assert_allclose(per_ms, singles, rtol=1e-12)
            assert value == pytest.approx(min(singles), rel=1e-12)

    def test_explicit_limit_overrides_config(self):
        network = generate_network(NetworkConfig(num_cells=4, ms_per_cell=1), seed=2)
        model = ThroughputModel.from_config("spectrum", network.config)
        objective = Objective.uniform("wsr", network.num_ms)
        grand = SetPartition([{1, 2, 3, 4}])
        value, _ = evaluate_partition(model, objective, network, grand, max_cluster_size=4)
        assert np.isfinite(value)
        value, _ = evaluate_partition(model, objective, network, grand, max_cluster_size=3)
        assert value == INFEASIBLE
