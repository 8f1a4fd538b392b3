"""Estimator-facade tests: sklearn protocol plus solver agreement."""

import numpy as np
import pytest
from sklearn.base import clone

from bscluster.estimators import (
    BranchAndBoundClustering,
    ExhaustiveClustering,
    GreedyClustering,
)
from bscluster.heuristic import exhaustive_solve, heuristic_cluster
from bscluster.network import NetworkConfig, generate_network, save_network
from bscluster.throughput import Objective, ThroughputModel


@pytest.fixture
def network():
    return generate_network(NetworkConfig(num_cells=6, ms_per_cell=2), seed=3)


class TestSklearnProtocol:
    def test_get_set_params_round_trip(self):
        est = BranchAndBoundClustering(model="spectrum", epsilon=0.5, max_cluster_size=3)
        params = est.get_params()
        assert params["model"] == "spectrum"
        assert params["epsilon"] == 0.5
        rebuilt = BranchAndBoundClustering(**params)
        assert rebuilt.get_params() == params

    def test_clone(self):
        est = GreedyClustering(objective="minwt")
        twin = clone(est)
        assert twin.get_params() == est.get_params()

    def test_set_params_chains(self):
        est = ExhaustiveClustering().set_params(model="orth-ts", max_cells=8)
        assert est.model == "orth-ts"
        assert est.max_cells == 8

    def test_fit_returns_self_and_sets_attributes(self, network):
        est = BranchAndBoundClustering()
        assert est.fit(network) is est
        assert est.labels_.shape == (6,)
        assert est.labels_.min() == 0
        assert est.objective_value_ > 0
        assert est.per_ms_throughput_.shape == (12,)
        assert est.gap_ == 0.0
        assert est.n_iter_ == est.stats_.iterations

    def test_fit_predict_returns_labels(self, network):
        est = GreedyClustering()
        labels = est.fit_predict(network)
        np.testing.assert_array_equal(labels, est.labels_)

    def test_labels_encode_partition(self, network):
        est = ExhaustiveClustering().fit(network)
        for cluster_index, cluster in enumerate(est.partition_.clusters):
            for cell in cluster:
                assert est.labels_[cell - 1] == cluster_index


class TestEstimatorResults:
    def test_bnb_matches_exhaustive(self, network):
        bnb = BranchAndBoundClustering().fit(network)
        oracle = ExhaustiveClustering().fit(network)
        assert bnb.objective_value_ == pytest.approx(oracle.objective_value_, rel=1e-9)

    def test_greedy_matches_heuristic_function(self, network):
        est = GreedyClustering().fit(network)
        assert est.partition_ == heuristic_cluster(network)

    def test_exhaustive_matches_function(self, network):
        est = ExhaustiveClustering(model="orth-ts", objective="minwt").fit(network)
        model = ThroughputModel.from_config("orth-ts", network.config)
        objective = Objective.uniform("minwt", network.num_ms)
        expected = exhaustive_solve(network, model, objective)
        assert est.objective_value_ == expected.objective_value
        assert est.rgs_ == expected.rgs

    def test_singleton_start_agrees_with_greedy_start(self, network):
        cold = BranchAndBoundClustering(initial="singletons").fit(network)
        warm = BranchAndBoundClustering(initial="greedy").fit(network)
        assert cold.objective_value_ == pytest.approx(warm.objective_value_, rel=1e-12)

    def test_custom_weights(self, network):
        weights = np.zeros(network.num_ms)
        weights[0] = 1.0
        est = BranchAndBoundClustering(weights=weights).fit(network)
        assert est.objective_value_ == pytest.approx(est.per_ms_throughput_[0], rel=1e-12)

    def test_fit_accepts_path(self, network, tmp_path):
        path = tmp_path / "net.json"
        save_network(network, path)
        from_path = GreedyClustering().fit(str(path))
        in_memory = GreedyClustering().fit(network)
        np.testing.assert_array_equal(from_path.labels_, in_memory.labels_)

    def test_invalid_tags_rejected(self, network):
        with pytest.raises(ValueError):
            BranchAndBoundClustering(model="nope").fit(network)
        with pytest.raises(ValueError):
            BranchAndBoundClustering(objective="nope").fit(network)
        with pytest.raises(ValueError):
            BranchAndBoundClustering(initial="warm").fit(network)

    def test_max_cluster_size_override(self, network):
        est = BranchAndBoundClustering(max_cluster_size=2).fit(network)
        assert est.partition_.max_cluster_size <= 2
