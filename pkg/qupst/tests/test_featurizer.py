"""Node, global and baseline features; train-only normalization."""

import numpy as np
import pytest

from qupst.config.settings import settings
from qupst.errors import EmptyTrainingSet, ProfileMismatch, ShapeMismatch, UnsupportedQubitCount
from qupst.models.circuit import Gate
from qupst.models.dataset import Sample, Split
from qupst.models.training import FEATURE_GROUP_SLOTS, FeatureGroup
from qupst.services.circuit_ops import build_circuit, to_dag
from qupst.services.featurizer import (
    Normalizer,
    featurize,
    featurize_all,
    fit_normalizer,
    global_features,
    node_features,
    simple_nn_features,
)
from qupst.services.noise_model import make_profile


def gate_row(c, p, index=0):
    g = to_dag(c)
    return node_features(g, c, p)[c.n_qubits + index]


class TestNodeFeatures:
    def test_rz_row(self):
        c = build_circuit(4, [Gate.rz(0.3, 3)], [])
        p = make_profile(4, seed=1)
        row = gate_row(c, p)
        assert row[2] == 1.0 and row[9] == 1.0
        assert row[16] == p.t1[3] and row[17] == p.t2[3]
        np.testing.assert_array_equal(row[18:23], 0.0)

    def test_cnot_row(self):
        c = build_circuit(2, [Gate.cnot(0, 1)], [(0, 1)])
        p = make_profile(2, seed=1)
        row = gate_row(c, p)
        assert row[5] == row[6] == row[7] == 1.0
        np.testing.assert_allclose(row[16:20], [p.t1[0], p.t2[0], p.t1[1], p.t2[1]])
        assert row[20] == p.pair_error(0, 1)

    def test_measure_rows_carry_readout(self, bell):
        p = make_profile(2, seed=3)
        g = to_dag(bell)
        feats = node_features(g, bell, p)
        last = feats[-2:]
        np.testing.assert_array_equal(last[:, 1], 1.0)
        np.testing.assert_allclose(last[:, 21], p.readout_error10)
        np.testing.assert_allclose(last[:, 22], p.readout_error01)

    def test_one_hot_type_and_topo_slot(self, bell, profile3):
        c = build_circuit(3, [*bell.gates, Gate.x(2)], [(0, 1), (1, 2)])
        feats = node_features(to_dag(c), c, profile3)
        np.testing.assert_array_equal(feats[:, 0:6].sum(axis=1), 1.0)
        np.testing.assert_array_equal(feats[:, 23], np.arange(len(feats)))

    def test_profile_mismatch(self, profile3):
        c = build_circuit(4, [Gate.x(3)], [])
        with pytest.raises(ProfileMismatch):
            node_features(to_dag(c), c, profile3)


class TestGlobalFeatures:
    def test_empty(self):
        np.testing.assert_array_equal(global_features(build_circuit(3, [], [])), [0, 3, 0, 0, 0, 0])

    def test_counts(self):
        c = build_circuit(2, [Gate.x(0), Gate.cnot(0, 1)], [(0, 1)])
        np.testing.assert_array_equal(global_features(c), [2, 2, 0, 1, 0, 1])


class TestBaselineFeatures:
    def test_length(self, bell):
        assert simple_nn_features(bell).shape == (116,)

    def test_qubit_limit_follows_settings(self, monkeypatch):
        c = build_circuit(4, [Gate.x(3)], [])
        p, g = make_profile(4, 0), to_dag(c)
        monkeypatch.setattr(settings, "max_qubits", 3)
        with pytest.raises(UnsupportedQubitCount):
            simple_nn_features(c)
        with pytest.raises(UnsupportedQubitCount):
            node_features(g, c, p)

    def test_layout_independent_of_qubit_limit(self, monkeypatch, bell):
        monkeypatch.setattr(settings, "max_qubits", 3)
        assert simple_nn_features(bell).shape == (116,)

    def test_ordered_pair_grid(self):
        f = simple_nn_features(build_circuit(2, [Gate.cnot(0, 1)], [(0, 1)]))
        grid = f[16:].reshape(10, 10)
        assert grid[0, 1] == 1.0 and grid[1, 0] == 0.0

    def test_empty_only_width(self):
        f = simple_nn_features(build_circuit(3, [], []))
        assert f[1] == 3.0
        assert np.count_nonzero(f) == 1


def test_dropped_group_is_zeroed(tiny_dataset):
    sample = tiny_dataset.samples[0]
    for group, slots in FEATURE_GROUP_SLOTS.items():
        f = featurize(sample, group)
        if slots:
            np.testing.assert_array_equal(f.node[:, list(slots)], 0.0)
    assert featurize(sample, FeatureGroup.NONE).node[:, 16].any()


class TestNormalizer:
    def test_train_columns_are_centered(self, tiny_dataset):
        train = featurize_all(tiny_dataset.by_split(Split.TRAIN))
        norm = fit_normalizer(train)
        nodes = np.vstack([norm.apply_node(f.node) for f in train])
        np.testing.assert_allclose(nodes.mean(axis=0), 0.0, atol=1e-6)
        globals_ = np.vstack([norm.apply_global(f.global_) for f in train])
        np.testing.assert_allclose(globals_.mean(axis=0), 0.0, atol=1e-6)

    def test_constant_column_maps_to_zero(self, tiny_dataset):
        train = featurize_all(tiny_dataset.by_split(Split.TRAIN))
        norm = fit_normalizer(train)
        # qubit slot 9 (qubit 3) never fires on 2-3 qubit circuits
        assert norm.node_std[9] == 1.0
        np.testing.assert_array_equal(norm.apply_node(train[0].node)[:, 9], 0.0)

    def test_val_uses_train_statistics(self, tiny_dataset):
        train = featurize_all(tiny_dataset.by_split(Split.TRAIN))
        val = featurize_all(tiny_dataset.by_split(Split.VAL))
        norm = fit_normalizer(train)
        expected = (val[0].global_ - np.array(norm.global_mean)) / np.array(norm.global_std)
        np.testing.assert_allclose(norm.apply(val[0]).global_, expected)
        np.testing.assert_allclose(norm.invert_global(norm.apply_global(val[0].global_)), val[0].global_)

    def test_needs_two_samples(self, tiny_features):
        with pytest.raises(EmptyTrainingSet):
            fit_normalizer([])
        with pytest.raises(EmptyTrainingSet):
            fit_normalizer(tiny_features[:1])

    def test_width_checked(self):
        with pytest.raises(ShapeMismatch):
            Normalizer.identity().apply_node(np.zeros((3, 5)))

    def test_serializes(self, tiny_features):
        norm = fit_normalizer(tiny_features)
        assert Normalizer.model_validate_json(norm.model_dump_json()) == norm


def test_featurize_keeps_target_and_algorithm(bell):
    s = Sample(circuit=bell, profile=make_profile(2, 0), pst=0.42, algorithm="bell")
    f = featurize(s)
    assert f.target == 0.42 and f.algorithm == "bell"
    assert f.node.shape == (to_dag(bell).n_nodes, 24)
