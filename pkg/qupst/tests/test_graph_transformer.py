"""Masked attention, layer stacking and the full graph-transformer forward pass."""

import numpy as np
import pytest

from qupst.errors import InvalidConfig, NormalizerMissing, ShapeMismatch
from qupst.models.training import ModelConfig
from qupst.predictor.graph_transformer import (
    PreparedGraph,
    attention,
    attention_layer,
    collate,
    forward,
    init_model,
    neighbor_sets,
    neighbor_sets_from,
)
from qupst.predictor.layers import layer_norm_forward
from qupst.services.circuit_ops import to_dag
from qupst.services.featurizer import Normalizer, fit_normalizer


def eye_weights(d):
    return np.eye(d), np.eye(d), np.eye(d)


def path_sets(n):
    """Neighbourhoods of an undirected path 0-1-...-(n-1), self included."""
    return [{j for j in (i - 1, i, i + 1) if 0 <= j < n} for i in range(n)]


@pytest.fixture
def model(tiny_features):
    m = init_model(ModelConfig(), seed=11)
    m.normalizer = fit_normalizer(tiny_features)
    return m


class TestInit:
    def test_default_parameter_count(self):
        assert init_model(ModelConfig(), seed=0).parameter_count() == 25169

    def test_regressor_input_without_globals(self):
        m = init_model(ModelConfig(use_global_features=False), seed=0)
        assert m.params["regressor.0.weight"].shape == (128, 24)
        assert not any(name.startswith("global_mlp.") for name in m.params)

    def test_seeded(self):
        a = init_model(ModelConfig(), seed=5).params
        b = init_model(ModelConfig(), seed=5).params
        c = init_model(ModelConfig(), seed=6).params
        assert all(np.array_equal(a[k], b[k]) for k in a)
        assert not np.array_equal(a["layers.0.w_q"], c["layers.0.w_q"])

    def test_layer_norm_and_bias_init(self):
        p = init_model(ModelConfig(n_layers=3), seed=0).params
        for layer in range(3):
            np.testing.assert_array_equal(p[f"layers.{layer}.ln_gain"], 1.0)
            np.testing.assert_array_equal(p[f"layers.{layer}.ln_bias"], 0.0)
        np.testing.assert_array_equal(p["regressor.2.bias"], 0.0)
        bound = np.sqrt(1.0 / 24)
        assert np.abs(p["layers.1.w_k"]).max() <= bound

    @pytest.mark.parametrize("bad", [{"n_layers": 4}, {"n_layers": 0}, {"heads": 2}, {"qkv_dim": 16}])
    def test_rejects_bad_config(self, bad):
        with pytest.raises(InvalidConfig):
            init_model(ModelConfig(**bad), seed=0)


class TestNeighbourSets:
    def test_bell_neighbourhoods(self, bell):
        nb = neighbor_sets(to_dag(bell))
        # inputs 0,1; RZ 2; SX 3; CNOT 4; measures 5,6
        assert nb.members(0) == [0, 2]
        assert nb.members(4) == [1, 3, 4, 5, 6]
        assert nb.size.tolist() == [2, 2, 3, 3, 5, 2, 2]
        assert nb.starts[0] == 0 and np.all(np.diff(nb.starts) == nb.size[:-1])


class TestAttention:
    def test_isolated_node_returns_its_value(self, rng):
        h = rng.normal(size=(1, 4))
        w_q, w_k, w_v = (rng.normal(size=(4, 4)) for _ in range(3))
        out, *_ = attention(h, neighbor_sets_from([{0}]), w_q, w_k, w_v)
        np.testing.assert_allclose(out, h @ w_v.T)

    def test_zero_keys_average_values(self, rng):
        h = rng.normal(size=(4, 3))
        w_v = rng.normal(size=(3, 3))
        sets = path_sets(4)
        out, *_ = attention(h, neighbor_sets_from(sets), rng.normal(size=(3, 3)), np.zeros((3, 3)), w_v)
        v = h @ w_v.T
        for i, members in enumerate(sets):
            np.testing.assert_allclose(out[i], v[sorted(members)].mean(axis=0))

    def test_two_nodes_by_hand(self):
        h = np.array([[1.0, 0.0], [0.0, 1.0]])
        out, *_ = attention(h, neighbor_sets_from([{0, 1}, {0, 1}]), *eye_weights(2))
        # own key scores 1/sqrt(2), the other 0
        p = np.exp(1 / np.sqrt(2)) / (np.exp(1 / np.sqrt(2)) + 1.0)
        np.testing.assert_allclose(out, [[p, 1 - p], [1 - p, p]])

    def test_probabilities_sum_to_one(self, rng):
        nb = neighbor_sets_from(path_sets(6))
        h = rng.normal(size=(6, 5))
        _, _, _, _, prob, _ = attention(h, nb, *(rng.normal(size=(5, 5)) for _ in range(3)))
        np.testing.assert_allclose(np.bincount(nb.dst, weights=prob), 1.0)
        assert np.all(prob > 0)

    def test_only_neighbours_are_visible(self, rng):
        nb = neighbor_sets_from(path_sets(5))
        weights = [rng.normal(size=(3, 3)) for _ in range(3)]
        h = rng.normal(size=(5, 3))
        moved = h.copy()
        moved[4] += 10.0
        a, *_ = attention(h, nb, *weights)
        b, *_ = attention(moved, nb, *weights)
        np.testing.assert_allclose(a[:3], b[:3])
        assert not np.allclose(a[3], b[3])

    def test_width_mismatch(self, rng):
        with pytest.raises(ShapeMismatch):
            attention(rng.normal(size=(2, 3)), neighbor_sets_from([{0}, {1}]), *eye_weights(4))

    def test_zero_values_leave_layer_norm_of_input(self, rng):
        d = 6
        h = rng.normal(size=(4, d))
        params = {
            "layers.0.w_q": rng.normal(size=(d, d)),
            "layers.0.w_k": rng.normal(size=(d, d)),
            "layers.0.w_v": np.zeros((d, d)),
            "layers.0.ln_gain": np.ones(d),
            "layers.0.ln_bias": np.zeros(d),
        }
        out, _ = attention_layer(h, neighbor_sets_from(path_sets(4)), params, 0)
        expected, _ = layer_norm_forward(h, np.ones(d), np.zeros(d), 1e-5)
        np.testing.assert_allclose(out, expected)


def prepared(model, features):
    return model.prepare(features)


class TestForward:
    def test_batched_matches_single(self, model, tiny_features):
        items = prepared(model, tiny_features[:6])
        together = model.predict(collate(items))
        alone = [model.predict(collate([item]))[0] for item in items]
        np.testing.assert_allclose(together, alone, atol=1e-12)

    def test_node_relabelling_invariance(self, model, tiny_features):
        item = prepared(model, tiny_features[:1])[0]
        item.node[:, 23] = 0.0
        n = item.neighbors.n_nodes
        perm = np.random.default_rng(2).permutation(n)
        where = np.argsort(perm)
        sets = [{int(where[j]) for j in item.neighbors.members(int(old))} for old in perm]
        shuffled = PreparedGraph(
            node=item.node[perm],
            neighbors=neighbor_sets_from(sets),
            global_=item.global_,
            baseline=item.baseline,
            target=item.target,
        )
        np.testing.assert_allclose(model.predict(collate([shuffled])), model.predict(collate([item])), atol=1e-10)

    def test_depth_changes_prediction(self, tiny_features):
        norm = fit_normalizer(tiny_features)
        preds = []
        for layers in (1, 2, 3):
            m = init_model(ModelConfig(n_layers=layers), seed=1)
            m.normalizer = norm
            preds.append(m.predict(collate(m.prepare(tiny_features[:3]))))
        assert not np.allclose(preds[0], preds[1])

    def test_forward_cache_shapes(self, model, tiny_features):
        batch = collate(prepared(model, tiny_features[:4]))
        preds, cache = model.forward(batch)
        assert preds.shape == (4,)
        assert len(cache.layers) == 2
        assert cache.pooled.shape == (4, 24)
        assert batch.graph_sizes.sum() == batch.node.shape[0]

    def test_node_width_checked(self, model, tiny_features):
        batch = collate(prepared(model, tiny_features[:2]))
        batch.node = batch.node[:, :23]
        with pytest.raises(ShapeMismatch):
            model.forward(batch)

    def test_global_width_checked(self, model, tiny_features):
        batch = collate(prepared(model, tiny_features[:2]))
        batch.global_ = batch.global_[:, :5]
        with pytest.raises(ShapeMismatch):
            model.forward(batch)

    def test_single_graph_entry_point(self, model, tiny_features):
        f = tiny_features[0]
        norm = model.normalizer
        value = forward(model, f.graph, norm.apply_node(f.node), norm.apply_global(f.global_))
        assert value == pytest.approx(model.predict(collate(prepared(model, [f])))[0])

    def test_needs_normalizer(self, tiny_features):
        m = init_model(ModelConfig(), seed=0)
        with pytest.raises(NormalizerMissing):
            m.prepare(tiny_features[:1])
        f = tiny_features[0]
        with pytest.raises(NormalizerMissing):
            forward(m, f.graph, f.node, f.global_)

    def test_identity_normalizer_passes_raw_features(self, tiny_features):
        m = init_model(ModelConfig(), seed=0)
        m.normalizer = Normalizer.identity()
        item = m.prepare(tiny_features[:1])[0]
        np.testing.assert_array_equal(item.node, tiny_features[0].node)
