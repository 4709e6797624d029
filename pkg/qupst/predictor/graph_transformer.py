"""Graph transformer PST regressor with hand-written reverse-mode gradients.

Each node attends to its undirected DAG neighbours plus itself; attention
scores are scaled by sqrt(|N_i|). A layer computes
``layer_norm(H + attention(H))`` for all nodes at once. Node features are then
mean-pooled per graph, optionally concatenated with the output of a small MLP
over the global features, and regressed to a scalar.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from qupst.errors import InvalidConfig, NonFiniteActivation, NormalizerMissing, ShapeMismatch
from qupst.models.circuit import CircuitGraph
from qupst.models.training import FeatureGroup, ModelConfig
from qupst.predictor.layers import (
    LayerNormCache,
    MLPCache,
    Params,
    init_mlp,
    layer_norm_backward,
    layer_norm_forward,
    mlp_backward,
    mlp_forward,
    segment_softmax,
    segment_sum,
    uniform_fan_in,
)
from qupst.services.featurizer import FeaturizedSample, Normalizer

logger = logging.getLogger(__name__)


@dataclass
class NeighborSets:
    """Attention neighbourhoods as an edge list sorted by query node.

    Edge ``e`` lets node ``dst[e]`` attend to node ``src[e]``. Self loops are
    included, so every node owns a non-empty segment starting at ``starts``.
    """

    n_nodes: int
    dst: np.ndarray
    src: np.ndarray
    starts: np.ndarray
    size: np.ndarray
    src_order: np.ndarray = field(init=False)
    src_starts: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.src_order = np.argsort(self.src, kind="stable")
        self.src_starts = np.searchsorted(self.src[self.src_order], np.arange(self.n_nodes))

    def members(self, i: int) -> list[int]:
        return self.src[self.dst == i].tolist()

    def offset(self, by: int, edge_by: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.dst + by, self.src + by, self.starts + edge_by


def neighbor_sets(graph: CircuitGraph) -> NeighborSets:
    """N_i = undirected DAG neighbours of i, plus i itself."""
    sets = [{i} for i in range(graph.n_nodes)]
    for a, b in graph.edges:
        sets[a].add(b)
        sets[b].add(a)
    return neighbor_sets_from(sets)


def neighbor_sets_from(sets: Sequence[set[int]]) -> NeighborSets:
    dst, src = [], []
    for i, members in enumerate(sets):
        for j in sorted(members):
            dst.append(i)
            src.append(j)
    dst_arr = np.asarray(dst, dtype=np.int64)
    size = np.array([len(m) for m in sets], dtype=np.int64)
    starts = np.concatenate([[0], np.cumsum(size)[:-1]]).astype(np.int64)
    return NeighborSets(len(sets), dst_arr, np.asarray(src, dtype=np.int64), starts, size)


@dataclass
class GraphBatch:
    """Several graphs packed into one disjoint union."""

    node: np.ndarray
    neighbors: NeighborSets
    graph_of_node: np.ndarray
    graph_starts: np.ndarray
    graph_sizes: np.ndarray
    global_: np.ndarray
    target: np.ndarray

    @property
    def n_graphs(self) -> int:
        return len(self.graph_sizes)


@dataclass
class PreparedGraph:
    """A normalized sample with its neighbour sets, ready for batching."""

    node: np.ndarray
    neighbors: NeighborSets
    global_: np.ndarray
    baseline: np.ndarray
    target: float
    algorithm: Optional[str] = None


def prepare(samples: Sequence[FeaturizedSample], normalizer: Normalizer) -> list[PreparedGraph]:
    return [
        PreparedGraph(
            node=normalizer.apply_node(f.node),
            neighbors=neighbor_sets(f.graph),
            global_=normalizer.apply_global(f.global_),
            baseline=normalizer.apply_baseline(f.baseline),
            target=f.target,
            algorithm=f.algorithm,
        )
        for f in samples
    ]


def collate(items: Sequence[PreparedGraph]) -> GraphBatch:
    dst, src, starts, sizes, graph_of_node = [], [], [], [], []
    node_offset = edge_offset = 0
    for g, item in enumerate(items):
        nb = item.neighbors
        d, s, st = nb.offset(node_offset, edge_offset)
        dst.append(d)
        src.append(s)
        starts.append(st)
        sizes.append(nb.n_nodes)
        graph_of_node.append(np.full(nb.n_nodes, g, dtype=np.int64))
        node_offset += nb.n_nodes
        edge_offset += len(nb.dst)

    size = np.concatenate([item.neighbors.size for item in items])
    neighbors = NeighborSets(node_offset, np.concatenate(dst), np.concatenate(src), np.concatenate(starts), size)
    graph_sizes = np.asarray(sizes, dtype=np.int64)
    return GraphBatch(
        node=np.vstack([item.node for item in items]),
        neighbors=neighbors,
        graph_of_node=np.concatenate(graph_of_node),
        graph_starts=np.concatenate([[0], np.cumsum(graph_sizes)[:-1]]).astype(np.int64),
        graph_sizes=graph_sizes,
        global_=np.vstack([item.global_ for item in items]),
        target=np.asarray([item.target for item in items], dtype=float),
    )


@dataclass
class AttentionCache:
    h_in: np.ndarray
    q: np.ndarray
    k: np.ndarray
    v: np.ndarray
    prob: np.ndarray
    scale: np.ndarray
    norm: LayerNormCache


@dataclass
class ForwardCache:
    layers: list[AttentionCache] = field(default_factory=list)
    pooled: Optional[np.ndarray] = None
    global_mlp: Optional[MLPCache] = None
    regressor: Optional[MLPCache] = None


def attention(h: np.ndarray, nb: NeighborSets, w_q: np.ndarray, w_k: np.ndarray, w_v: np.ndarray):
    """Masked single-head attention; returns (output, q, k, v, prob, scale)."""
    if h.shape[1] != w_q.shape[1]:
        raise ShapeMismatch(f"node features of width {h.shape[1]} vs W_Q input {w_q.shape[1]}")
    q = h @ w_q.T
    k = h @ w_k.T
    v = h @ w_v.T
    scale = 1.0 / np.sqrt(nb.size[nb.dst])
    scores = np.einsum("ed,ed->e", q[nb.dst], k[nb.src]) * scale
    prob = segment_softmax(scores, nb.starts, nb.dst)
    out = segment_sum(prob[:, None] * v[nb.src], nb.starts)
    return out, q, k, v, prob, scale


def attention_layer(h: np.ndarray, nb: NeighborSets, params: Params, layer: int, eps: float = 1e-5):
    """One transformer layer: layer_norm(H + attention(H)). Returns (H_next, cache)."""
    p = f"layers.{layer}"
    out, q, k, v, prob, scale = attention(h, nb, params[f"{p}.w_q"], params[f"{p}.w_k"], params[f"{p}.w_v"])
    h_next, norm = layer_norm_forward(h + out, params[f"{p}.ln_gain"], params[f"{p}.ln_bias"], eps)
    return h_next, AttentionCache(h_in=h, q=q, k=k, v=v, prob=prob, scale=scale, norm=norm)


def attention_layer_backward(
    grad_out: np.ndarray, nb: NeighborSets, params: Params, layer: int, cache: AttentionCache, grads: Params
) -> np.ndarray:
    p = f"layers.{layer}"
    dz, grads[f"{p}.ln_gain"], grads[f"{p}.ln_bias"] = layer_norm_backward(grad_out, params[f"{p}.ln_gain"], cache.norm)
    dh = dz.copy()  # residual path

    da_dst = dz[nb.dst]
    v_src = cache.v[nb.src]
    dprob = np.einsum("ed,ed->e", da_dst, v_src)
    dv = segment_sum((cache.prob[:, None] * da_dst)[nb.src_order], nb.src_starts)
    weighted = segment_sum(cache.prob * dprob, nb.starts)
    dscore = cache.prob * (dprob - weighted[nb.dst]) * cache.scale
    dq = segment_sum(dscore[:, None] * cache.k[nb.src], nb.starts)
    dk = segment_sum((dscore[:, None] * cache.q[nb.dst])[nb.src_order], nb.src_starts)

    h = cache.h_in
    grads[f"{p}.w_q"] = dq.T @ h
    grads[f"{p}.w_k"] = dk.T @ h
    grads[f"{p}.w_v"] = dv.T @ h
    dh += dq @ params[f"{p}.w_q"] + dk @ params[f"{p}.w_k"] + dv @ params[f"{p}.w_v"]
    return dh


class GraphTransformer:
    """Parameters, configuration and normalizer of the PST predictor."""

    kind = "graph_transformer"

    def __init__(
        self,
        config: ModelConfig,
        params: Params,
        normalizer: Optional[Normalizer] = None,
        feature_drop: FeatureGroup = FeatureGroup.NONE,
    ):
        self.config = config
        self.params = params
        self.normalizer = normalizer
        self.feature_drop = feature_drop

    def parameter_count(self) -> int:
        return int(sum(v.size for v in self.params.values()))

    def require_normalizer(self) -> Normalizer:
        if self.normalizer is None:
            raise NormalizerMissing("model has no fitted normalizer")
        return self.normalizer

    def forward(self, batch: GraphBatch) -> tuple[np.ndarray, ForwardCache]:
        """Raw (unclamped) predictions, one per graph in ``batch``."""
        cfg = self.config
        if batch.node.shape[1] != cfg.feature_dim:
            raise ShapeMismatch(f"node features have width {batch.node.shape[1]}, expected {cfg.feature_dim}")
        cache = ForwardCache()
        h = batch.node
        for layer in range(cfg.n_layers):
            h, layer_cache = attention_layer(h, batch.neighbors, self.params, layer, cfg.layer_norm_eps)
            cache.layers.append(layer_cache)

        pooled = segment_sum(h, batch.graph_starts) / batch.graph_sizes[:, None]
        cache.pooled = pooled
        x = pooled
        if cfg.use_global_features:
            if batch.global_.shape[1] != cfg.global_dim:
                raise ShapeMismatch(f"global features have width {batch.global_.shape[1]}, expected {cfg.global_dim}")
            g, cache.global_mlp = mlp_forward(self.params, "global_mlp", batch.global_)
            x = np.concatenate([pooled, g], axis=1)
        out, cache.regressor = mlp_forward(self.params, "regressor", x)
        preds = out[:, 0]
        if not np.all(np.isfinite(preds)):
            raise NonFiniteActivation("graph transformer produced a non-finite prediction")
        return preds, cache

    def predict(self, batch: GraphBatch) -> np.ndarray:
        return self.forward(batch)[0]

    def backward(self, batch: GraphBatch, cache: ForwardCache, grad_pred: np.ndarray) -> Params:
        """Gradients of sum(grad_pred * prediction) with respect to every parameter."""
        cfg = self.config
        grads: Params = {}
        dx = mlp_backward(self.params, "regressor", cache.regressor, grad_pred[:, None], grads)
        dpooled = dx[:, : cfg.feature_dim]
        if cfg.use_global_features:
            mlp_backward(self.params, "global_mlp", cache.global_mlp, dx[:, cfg.feature_dim:], grads)

        dh = (dpooled / batch.graph_sizes[:, None])[batch.graph_of_node]
        for layer in range(cfg.n_layers - 1, -1, -1):
            dh = attention_layer_backward(dh, batch.neighbors, self.params, layer, cache.layers[layer], grads)
        for name, g in grads.items():
            if not np.all(np.isfinite(g)):
                raise NonFiniteActivation(f"non-finite gradient for {name}")
        return grads

    def prepare(self, samples: Sequence[FeaturizedSample]) -> list[PreparedGraph]:
        return prepare(samples, self.require_normalizer())

    collate = staticmethod(collate)


def init_model(config: ModelConfig, seed: int) -> GraphTransformer:
    """Uniform(+-sqrt(1/fan_in)) weights, zero biases, unit layer-norm gain."""
    problem = config.find_invalid()
    if problem:
        raise InvalidConfig(problem)
    rng = np.random.default_rng(seed)
    params: Params = {}
    d = config.feature_dim
    for layer in range(config.n_layers):
        for name in ("w_q", "w_k", "w_v"):
            params[f"layers.{layer}.{name}"] = uniform_fan_in(rng, (config.qkv_dim, d))
        params[f"layers.{layer}.ln_gain"] = np.ones(d)
        params[f"layers.{layer}.ln_bias"] = np.zeros(d)
    if config.use_global_features:
        init_mlp(params, "global_mlp", [config.global_dim, *config.global_hidden], rng)
    hidden = [config.regressor_hidden] * (config.regressor_layers - 1)
    init_mlp(params, "regressor", [config.regressor_input_dim, *hidden, 1], rng)
    return GraphTransformer(config, params)


def forward(model: GraphTransformer, graph: CircuitGraph, node_feats: np.ndarray, global_feats: np.ndarray) -> float:
    """Predicted PST for one already-normalized graph."""
    model.require_normalizer()
    item = PreparedGraph(node=node_feats, neighbors=neighbor_sets(graph), global_=global_feats, baseline=np.zeros(0), target=0.0)
    return float(model.predict(collate([item]))[0])
