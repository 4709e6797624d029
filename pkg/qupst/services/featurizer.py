"""Node, global and baseline feature extraction plus dataset normalization.

Node feature layout (24 slots):
    0-5   node type one-hot (INPUT, MEASURE, RZ, X, SX, CNOT)
    6-15  acted-qubit one-hot (two ones for CNOT)
    16-19 T1, T2 of the first qubit; T1, T2 of the second qubit (us)
    20    gate error
    21-22 readout error10, readout error01 (MEASURE nodes only)
    23    topological index
"""

import logging
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np
from pydantic import BaseModel

from qupst.config.settings import settings
from qupst.errors import EmptyTrainingSet, ProfileMismatch, ShapeMismatch, UnsupportedQubitCount
from qupst.models.circuit import Circuit, CircuitGraph, GateKind, NodeKind
from qupst.models.dataset import Sample
from qupst.models.noise import NoiseProfile
from qupst.models.training import (
    BASELINE_FEATURE_DIM,
    BASELINE_QUBIT_SLOTS,
    FEATURE_GROUP_SLOTS,
    GLOBAL_FEATURE_DIM,
    NODE_FEATURE_DIM,
    FeatureGroup,
)
from qupst.services.circuit_ops import circuit_stats, to_dag

logger = logging.getLogger(__name__)

QUBIT_SLOT = 6
T1_SLOT, T2_SLOT, T1_SECOND_SLOT, T2_SECOND_SLOT = 16, 17, 18, 19
GATE_ERROR_SLOT, READOUT10_SLOT, READOUT01_SLOT, TOPO_SLOT = 20, 21, 22, 23

TYPE_SLOT = {
    "INPUT": 0,
    "MEASURE": 1,
    GateKind.RZ.value: 2,
    GateKind.X.value: 3,
    GateKind.SX.value: 4,
    GateKind.SXDG.value: 4,
    GateKind.CNOT.value: 5,
}


def _check_inputs(c: Circuit, p: NoiseProfile) -> None:
    if c.n_qubits > settings.max_qubits:
        raise UnsupportedQubitCount(f"{c.n_qubits} qubits; features support at most {settings.max_qubits}")
    if p.n_qubits < c.n_qubits:
        raise ProfileMismatch(f"profile {p.profile_id} covers {p.n_qubits} qubits, circuit has {c.n_qubits}")


def node_features(g: CircuitGraph, c: Circuit, p: NoiseProfile) -> np.ndarray:
    """K x 24 node feature matrix aligned with ``g.nodes``."""
    _check_inputs(c, p)
    feats = np.zeros((g.n_nodes, NODE_FEATURE_DIM))
    for i, node in enumerate(g.nodes):
        row = feats[i]
        if node.kind == NodeKind.GATE:
            row[TYPE_SLOT[node.gate.kind.value]] = 1.0
            row[GATE_ERROR_SLOT] = p.gate_error(node.gate)
        else:
            row[TYPE_SLOT[node.kind.value]] = 1.0

        first = node.qubits[0]
        row[QUBIT_SLOT + first] = 1.0
        row[T1_SLOT] = p.t1[first]
        row[T2_SLOT] = p.t2[first]
        if len(node.qubits) == 2:
            second = node.qubits[1]
            row[QUBIT_SLOT + second] = 1.0
            row[T1_SECOND_SLOT] = p.t1[second]
            row[T2_SECOND_SLOT] = p.t2[second]

        if node.kind == NodeKind.MEASURE:
            row[READOUT10_SLOT] = p.readout_error10[first]
            row[READOUT01_SLOT] = p.readout_error01[first]
        row[TOPO_SLOT] = g.topo_index[i]
    return feats


def global_features(c: Circuit) -> np.ndarray:
    """[depth, width, #RZ, #X, #SX, #CNOT]."""
    stats = circuit_stats(c)
    return np.array(
        [
            stats.depth,
            stats.width,
            stats.count(GateKind.RZ),
            stats.count(GateKind.X),
            stats.count(GateKind.SX),
            stats.count(GateKind.CNOT),
        ],
        dtype=float,
    )


def simple_nn_features(c: Circuit) -> np.ndarray:
    """116 circuit-level features: globals, per-qubit 1q counts, ordered CNOT pair grid."""
    if c.n_qubits > settings.max_qubits:
        raise UnsupportedQubitCount(f"{c.n_qubits} qubits; features support at most {settings.max_qubits}")
    single = np.zeros(BASELINE_QUBIT_SLOTS)
    pairs = np.zeros((BASELINE_QUBIT_SLOTS, BASELINE_QUBIT_SLOTS))
    for gate in c.operations():
        if gate.kind == GateKind.CNOT:
            pairs[gate.qubits[0], gate.qubits[1]] += 1.0
        elif gate.kind != GateKind.MEASURE:
            single[gate.qubits[0]] += 1.0
    out = np.concatenate([global_features(c), single, pairs.reshape(-1)])
    assert out.shape == (BASELINE_FEATURE_DIM,)
    return out


@dataclass
class FeaturizedSample:
    """Everything the predictors consume for one sample (unnormalized)."""

    graph: CircuitGraph
    node: np.ndarray
    global_: np.ndarray
    baseline: np.ndarray
    target: float
    algorithm: Optional[str] = None


def featurize(sample: Sample, drop: FeatureGroup = FeatureGroup.NONE) -> FeaturizedSample:
    graph = to_dag(sample.circuit)
    node = node_features(graph, sample.circuit, sample.profile)
    slots = FEATURE_GROUP_SLOTS[drop]
    if slots:
        node[:, list(slots)] = 0.0
    return FeaturizedSample(
        graph=graph,
        node=node,
        global_=global_features(sample.circuit),
        baseline=simple_nn_features(sample.circuit),
        target=sample.pst,
        algorithm=sample.algorithm,
    )


def featurize_all(samples: Iterable[Sample], drop: FeatureGroup = FeatureGroup.NONE) -> list[FeaturizedSample]:
    return [featurize(s, drop) for s in samples]


class Normalizer(BaseModel):
    """Per-column mean/std for node, global and baseline features (train split only)."""

    node_mean: list[float]
    node_std: list[float]
    global_mean: list[float]
    global_std: list[float]
    baseline_mean: list[float]
    baseline_std: list[float]

    @classmethod
    def identity(cls) -> "Normalizer":
        """Zero mean, unit scale; for gradient checks on raw features."""
        return cls(
            node_mean=[0.0] * NODE_FEATURE_DIM,
            node_std=[1.0] * NODE_FEATURE_DIM,
            global_mean=[0.0] * GLOBAL_FEATURE_DIM,
            global_std=[1.0] * GLOBAL_FEATURE_DIM,
            baseline_mean=[0.0] * BASELINE_FEATURE_DIM,
            baseline_std=[1.0] * BASELINE_FEATURE_DIM,
        )

    @staticmethod
    def _apply(x: np.ndarray, mean: list[float], std: list[float]) -> np.ndarray:
        if x.shape[-1] != len(mean):
            raise ShapeMismatch(f"feature width {x.shape[-1]} != normalizer width {len(mean)}")
        return (x - np.asarray(mean)) / np.asarray(std)

    @staticmethod
    def _invert(x: np.ndarray, mean: list[float], std: list[float]) -> np.ndarray:
        return x * np.asarray(std) + np.asarray(mean)

    def apply_node(self, x: np.ndarray) -> np.ndarray:
        return self._apply(x, self.node_mean, self.node_std)

    def apply_global(self, x: np.ndarray) -> np.ndarray:
        return self._apply(x, self.global_mean, self.global_std)

    def apply_baseline(self, x: np.ndarray) -> np.ndarray:
        return self._apply(x, self.baseline_mean, self.baseline_std)

    def invert_node(self, x: np.ndarray) -> np.ndarray:
        return self._invert(x, self.node_mean, self.node_std)

    def invert_global(self, x: np.ndarray) -> np.ndarray:
        return self._invert(x, self.global_mean, self.global_std)

    def invert_baseline(self, x: np.ndarray) -> np.ndarray:
        return self._invert(x, self.baseline_mean, self.baseline_std)

    def apply(self, f: FeaturizedSample) -> FeaturizedSample:
        return FeaturizedSample(
            graph=f.graph,
            node=self.apply_node(f.node),
            global_=self.apply_global(f.global_),
            baseline=self.apply_baseline(f.baseline),
            target=f.target,
            algorithm=f.algorithm,
        )


def _moments(rows: np.ndarray, what: str) -> tuple[list[float], list[float]]:
    mean = rows.mean(axis=0)
    std = rows.std(axis=0)
    constant = std < settings.std_floor
    if constant.any():
        logger.debug("%s: %d zero-variance columns kept at unit scale", what, int(constant.sum()))
    std = np.where(constant, 1.0, std)
    return mean.tolist(), std.tolist()


def fit_normalizer(train: list[FeaturizedSample]) -> Normalizer:
    """Fit on training samples only; node statistics pool all node rows."""
    if len(train) < 2:
        raise EmptyTrainingSet(f"need at least 2 training samples, got {len(train)}")
    node_mean, node_std = _moments(np.vstack([f.node for f in train]), "node features")
    global_mean, global_std = _moments(np.vstack([f.global_ for f in train]), "global features")
    base_mean, base_std = _moments(np.vstack([f.baseline for f in train]), "baseline features")
    assert len(global_mean) == GLOBAL_FEATURE_DIM
    return Normalizer(
        node_mean=node_mean,
        node_std=node_std,
        global_mean=global_mean,
        global_std=global_std,
        baseline_mean=base_mean,
        baseline_std=base_std,
    )
