"""Simple fully connected baseline regressing PST from circuit-level features."""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from qupst.errors import InvalidConfig, NonFiniteActivation, NormalizerMissing, ShapeMismatch
from qupst.models.training import BaselineConfig
from qupst.predictor.layers import MLPCache, Params, init_mlp, mlp_backward, mlp_forward
from qupst.services.featurizer import FeaturizedSample, Normalizer

logger = logging.getLogger(__name__)


@dataclass
class BaselineBatch:
    features: np.ndarray
    target: np.ndarray

    @property
    def n_graphs(self) -> int:
        return len(self.target)


@dataclass
class PreparedVector:
    features: np.ndarray
    target: float
    algorithm: Optional[str] = None


class SimpleNN:
    """116 -> 128 -> 128 -> 1 with ReLU between layers."""

    kind = "simple_nn"

    def __init__(self, config: BaselineConfig, params: Params, normalizer: Optional[Normalizer] = None):
        self.config = config
        self.params = params
        self.normalizer = normalizer

    def parameter_count(self) -> int:
        return int(sum(v.size for v in self.params.values()))

    def require_normalizer(self) -> Normalizer:
        if self.normalizer is None:
            raise NormalizerMissing("baseline has no fitted normalizer")
        return self.normalizer

    def forward(self, batch: BaselineBatch) -> tuple[np.ndarray, MLPCache]:
        if batch.features.shape[1] != self.config.input_dim:
            raise ShapeMismatch(f"baseline input has width {batch.features.shape[1]}, expected {self.config.input_dim}")
        out, cache = mlp_forward(self.params, "mlp", batch.features)
        preds = out[:, 0]
        if not np.all(np.isfinite(preds)):
            raise NonFiniteActivation("baseline produced a non-finite prediction")
        return preds, cache

    def predict(self, batch: BaselineBatch) -> np.ndarray:
        return self.forward(batch)[0]

    def backward(self, batch: BaselineBatch, cache: MLPCache, grad_pred: np.ndarray) -> Params:
        grads: Params = {}
        mlp_backward(self.params, "mlp", cache, grad_pred[:, None], grads)
        return grads

    def prepare(self, samples: Sequence[FeaturizedSample]) -> list[PreparedVector]:
        norm = self.require_normalizer()
        return [PreparedVector(norm.apply_baseline(f.baseline), f.target, f.algorithm) for f in samples]

    @staticmethod
    def collate(items: Sequence[PreparedVector]) -> BaselineBatch:
        return BaselineBatch(
            features=np.vstack([item.features for item in items]),
            target=np.asarray([item.target for item in items], dtype=float),
        )


def init_baseline(config: BaselineConfig, seed: int) -> SimpleNN:
    if config.input_dim < 1 or config.hidden < 1 or config.n_layers < 1:
        raise InvalidConfig("baseline dims must be positive")
    rng = np.random.default_rng(seed)
    params: Params = {}
    init_mlp(params, "mlp", [config.input_dim, *[config.hidden] * (config.n_layers - 1), 1], rng)
    return SimpleNN(config, params)


def simple_nn_forward(model: SimpleNN, feats: np.ndarray) -> float:
    """Predicted PST for one normalized 116-vector."""
    x = np.asarray(feats, dtype=float).reshape(1, -1)
    return float(model.predict(BaselineBatch(features=x, target=np.zeros(1)))[0])
