"""Checkpoint JSON for both predictors.

Layout: {"version", "kind", "config", "normalizer", "feature_drop",
"params": {name: {"shape": [...], "data": [...]}}}, written with sorted keys.
"""

import json
import logging
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np
from pydantic import BaseModel, Field
from pydantic import ValidationError as PydanticValidationError

from qupst.config.settings import settings
from qupst.errors import InvalidConfig, IoError, ShapeMismatch
from qupst.models.training import BaselineConfig, FeatureGroup, ModelConfig
from qupst.predictor.baseline import SimpleNN, init_baseline
from qupst.predictor.graph_transformer import GraphTransformer, init_model
from qupst.services.featurizer import Normalizer

logger = logging.getLogger(__name__)

Predictor = Union[GraphTransformer, SimpleNN]


class ParamArray(BaseModel):
    shape: list[int]
    data: list[float]


class Checkpoint(BaseModel):
    version: int = Field(settings.checkpoint_version)
    kind: str = Field(..., description="graph_transformer or simple_nn")
    config: dict[str, Any]
    normalizer: Optional[Normalizer] = None
    feature_drop: FeatureGroup = FeatureGroup.NONE
    params: dict[str, ParamArray]


def to_checkpoint(model: Predictor) -> Checkpoint:
    return Checkpoint(
        kind=model.kind,
        config=model.config.model_dump(mode="json"),
        normalizer=model.normalizer,
        feature_drop=getattr(model, "feature_drop", FeatureGroup.NONE),
        params={
            name: ParamArray(shape=list(value.shape), data=[float(x) for x in value.reshape(-1)])
            for name, value in model.params.items()
        },
    )


def from_checkpoint(ckpt: Checkpoint) -> Predictor:
    if ckpt.version != settings.checkpoint_version:
        raise InvalidConfig(f"unsupported checkpoint version {ckpt.version}")
    if ckpt.kind == GraphTransformer.kind:
        model: Predictor = init_model(ModelConfig.model_validate(ckpt.config), seed=0)
        model.feature_drop = ckpt.feature_drop
    elif ckpt.kind == SimpleNN.kind:
        model = init_baseline(BaselineConfig.model_validate(ckpt.config), seed=0)
    else:
        raise InvalidConfig(f"unknown checkpoint kind {ckpt.kind!r}")

    if set(ckpt.params) != set(model.params):
        missing = sorted(set(model.params) ^ set(ckpt.params))
        raise ShapeMismatch(f"checkpoint parameters do not match config: {missing[:5]}")
    for name, arr in ckpt.params.items():
        value = np.asarray(arr.data, dtype=float).reshape(arr.shape)
        if value.shape != model.params[name].shape:
            raise ShapeMismatch(f"{name}: checkpoint shape {value.shape} != {model.params[name].shape}")
        model.params[name] = value
    model.normalizer = ckpt.normalizer
    return model


def save_checkpoint(model: Predictor, path: Path | str) -> Path:
    path = Path(path)
    payload = to_checkpoint(model).model_dump(mode="json")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")
    except OSError as e:
        raise IoError(f"cannot write checkpoint {path}: {e}") from e
    logger.info("Saved %s checkpoint to %s", model.kind, path)
    return path


def load_checkpoint(path: Path | str) -> Predictor:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise IoError(f"cannot read checkpoint {path}: {e}") from e
    try:
        ckpt = Checkpoint.model_validate_json(text)
    except PydanticValidationError as e:
        raise InvalidConfig(f"malformed checkpoint {path}: {e.error_count()} errors") from e
    return from_checkpoint(ckpt)
