"""Model, training and ablation configuration schemas."""

from enum import Enum
from typing import Optional

from pydantic import BaseModel, Field, model_validator

from qupst.config.settings import settings

NODE_FEATURE_DIM = 24
GLOBAL_FEATURE_DIM = 6
BASELINE_QUBIT_SLOTS = 10
BASELINE_FEATURE_DIM = GLOBAL_FEATURE_DIM + BASELINE_QUBIT_SLOTS + BASELINE_QUBIT_SLOTS**2


class ModelConfig(BaseModel):
    """Graph-transformer hyperparameters."""

    n_layers: int = Field(settings.n_layers, description="Attention layers (1-3)")
    feature_dim: int = NODE_FEATURE_DIM
    qkv_dim: int = NODE_FEATURE_DIM
    heads: int = 1
    global_dim: int = GLOBAL_FEATURE_DIM
    global_hidden: tuple[int, int] = (12, 12)
    regressor_hidden: int = 128
    regressor_layers: int = 3
    use_global_features: bool = True
    layer_norm_eps: float = 1e-5

    @property
    def regressor_input_dim(self) -> int:
        return self.feature_dim + (self.global_hidden[-1] if self.use_global_features else 0)

    def find_invalid(self) -> Optional[str]:
        if self.n_layers not in (1, 2, 3):
            return f"n_layers must be 1, 2 or 3, got {self.n_layers}"
        if self.feature_dim != NODE_FEATURE_DIM or self.qkv_dim != self.feature_dim:
            return "feature_dim and qkv_dim must both equal 24"
        if self.heads != 1:
            return "only single-head attention is supported"
        if self.global_dim != GLOBAL_FEATURE_DIM:
            return "global_dim must equal 6"
        if self.regressor_layers < 1 or self.regressor_hidden < 1:
            return "regressor dims must be positive"
        if self.layer_norm_eps <= 0:
            return "layer_norm_eps must be positive"
        return None


class BaselineConfig(BaseModel):
    """Simple fully connected baseline on the 116 circuit-level features."""

    input_dim: int = BASELINE_FEATURE_DIM
    hidden: int = 128
    n_layers: int = 3


class TrainConfig(BaseModel):
    """Optimizer and epoch-loop settings."""

    epochs: int = Field(settings.epochs, ge=1)
    learning_rate: float = Field(settings.learning_rate, gt=0)
    weight_decay: float = Field(settings.weight_decay, ge=0)
    batch_size: int = Field(settings.batch_size, ge=1)
    beta1: float = Field(0.9, gt=0, lt=1)
    beta2: float = Field(0.999, gt=0, lt=1)
    eps: float = Field(1e-8, gt=0)
    seed: int = settings.default_seed
    log_every: int = Field(settings.log_every, ge=1)


class FeatureGroup(str, Enum):
    """Node-feature groups that an ablation can zero out."""

    NONE = "none"
    GATE_ERROR = "gate_error"
    GATE_INDEX = "gate_index"
    GATE_TYPE = "gate_type"
    QUBIT_INDEX = "qubit_index"
    T1T2 = "t1t2"


FEATURE_GROUP_SLOTS: dict[FeatureGroup, tuple[int, ...]] = {
    FeatureGroup.NONE: (),
    FeatureGroup.GATE_TYPE: tuple(range(0, 6)),
    FeatureGroup.QUBIT_INDEX: tuple(range(6, 16)),
    FeatureGroup.T1T2: tuple(range(16, 20)),
    FeatureGroup.GATE_ERROR: (20, 21, 22),
    FeatureGroup.GATE_INDEX: (23,),
}


class AblationSpec(BaseModel):
    """One ablation configuration (one table row)."""

    name: Optional[str] = None
    use_global_features: bool = True
    drop_feature_group: FeatureGroup = FeatureGroup.NONE
    n_layers: int = settings.n_layers
    shots: Optional[int] = None

    @model_validator(mode="after")
    def _check(self) -> "AblationSpec":
        if self.n_layers not in (1, 2, 3):
            raise ValueError("n_layers must be 1, 2 or 3")
        if self.shots is not None and self.shots < 1:
            raise ValueError("shots must be positive")
        return self

    def label(self) -> str:
        if self.name:
            return self.name
        parts = [
            f"global={'on' if self.use_global_features else 'off'}",
            f"drop={self.drop_feature_group.value}",
            f"layers={self.n_layers}",
            f"shots={self.shots if self.shots is not None else 'dataset'}",
        ]
        return ",".join(parts)


class AblationPlan(BaseModel):
    """Rows to run, plus the shared training recipe."""

    rows: list[AblationSpec] = Field(default_factory=list)
    train: TrainConfig = Field(default_factory=TrainConfig)
    model_seed: int = 0
