"""Report schemas produced by training, evaluation and benchmarking."""

from datetime import datetime
from typing import Any, Optional

from pydantic import BaseModel, Field


class MetricsReport(BaseModel):
    """Regression quality on one split."""

    rmse: float = Field(..., ge=0.0)
    r2: Optional[float] = Field(None, description="Null when the targets have zero variance")
    spearman: Optional[float] = Field(None, ge=-1.0, le=1.0)
    n: int
    pairs: list[tuple[float, float]] = Field(
        default_factory=list, description="(target, prediction) per sample"
    )
    r2_undefined: bool = False
    per_algorithm: dict[str, "MetricsReport"] = Field(default_factory=dict)


class EpochRecord(BaseModel):
    epoch: int
    train_mse: float
    val_rmse: float


class TrainReport(BaseModel):
    """Training history and best-validation selection."""

    history: list[EpochRecord] = Field(default_factory=list)
    best_epoch: int = -1
    best_val_rmse: float = float("inf")
    final_val_rmse: float = float("inf")
    elapsed_s: float = 0.0


class AblationRow(BaseModel):
    label: str
    use_global_features: bool
    drop_feature_group: str
    n_layers: int
    shots: Optional[int]
    test_rmse: float
    test_r2: Optional[float]
    test_spearman: Optional[float]
    best_epoch: int


class RuntimeRow(BaseModel):
    path: str
    batch_size: int
    n_circuits: int
    latency_s: float = Field(..., description="Mean wall-clock seconds per circuit")
    speedup: Optional[float] = Field(None, description="Simulation latency / this latency")


class CorrelationReport(BaseModel):
    """PST against state fidelity over a random-circuit batch."""

    n: int
    spearman: Optional[float] = Field(None, ge=-1.0, le=1.0)
    pearson: Optional[float] = None
    pairs: list[tuple[float, float]] = Field(default_factory=list, description="(pst, fidelity) per sample")


class RunManifest(BaseModel):
    """Provenance written beside every CLI output."""

    subcommand: str
    arguments: dict[str, Any] = Field(default_factory=dict)
    seeds: dict[str, Optional[int]] = Field(default_factory=dict)
    versions: dict[str, str] = Field(default_factory=dict)
    settings: dict[str, Any] = Field(default_factory=dict)
    started_at: datetime = Field(default_factory=datetime.now)
