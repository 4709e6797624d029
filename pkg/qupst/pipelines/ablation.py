"""Ablation sweeps: global features, node-feature groups, depth and shot count.

Every row retrains from the same model seed and is scored on the test split.
"""

import json
import logging
from pathlib import Path
from typing import Iterable, Optional

from pydantic import ValidationError as PydanticValidationError
from tqdm import tqdm

from qupst.errors import InvalidConfig, IoError
from qupst.models.dataset import Dataset, Split
from qupst.models.report import AblationRow
from qupst.models.training import AblationPlan, AblationSpec, FeatureGroup, ModelConfig, TrainConfig
from qupst.pipelines.evaluation import evaluate, train_graph_transformer
from qupst.services.csv_reports import write_models
from qupst.services.dataset_builder import resample_shots

logger = logging.getLogger(__name__)

SHOT_COUNTS = (512, 1024, 2048, 4096)
ROW_FIELDS = (
    "label",
    "use_global_features",
    "drop_feature_group",
    "n_layers",
    "shots",
    "test_rmse",
    "test_r2",
    "test_spearman",
    "best_epoch",
)


def default_rows() -> list[AblationSpec]:
    """Global on/off, each feature group dropped, 1-3 layers, 512-4096 shots."""
    rows = [
        AblationSpec(name="global=on", use_global_features=True),
        AblationSpec(name="global=off", use_global_features=False),
    ]
    rows += [
        AblationSpec(name=f"drop={group.value}", drop_feature_group=group)
        for group in FeatureGroup
        if group != FeatureGroup.NONE
    ]
    rows += [AblationSpec(name=f"layers={n}", n_layers=n) for n in (1, 2, 3)]
    rows += [AblationSpec(name=f"shots={s}", shots=s) for s in SHOT_COUNTS]
    return rows


def default_plan(train: Optional[TrainConfig] = None, model_seed: int = 0) -> AblationPlan:
    return AblationPlan(rows=default_rows(), train=train or TrainConfig(), model_seed=model_seed)


def load_plan(path: Path | str) -> AblationPlan:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise IoError(f"cannot read ablation plan {path}: {e}") from e
    try:
        plan = AblationPlan.model_validate(json.loads(text))
    except (json.JSONDecodeError, PydanticValidationError) as e:
        raise InvalidConfig(f"malformed ablation plan {path}: {e}") from e
    if not plan.rows:
        plan.rows = default_rows()
    return plan


def run_ablation(
    dataset: Dataset,
    spec: AblationSpec,
    train_config: Optional[TrainConfig] = None,
    model_seed: int = 0,
) -> AblationRow:
    """Train and test one configuration."""
    if spec.shots is not None:
        dataset = resample_shots(dataset, spec.shots, dataset.master_seed)
    model_config = ModelConfig(n_layers=spec.n_layers, use_global_features=spec.use_global_features)
    model, report = train_graph_transformer(
        dataset, model_config, train_config, model_seed, spec.drop_feature_group
    )
    metrics = evaluate(model, dataset, Split.TEST)
    row = AblationRow(
        label=spec.label(),
        use_global_features=spec.use_global_features,
        drop_feature_group=spec.drop_feature_group.value,
        n_layers=spec.n_layers,
        shots=spec.shots,
        test_rmse=metrics.rmse,
        test_r2=metrics.r2,
        test_spearman=metrics.spearman,
        best_epoch=report.best_epoch,
    )
    logger.info("ablation %s: test_rmse=%.5f", row.label, row.test_rmse)
    return row


def run_plan(dataset: Dataset, plan: AblationPlan, out: Optional[Path | str] = None) -> list[AblationRow]:
    disable = not logger.isEnabledFor(logging.INFO)
    rows = [
        run_ablation(dataset, spec, plan.train, plan.model_seed)
        for spec in tqdm(plan.rows, desc="ablation", disable=disable)
    ]
    if out is not None:
        write_rows(rows, out)
    return rows


def write_rows(rows: Iterable[AblationRow], path: Path | str) -> Path:
    return write_models(path, list(rows), ROW_FIELDS)
