"""Training and evaluation of both predictors on a labeled dataset."""

import logging
from collections import defaultdict
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from qupst.errors import EmptySplit
from qupst.models.circuit import Circuit
from qupst.models.dataset import Dataset, Sample, Split
from qupst.models.noise import NoiseProfile
from qupst.models.report import MetricsReport, TrainReport
from qupst.models.training import BaselineConfig, FeatureGroup, ModelConfig, TrainConfig
from qupst.predictor.baseline import SimpleNN, init_baseline
from qupst.predictor.checkpoint import Predictor
from qupst.predictor.graph_transformer import GraphTransformer, init_model
from qupst.predictor.trainer import train
from qupst.services.csv_reports import write_csv
from qupst.services.featurizer import FeaturizedSample, featurize, featurize_all
from qupst.services.metrics import compute_metrics

logger = logging.getLogger(__name__)

PREDICT_CHUNK = 256


def split_samples(dataset: Dataset, split: Split | str) -> list[Sample]:
    samples = dataset.by_split(split)
    if not samples:
        raise EmptySplit(f"dataset has no {Split(split).value} samples")
    return samples


def featurize_splits(dataset: Dataset, drop: FeatureGroup = FeatureGroup.NONE) -> dict[Split, list[FeaturizedSample]]:
    """Featurize train/val/test; dropped groups are zeroed before any normalizer sees them."""
    return {tag: featurize_all(dataset.by_split(tag), drop) for tag in Split}


def _fit(
    model: Predictor,
    dataset: Dataset,
    train_config: TrainConfig,
    drop: FeatureGroup,
    history_path: Optional[Path | str],
) -> tuple[Predictor, TrainReport]:
    feats = featurize_splits(dataset, drop)
    if not feats[Split.TRAIN]:
        raise EmptySplit("dataset has no train samples")
    if not feats[Split.VAL]:
        raise EmptySplit("dataset has no val samples")
    logger.info(
        "Training %s on %d samples (val %d, drop=%s)",
        model.kind, len(feats[Split.TRAIN]), len(feats[Split.VAL]), drop.value,
    )
    return train(model, feats[Split.TRAIN], feats[Split.VAL], train_config, history_path)


def train_graph_transformer(
    dataset: Dataset,
    model_config: Optional[ModelConfig] = None,
    train_config: Optional[TrainConfig] = None,
    model_seed: int = 0,
    drop: FeatureGroup = FeatureGroup.NONE,
    history_path: Optional[Path | str] = None,
) -> tuple[GraphTransformer, TrainReport]:
    model = init_model(model_config or ModelConfig(), model_seed)
    model.feature_drop = drop
    return _fit(model, dataset, train_config or TrainConfig(), drop, history_path)


def train_baseline(
    dataset: Dataset,
    train_config: Optional[TrainConfig] = None,
    config: Optional[BaselineConfig] = None,
    model_seed: int = 0,
    history_path: Optional[Path | str] = None,
) -> tuple[SimpleNN, TrainReport]:
    """Simple NN trained with the same recipe as the graph transformer."""
    model = init_baseline(config or BaselineConfig(), model_seed)
    return _fit(model, dataset, train_config or TrainConfig(), FeatureGroup.NONE, history_path)


def predict_featurized(model: Predictor, feats: Sequence[FeaturizedSample], clamp: bool = True) -> np.ndarray:
    items = model.prepare(feats)
    preds = [model.predict(model.collate(items[lo : lo + PREDICT_CHUNK])) for lo in range(0, len(items), PREDICT_CHUNK)]
    out = np.concatenate(preds) if preds else np.zeros(0)
    return np.clip(out, 0.0, 1.0) if clamp else out


def predict_pst(model: Predictor, circuit: Circuit, profile: NoiseProfile) -> float:
    """Clamped PST prediction for one (circuit, backend) pair."""
    sample = Sample(circuit=circuit, profile=profile, pst=0.0)
    drop = getattr(model, "feature_drop", FeatureGroup.NONE)
    return float(predict_featurized(model, [featurize(sample, drop)])[0])


def evaluate(
    model: Predictor,
    dataset: Dataset,
    split: Split | str = Split.TEST,
    scatter_path: Optional[Path | str] = None,
) -> MetricsReport:
    """Metrics of clamped predictions on one split, with per-algorithm breakdown."""
    samples = split_samples(dataset, split)
    feats = featurize_all(samples, getattr(model, "feature_drop", FeatureGroup.NONE))
    preds = predict_featurized(model, feats)
    targets = [s.pst for s in samples]
    report = compute_metrics(targets, preds)

    by_algorithm: dict[str, list[int]] = defaultdict(list)
    for i, s in enumerate(samples):
        if s.algorithm:
            by_algorithm[s.algorithm].append(i)
    for name, idx in sorted(by_algorithm.items()):
        report.per_algorithm[name] = compute_metrics([targets[i] for i in idx], preds[idx], keep_pairs=False)

    if scatter_path is not None:
        write_csv(
            scatter_path,
            ["target", "prediction", "noise_factor", "circuit_id", "algorithm"],
            ([t, float(p), s.noise_factor, s.circuit_id, s.algorithm] for t, p, s in zip(targets, preds, samples)),
        )
    logger.info(
        "%s on %s: rmse=%.5f r2=%s spearman=%s (n=%d)",
        model.kind, Split(split).value, report.rmse,
        f"{report.r2:.4f}" if report.r2 is not None else "undefined",
        f"{report.spearman:.4f}" if report.spearman is not None else "undefined",
        report.n,
    )
    return report


def write_metrics(reports: dict[str, MetricsReport], path: Path | str) -> Path:
    """One row per (model, algorithm scope)."""
    rows = []
    for label, report in reports.items():
        rows.append([label, "all", report.n, report.rmse, report.r2, report.spearman])
        for name, sub in report.per_algorithm.items():
            rows.append([label, name, sub.n, sub.rmse, sub.r2, sub.spearman])
    return write_csv(path, ["model", "scope", "n", "rmse", "r2", "spearman"], rows)
