"""Pipelines module - training, evaluation, ablation, benchmark and correlation runs."""

from qupst.pipelines.ablation import default_plan, default_rows, load_plan, run_ablation, run_plan
from qupst.pipelines.benchmark import bench_runtime, bench_samples
from qupst.pipelines.correlation import correlate
from qupst.pipelines.evaluation import (
    evaluate,
    predict_pst,
    train_baseline,
    train_graph_transformer,
)

__all__ = [
    "bench_runtime",
    "bench_samples",
    "correlate",
    "default_plan",
    "default_rows",
    "evaluate",
    "load_plan",
    "predict_pst",
    "run_ablation",
    "run_plan",
    "train_baseline",
    "train_graph_transformer",
]
