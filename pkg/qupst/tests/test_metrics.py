"""RMSE / R2 / Spearman scoring and CSV report writing."""

import csv

import numpy as np
import pytest

from qupst.errors import EmptyInput, ShapeMismatch, ZeroVariance
from qupst.models.report import EpochRecord
from qupst.services.csv_reports import write_csv, write_models
from qupst.services.metrics import compute_metrics, r2_score, spearman

TARGETS = [0.91, 0.42, 0.77, 0.15, 0.63]


def test_perfect_predictions():
    report = compute_metrics(TARGETS, TARGETS)
    assert report.rmse == 0.0
    assert report.r2 == pytest.approx(1.0)
    assert report.spearman == pytest.approx(1.0)
    assert report.n == 5
    assert report.pairs[1] == (0.42, 0.42)


def test_reversed_ranks():
    order = np.argsort(TARGETS)
    reversed_ = np.empty(5)
    reversed_[order] = sorted(TARGETS, reverse=True)
    assert compute_metrics(TARGETS, reversed_).spearman == pytest.approx(-1.0)


def test_mean_prediction_has_zero_r2():
    report = compute_metrics(TARGETS, [np.mean(TARGETS)] * 5)
    assert report.r2 == pytest.approx(0.0, abs=1e-12)
    assert report.spearman is None


def test_rmse_value():
    assert compute_metrics([0.0, 1.0], [1.0, 1.0]).rmse == pytest.approx(np.sqrt(0.5))


def test_spearman_ignores_monotone_transforms(rng):
    t = rng.uniform(size=40)
    p = t + rng.normal(scale=0.1, size=40)
    assert spearman(t, np.exp(3 * p)) == pytest.approx(spearman(t, p))


def test_ties_use_average_ranks():
    assert spearman([1, 2, 2, 3], [1, 2, 2, 3]) == pytest.approx(1.0)


def test_constant_targets_flagged():
    report = compute_metrics([0.5, 0.5, 0.5], [0.4, 0.5, 0.6])
    assert report.r2 is None and report.r2_undefined
    assert r2_score(np.full(3, 0.5), np.zeros(3)) is None
    with pytest.raises(ZeroVariance):
        compute_metrics([0.5, 0.5], [0.4, 0.6], strict=True)


def test_input_errors():
    with pytest.raises(EmptyInput):
        compute_metrics([], [])
    with pytest.raises(ShapeMismatch):
        compute_metrics([0.1, 0.2], [0.1])


def test_pairs_can_be_dropped():
    assert compute_metrics(TARGETS, TARGETS, keep_pairs=False).pairs == []


def test_csv_writers(tmp_path):
    path = write_csv(tmp_path / "out" / "t.csv", ["a", "b"], [[0.1, None], [2, "x"]])
    with open(path, newline="") as fh:
        assert list(csv.reader(fh)) == [["a", "b"], ["0.1", ""], ["2", "x"]]

    records = [EpochRecord(epoch=0, train_mse=0.5, val_rmse=0.25)]
    path = write_models(tmp_path / "h.csv", records, ("epoch", "val_rmse"))
    with open(path, newline="") as fh:
        assert list(csv.reader(fh)) == [["epoch", "val_rmse"], ["0", "0.25"]]
