"""Evaluation, ablation, runtime benchmark and PST/fidelity correlation."""

import csv
import json

import numpy as np
import pytest

from qupst.errors import EmptyInput, EmptySplit, InvalidConfig, IoError
from qupst.models.dataset import Dataset, Split
from qupst.models.training import AblationPlan, AblationSpec, FeatureGroup, ModelConfig, TrainConfig
from qupst.pipelines.ablation import default_rows, load_plan, run_ablation, run_plan
from qupst.pipelines.benchmark import bench_runtime, bench_samples
from qupst.pipelines.correlation import correlate
from qupst.pipelines.evaluation import (
    evaluate,
    predict_pst,
    train_baseline,
    train_graph_transformer,
    write_metrics,
)
from qupst.predictor.graph_transformer import init_model
from qupst.services.featurizer import Normalizer

QUICK = TrainConfig(epochs=3)


class OracleModel:
    """Returns the stored label of every sample."""

    kind = "oracle"

    def prepare(self, feats):
        return [f.target for f in feats]

    @staticmethod
    def collate(items):
        return np.asarray(items, dtype=float)

    def predict(self, batch):
        return batch


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestEvaluate:
    def test_oracle_scores_perfectly(self, tiny_dataset, tmp_path):
        report = evaluate(OracleModel(), tiny_dataset, Split.TEST, scatter_path=tmp_path / "scatter.csv")
        assert report.rmse == 0.0
        assert report.n == len(tiny_dataset.by_split(Split.TEST))
        rows = read_csv(tmp_path / "scatter.csv")
        assert list(rows[0]) == ["target", "prediction", "noise_factor", "circuit_id", "algorithm"]
        assert all(r["target"] == r["prediction"] for r in rows)

    def test_predictions_are_clamped(self, tiny_dataset):
        model = init_model(ModelConfig(), seed=0)
        model.normalizer = Normalizer.identity()
        model.params["regressor.2.weight"][:] = 0.0
        model.params["regressor.2.bias"][:] = 5.0
        report = evaluate(model, tiny_dataset, "val")
        assert all(p == 1.0 for _, p in report.pairs)

    def test_empty_split(self, tiny_dataset):
        train_only = Dataset(samples=tiny_dataset.by_split(Split.TRAIN))
        with pytest.raises(EmptySplit):
            evaluate(OracleModel(), train_only, Split.TEST)

    def test_per_algorithm_breakdown(self, tiny_dataset, tmp_path):
        tagged = tiny_dataset.model_copy(
            update={"samples": [s.model_copy(update={"algorithm": "bv" if i % 2 else "qft"})
                                for i, s in enumerate(tiny_dataset.samples)]}
        )
        report = evaluate(OracleModel(), tagged, Split.TRAIN)
        assert set(report.per_algorithm) == {"bv", "qft"}
        assert sum(r.n for r in report.per_algorithm.values()) == report.n
        path = write_metrics({"oracle": report}, tmp_path / "m.csv")
        assert [r["scope"] for r in read_csv(path)] == ["all", "bv", "qft"]


class TestTraining:
    def test_graph_transformer_and_baseline(self, tiny_dataset, tmp_path):
        gt, report = train_graph_transformer(
            tiny_dataset, ModelConfig(n_layers=1), QUICK, history_path=tmp_path / "h.csv"
        )
        assert len(report.history) == 3 and (tmp_path / "h.csv").exists()
        nn, _ = train_baseline(tiny_dataset, QUICK)
        for model in (gt, nn):
            assert model.normalizer is not None
            assert 0.0 <= evaluate(model, tiny_dataset).rmse <= 1.0

    def test_predict_pst_in_unit_interval(self, tiny_dataset):
        gt, _ = train_graph_transformer(tiny_dataset, ModelConfig(n_layers=1), QUICK, drop=FeatureGroup.GATE_TYPE)
        assert gt.feature_drop == FeatureGroup.GATE_TYPE
        s = tiny_dataset.samples[0]
        assert 0.0 <= predict_pst(gt, s.circuit, s.profile) <= 1.0


class TestAblation:
    def test_default_rows(self):
        rows = default_rows()
        assert len(rows) == 14
        assert [r.use_global_features for r in rows[:2]] == [True, False]
        assert {r.drop_feature_group for r in rows[2:7]} == set(FeatureGroup) - {FeatureGroup.NONE}
        assert [r.n_layers for r in rows[7:10]] == [1, 2, 3]
        assert [r.shots for r in rows[10:]] == [512, 1024, 2048, 4096]
        assert len({r.label() for r in rows}) == 14

    def test_rows_are_reproducible(self, tiny_dataset):
        spec = AblationSpec(n_layers=1, drop_feature_group=FeatureGroup.T1T2, shots=512)
        a = run_ablation(tiny_dataset, spec, QUICK, model_seed=4)
        b = run_ablation(tiny_dataset, spec, QUICK, model_seed=4)
        assert a == b
        assert a.shots == 512 and a.drop_feature_group == "t1t2"

    def test_plan_writes_csv(self, tiny_dataset, tmp_path):
        plan = AblationPlan(
            rows=[AblationSpec(name="on", n_layers=1), AblationSpec(name="off", n_layers=1, use_global_features=False)],
            train=TrainConfig(epochs=2),
        )
        rows = run_plan(tiny_dataset, plan, tmp_path / "ablate.csv")
        written = read_csv(tmp_path / "ablate.csv")
        assert [r["label"] for r in written] == ["on", "off"] == [r.label for r in rows]

    def test_load_plan(self, tmp_path):
        path = tmp_path / "plan.json"
        path.write_text(json.dumps({"rows": [{"n_layers": 3}], "train": {"epochs": 7}}))
        plan = load_plan(path)
        assert plan.rows[0].n_layers == 3 and plan.train.epochs == 7

        path.write_text(json.dumps({"train": {"epochs": 7}}))
        assert len(load_plan(path).rows) == 14

        path.write_text(json.dumps({"rows": [{"n_layers": 5}]}))
        with pytest.raises(InvalidConfig):
            load_plan(path)
        with pytest.raises(IoError):
            load_plan(tmp_path / "absent.json")


def test_bench_runtime(tmp_path):
    samples = bench_samples(4, seed=1, qubit_range=(2, 3))
    assert all(2 <= s.circuit.n_qubits <= 3 for s in samples)
    model = init_model(ModelConfig(n_layers=1), seed=0)
    model.normalizer = Normalizer.identity()
    rows = bench_runtime(samples, model, out=tmp_path / "bench.csv")
    assert [(r.path, r.batch_size) for r in rows] == [
        ("simulation", 1), ("graph_transformer", 1), ("graph_transformer", 10)
    ]
    assert all(np.isfinite(r.latency_s) and r.latency_s > 0 for r in rows)
    assert rows[0].speedup == 1.0
    assert len(read_csv(tmp_path / "bench.csv")) == 3


def test_bench_runtime_without_circuits(tmp_path):
    model = init_model(ModelConfig(n_layers=1), seed=0)
    model.normalizer = Normalizer.identity()
    with pytest.raises(EmptyInput):
        bench_runtime([], model, out=tmp_path / "bench.csv")
    assert not (tmp_path / "bench.csv").exists()


def test_correlate_small(tmp_path):
    report = correlate(3, seed=2, factors=[1.0, 4.0], workers=1, out=tmp_path / "corr.csv")
    assert report.n == 6 == len(report.pairs)
    assert all(0.0 <= pst <= 1.0 and 0.0 <= fid <= 1.0 for pst, fid in report.pairs)
    assert report.spearman is None or -1.0 <= report.spearman <= 1.0
    assert len(read_csv(tmp_path / "corr.csv")) == 6


def test_correlate_ranks_readout_free_pst(tmp_path):
    report = correlate(3, seed=2, factors=[1.0, 4.0], workers=1, out=tmp_path / "corr.csv")
    rows = read_csv(tmp_path / "corr.csv")
    assert [pst for pst, _ in report.pairs] == pytest.approx([float(r["pst"]) for r in rows])
    assert any(float(r["pst_exact"]) != float(r["pst"]) for r in rows)
