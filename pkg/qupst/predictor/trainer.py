"""MSE training loop, best-validation selection and finite-difference gradient checks."""

import copy
import logging
import time
from functools import lru_cache
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from tqdm import tqdm

from qupst.errors import BadArgs, EmptyBatch, EmptySplit, ShapeMismatch
from qupst.models.circuit import Gate
from qupst.models.dataset import Sample
from qupst.models.report import EpochRecord, TrainReport
from qupst.models.training import TrainConfig
from qupst.predictor.checkpoint import Predictor
from qupst.predictor.layers import MLPCache, Params
from qupst.predictor.optim import AdamState, adam_step
from qupst.services.circuit_ops import build_circuit
from qupst.services.csv_reports import write_models
from qupst.services.featurizer import FeaturizedSample, Normalizer, featurize, fit_normalizer
from qupst.services.noise_model import make_profile

logger = logging.getLogger(__name__)


def mse_loss(preds: np.ndarray, targets: np.ndarray) -> float:
    preds = np.asarray(preds, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if preds.size == 0:
        raise EmptyBatch("mse_loss of an empty batch")
    if preds.shape != targets.shape:
        raise ShapeMismatch(f"predictions {preds.shape} vs targets {targets.shape}")
    return float(np.mean((preds - targets) ** 2))


def backward(model: Predictor, batch) -> tuple[float, Params]:
    """Loss and gradients of the batch-mean squared error."""
    if batch.n_graphs == 0:
        raise EmptyBatch("cannot differentiate an empty batch")
    preds, cache = model.forward(batch)
    loss = mse_loss(preds, batch.target)
    grad_pred = 2.0 * (preds - batch.target) / len(preds)
    return loss, model.backward(batch, cache, grad_pred)


def rmse(model: Predictor, batch) -> float:
    return float(np.sqrt(mse_loss(model.predict(batch), batch.target)))


def with_params(model: Predictor, params: Params) -> Predictor:
    clone = copy.copy(model)
    clone.params = {name: value.copy() for name, value in params.items()}
    return clone


def write_history(report: TrainReport, path: Path | str) -> Path:
    return write_models(path, report.history, ("epoch", "train_mse", "val_rmse"))


def train(
    model: Predictor,
    train_set: Sequence[FeaturizedSample],
    val_set: Sequence[FeaturizedSample],
    config: Optional[TrainConfig] = None,
    history_path: Optional[Path | str] = None,
) -> tuple[Predictor, TrainReport]:
    """Adam on the batch-mean MSE; returns the epoch with the lowest validation RMSE.

    The normalizer is fitted on ``train_set`` unless the model already carries one.
    ``model`` itself is updated in place to the final-epoch weights.
    """
    config = config or TrainConfig()
    if not train_set:
        raise EmptySplit("train split is empty")
    if not val_set:
        raise EmptySplit("validation split is empty")
    if model.normalizer is None:
        model.normalizer = fit_normalizer(list(train_set))

    train_items = model.prepare(train_set)
    val_batch = model.collate(model.prepare(val_set))
    n_train = len(train_items)
    batch_size = min(config.batch_size, n_train)
    if batch_size < config.batch_size:
        logger.warning("batch_size %d capped at train size %d", config.batch_size, n_train)

    rng = np.random.default_rng(config.seed)
    state = AdamState()
    report = TrainReport()
    best_params = model.params
    step = 0
    started = time.perf_counter()
    disable = not logger.isEnabledFor(logging.INFO)

    for epoch in tqdm(range(config.epochs), desc=f"train {model.kind}", disable=disable):
        order = rng.permutation(n_train)
        total = 0.0
        for lo in range(0, n_train, batch_size):
            batch = model.collate([train_items[i] for i in order[lo : lo + batch_size]])
            loss, grads = backward(model, batch)
            step += 1
            adam_step(model.params, grads, state, config, step)
            total += loss * batch.n_graphs
        train_mse = total / n_train
        val_rmse = rmse(model, val_batch)
        report.history.append(EpochRecord(epoch=epoch, train_mse=train_mse, val_rmse=val_rmse))

        if val_rmse < report.best_val_rmse:
            report.best_val_rmse = val_rmse
            report.best_epoch = epoch
            best_params = {name: value.copy() for name, value in model.params.items()}
        if (epoch + 1) % config.log_every == 0 or epoch == config.epochs - 1:
            logger.info("epoch %d train_mse=%.6f val_rmse=%.5f best=%.5f@%d",
                        epoch, train_mse, val_rmse, report.best_val_rmse, report.best_epoch)

    report.final_val_rmse = report.history[-1].val_rmse
    report.elapsed_s = time.perf_counter() - started
    if history_path is not None:
        write_history(report, history_path)
    logger.info("Best validation RMSE %.5f at epoch %d (%.1fs)", report.best_val_rmse, report.best_epoch, report.elapsed_s)
    return with_params(model, best_params), report


def random_check_sample(seed: int) -> FeaturizedSample:
    """A 5-node graph: two inputs, one random gate, two measurements."""
    rng = np.random.default_rng(seed)
    choice = int(rng.integers(4))
    if choice == 0:
        gate = Gate.cnot(*(int(q) for q in rng.permutation(2)))
    elif choice == 1:
        gate = Gate.rz(float(rng.uniform(0.0, 2.0 * np.pi)), int(rng.integers(2)))
    elif choice == 2:
        gate = Gate.sx(int(rng.integers(2)))
    else:
        gate = Gate.x(int(rng.integers(2)))
    circuit = build_circuit(2, [gate], [(0, 1)])
    sample = Sample(circuit=circuit, profile=make_profile(2, seed), pst=float(rng.uniform(0.5, 1.0)))
    return featurize(sample)


CHECK_REFERENCE_SEED = 1_000_003


@lru_cache(maxsize=1)
def check_normalizer() -> Normalizer:
    """Statistics of a fixed batch of random 5-node samples."""
    return fit_normalizer([random_check_sample(CHECK_REFERENCE_SEED + i) for i in range(32)])


def _group_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    scale = np.linalg.norm(analytic) + np.linalg.norm(numeric)
    if scale < 1e-10:
        return 0.0
    return float(np.linalg.norm(analytic - numeric) / scale)


def _relu_pattern(cache) -> np.ndarray:
    """On/off state of every ReLU unit recorded in a forward cache."""
    mlps = [cache] if isinstance(cache, MLPCache) else [cache.global_mlp, cache.regressor]
    masks = [(z > 0.0).ravel() for mlp in mlps if mlp is not None for z in mlp.pre[:-1]]
    return np.concatenate(masks) if masks else np.zeros(0, dtype=bool)


def grad_check(
    model: Predictor, sample: FeaturizedSample, step: float = 1e-4, regressor_only: bool = False
) -> float:
    """Worst per-parameter-group relative error of backward() against central differences.

    Features are normalized with the model's normalizer, or with
    ``check_normalizer()`` when it has none. ``regressor_only`` restricts the
    comparison to the output MLP. Coordinates whose +-step perturbation switches
    any ReLU unit on or off are left out of the comparison.
    """
    if not step > 0:
        raise BadArgs(f"finite-difference step must be positive, got {step}")
    probe = with_params(model, {k: v.astype(np.float64) for k, v in model.params.items()})
    if probe.normalizer is None:
        probe.normalizer = check_normalizer()
    batch = probe.collate(probe.prepare([sample]))
    _, grads = backward(probe, batch)
    base_pattern = _relu_pattern(probe.forward(batch)[1])

    def perturbed_loss() -> tuple[float, bool]:
        preds, cache = probe.forward(batch)
        return mse_loss(preds, batch.target), np.array_equal(_relu_pattern(cache), base_pattern)

    worst = 0.0
    worst_name = ""
    for name, value in probe.params.items():
        if regressor_only and not name.startswith(("regressor.", "mlp.")):
            continue
        numeric = np.zeros_like(value)
        smooth = np.ones(value.size, dtype=bool)
        flat = value.reshape(-1)
        out = numeric.reshape(-1)
        for i in range(flat.size):
            saved = flat[i]
            flat[i] = saved + step
            up, up_smooth = perturbed_loss()
            flat[i] = saved - step
            down, down_smooth = perturbed_loss()
            flat[i] = saved
            out[i] = (up - down) / (2.0 * step)
            smooth[i] = up_smooth and down_smooth
        skipped = int(smooth.size - smooth.sum())
        err = _group_error(grads[name].reshape(-1)[smooth], out[smooth])
        logger.debug("grad check %s rel_err=%.3e kinks_skipped=%d", name, err, skipped)
        if err > worst:
            worst, worst_name = err, name
    logger.info("grad check worst relative error %.3e (%s)", worst, worst_name or "-")
    return worst
