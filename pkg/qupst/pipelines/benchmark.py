"""Per-circuit latency of noisy simulation against the learned predictor."""

import logging
import time
from pathlib import Path
from typing import Optional, Sequence

from tqdm import tqdm

from qupst.errors import EmptyInput
from qupst.models.dataset import GenSpec, Sample
from qupst.models.report import RuntimeRow
from qupst.models.training import FeatureGroup
from qupst.predictor.checkpoint import Predictor
from qupst.services.csv_reports import write_models
from qupst.services.dataset_builder import derive_seed, generate_random_circuit
from qupst.services.featurizer import featurize
from qupst.services.noise_model import make_profile
from qupst.services.simulator import exact_pst

logger = logging.getLogger(__name__)

MIN_CIRCUITS = 100
BENCH_QUBITS = (8, 10)
BENCH_GATES = (20, 60)


def bench_samples(n: int, seed: int, qubit_range: tuple[int, int] = BENCH_QUBITS) -> list[Sample]:
    """Unlabeled random (circuit, backend) pairs for timing."""
    spec = GenSpec(qubit_range=qubit_range, gate_range=BENCH_GATES, n_circuits=n, shots=None)
    samples = []
    for i in range(n):
        c = generate_random_circuit(spec, derive_seed(seed, "circuit", i))
        p = make_profile(c.n_qubits, derive_seed(seed, "profile", i))
        samples.append(Sample(circuit=c, profile=p, pst=0.0, circuit_id=i))
    return samples


def _time_simulation(samples: Sequence[Sample], disable: bool) -> float:
    started = time.perf_counter()
    for s in tqdm(samples, desc="simulate", disable=disable):
        exact_pst(s.circuit, s.profile)
    return (time.perf_counter() - started) / len(samples)


def _time_predictor(model: Predictor, samples: Sequence[Sample], batch_size: int) -> float:
    drop = getattr(model, "feature_drop", FeatureGroup.NONE)
    started = time.perf_counter()
    for lo in range(0, len(samples), batch_size):
        chunk = [featurize(s, drop) for s in samples[lo : lo + batch_size]]
        model.predict(model.collate(model.prepare(chunk)))
    return (time.perf_counter() - started) / len(samples)


def bench_runtime(
    samples: Sequence[Sample],
    model: Predictor,
    batch_sizes: Sequence[int] = (1, 10),
    out: Optional[Path | str] = None,
) -> list[RuntimeRow]:
    """Mean seconds per circuit for simulation + PST and for featurize + forward."""
    if not samples:
        raise EmptyInput("no circuits to benchmark")
    if len(samples) < MIN_CIRCUITS:
        logger.warning("benchmarking %d circuits; %d or more give stable timings", len(samples), MIN_CIRCUITS)
    disable = not logger.isEnabledFor(logging.INFO)
    sim = _time_simulation(samples, disable)
    rows = [RuntimeRow(path="simulation", batch_size=1, n_circuits=len(samples), latency_s=sim, speedup=1.0)]
    for bsz in batch_sizes:
        latency = _time_predictor(model, samples, bsz)
        rows.append(
            RuntimeRow(path=model.kind, batch_size=bsz, n_circuits=len(samples), latency_s=latency, speedup=sim / latency)
        )
    for row in rows:
        logger.info("%s bsz=%d: %.3e s/circuit (x%.1f)", row.path, row.batch_size, row.latency_s, row.speedup)
    if out is not None:
        write_models(out, rows, ("path", "batch_size", "n_circuits", "latency_s", "speedup"))
    return rows
