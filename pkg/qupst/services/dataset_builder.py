"""Random-circuit dataset generation: circuits, inverse concatenation, PST labels."""

import json
import logging
import os
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Iterable, Optional

import numpy as np
from tqdm import tqdm

from qupst.config.settings import settings
from qupst.errors import EmptyCouplingMap, IoError, ValidationError
from qupst.models.circuit import Circuit, Gate, GateKind
from qupst.models.dataset import Dataset, GenSpec, Sample, Split
from qupst.models.noise import NoiseProfile
from qupst.services.algorithm_library import algorithm_circuits
from qupst.services.circuit_ops import build_circuit, circuit_stats, coupling_for, require_basis, simplify
from qupst.services.noise_model import make_profile, scale_profile
from qupst.services.simulator import exact_pst, sample_pst, state_fidelity, zero_probabilities

logger = logging.getLogger(__name__)

_STREAMS = {"circuit": 1, "profile": 2, "shots": 3, "split": 4, "backend": 5}
_KIND_ORDER = ("RZ", "SX", "X", "CNOT")


def derive_seed(master_seed: int, stream: str, *index: int) -> int:
    """Order-independent child seed for (master_seed, stream, index...)."""
    entropy = [int(master_seed) & 0xFFFFFFFF, _STREAMS[stream], *(int(i) for i in index)]
    return int(np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint32)[0])


def resolve_workers(workers: Optional[int] = None) -> int:
    workers = settings.workers if workers is None else workers
    return workers if workers and workers > 0 else (os.cpu_count() or 1)


def generate_random_circuit(spec: GenSpec, seed: int) -> Circuit:
    """Draw a random native circuit and pass it through ``simplify``."""
    rng = np.random.default_rng(seed)
    n_qubits = int(rng.integers(spec.qubit_range[0], spec.qubit_range[1] + 1))
    n_gates = int(rng.integers(spec.gate_range[0], spec.gate_range[1] + 1))
    coupling = coupling_for(spec.topology.value, n_qubits)

    weights = np.array([spec.gate_weights.get(k, 0.0) for k in _KIND_ORDER], dtype=float)
    if weights[3] > 0 and not coupling:
        raise EmptyCouplingMap(f"CNOT weight {weights[3]} but {n_qubits}-qubit {spec.topology.value} has no edges")
    weights /= weights.sum()

    gates: list[Gate] = []
    for kind_index in rng.choice(len(_KIND_ORDER), size=n_gates, p=weights):
        kind = _KIND_ORDER[kind_index]
        if kind == "CNOT":
            a, b = coupling[int(rng.integers(len(coupling)))]
            gates.append(Gate.cnot(a, b) if rng.integers(2) == 0 else Gate.cnot(b, a))
        elif kind == "RZ":
            gates.append(Gate.rz(float(rng.uniform(0.0, 2.0 * np.pi)), int(rng.integers(n_qubits))))
        else:
            gates.append(Gate(kind=GateKind(kind), qubits=(int(rng.integers(n_qubits)),)))

    return simplify(build_circuit(n_qubits, gates, coupling))


def label_sample(
    c: Circuit,
    p: NoiseProfile,
    shots: Optional[int],
    seed: int,
    with_fidelity: bool = False,
    **extra,
) -> Sample:
    """Simulate ``c + inverse(c)`` on ``p`` and record the sampled PST.

    ``with_fidelity`` also records the state fidelity of ``c`` and the
    readout-free all-zero probability.
    """
    p0_clean = fidelity = None
    if with_fidelity:
        p0, p0_clean = zero_probabilities(c, p)
        fidelity = state_fidelity(c, p)
    else:
        p0 = exact_pst(c, p)
    return Sample(
        circuit=c,
        profile=p,
        shots=shots,
        pst=sample_pst(p0, shots, seed),
        pst_exact=p0,
        pst_no_readout=p0_clean,
        fidelity=fidelity,
        noise_factor=p.noise_scale,
        **extra,
    )


def _label_job(job: tuple) -> Sample:
    c, p, shots, seed, with_fidelity, extra = job
    return label_sample(c, p, shots, seed, with_fidelity, **extra)


def label_many(jobs: list[tuple], workers: Optional[int] = None, desc: str = "labeling") -> list[Sample]:
    """Label jobs in parallel; results keep job order."""
    n_workers = min(resolve_workers(workers), max(len(jobs), 1))
    disable = not logger.isEnabledFor(logging.INFO)
    if n_workers <= 1 or len(jobs) < 8:
        return [_label_job(job) for job in tqdm(jobs, desc=desc, disable=disable)]
    chunksize = max(1, len(jobs) // (n_workers * 8))
    with ProcessPoolExecutor(max_workers=n_workers) as pool:
        return list(tqdm(pool.map(_label_job, jobs, chunksize=chunksize), total=len(jobs), desc=desc, disable=disable))


def assign_splits(n: int, seed: int, fractions: tuple[float, float, float] = (0.7, 0.2, 0.1)) -> list[Split]:
    """Seeded shuffle into train/val/test with the given fractions."""
    n_train = int(round(fractions[0] * n))
    n_val = min(int(round(fractions[1] * n)), n - n_train)
    order = np.random.default_rng(seed).permutation(n)
    tags = [Split.TEST] * n
    for rank, index in enumerate(order):
        if rank < n_train:
            tags[index] = Split.TRAIN
        elif rank < n_train + n_val:
            tags[index] = Split.VAL
    return tags


def _base_profile(spec: GenSpec, master_seed: int, circuit_index: int, n_qubits: int) -> NoiseProfile:
    if spec.backend_seed is None:
        return make_profile(n_qubits, derive_seed(master_seed, "profile", circuit_index))
    return make_profile(n_qubits, derive_seed(spec.backend_seed, "backend", n_qubits))


def _with_splits(samples: list[Sample], master_seed: int, fractions: tuple[float, float, float]) -> list[Sample]:
    tags = assign_splits(len(samples), derive_seed(master_seed, "split"), fractions)
    return [s.model_copy(update={"split": tag}) for s, tag in zip(samples, tags)]


def build_dataset(
    spec: GenSpec,
    master_seed: int,
    out: Optional[Path | str] = None,
    workers: Optional[int] = None,
) -> Dataset:
    """Generate ``spec.n_circuits`` circuits, label each at every noise factor, split 70/20/10."""
    logger.info(
        "Building dataset: %d circuits x %d noise factors (seed %d)",
        spec.n_circuits, len(spec.noise_factors), master_seed,
    )
    jobs = []
    for i in range(spec.n_circuits):
        c = generate_random_circuit(spec, derive_seed(master_seed, "circuit", i))
        base = _base_profile(spec, master_seed, i, c.n_qubits)
        for j, factor in enumerate(spec.noise_factors):
            jobs.append((
                c,
                scale_profile(base, factor),
                spec.shots,
                derive_seed(master_seed, "shots", i, j),
                spec.with_fidelity,
                {"circuit_id": i},
            ))

    samples = _with_splits(label_many(jobs, workers), master_seed, spec.split_fractions)
    dataset = Dataset(samples=samples, spec=spec, master_seed=master_seed)
    logger.info("Dataset built: %s", dataset.split_counts())
    if out is not None:
        save_dataset(dataset, out)
    return dataset


def build_algorithm_dataset(
    n_profiles: int,
    factors: Iterable[float],
    shots: Optional[int],
    master_seed: int,
    with_fidelity: bool = False,
    workers: Optional[int] = None,
) -> Dataset:
    """Label every built-in algorithm circuit on ``n_profiles`` random backends per noise factor."""
    factors = list(factors)
    jobs = []
    for a, named in enumerate(algorithm_circuits()):
        for k in range(n_profiles):
            base = make_profile(named.circuit.n_qubits, derive_seed(master_seed, "profile", a, k))
            for j, factor in enumerate(factors):
                jobs.append((
                    named.circuit,
                    scale_profile(base, factor),
                    shots,
                    derive_seed(master_seed, "shots", a, k, j),
                    with_fidelity,
                    {"circuit_id": a, "algorithm": named.name},
                ))
    samples = _with_splits(label_many(jobs, workers, desc="algorithms"), master_seed, (0.7, 0.2, 0.1))
    return Dataset(samples=samples, master_seed=master_seed)


def resample_shots(dataset: Dataset, shots: Optional[int], master_seed: int) -> Dataset:
    """Relabel PST at a different shot count from the stored exact probabilities."""
    samples = []
    for i, s in enumerate(dataset.samples):
        if s.pst_exact is None:
            raise ValidationError("resampling shots needs samples with pst_exact")
        pst = sample_pst(s.pst_exact, shots, derive_seed(master_seed, "shots", i, shots or 0))
        samples.append(s.model_copy(update={"pst": pst, "shots": shots}))
    return dataset.model_copy(update={"samples": samples})


# Persistence


def save_dataset(dataset: Dataset, path: Path | str) -> Path:
    """Write one sample per JSONL line plus a ``.meta.json`` sidecar."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for sample in dataset.samples:
                f.write(sample.model_dump_json(exclude_none=True))
                f.write("\n")
        meta = {
            "master_seed": dataset.master_seed,
            "spec": dataset.spec.model_dump(mode="json") if dataset.spec else None,
            "n_samples": len(dataset.samples),
            "splits": dataset.split_counts(),
        }
        meta_path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as e:
        raise IoError(f"cannot write dataset {path}: {e}") from e
    logger.info("Saved %d samples to %s", len(dataset.samples), path)
    return path


def meta_path(path: Path) -> Path:
    return path.with_name(path.stem + ".meta.json")


def load_dataset(path: Path | str) -> Dataset:
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise IoError(f"cannot read dataset {path}: {e}") from e
    samples = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        sample = Sample.model_validate_json(line)
        c = sample.circuit
        require_basis(c, f"{path} line {lineno}")
        build_circuit(c.n_qubits, c.gates, c.coupling)
        samples.append(sample)

    spec, master_seed = None, 0
    if meta_path(path).exists():
        meta = json.loads(meta_path(path).read_text(encoding="utf-8"))
        master_seed = meta.get("master_seed", 0)
        spec = GenSpec.model_validate(meta["spec"]) if meta.get("spec") else None
    return Dataset(samples=samples, spec=spec, master_seed=master_seed)


# Profiling


def _bucket(value: int, width: int) -> str:
    lo = (value // width) * width
    return f"{lo}-{lo + width - 1}"


def profile_dataset(dataset: Dataset, bucket_width: int = 5) -> list[dict]:
    """Mean PST grouped by gate count, CNOT count, depth and noise factor."""
    groups: dict[tuple[str, str], list[float]] = defaultdict(list)
    for s in dataset.samples:
        stats = circuit_stats(s.circuit)
        n_gates = sum(stats.counts.values())
        groups[("noise_factor", f"{s.noise_factor:g}")].append(s.pst)
        groups[("gates", _bucket(n_gates, bucket_width))].append(s.pst)
        groups[("cnots", _bucket(stats.count(GateKind.CNOT), bucket_width))].append(s.pst)
        groups[("depth", _bucket(stats.depth, bucket_width))].append(s.pst)

    def order(key: tuple[str, str]):
        prop, bucket = key
        return prop, float(bucket.split("-")[0]) if prop != "noise_factor" else float(bucket)

    return [
        {"property": prop, "bucket": bucket, "n": len(values), "mean_pst": float(np.mean(values))}
        for (prop, bucket), values in sorted(groups.items(), key=lambda kv: order(kv[0]))
    ]


def mean_pst_by(dataset: Dataset, prop: str, bucket_width: int = 5, min_count: int = 1) -> list[tuple[str, float]]:
    """(bucket, mean PST) for one profiled property, in bucket order."""
    return [
        (row["bucket"], row["mean_pst"])
        for row in profile_dataset(dataset, bucket_width)
        if row["property"] == prop and row["n"] >= min_count
    ]
