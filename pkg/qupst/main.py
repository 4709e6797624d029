"""
QuPST command line

Seeded, reproducible entry points for the whole pipeline: dataset generation,
training, prediction, evaluation, ablations, runtime benchmark, gradient check,
PST/fidelity correlation and dataset profiling.

Run from project root: python3 -m qupst <subcommand> --help
"""

import argparse
import json
import logging
import platform
import sys
from importlib import metadata
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

from dotenv import load_dotenv
from pydantic import ValidationError as PydanticValidationError

from qupst import __version__
from qupst.config.settings import settings
from qupst.errors import BadArgs, InvalidConfig, IoError, NumericError, QuPSTError
from qupst.models.dataset import GenSpec, Split
from qupst.models.report import RunManifest
from qupst.models.training import FeatureGroup, ModelConfig, TrainConfig
from qupst.pipelines.ablation import default_plan, load_plan, run_plan
from qupst.pipelines.benchmark import bench_runtime, bench_samples
from qupst.pipelines.correlation import correlate
from qupst.pipelines.evaluation import evaluate, predict_pst, train_baseline, train_graph_transformer, write_metrics
from qupst.predictor.checkpoint import load_checkpoint, save_checkpoint
from qupst.predictor.graph_transformer import init_model
from qupst.predictor.trainer import grad_check, random_check_sample
from qupst.services.circuit_ops import load_circuit
from qupst.services.csv_reports import write_csv
from qupst.services.dataset_builder import (
    build_algorithm_dataset,
    build_dataset,
    load_dataset,
    profile_dataset,
    save_dataset,
)
from qupst.services.noise_model import load_profile

logger = logging.getLogger("qupst")

GRAD_CHECK_TOLERANCE = 1e-4


class ArgumentParser(argparse.ArgumentParser):
    """argparse that raises BadArgs instead of exiting with status 2."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise BadArgs(message)


# Argument groups


def _add_train_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="Dataset JSONL")
    p.add_argument("--out", required=True, help="Checkpoint JSON to write")
    p.add_argument("--epochs", type=int, default=settings.epochs)
    p.add_argument("--learning-rate", type=float, default=settings.learning_rate)
    p.add_argument("--weight-decay", type=float, default=settings.weight_decay)
    p.add_argument("--batch-size", type=int, default=settings.batch_size)
    p.add_argument("--seed", type=int, default=settings.default_seed, help="Shuffle seed")
    p.add_argument("--model-seed", type=int, default=settings.default_seed, help="Weight init seed")
    p.add_argument("--history", help="Training curve CSV (default: <out>.history.csv)")


def _add_gen_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=settings.default_seed)
    p.add_argument("--out", required=True, help="Dataset JSONL to write")
    p.add_argument("--shots", type=int, default=settings.shots)
    p.add_argument("--exact", action="store_true", help="Label with exact PST instead of sampled shots")
    p.add_argument("--noise-factors", help="Comma-separated noise factors")
    p.add_argument("--with-fidelity", action="store_true")


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="qupst", description=settings.app_name)
    parser.add_argument("--version", action="version", version=f"qupst {__version__}")
    parser.add_argument("--workers", type=int, default=settings.workers, help="Parallel workers (0 = all cores)")
    parser.add_argument("--log-level", default=settings.log_level)
    parser.add_argument("--quiet", action="store_true", help="Only warnings and errors on stderr")
    parser.add_argument("--manifest", help="Manifest path (default: beside the primary output)")
    sub = parser.add_subparsers(dest="command", parser_class=ArgumentParser)

    p = sub.add_parser("gen-dataset", help="Random-circuit dataset")
    _add_gen_args(p)
    p.add_argument("--spec", help="GenSpec JSON; flags below override it")
    p.add_argument("--n-circuits", type=int)
    p.add_argument("--min-qubits", type=int)
    p.add_argument("--max-qubits", type=int)
    p.add_argument("--min-gates", type=int)
    p.add_argument("--max-gates", type=int)
    p.add_argument("--topology", choices=["line", "ring", "grid"])
    p.add_argument("--backend-seed", type=int)

    p = sub.add_parser("gen-algorithms", help="Built-in algorithm circuits on random backends")
    _add_gen_args(p)
    p.add_argument("--n-profiles", type=int, default=20)

    p = sub.add_parser("train", help="Train the graph transformer")
    _add_train_args(p)
    p.add_argument("--layers", type=int, default=settings.n_layers)
    p.add_argument("--no-global", action="store_true", help="Regress from pooled node features only")
    p.add_argument("--drop", choices=[g.value for g in FeatureGroup], default=FeatureGroup.NONE.value)

    p = sub.add_parser("train-baseline", help="Train the simple NN baseline")
    _add_train_args(p)

    p = sub.add_parser("predict", help="Predict the PST of one circuit on one backend")
    p.add_argument("--model", required=True)
    p.add_argument("--circuit", required=True)
    p.add_argument("--profile", required=True)

    p = sub.add_parser("eval", help="Score a checkpoint on a dataset split")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--split", choices=[s.value for s in Split], default=Split.TEST.value)
    p.add_argument("--out", help="Scatter CSV (target, prediction)")
    p.add_argument("--metrics", help="Metrics CSV")

    p = sub.add_parser("ablate", help="Run an ablation plan")
    p.add_argument("--data", required=True)
    p.add_argument("--spec", help="AblationPlan JSON (default: full sweep)")
    p.add_argument("--out", required=True, help="Ablation CSV")
    p.add_argument("--epochs", type=int, help="Override the plan's epoch count")

    p = sub.add_parser("bench", help="Simulation vs predictor latency")
    p.add_argument("--model", required=True)
    p.add_argument("--data", help="Dataset JSONL (default: random 8-10 qubit circuits)")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--seed", type=int, default=settings.default_seed)
    p.add_argument("--out", help="Runtime CSV")

    p = sub.add_parser("grad-check", help="Backprop vs central finite differences")
    p.add_argument("--instances", type=int, default=10)
    p.add_argument("--seed", type=int, default=settings.default_seed)
    p.add_argument("--step", type=float, default=1e-4)
    p.add_argument("--layers", type=int, default=settings.n_layers)
    p.add_argument("--model", help="Check a trained checkpoint instead of a fresh model")
    p.add_argument("--regressor-only", action="store_true")

    p = sub.add_parser("correlate", help="Spearman correlation of PST and fidelity")
    p.add_argument("--n", type=int, default=200, help="Random circuits (each at every noise factor)")
    p.add_argument("--seed", type=int, default=settings.default_seed)
    p.add_argument("--out", help="Scatter CSV (pst, fidelity)")

    p = sub.add_parser("profile", help="Mean PST by gate count, CNOT count, depth and noise factor")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--bucket-width", type=int, default=5)
    return parser


# Helpers


def _factors(text: Optional[str]) -> list[float]:
    if not text:
        return list(settings.noise_factors)
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as e:
        raise BadArgs(f"--noise-factors must be comma-separated numbers: {text}") from e


def _shots(args: argparse.Namespace) -> Optional[int]:
    return None if args.exact else args.shots


def _train_config(args: argparse.Namespace) -> TrainConfig:
    return TrainConfig(
        epochs=args.epochs,
        learning_rate=args.learning_rate,
        weight_decay=args.weight_decay,
        batch_size=args.batch_size,
        seed=args.seed,
    )


def _history_path(args: argparse.Namespace) -> Path:
    return Path(args.history) if args.history else Path(args.out).with_suffix(".history.csv")


def _pick(flag: Optional[int], fallback: int) -> int:
    return fallback if flag is None else flag


def _gen_spec(args: argparse.Namespace) -> GenSpec:
    base: dict[str, Any] = {}
    if args.spec:
        try:
            base = json.loads(Path(args.spec).read_text(encoding="utf-8"))
        except OSError as e:
            raise IoError(f"cannot read spec {args.spec}: {e}") from e
        except json.JSONDecodeError as e:
            raise InvalidConfig(f"spec {args.spec} is not JSON: {e}") from e
    defaults = GenSpec()
    overrides = {
        "n_circuits": args.n_circuits,
        "topology": args.topology,
        "backend_seed": args.backend_seed,
    }
    base.update({k: v for k, v in overrides.items() if v is not None})
    if args.min_qubits is not None or args.max_qubits is not None:
        lo, hi = base.get("qubit_range", defaults.qubit_range)
        base["qubit_range"] = (_pick(args.min_qubits, lo), _pick(args.max_qubits, hi))
    if args.min_gates is not None or args.max_gates is not None:
        lo, hi = base.get("gate_range", defaults.gate_range)
        base["gate_range"] = (_pick(args.min_gates, lo), _pick(args.max_gates, hi))
    if args.noise_factors:
        base["noise_factors"] = _factors(args.noise_factors)
    if args.exact or "shots" not in base:
        base["shots"] = _shots(args)
    if args.with_fidelity:
        base["with_fidelity"] = True
    return GenSpec.model_validate(base)


def _versions() -> dict[str, str]:
    versions = {"python": platform.python_version(), "qupst": __version__}
    for package in ("numpy", "scipy", "pydantic", "networkx"):
        try:
            versions[package] = metadata.version(package)
        except metadata.PackageNotFoundError:
            versions[package] = "unknown"
    return versions


def write_manifest(args: argparse.Namespace, seeds: dict[str, Optional[int]]) -> Path:
    """Record subcommand, arguments, seeds, versions and settings beside the output."""
    if args.manifest:
        path = Path(args.manifest)
    elif getattr(args, "out", None):
        path = Path(str(args.out) + ".manifest.json")
    else:
        path = settings.output_dir / f"{args.command}.manifest.json"
    manifest = RunManifest(
        subcommand=args.command,
        arguments={k: v for k, v in vars(args).items() if k != "func"},
        seeds=seeds,
        versions=_versions(),
        settings=settings.model_dump(mode="json"),
    )
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(manifest.model_dump_json(indent=2) + "\n", encoding="utf-8")
    except OSError as e:
        raise IoError(f"cannot write manifest {path}: {e}") from e
    logger.debug("Manifest written to %s", path)
    return path


# Subcommands


def cmd_gen_dataset(args: argparse.Namespace) -> dict:
    spec = _gen_spec(args)
    dataset = build_dataset(spec, args.seed, out=args.out, workers=args.workers)
    print(json.dumps({"samples": len(dataset.samples), **dataset.split_counts()}, sort_keys=True))
    return {"master_seed": args.seed, "backend_seed": spec.backend_seed}


def cmd_gen_algorithms(args: argparse.Namespace) -> dict:
    dataset = build_algorithm_dataset(
        args.n_profiles, _factors(args.noise_factors), _shots(args), args.seed,
        with_fidelity=args.with_fidelity, workers=args.workers,
    )
    save_dataset(dataset, args.out)
    print(json.dumps({"samples": len(dataset.samples), **dataset.split_counts()}, sort_keys=True))
    return {"master_seed": args.seed}


def cmd_train(args: argparse.Namespace) -> dict:
    dataset = load_dataset(args.data)
    config = ModelConfig(n_layers=args.layers, use_global_features=not args.no_global)
    model, report = train_graph_transformer(
        dataset, config, _train_config(args), args.model_seed, FeatureGroup(args.drop), _history_path(args)
    )
    save_checkpoint(model, args.out)
    print(f"best_epoch={report.best_epoch} best_val_rmse={report.best_val_rmse:.6f}")
    return {"train_seed": args.seed, "model_seed": args.model_seed, "master_seed": dataset.master_seed}


def cmd_train_baseline(args: argparse.Namespace) -> dict:
    dataset = load_dataset(args.data)
    model, report = train_baseline(dataset, _train_config(args), model_seed=args.model_seed, history_path=_history_path(args))
    save_checkpoint(model, args.out)
    print(f"best_epoch={report.best_epoch} best_val_rmse={report.best_val_rmse:.6f}")
    return {"train_seed": args.seed, "model_seed": args.model_seed, "master_seed": dataset.master_seed}


def cmd_predict(args: argparse.Namespace) -> dict:
    model = load_checkpoint(args.model)
    pst = predict_pst(model, load_circuit(args.circuit), load_profile(args.profile))
    print(f"{pst:.6f}")
    return {}


def cmd_eval(args: argparse.Namespace) -> dict:
    model = load_checkpoint(args.model)
    dataset = load_dataset(args.data)
    report = evaluate(model, dataset, args.split, scatter_path=args.out)
    if args.metrics:
        write_metrics({model.kind: report}, args.metrics)
    r2 = "undefined" if report.r2 is None else f"{report.r2:.6f}"
    rho = "undefined" if report.spearman is None else f"{report.spearman:.6f}"
    print(f"rmse={report.rmse:.6f} r2={r2} spearman={rho} n={report.n}")
    return {"master_seed": dataset.master_seed}


def cmd_ablate(args: argparse.Namespace) -> dict:
    dataset = load_dataset(args.data)
    plan = load_plan(args.spec) if args.spec else default_plan()
    if args.epochs is not None:
        plan.train = plan.train.model_copy(update={"epochs": args.epochs})
    rows = run_plan(dataset, plan, args.out)
    for row in rows:
        print(f"{row.label} test_rmse={row.test_rmse:.6f}")
    return {"master_seed": dataset.master_seed, "model_seed": plan.model_seed, "train_seed": plan.train.seed}


def cmd_bench(args: argparse.Namespace) -> dict:
    model = load_checkpoint(args.model)
    if args.data:
        samples = load_dataset(args.data).samples[: args.n]
    else:
        samples = bench_samples(args.n, args.seed)
    rows = bench_runtime(samples, model, out=args.out)
    for row in rows:
        print(f"{row.path} batch_size={row.batch_size} latency_s={row.latency_s:.3e} speedup={row.speedup:.1f}")
    return {"bench_seed": None if args.data else args.seed}


def cmd_grad_check(args: argparse.Namespace) -> dict:
    if args.model:
        model = load_checkpoint(args.model)
    else:
        model = init_model(ModelConfig(n_layers=args.layers), args.seed)
    worst = 0.0
    for i in range(args.instances):
        err = grad_check(model, random_check_sample(args.seed + i), args.step, args.regressor_only)
        worst = max(worst, err)
    print(f"max_rel_error={worst:.3e} instances={args.instances}")
    if worst >= GRAD_CHECK_TOLERANCE:
        raise NumericError(f"gradient check failed: max relative error {worst:.3e}")
    return {"seed": args.seed}


def cmd_correlate(args: argparse.Namespace) -> dict:
    report = correlate(args.n, args.seed, workers=args.workers, out=args.out)
    rho = "undefined" if report.spearman is None else f"{report.spearman:.6f}"
    print(f"spearman={rho} n={report.n}")
    return {"master_seed": args.seed}


def cmd_profile(args: argparse.Namespace) -> dict:
    dataset = load_dataset(args.data)
    rows = profile_dataset(dataset, args.bucket_width)
    header = ["property", "bucket", "n", "mean_pst"]
    write_csv(args.out, header, ([r[key] for key in header] for r in rows))
    return {"master_seed": dataset.master_seed}


COMMANDS: dict[str, Callable[[argparse.Namespace], dict]] = {
    "gen-dataset": cmd_gen_dataset,
    "gen-algorithms": cmd_gen_algorithms,
    "train": cmd_train,
    "train-baseline": cmd_train_baseline,
    "predict": cmd_predict,
    "eval": cmd_eval,
    "ablate": cmd_ablate,
    "bench": cmd_bench,
    "grad-check": cmd_grad_check,
    "correlate": cmd_correlate,
    "profile": cmd_profile,
}


def configure_logging(level: str, quiet: bool) -> None:
    logging.basicConfig(
        level=logging.WARNING if quiet else level.upper(),
        format=settings.log_format,
        datefmt="%H:%M:%S",
        stream=sys.stderr,
        force=True,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    try:
        args = build_parser().parse_args(argv)
        if not args.command:
            raise BadArgs("a subcommand is required")
        configure_logging(args.log_level, args.quiet)
        seeds = COMMANDS[args.command](args)
        write_manifest(args, seeds)
        return 0
    except QuPSTError as e:
        if settings.debug:
            logger.exception("qupst failed")
        print(e.one_line())
        return e.exit_code
    except PydanticValidationError as e:
        first = e.errors()[0] if e.errors() else {}
        message = " ".join(f"{first.get('loc', '')} {first.get('msg', e)}".split())
        print(f"error=ValidationError code=2 message={message}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
