"""Services module - circuits, noise, simulation, datasets, features and metrics."""

from qupst.services.algorithm_library import NamedCircuit, algorithm_circuits
from qupst.services.circuit_ops import (
    build_circuit,
    circuit_stats,
    concat_with_inverse,
    inverse_circuit,
    load_circuit,
    simplify,
    to_dag,
)
from qupst.services.dataset_builder import (
    build_algorithm_dataset,
    build_dataset,
    load_dataset,
    profile_dataset,
    resample_shots,
    save_dataset,
)
from qupst.services.featurizer import (
    FeaturizedSample,
    Normalizer,
    featurize,
    fit_normalizer,
    global_features,
    node_features,
    simple_nn_features,
)
from qupst.services.metrics import compute_metrics
from qupst.services.noise_model import make_profile, noiseless_profile, scale_profile, validate_profile
from qupst.services.simulator import (
    DensityMatrix,
    all_zero_probability,
    exact_pst,
    sample_pst,
    simulate_density,
    state_fidelity,
)

__all__ = [
    # Circuits
    "NamedCircuit",
    "algorithm_circuits",
    "build_circuit",
    "circuit_stats",
    "concat_with_inverse",
    "inverse_circuit",
    "load_circuit",
    "simplify",
    "to_dag",
    # Noise and simulation
    "DensityMatrix",
    "all_zero_probability",
    "exact_pst",
    "make_profile",
    "noiseless_profile",
    "sample_pst",
    "scale_profile",
    "simulate_density",
    "state_fidelity",
    "validate_profile",
    # Datasets
    "build_algorithm_dataset",
    "build_dataset",
    "load_dataset",
    "profile_dataset",
    "resample_shots",
    "save_dataset",
    # Features and metrics
    "FeaturizedSample",
    "Normalizer",
    "compute_metrics",
    "featurize",
    "fit_normalizer",
    "global_features",
    "node_features",
    "simple_nn_features",
]
