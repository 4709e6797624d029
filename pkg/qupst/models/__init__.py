"""Models module - Pydantic schemas for circuits, noise, datasets and reports."""

from qupst.models.circuit import (
    BASIS_GATES,
    Circuit,
    CircuitGraph,
    Gate,
    GateKind,
    GlobalStats,
    GraphNode,
    NodeKind,
)
from qupst.models.dataset import Dataset, GenSpec, Sample, Split, Topology
from qupst.models.noise import NoiseProfile
from qupst.models.report import (
    AblationRow,
    CorrelationReport,
    EpochRecord,
    MetricsReport,
    RunManifest,
    RuntimeRow,
    TrainReport,
)
from qupst.models.training import (
    AblationPlan,
    AblationSpec,
    BaselineConfig,
    FeatureGroup,
    ModelConfig,
    TrainConfig,
)

__all__ = [
    # Circuits
    "BASIS_GATES",
    "Circuit",
    "CircuitGraph",
    "Gate",
    "GateKind",
    "GlobalStats",
    "GraphNode",
    "NodeKind",
    # Noise
    "NoiseProfile",
    # Datasets
    "Dataset",
    "GenSpec",
    "Sample",
    "Split",
    "Topology",
    # Configs
    "AblationPlan",
    "AblationSpec",
    "BaselineConfig",
    "FeatureGroup",
    "ModelConfig",
    "TrainConfig",
    # Reports
    "AblationRow",
    "CorrelationReport",
    "EpochRecord",
    "MetricsReport",
    "RunManifest",
    "RuntimeRow",
    "TrainReport",
]
