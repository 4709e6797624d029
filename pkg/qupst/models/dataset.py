"""Dataset schemas: generation spec, labeled samples and datasets."""

from enum import Enum
from typing import Optional

from pydantic import BaseModel, Field, model_validator

from qupst.config.settings import settings
from qupst.models.circuit import Circuit
from qupst.models.noise import NoiseProfile

DEFAULT_GATE_WEIGHTS = {"RZ": 0.3, "SX": 0.25, "X": 0.15, "CNOT": 0.3}


class Topology(str, Enum):
    LINE = "line"
    RING = "ring"
    GRID = "grid"


class Split(str, Enum):
    TRAIN = "train"
    VAL = "val"
    TEST = "test"


class GenSpec(BaseModel):
    """Parameters of the random-circuit dataset generator."""

    qubit_range: tuple[int, int] = Field(
        (settings.min_qubits, settings.max_qubits_generated), description="Inclusive qubit range"
    )
    gate_range: tuple[int, int] = Field(
        (settings.min_gates, settings.max_gates), description="Inclusive gate-count range"
    )
    topology: Topology = Field(Topology(settings.topology))
    n_circuits: int = Field(settings.n_circuits, ge=1)
    gate_weights: dict[str, float] = Field(default_factory=lambda: dict(DEFAULT_GATE_WEIGHTS))
    noise_factors: list[float] = Field(default_factory=lambda: list(settings.noise_factors))
    shots: Optional[int] = Field(settings.shots, description="Shots per label; null = exact PST")
    backend_seed: Optional[int] = Field(
        None, description="Fixed backend per qubit count; null draws a backend per circuit"
    )
    with_fidelity: bool = False
    split_fractions: tuple[float, float, float] = (0.7, 0.2, 0.1)

    @model_validator(mode="after")
    def _check_ranges(self) -> "GenSpec":
        lo, hi = self.qubit_range
        if not 1 <= lo <= hi <= settings.max_qubits:
            raise ValueError(f"qubit_range {self.qubit_range} is empty or out of [1, {settings.max_qubits}]")
        glo, ghi = self.gate_range
        if not 1 <= glo <= ghi:
            raise ValueError(f"gate_range {self.gate_range} must be nonempty with minimum >= 1")
        if not self.noise_factors or any(f <= 0 for f in self.noise_factors):
            raise ValueError("noise_factors must be a nonempty list of positive factors")
        unknown = set(self.gate_weights) - {"RZ", "SX", "X", "CNOT"}
        if unknown:
            raise ValueError(f"unknown gate kinds in gate_weights: {sorted(unknown)}")
        if any(w < 0 for w in self.gate_weights.values()) or sum(self.gate_weights.values()) <= 0:
            raise ValueError("gate_weights must be non-negative with positive sum")
        if self.shots is not None and self.shots < 1:
            raise ValueError("shots must be positive (or null for exact labels)")
        if abs(sum(self.split_fractions) - 1.0) > 1e-9:
            raise ValueError("split_fractions must sum to 1")
        return self


class Sample(BaseModel):
    """A labeled (circuit, backend) record. The circuit is stored without its inverse."""

    circuit: Circuit
    profile: NoiseProfile
    shots: Optional[int] = Field(None, description="Shots used for pst; null = exact")
    pst: float = Field(..., ge=0.0, le=1.0)
    pst_exact: Optional[float] = Field(None, ge=0.0, le=1.0, description="All-zero probability")
    pst_no_readout: Optional[float] = Field(
        None, ge=0.0, le=1.0, description="All-zero probability before readout confusion"
    )
    fidelity: Optional[float] = Field(None, ge=0.0, le=1.0)
    noise_factor: float = 1.0
    circuit_id: int = 0
    algorithm: Optional[str] = None
    split: Optional[Split] = None


class Dataset(BaseModel):
    """Labeled samples plus their generation provenance."""

    samples: list[Sample] = Field(default_factory=list)
    spec: Optional[GenSpec] = None
    master_seed: int = 0

    def by_split(self, split: Split | str) -> list[Sample]:
        tag = Split(split)
        return [s for s in self.samples if s.split == tag]

    def split_counts(self) -> dict[str, int]:
        return {tag.value: len(self.by_split(tag)) for tag in Split}
