"""Circuit schemas: gates, circuits, DAG views and structural statistics."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from pydantic import BaseModel, Field


class GateKind(str, Enum):
    """Gate kinds. SXDG, BARRIER and MEASURE never appear in dataset circuits."""

    RZ = "RZ"
    SX = "SX"
    X = "X"
    CNOT = "CNOT"
    SXDG = "SXDG"
    BARRIER = "BARRIER"
    MEASURE = "MEASURE"


BASIS_GATES = (GateKind.RZ, GateKind.SX, GateKind.X, GateKind.CNOT)


class Gate(BaseModel):
    """A single circuit operation."""

    kind: GateKind
    qubits: tuple[int, ...] = Field(
        default=(), description="Acted qubits; [control, target] for CNOT, empty for BARRIER"
    )
    param: Optional[float] = Field(None, description="Rotation angle in radians (RZ only)")

    class Config:
        frozen = True

    @classmethod
    def rz(cls, theta: float, qubit: int) -> "Gate":
        return cls(kind=GateKind.RZ, qubits=(qubit,), param=float(theta))

    @classmethod
    def sx(cls, qubit: int) -> "Gate":
        return cls(kind=GateKind.SX, qubits=(qubit,))

    @classmethod
    def sxdg(cls, qubit: int) -> "Gate":
        return cls(kind=GateKind.SXDG, qubits=(qubit,))

    @classmethod
    def x(cls, qubit: int) -> "Gate":
        return cls(kind=GateKind.X, qubits=(qubit,))

    @classmethod
    def cnot(cls, control: int, target: int) -> "Gate":
        return cls(kind=GateKind.CNOT, qubits=(control, target))

    @classmethod
    def barrier(cls) -> "Gate":
        return cls(kind=GateKind.BARRIER)

    @classmethod
    def measure(cls, qubit: int) -> "Gate":
        return cls(kind=GateKind.MEASURE, qubits=(qubit,))

    @property
    def is_barrier(self) -> bool:
        return self.kind == GateKind.BARRIER

    @property
    def is_two_qubit(self) -> bool:
        return self.kind == GateKind.CNOT

    def __str__(self) -> str:
        args = ",".join(str(q) for q in self.qubits)
        if self.param is not None:
            return f"{self.kind.value}({self.param:.6g};{args})"
        return f"{self.kind.value}({args})"


class Circuit(BaseModel):
    """An ordered gate list on ``n_qubits`` qubits with a coupling map.

    Instances are only guaranteed valid when created through
    ``services.circuit_ops.build_circuit``.
    """

    n_qubits: int = Field(..., ge=1, description="Number of qubits")
    coupling: tuple[tuple[int, int], ...] = Field(
        default=(), description="Undirected coupled pairs, stored as (low, high)"
    )
    gates: tuple[Gate, ...] = Field(default=(), description="Ordered operations")

    class Config:
        frozen = True
        json_schema_extra = {
            "example": {
                "n_qubits": 2,
                "coupling": [[0, 1]],
                "gates": [
                    {"kind": "RZ", "qubits": [0], "param": 0.3},
                    {"kind": "SX", "qubits": [1]},
                    {"kind": "CNOT", "qubits": [0, 1]},
                ],
            }
        }

    def coupling_set(self) -> set[frozenset[int]]:
        return {frozenset(pair) for pair in self.coupling}

    def operations(self) -> list[Gate]:
        """Gates excluding barriers."""
        return [g for g in self.gates if not g.is_barrier]

    def to_json(self) -> str:
        return self.model_dump_json(exclude_none=True)


class NodeKind(str, Enum):
    INPUT = "INPUT"
    GATE = "GATE"
    MEASURE = "MEASURE"


@dataclass(frozen=True)
class GraphNode:
    """A DAG node: a wire start, a gate, or a wire end."""

    kind: NodeKind
    qubits: tuple[int, ...]
    gate: Optional[Gate] = None


@dataclass(frozen=True)
class CircuitGraph:
    """DAG view of a circuit. ``edges`` holds one (src, dst) pair per wire segment."""

    n_qubits: int
    nodes: tuple[GraphNode, ...]
    edges: tuple[tuple[int, int], ...]
    topo_index: tuple[int, ...]

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def in_degree(self, node: int) -> int:
        return sum(1 for _, dst in self.edges if dst == node)

    def out_degree(self, node: int) -> int:
        return sum(1 for src, _ in self.edges if src == node)


@dataclass(frozen=True)
class GlobalStats:
    """Circuit-level statistics feeding the global feature vector."""

    depth: int
    width: int
    counts: dict[str, int] = field(default_factory=dict)

    def count(self, kind: GateKind) -> int:
        return self.counts.get(kind.value, 0)
