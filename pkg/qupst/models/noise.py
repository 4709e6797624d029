"""Noise profile schema."""

from typing import Optional

from pydantic import BaseModel, Field

from qupst.models.circuit import Gate, GateKind

DEFAULT_DURATIONS_NS = {"RZ": 0.0, "SX": 35.0, "X": 35.0, "CNOT": 300.0, "MEASURE": 700.0}


class NoiseProfile(BaseModel):
    """Calibration-style description of a noisy backend.

    Per-qubit arrays are indexed by qubit; CNOT errors are listed against
    ``cnot_pairs`` (undirected, stored low-high). T1/T2 are microseconds,
    durations nanoseconds.
    """

    profile_id: str = Field(..., description="Profile identifier")
    n_qubits: int = Field(..., ge=1)
    t1: list[float] = Field(..., description="Per-qubit T1 (us)")
    t2: list[float] = Field(..., description="Per-qubit T2 (us)")
    sx_error: list[float] = Field(..., description="Per-qubit SX error probability")
    x_error: list[float] = Field(..., description="Per-qubit X error probability")
    cnot_pairs: list[tuple[int, int]] = Field(default_factory=list)
    cnot_error: list[float] = Field(default_factory=list)
    gate_duration: dict[str, float] = Field(default_factory=lambda: dict(DEFAULT_DURATIONS_NS))
    readout_error10: list[float] = Field(..., description="Per-qubit P(read 1 | state 0)")
    readout_error01: list[float] = Field(..., description="Per-qubit P(read 0 | state 1)")
    noise_scale: float = Field(1.0, description="Factor applied by scale_profile")

    class Config:
        frozen = True

    def pair_error(self, a: int, b: int) -> float:
        key = (min(a, b), max(a, b))
        for pair, err in zip(self.cnot_pairs, self.cnot_error):
            if tuple(pair) == key:
                return err
        return 0.0

    def gate_error(self, gate: Gate) -> float:
        """Depolarizing probability attached to ``gate`` (0 for virtual RZ)."""
        if gate.kind == GateKind.SX or gate.kind == GateKind.SXDG:
            return self.sx_error[gate.qubits[0]]
        if gate.kind == GateKind.X:
            return self.x_error[gate.qubits[0]]
        if gate.kind == GateKind.CNOT:
            return self.pair_error(*gate.qubits)
        return 0.0

    def duration_ns(self, gate: Gate) -> float:
        kind = GateKind.SX.value if gate.kind == GateKind.SXDG else gate.kind.value
        return self.gate_duration.get(kind, 0.0)

    def find_invalid(self) -> Optional[str]:
        """Return a description of the first violated invariant, or None."""
        n = self.n_qubits
        arrays = {
            "t1": self.t1,
            "t2": self.t2,
            "sx_error": self.sx_error,
            "x_error": self.x_error,
            "readout_error10": self.readout_error10,
            "readout_error01": self.readout_error01,
        }
        for name, values in arrays.items():
            if len(values) != n:
                return f"{name} has {len(values)} entries for {n} qubits"
        if len(self.cnot_pairs) != len(self.cnot_error):
            return "cnot_pairs and cnot_error lengths differ"
        for q in range(n):
            if not self.t1[q] > 0 or not self.t2[q] > 0:
                return f"qubit {q}: T1/T2 must be positive"
            if self.t2[q] > 2.0 * self.t1[q]:
                return f"qubit {q}: T2={self.t2[q]} exceeds 2*T1={2.0 * self.t1[q]}"
        probabilities = [
            *self.sx_error,
            *self.x_error,
            *self.cnot_error,
            *self.readout_error10,
            *self.readout_error01,
        ]
        if any(not 0.0 <= p <= 1.0 for p in probabilities):
            return "error probabilities must lie in [0, 1]"
        if any(d < 0 for d in self.gate_duration.values()):
            return "gate durations must be non-negative"
        if self.gate_duration.get("RZ", 0.0) != 0.0:
            return "RZ is virtual and must have zero duration"
        return None
