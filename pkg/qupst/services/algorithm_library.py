"""Built-in algorithm circuits compiled to the {RZ, SX, X, CNOT} basis.

Single-qubit decompositions hold up to a global phase.
"""

import math
from dataclasses import dataclass

from qupst.models.circuit import Circuit, Gate
from qupst.services.circuit_ops import build_circuit, coupling_for, simplify

PI = math.pi

QAOA_GAMMA = 0.8
QAOA_BETA = 0.4
TELEPORT_STATE = (0.7, 1.1)  # (RY, RZ) angles of the teleported state
VQE_ANGLES = (0.3, -0.7, 1.2, 0.5, -1.4, 0.9, 0.2, -0.4, 1.0, -0.8, 0.6, -1.1, 0.45, 1.3, -0.25, 0.75)


@dataclass(frozen=True)
class NamedCircuit:
    name: str
    circuit: Circuit


def h(q: int) -> list[Gate]:
    return [Gate.rz(PI / 2, q), Gate.sx(q), Gate.rz(PI / 2, q)]


def rx(theta: float, q: int) -> list[Gate]:
    return [*h(q), Gate.rz(theta, q), *h(q)]


def ry(theta: float, q: int) -> list[Gate]:
    return [Gate.rz(-PI / 2, q), *rx(theta, q), Gate.rz(PI / 2, q)]


def cz(a: int, b: int) -> list[Gate]:
    return [*h(b), Gate.cnot(a, b), *h(b)]


def cphase(theta: float, a: int, b: int) -> list[Gate]:
    return [
        Gate.rz(theta / 2, a),
        Gate.cnot(a, b),
        Gate.rz(-theta / 2, b),
        Gate.cnot(a, b),
        Gate.rz(theta / 2, b),
    ]


def zz(gamma: float, a: int, b: int) -> list[Gate]:
    return [Gate.cnot(a, b), Gate.rz(2 * gamma, b), Gate.cnot(a, b)]


def swap(a: int, b: int) -> list[Gate]:
    return [Gate.cnot(a, b), Gate.cnot(b, a), Gate.cnot(a, b)]


def ghz(n: int = 3) -> Circuit:
    gates = [*h(0)] + [Gate.cnot(q, q + 1) for q in range(n - 1)]
    return build_circuit(n, gates, coupling_for("line", n))


def qft(n: int = 3) -> Circuit:
    gates: list[Gate] = []
    for target in range(n - 1, -1, -1):
        gates += h(target)
        for control in range(target - 1, -1, -1):
            gates += cphase(PI / 2 ** (target - control), control, target)
    for q in range(n // 2):
        gates += swap(q, n - 1 - q)
    return build_circuit(n, gates, coupling_for("ring", n))


def grover2() -> Circuit:
    """Two-qubit Grover search marking |11>; one iteration finds it with certainty."""
    gates = [*h(0), *h(1)]
    gates += cz(0, 1)
    gates += [*h(0), *h(1), Gate.x(0), Gate.x(1)]
    gates += cz(0, 1)
    gates += [Gate.x(0), Gate.x(1), *h(0), *h(1)]
    return build_circuit(2, gates, coupling_for("line", 2))


def qaoa_maxcut_ring(n: int = 4, gamma: float = QAOA_GAMMA, beta: float = QAOA_BETA) -> Circuit:
    coupling = coupling_for("ring", n)
    gates: list[Gate] = []
    for q in range(n):
        gates += h(q)
    for a, b in coupling:
        gates += zz(gamma, a, b)
    for q in range(n):
        gates += rx(2 * beta, q)
    return build_circuit(n, gates, coupling)


def teleportation() -> Circuit:
    """Coherent (deferred-measurement) teleportation of qubit 0 onto qubit 2."""
    theta, phi = TELEPORT_STATE
    gates = [*ry(theta, 0), Gate.rz(phi, 0)]
    gates += [*h(1), Gate.cnot(1, 2)]
    gates += [Gate.cnot(0, 1), *h(0)]
    gates += [Gate.cnot(1, 2), *cz(0, 2)]
    return build_circuit(3, gates, coupling_for("ring", 3))


def vqe_ansatz(n: int = 4, layers: int = 2, angles: tuple[float, ...] = VQE_ANGLES) -> Circuit:
    """Hardware-efficient ansatz: RY/RZ on every qubit, then a CNOT ladder, per layer."""
    gates: list[Gate] = []
    it = iter(angles)
    for _ in range(layers):
        for q in range(n):
            gates += ry(next(it), q)
            gates.append(Gate.rz(next(it), q))
        for q in range(n - 1):
            gates.append(Gate.cnot(q, q + 1))
    return build_circuit(n, gates, coupling_for("line", n))


def algorithm_circuits() -> list[NamedCircuit]:
    """The built-in algorithm suite, simplified and validated."""
    suite = [
        ("ghz3", ghz(3)),
        ("qft3", qft(3)),
        ("grover2", grover2()),
        ("qaoa_ring4", qaoa_maxcut_ring(4)),
        ("teleport3", teleportation()),
        ("vqe_hea4", vqe_ansatz(4)),
    ]
    return [NamedCircuit(name, simplify(c)) for name, c in suite]
