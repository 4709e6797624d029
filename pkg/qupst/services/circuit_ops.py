"""Circuit construction, inversion, simplification and DAG extraction."""

import logging
import math
from collections.abc import Iterable
from pathlib import Path

import networkx as nx

from qupst.config.settings import settings
from qupst.errors import (
    ContainsMeasurement,
    IndexOutOfRange,
    IoError,
    UncoupledCNOT,
    UnsupportedQubitCount,
    ValidationError,
)
from qupst.models.circuit import (
    Circuit,
    CircuitGraph,
    Gate,
    GateKind,
    GlobalStats,
    GraphNode,
    NodeKind,
)

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi

_ARITY = {
    GateKind.RZ: 1,
    GateKind.SX: 1,
    GateKind.SXDG: 1,
    GateKind.X: 1,
    GateKind.MEASURE: 1,
    GateKind.CNOT: 2,
}

_INVERSE_KIND = {
    GateKind.SX: GateKind.SXDG,
    GateKind.SXDG: GateKind.SX,
    GateKind.X: GateKind.X,
    GateKind.CNOT: GateKind.CNOT,
    GateKind.BARRIER: GateKind.BARRIER,
}

_CANCELLING = {
    (GateKind.X, GateKind.X),
    (GateKind.CNOT, GateKind.CNOT),
    (GateKind.SX, GateKind.SXDG),
    (GateKind.SXDG, GateKind.SX),
}


def _normalize_pair(pair: Iterable[int]) -> tuple[int, int]:
    a, b = (int(q) for q in pair)
    return (a, b) if a <= b else (b, a)


def build_circuit(
    n_qubits: int,
    gates: Iterable[Gate],
    coupling_map: Iterable[Iterable[int]] = (),
) -> Circuit:
    """Validate and assemble a circuit.

    Raises:
        UnsupportedQubitCount: ``n_qubits`` outside [1, 10].
        IndexOutOfRange: a gate or coupling pair names a missing qubit.
        UncoupledCNOT: a CNOT acts on a pair absent from the coupling map.
    """
    if not 1 <= n_qubits <= settings.max_qubits:
        raise UnsupportedQubitCount(
            f"{n_qubits} qubits requested; supported range is 1..{settings.max_qubits}"
        )

    coupling: set[tuple[int, int]] = set()
    for pair in coupling_map:
        a, b = _normalize_pair(pair)
        if a < 0 or b >= n_qubits:
            raise IndexOutOfRange(f"coupling pair ({a},{b}) outside {n_qubits} qubits")
        if a == b:
            raise ValidationError(f"coupling pair ({a},{b}) couples a qubit to itself")
        coupling.add((a, b))

    checked: list[Gate] = []
    for position, gate in enumerate(gates):
        for q in gate.qubits:
            if not 0 <= q < n_qubits:
                raise IndexOutOfRange(f"gate {position} {gate} acts on qubit {q} of {n_qubits}")
        arity = _ARITY.get(gate.kind)
        if arity is not None and len(gate.qubits) != arity:
            raise ValidationError(f"gate {position} {gate} needs {arity} qubit(s)")
        if gate.kind == GateKind.RZ:
            if gate.param is None or not math.isfinite(gate.param):
                raise ValidationError(f"gate {position}: RZ needs a finite angle")
        elif gate.param is not None:
            raise ValidationError(f"gate {position}: only RZ takes a parameter")
        if gate.kind == GateKind.CNOT:
            control, target = gate.qubits
            if control == target:
                raise UncoupledCNOT(f"gate {position}: CNOT control equals target ({control})")
            if _normalize_pair(gate.qubits) not in coupling:
                raise UncoupledCNOT(f"gate {position}: CNOT({control},{target}) not in coupling map")
        checked.append(gate)

    return Circuit(n_qubits=n_qubits, coupling=tuple(sorted(coupling)), gates=tuple(checked))


def with_gates(c: Circuit, gates: Iterable[Gate]) -> Circuit:
    """Same register and coupling, different gate list (already-valid gates)."""
    return Circuit(n_qubits=c.n_qubits, coupling=c.coupling, gates=tuple(gates))


def inverse_gate(gate: Gate) -> Gate:
    if gate.kind == GateKind.MEASURE:
        raise ContainsMeasurement(f"{gate} has no inverse")
    if gate.kind == GateKind.RZ:
        return Gate.rz(-gate.param, gate.qubits[0])
    return Gate(kind=_INVERSE_KIND[gate.kind], qubits=gate.qubits)


def inverse_circuit(c: Circuit) -> Circuit:
    """Reverse the gate order and invert each gate (SX becomes SXDG)."""
    if any(g.kind == GateKind.MEASURE for g in c.gates):
        raise ContainsMeasurement("cannot invert a circuit containing measurements")
    return with_gates(c, (inverse_gate(g) for g in reversed(c.gates)))


def concat_with_inverse(c: Circuit) -> Circuit:
    """``c + [BARRIER] + inverse(c)``; the ideal output is |0...0>."""
    inverse = inverse_circuit(c)
    return with_gates(c, (*c.gates, Gate.barrier(), *inverse.gates))


def _is_zero_angle(theta: float) -> bool:
    r = math.fmod(theta, TWO_PI)
    return abs(r) <= settings.rz_cancel_tolerance or TWO_PI - abs(r) <= settings.rz_cancel_tolerance


def _simplify_pass(c: Circuit) -> tuple[list[Gate], bool]:
    out: list[Gate | None] = []
    stacks: list[list[int]] = [[] for _ in range(c.n_qubits)]
    changed = False

    for gate in c.gates:
        wires = gate.qubits if not gate.is_barrier else tuple(range(c.n_qubits))
        if gate.is_barrier or gate.kind == GateKind.MEASURE:
            out.append(gate)
            for q in wires:
                stacks[q].append(len(out) - 1)
            continue

        tops = {stacks[q][-1] if stacks[q] else None for q in wires}
        previous_index = tops.pop() if len(tops) == 1 else None
        previous = out[previous_index] if previous_index is not None else None

        if previous is not None and previous.qubits == gate.qubits:
            if (previous.kind, gate.kind) in _CANCELLING:
                out[previous_index] = None
                for q in wires:
                    stacks[q].pop()
                changed = True
                continue
            if previous.kind == GateKind.RZ and gate.kind == GateKind.RZ:
                theta = previous.param + gate.param
                changed = True
                if _is_zero_angle(theta):
                    out[previous_index] = None
                    stacks[gate.qubits[0]].pop()
                else:
                    out[previous_index] = Gate.rz(theta, gate.qubits[0])
                continue

        out.append(gate)
        for q in wires:
            stacks[q].append(len(out) - 1)

    return [g for g in out if g is not None], changed


def simplify(c: Circuit) -> Circuit:
    """Cancel adjacent inverse pairs and merge RZ runs until a fixpoint.

    Gates never move across a barrier.
    """
    current = c
    while True:
        gates, changed = _simplify_pass(current)
        current = with_gates(current, gates)
        if not changed:
            return current


def to_dag(c: Circuit) -> CircuitGraph:
    """DAG with INPUT nodes, one node per gate (barriers and explicit
    measurements excluded) and a MEASURE node closing every wire."""
    n = c.n_qubits
    nodes: list[GraphNode] = [GraphNode(NodeKind.INPUT, (q,)) for q in range(n)]
    edges: list[tuple[int, int]] = []
    last = list(range(n))

    for gate in c.gates:
        if gate.is_barrier or gate.kind == GateKind.MEASURE:
            continue
        index = len(nodes)
        nodes.append(GraphNode(NodeKind.GATE, gate.qubits, gate))
        for q in gate.qubits:
            edges.append((last[q], index))
            last[q] = index

    for q in range(n):
        index = len(nodes)
        nodes.append(GraphNode(NodeKind.MEASURE, (q,)))
        edges.append((last[q], index))

    return CircuitGraph(
        n_qubits=n,
        nodes=tuple(nodes),
        edges=tuple(edges),
        topo_index=tuple(range(len(nodes))),
    )


def to_networkx(graph: CircuitGraph) -> nx.MultiDiGraph:
    g = nx.MultiDiGraph()
    for i, node in enumerate(graph.nodes):
        kind = node.gate.kind.value if node.gate is not None else node.kind.value
        g.add_node(i, kind=kind, qubits=node.qubits, topo_index=graph.topo_index[i])
    g.add_edges_from(graph.edges)
    return g


def is_acyclic(graph: CircuitGraph) -> bool:
    return nx.is_directed_acyclic_graph(to_networkx(graph))


def circuit_stats(c: Circuit) -> GlobalStats:
    """Wire-parallel depth (barriers ignored), width and per-kind counts."""
    level = [0] * c.n_qubits
    counts: dict[str, int] = {k.value: 0 for k in (GateKind.RZ, GateKind.X, GateKind.SX, GateKind.CNOT)}
    for gate in c.operations():
        layer = max(level[q] for q in gate.qubits) + 1
        for q in gate.qubits:
            level[q] = layer
        counts[gate.kind.value] = counts.get(gate.kind.value, 0) + 1
    return GlobalStats(depth=max(level, default=0), width=c.n_qubits, counts=counts)


def coupling_for(topology: str, n_qubits: int) -> list[tuple[int, int]]:
    """Coupled pairs for a named topology: line, ring, or the most square grid."""
    if n_qubits < 2:
        return []
    if topology == "line":
        return [(q, q + 1) for q in range(n_qubits - 1)]
    if topology == "ring":
        pairs = [(q, q + 1) for q in range(n_qubits - 1)]
        if n_qubits > 2:
            pairs.append((0, n_qubits - 1))
        return pairs
    if topology == "grid":
        cols = math.ceil(math.sqrt(n_qubits))
        pairs = []
        for q in range(n_qubits):
            row, col = divmod(q, cols)
            if col + 1 < cols and q + 1 < n_qubits:
                pairs.append((q, q + 1))
            if q + cols < n_qubits:
                pairs.append((q, q + cols))
        return pairs
    raise ValidationError(f"unknown topology {topology!r}")


BASIS_GATES = frozenset({GateKind.RZ, GateKind.SX, GateKind.X, GateKind.CNOT})


def require_basis(c: Circuit, source: str) -> None:
    """Stored circuits hold only basis gates; inverses and barriers are added on use."""
    extra = sorted({g.kind.value for g in c.gates if g.kind not in BASIS_GATES})
    if extra:
        raise ValidationError(f"{source}: only RZ, SX, X and CNOT gates are allowed, found {', '.join(extra)}")


def load_circuit(path: Path | str) -> Circuit:
    """Read a circuit JSON file and validate it through ``build_circuit``."""
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise IoError(f"cannot read circuit {path}: {e}") from e
    parsed = Circuit.model_validate_json(raw)
    require_basis(parsed, f"circuit file {path}")
    return build_circuit(parsed.n_qubits, parsed.gates, parsed.coupling)
