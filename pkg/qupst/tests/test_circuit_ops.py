"""Circuit construction, inversion, simplification and DAG extraction."""

import math

import numpy as np
import pytest

from qupst.errors import (
    ContainsMeasurement,
    IndexOutOfRange,
    UncoupledCNOT,
    UnsupportedQubitCount,
    ValidationError,
)
from qupst.models.circuit import Circuit, Gate, GateKind, NodeKind
from qupst.services.circuit_ops import (
    build_circuit,
    circuit_stats,
    concat_with_inverse,
    coupling_for,
    inverse_circuit,
    is_acyclic,
    load_circuit,
    simplify,
    to_dag,
)


def kinds(c: Circuit) -> list[str]:
    return [g.kind.value for g in c.gates]


def raw_random_circuit(seed: int) -> Circuit:
    """Unsimplified gates on a 3-qubit line, with repeats and barriers left in."""
    rng = np.random.default_rng(seed)
    pool = [
        lambda q: Gate.rz(float(rng.choice([0.5, math.pi, -math.pi / 2])), q),
        Gate.sx,
        Gate.sxdg,
        Gate.x,
        lambda q: Gate.cnot(q, q + 1) if q < 2 else Gate.cnot(q, q - 1),
        lambda q: Gate.barrier(),
    ]
    gates = [pool[int(rng.integers(len(pool)))](int(rng.integers(3))) for _ in range(int(rng.integers(4, 25)))]
    return build_circuit(3, gates, [(0, 1), (1, 2)])


class TestBuildCircuit:
    def test_minimal_single_qubit(self):
        c = build_circuit(1, [Gate.x(0)], [])
        assert c.n_qubits == 1
        assert kinds(c) == ["X"]

    def test_coupled_cnot(self):
        c = build_circuit(2, [Gate.cnot(0, 1)], [(0, 1)])
        assert c.coupling == ((0, 1),)

    def test_reversed_pair_is_normalized(self):
        c = build_circuit(2, [Gate.cnot(1, 0)], [(1, 0)])
        assert c.coupling == ((0, 1),)

    def test_uncoupled_cnot(self):
        with pytest.raises(UncoupledCNOT):
            build_circuit(3, [Gate.cnot(0, 2)], [(0, 1), (1, 2)])

    def test_index_out_of_range(self):
        with pytest.raises(IndexOutOfRange):
            build_circuit(2, [Gate.x(2)], [])

    @pytest.mark.parametrize("n", [0, 11])
    def test_unsupported_qubit_count(self, n):
        with pytest.raises(UnsupportedQubitCount):
            build_circuit(n, [], [])

    def test_rz_needs_angle(self):
        with pytest.raises(ValueError):
            build_circuit(1, [Gate(kind=GateKind.RZ, qubits=(0,))], [])


class TestInverse:
    def test_rotation(self):
        inv = inverse_circuit(build_circuit(1, [Gate.rz(0.3, 0)], []))
        assert inv.gates == (Gate.rz(-0.3, 0),)

    def test_reverses_order(self):
        c = build_circuit(2, [Gate.cnot(0, 1), Gate.x(1)], [(0, 1)])
        assert inverse_circuit(c).gates == (Gate.x(1), Gate.cnot(0, 1))

    def test_sx_becomes_sxdg(self):
        inv = inverse_circuit(build_circuit(1, [Gate.sx(0)], []))
        assert inv.gates == (Gate.sxdg(0),)

    def test_measurement_rejected(self):
        c = Circuit(n_qubits=1, gates=(Gate.x(0), Gate.measure(0)))
        with pytest.raises(ContainsMeasurement):
            inverse_circuit(c)


    @pytest.mark.parametrize("seed", range(20))
    def test_double_inverse_is_identity(self, seed):
        c = raw_random_circuit(seed)
        assert inverse_circuit(inverse_circuit(c)) == c


class TestConcatWithInverse:
    def test_mirror_around_barrier(self):
        c = build_circuit(2, [Gate.cnot(0, 1), Gate.x(1)], [(0, 1)])
        assert concat_with_inverse(c).gates == (
            Gate.cnot(0, 1),
            Gate.x(1),
            Gate.barrier(),
            Gate.x(1),
            Gate.cnot(0, 1),
        )

    def test_empty(self):
        assert kinds(concat_with_inverse(build_circuit(1, [], []))) == ["BARRIER"]

    def test_rz_pi(self):
        c = concat_with_inverse(build_circuit(1, [Gate.rz(math.pi, 0)], []))
        assert c.gates == (Gate.rz(math.pi, 0), Gate.barrier(), Gate.rz(-math.pi, 0))

    def test_survives_simplify(self):
        c = concat_with_inverse(build_circuit(2, [Gate.cnot(0, 1)], [(0, 1)]))
        assert simplify(c) == c


class TestSimplify:
    def test_x_pair_cancels(self):
        assert simplify(build_circuit(1, [Gate.x(0), Gate.x(0)], [])).gates == ()

    def test_rz_merge(self):
        out = simplify(build_circuit(1, [Gate.rz(0.2, 0), Gate.rz(0.3, 0)], []))
        assert len(out.gates) == 1
        assert out.gates[0].param == pytest.approx(0.5)

    def test_rz_full_turn_dropped(self):
        out = simplify(build_circuit(1, [Gate.rz(math.pi, 0), Gate.rz(math.pi, 0)], []))
        assert out.gates == ()

    def test_barrier_blocks_cancellation(self):
        c = build_circuit(2, [Gate.cnot(0, 1), Gate.barrier(), Gate.cnot(0, 1)], [(0, 1)])
        assert simplify(c) == c

    def test_opposite_cnots_do_not_cancel(self):
        c = build_circuit(2, [Gate.cnot(0, 1), Gate.cnot(1, 0)], [(0, 1)])
        assert simplify(c) == c

    def test_nested_cancellation_reaches_fixpoint(self):
        c = build_circuit(1, [Gate.sx(0), Gate.x(0), Gate.x(0), Gate.sxdg(0)], [])
        assert simplify(c).gates == ()

    def test_gate_on_other_wire_does_not_block(self):
        c = build_circuit(2, [Gate.x(0), Gate.sx(1), Gate.x(0)], [(0, 1)])
        assert simplify(c).gates == (Gate.sx(1),)

    @pytest.mark.parametrize("seed", range(20))
    def test_idempotent(self, seed):
        once = simplify(raw_random_circuit(seed))
        assert simplify(once) == once

    @pytest.mark.parametrize("seed", range(5))
    def test_idempotent_on_mirrored_circuits(self, seed):
        once = simplify(concat_with_inverse(raw_random_circuit(seed)))
        assert simplify(once) == once


class TestToDag:
    def test_single_gate(self):
        g = to_dag(build_circuit(1, [Gate.x(0)], []))
        assert g.n_nodes == 3
        assert [n.kind for n in g.nodes] == [NodeKind.INPUT, NodeKind.GATE, NodeKind.MEASURE]
        assert set(g.edges) == {(0, 1), (1, 2)}

    def test_cnot_degrees(self):
        g = to_dag(build_circuit(2, [Gate.cnot(0, 1)], [(0, 1)]))
        assert g.n_nodes == 5
        cnot = next(i for i, n in enumerate(g.nodes) if n.gate is not None)
        assert g.in_degree(cnot) == 2
        assert g.out_degree(cnot) == 2

    def test_node_count_formula(self):
        g = to_dag(build_circuit(2, [Gate.x(0), Gate.cnot(0, 1)], [(0, 1)]))
        assert g.n_nodes == 2 + 2 + 2

    def test_barrier_is_not_a_node(self, bell):
        g = to_dag(concat_with_inverse(bell))
        assert g.n_nodes == 2 * 2 + 2 * len(bell.gates)
        assert is_acyclic(g)

    def test_topological_index_respects_edges(self, bell):
        g = to_dag(concat_with_inverse(bell))
        assert all(g.topo_index[a] < g.topo_index[b] for a, b in g.edges)


class TestStats:
    def test_parallel_gates(self):
        s = circuit_stats(build_circuit(2, [Gate.x(0), Gate.x(1)], [(0, 1)]))
        assert (s.depth, s.width, s.count(GateKind.X)) == (1, 2, 2)

    def test_serial_dependence(self):
        assert circuit_stats(build_circuit(2, [Gate.x(0), Gate.cnot(0, 1)], [(0, 1)])).depth == 2

    def test_empty(self):
        s = circuit_stats(build_circuit(3, [], []))
        assert s.depth == 0
        assert all(v == 0 for v in s.counts.values())


class TestTopology:
    def test_line_and_ring(self):
        assert coupling_for("line", 3) == [(0, 1), (1, 2)]
        assert set(coupling_for("ring", 4)) == {(0, 1), (1, 2), (2, 3), (0, 3)}

    def test_grid_is_connected(self):
        import networkx as nx

        g = nx.Graph(coupling_for("grid", 6))
        assert nx.is_connected(g)
        assert g.number_of_nodes() == 6


def test_load_circuit_round_trip(tmp_path, bell):
    path = tmp_path / "c.json"
    path.write_text(bell.to_json())
    assert load_circuit(path) == bell


def test_load_circuit_rejects_sxdg(tmp_path):
    path = tmp_path / "c.json"
    path.write_text('{"n_qubits": 1, "gates": [{"kind": "SX", "qubits": [0]}, {"kind": "SXDG", "qubits": [0]}]}')
    with pytest.raises(ValidationError, match="SXDG"):
        load_circuit(path)


def test_load_circuit_rejects_uncoupled(tmp_path):
    path = tmp_path / "c.json"
    path.write_text('{"n_qubits": 3, "coupling": [[0, 1]], "gates": [{"kind": "CNOT", "qubits": [0, 2]}]}')
    with pytest.raises(UncoupledCNOT):
        load_circuit(path)
