"""Noisy density-matrix simulator used as the PST ground-truth oracle.

Basis index convention: bit ``q`` of a computational-basis index is the value
of qubit ``q``. In the ``(2,) * n`` tensor view, qubit ``q`` lives on axis
``n - 1 - q`` (rows) and ``2n - 1 - q`` (columns).
"""

import logging
import math
from functools import lru_cache
from itertools import product
from typing import Optional, Sequence

import numpy as np

from qupst.config.settings import settings
from qupst.errors import (
    ContainsMeasurement,
    InvalidProfile,
    NumericError,
    UnsupportedQubitCount,
    ZeroShots,
)
from qupst.models.circuit import Circuit, Gate, GateKind
from qupst.models.noise import NoiseProfile
from qupst.services.circuit_ops import concat_with_inverse
from qupst.services.noise_model import validate_profile

logger = logging.getLogger(__name__)

I2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SX_MATRIX = 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]], dtype=complex)
CNOT_MATRIX = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)  # basis |control target>


def rz_matrix(theta: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=complex)


def gate_matrix(gate: Gate) -> np.ndarray:
    """Unitary of ``gate`` acting on ``gate.qubits`` in the listed order."""
    if gate.kind == GateKind.RZ:
        return rz_matrix(gate.param)
    if gate.kind == GateKind.SX:
        return SX_MATRIX
    if gate.kind == GateKind.SXDG:
        return SX_MATRIX.conj().T
    if gate.kind == GateKind.X:
        return PAULI_X
    if gate.kind == GateKind.CNOT:
        return CNOT_MATRIX
    raise ValueError(f"{gate.kind.value} has no unitary")


# Kraus sets


def kraus_completeness(ops: Sequence[np.ndarray]) -> float:
    """Max-abs deviation of sum(K^dagger K) from the identity."""
    total = sum(k.conj().T @ k for k in ops)
    return float(np.max(np.abs(total - np.eye(total.shape[0]))))


def _checked(ops: list[np.ndarray]) -> list[np.ndarray]:
    defect = kraus_completeness(ops)
    if defect > settings.kraus_tolerance:
        raise NumericError(f"Kraus set is not trace preserving (defect {defect:.3e})")
    return ops


@lru_cache(maxsize=None)
def _paulis(n_qubits: int) -> tuple[np.ndarray, ...]:
    single = (I2, PAULI_X, PAULI_Y, PAULI_Z)
    out = []
    for combo in product(single, repeat=n_qubits):
        m = np.array([[1.0 + 0j]])
        for factor in combo:
            m = np.kron(m, factor)
        out.append(m)
    return tuple(out)


def depolarizing_kraus(p: float, n_qubits: int = 1) -> list[np.ndarray]:
    """Kraus form of rho -> (1 - p) rho + p * Tr(rho) I / d on ``n_qubits`` qubits."""
    d2 = 4 ** n_qubits
    paulis = _paulis(n_qubits)
    ops = [math.sqrt(1.0 - (d2 - 1) * p / d2) * paulis[0]]
    ops.extend(math.sqrt(p / d2) * pauli for pauli in paulis[1:])
    return _checked(ops)


def amplitude_damping_kraus(gamma: float) -> list[np.ndarray]:
    return _checked([
        np.array([[1, 0], [0, math.sqrt(1.0 - gamma)]], dtype=complex),
        np.array([[0, math.sqrt(gamma)], [0, 0]], dtype=complex),
    ])


def phase_damping_kraus(lam: float) -> list[np.ndarray]:
    return _checked([
        np.array([[1, 0], [0, math.sqrt(1.0 - lam)]], dtype=complex),
        np.array([[0, 0], [0, math.sqrt(lam)]], dtype=complex),
    ])


def thermal_relaxation_params(duration_ns: float, t1_us: float, t2_us: float) -> tuple[float, float]:
    """(gamma, lambda) of amplitude damping followed by phase damping.

    Requires T2 <= 2 T1; the pure-dephasing rate is 1/T2 - 1/(2 T1).
    """
    if t2_us > 2.0 * t1_us * (1.0 + 1e-12):
        raise InvalidProfile(f"T2={t2_us} exceeds 2*T1={2.0 * t1_us}")
    t = duration_ns * 1e-3
    gamma = 1.0 - math.exp(-t / t1_us)
    dephasing_rate = max(1.0 / t2_us - 1.0 / (2.0 * t1_us), 0.0)
    lam = 1.0 - math.exp(-2.0 * t * dephasing_rate)
    return gamma, lam


# Tensor helpers


def _apply_matrix(tensor: np.ndarray, matrix: np.ndarray, axes: list[int]) -> np.ndarray:
    k = len(axes)
    m = matrix.reshape((2,) * (2 * k))
    moved = np.tensordot(m, tensor, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(moved, list(range(k)), axes)


class DensityMatrix:
    """An n-qubit density matrix stored as a rank-2n tensor."""

    def __init__(self, n_qubits: int, tensor: Optional[np.ndarray] = None):
        self.n_qubits = n_qubits
        if tensor is None:
            tensor = np.zeros((2,) * (2 * n_qubits), dtype=complex)
            tensor[(0,) * (2 * n_qubits)] = 1.0
        self.tensor = tensor

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "DensityMatrix":
        n = int(round(math.log2(matrix.shape[0])))
        return cls(n, np.asarray(matrix, dtype=complex).reshape((2,) * (2 * n)))

    @property
    def matrix(self) -> np.ndarray:
        dim = 2 ** self.n_qubits
        return self.tensor.reshape(dim, dim)

    def row_axes(self, qubits: Sequence[int]) -> list[int]:
        return [self.n_qubits - 1 - q for q in qubits]

    def col_axes(self, qubits: Sequence[int]) -> list[int]:
        return [2 * self.n_qubits - 1 - q for q in qubits]

    def apply_unitary(self, matrix: np.ndarray, qubits: Sequence[int]) -> None:
        t = _apply_matrix(self.tensor, matrix, self.row_axes(qubits))
        self.tensor = _apply_matrix(t, matrix.conj(), self.col_axes(qubits))

    def apply_kraus(self, ops: Sequence[np.ndarray], qubits: Sequence[int]) -> None:
        rows, cols = self.row_axes(qubits), self.col_axes(qubits)
        total = np.zeros_like(self.tensor)
        for k in ops:
            total += _apply_matrix(_apply_matrix(self.tensor, k, rows), k.conj(), cols)
        self.tensor = total

    def apply_depolarizing(self, p: float, qubits: Sequence[int]) -> None:
        """Closed form of ``depolarizing_kraus``: mix the touched qubits toward I/d."""
        if p <= 0.0:
            return
        k = len(qubits)
        d = 2 ** k
        axes = self.row_axes(qubits) + self.col_axes(qubits)
        front = np.moveaxis(self.tensor, axes, list(range(2 * k)))
        rest = front.shape[2 * k:]
        reduced = np.trace(front.reshape((d, d) + rest), axis1=0, axis2=1)
        mixed = np.multiply.outer(np.eye(d) / d, reduced).reshape((2,) * (2 * k) + rest)
        mixed = np.moveaxis(mixed, list(range(2 * k)), axes)
        self.tensor = (1.0 - p) * self.tensor + p * mixed

    def apply_thermal_relaxation(self, gamma: float, lam: float, qubit: int) -> None:
        """Closed form of amplitude damping(gamma) then phase damping(lam)."""
        if gamma <= 0.0 and lam <= 0.0:
            return
        r = self.row_axes([qubit])[0]
        c = self.col_axes([qubit])[0]

        def block(i: int, j: int) -> tuple:
            index = [slice(None)] * self.tensor.ndim
            index[r], index[c] = i, j
            return tuple(index)

        t = self.tensor.copy()
        coherence = math.sqrt((1.0 - gamma) * (1.0 - lam))
        t[block(0, 0)] += gamma * self.tensor[block(1, 1)]
        t[block(1, 1)] *= 1.0 - gamma
        t[block(0, 1)] *= coherence
        t[block(1, 0)] *= coherence
        self.tensor = t

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def hermiticity_defect(self) -> float:
        m = self.matrix
        return float(np.max(np.abs(m - m.conj().T)))

    def min_eigenvalue(self) -> float:
        m = self.matrix
        return float(np.min(np.linalg.eigvalsh(0.5 * (m + m.conj().T))))

    def probabilities(self) -> np.ndarray:
        return np.real(np.diagonal(self.matrix)).copy()

    def check_physical(self, tolerance: Optional[float] = None) -> None:
        tol = settings.trace_tolerance if tolerance is None else tolerance
        tr = self.trace()
        if abs(tr - 1.0) > tol:
            raise NumericError(f"density matrix trace {tr} deviates from 1")
        if self.hermiticity_defect() > tol:
            raise NumericError("density matrix is not Hermitian")


def _check_size(c: Circuit) -> None:
    if c.n_qubits > settings.max_qubits:
        raise UnsupportedQubitCount(f"{c.n_qubits} qubits exceeds simulator limit {settings.max_qubits}")


def simulate_density(
    c: Circuit,
    p: Optional[NoiseProfile] = None,
    noisy: bool = True,
    check: bool = False,
) -> DensityMatrix:
    """Evolve |0...0><0...0| through ``c``.

    Per gate: ideal unitary, then (when ``noisy``) depolarizing with the gate's
    error probability, then thermal relaxation on each touched qubit for the
    gate duration. Barriers and measurements apply nothing. Idle qubits do
    not decohere.
    """
    _check_size(c)
    if noisy:
        if p is None:
            raise InvalidProfile("noisy simulation needs a noise profile")
        validate_profile(p, c.n_qubits)

    rho = DensityMatrix(c.n_qubits)
    relaxation: dict[tuple[float, int], tuple[float, float]] = {}
    for gate in c.gates:
        if gate.kind in (GateKind.BARRIER, GateKind.MEASURE):
            continue
        rho.apply_unitary(gate_matrix(gate), gate.qubits)
        if not noisy:
            continue
        rho.apply_depolarizing(p.gate_error(gate), gate.qubits)
        duration = p.duration_ns(gate)
        if duration <= 0.0:
            continue
        for q in gate.qubits:
            key = (duration, q)
            if key not in relaxation:
                relaxation[key] = thermal_relaxation_params(duration, p.t1[q], p.t2[q])
            rho.apply_thermal_relaxation(*relaxation[key], q)

    if check:
        rho.check_physical()
    return rho


def simulate_statevector(c: Circuit) -> np.ndarray:
    """Noiseless statevector of ``c`` (flat, length 2^n)."""
    _check_size(c)
    n = c.n_qubits
    psi = np.zeros((2,) * n, dtype=complex)
    psi[(0,) * n] = 1.0
    for gate in c.gates:
        if gate.kind in (GateKind.BARRIER, GateKind.MEASURE):
            continue
        psi = _apply_matrix(psi, gate_matrix(gate), [n - 1 - q for q in gate.qubits])
    return psi.reshape(-1)


def _clamp_probability(value: float, what: str) -> float:
    if value < -settings.trace_tolerance or value > 1.0 + settings.trace_tolerance:
        logger.warning("%s %.3e outside [0, 1]; clamping", what, value)
    return float(min(max(value, 0.0), 1.0))


def all_zero_probability(rho: DensityMatrix, p: Optional[NoiseProfile] = None, with_readout: bool = True) -> float:
    """Probability of reading |0...0>, optionally through per-qubit readout confusion."""
    n = rho.n_qubits
    if not with_readout:
        return _clamp_probability(float(np.real(rho.tensor[(0,) * (2 * n)])), "all-zero probability")
    if p is None:
        raise InvalidProfile("readout confusion needs a noise profile")

    probs = rho.probabilities().reshape((2,) * n)
    # contract the most significant qubit (axis 0) first
    for q in range(n - 1, -1, -1):
        read_zero = np.array([1.0 - p.readout_error10[q], p.readout_error01[q]])
        probs = np.tensordot(read_zero, probs, axes=([0], [0]))
    return _clamp_probability(float(probs), "all-zero probability")


def sample_pst(p0: float, shots: Optional[int], seed: int) -> float:
    """Binomial(shots, p0) / shots; ``shots=None`` returns ``p0`` exactly."""
    if shots is None:
        return p0
    if shots < 1:
        raise ZeroShots(f"shots must be positive, got {shots}")
    p0 = min(max(p0, 0.0), 1.0)
    rng = np.random.default_rng(seed)
    return int(rng.binomial(shots, p0)) / shots


def state_fidelity(c: Circuit, p: NoiseProfile) -> float:
    """<psi_ideal| rho_noisy |psi_ideal> for the original (unconcatenated) circuit."""
    if any(g.kind == GateKind.MEASURE for g in c.gates):
        raise ContainsMeasurement("state fidelity is defined for measurement-free circuits")
    psi = simulate_statevector(c)
    rho = simulate_density(c, p, noisy=True)
    value = float(np.real(np.vdot(psi, rho.matrix @ psi)))
    return _clamp_probability(value, "fidelity")


def exact_pst(c: Circuit, p: NoiseProfile) -> float:
    """All-zero probability (with readout) of ``c`` followed by its inverse."""
    rho = simulate_density(concat_with_inverse(c), p, noisy=True)
    return all_zero_probability(rho, p, with_readout=True)


def zero_probabilities(c: Circuit, p: NoiseProfile) -> tuple[float, float]:
    """All-zero probability of ``c + inverse(c)`` with and without readout confusion."""
    rho = simulate_density(concat_with_inverse(c), p, noisy=True)
    return all_zero_probability(rho, p, with_readout=True), all_zero_probability(rho, with_readout=False)
