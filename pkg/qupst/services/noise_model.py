"""Synthetic backend noise profiles and noise-level scaling."""

import logging
from itertools import combinations
from pathlib import Path

import numpy as np

from qupst.config.settings import settings
from qupst.errors import InvalidProfile, IoError, NonPositiveFactor, UnsupportedQubitCount
from qupst.models.noise import DEFAULT_DURATIONS_NS, NoiseProfile

logger = logging.getLogger(__name__)

# Five canonical noise levels
NOISE_LEVELS = (0.5, 1.0, 2.0, 4.0, 8.0)

# Sampling ranges bracketing public superconducting-backend calibrations
T1_RANGE_US = (50.0, 150.0)
SINGLE_QUBIT_ERROR_RANGE = (1e-4, 1e-3)
CNOT_ERROR_RANGE = (5e-3, 3e-2)
READOUT_ERROR_RANGE = (1e-2, 5e-2)


def make_profile(n_qubits: int, seed: int) -> NoiseProfile:
    """Draw a deterministic random backend for ``n_qubits`` qubits.

    CNOT errors are drawn for every unordered qubit pair so the profile fits
    any coupling map on the register.
    """
    if not 1 <= n_qubits <= settings.max_qubits:
        raise UnsupportedQubitCount(f"{n_qubits} qubits; supported range is 1..{settings.max_qubits}")

    rng = np.random.default_rng(seed)
    t1 = rng.uniform(*T1_RANGE_US, size=n_qubits)
    t2 = np.minimum(rng.uniform(0.5 * t1, 2.0 * t1), 2.0 * t1)
    single = rng.uniform(*SINGLE_QUBIT_ERROR_RANGE, size=n_qubits)
    pairs = list(combinations(range(n_qubits), 2))
    cnot = rng.uniform(*CNOT_ERROR_RANGE, size=len(pairs))
    ro10 = rng.uniform(*READOUT_ERROR_RANGE, size=n_qubits)
    ro01 = rng.uniform(*READOUT_ERROR_RANGE, size=n_qubits)

    return NoiseProfile(
        profile_id=f"synthetic-{n_qubits}q-s{seed}",
        n_qubits=n_qubits,
        t1=t1.tolist(),
        t2=t2.tolist(),
        sx_error=single.tolist(),
        x_error=single.tolist(),
        cnot_pairs=pairs,
        cnot_error=cnot.tolist(),
        gate_duration=dict(DEFAULT_DURATIONS_NS),
        readout_error10=ro10.tolist(),
        readout_error01=ro01.tolist(),
        noise_scale=1.0,
    )


def noiseless_profile(n_qubits: int) -> NoiseProfile:
    """Reference profile with no gate, readout or decoherence error.

    Durations are zero so the relaxation channels reduce to the identity.
    """
    pairs = list(combinations(range(n_qubits), 2))
    return NoiseProfile(
        profile_id=f"noiseless-{n_qubits}q",
        n_qubits=n_qubits,
        t1=[1e9] * n_qubits,
        t2=[1e9] * n_qubits,
        sx_error=[0.0] * n_qubits,
        x_error=[0.0] * n_qubits,
        cnot_pairs=pairs,
        cnot_error=[0.0] * len(pairs),
        gate_duration={kind: 0.0 for kind in DEFAULT_DURATIONS_NS},
        readout_error10=[0.0] * n_qubits,
        readout_error01=[0.0] * n_qubits,
        noise_scale=0.0,
    )


def _scaled(values: list[float], factor: float) -> list[float]:
    return np.clip(np.asarray(values, dtype=float) * factor, 0.0, 1.0).tolist()


def scale_profile(p: NoiseProfile, factor: float) -> NoiseProfile:
    """Multiply error probabilities by ``factor`` (clamped to [0, 1]) and
    divide T1/T2 by it, so a larger factor means a noisier backend."""
    if not factor > 0:
        raise NonPositiveFactor(f"noise factor must be positive, got {factor}")
    if factor == 1.0:
        return p

    clamped = [
        v for v in (*p.sx_error, *p.x_error, *p.cnot_error, *p.readout_error10, *p.readout_error01)
        if v * factor > 1.0
    ]
    if clamped:
        logger.warning("Scaling %s by %g clamped %d probabilities to 1", p.profile_id, factor, len(clamped))

    return p.model_copy(
        update={
            "profile_id": f"{p.profile_id}-x{factor:g}",
            "t1": (np.asarray(p.t1) / factor).tolist(),
            "t2": (np.asarray(p.t2) / factor).tolist(),
            "sx_error": _scaled(p.sx_error, factor),
            "x_error": _scaled(p.x_error, factor),
            "cnot_error": _scaled(p.cnot_error, factor),
            "readout_error10": _scaled(p.readout_error10, factor),
            "readout_error01": _scaled(p.readout_error01, factor),
            "noise_scale": p.noise_scale * factor,
        }
    )


def validate_profile(p: NoiseProfile, n_qubits: int | None = None) -> NoiseProfile:
    """Raise ``InvalidProfile`` when ``p`` breaks an invariant."""
    problem = p.find_invalid()
    if problem:
        raise InvalidProfile(f"profile {p.profile_id}: {problem}")
    if n_qubits is not None and p.n_qubits < n_qubits:
        raise InvalidProfile(f"profile {p.profile_id} covers {p.n_qubits} qubits, circuit needs {n_qubits}")
    return p


def load_profile(path: Path | str) -> NoiseProfile:
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise IoError(f"cannot read noise profile {path}: {e}") from e
    return validate_profile(NoiseProfile.model_validate_json(raw))
