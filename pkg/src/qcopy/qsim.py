"""Exact statevector simulator.

States are complex numpy arrays of shape ``(..., 2**n)``; any leading axes are
batch axes, so one call can advance thousands of independent Monte Carlo
trials. Qubit 0 is the most significant bit of the basis index, i.e. the
amplitude of ``|q0 q1 ... q_{n-1}>`` lives at index ``int("q0q1...", 2)``.

Gates are complex arrays of shape ``(..., 2**k, 2**k)``. Leading axes on a gate
broadcast against the state's batch axes (one rotation angle per trial).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NORM_TOL = 1e-10
UNITARY_TOL = 1e-12
MAX_QUBITS = 20

_SQRT2_INV = 1 / np.sqrt(2)


class InvalidParameterError(ValueError):
    """Raised for non-finite angles and other malformed numeric inputs."""


class DimensionError(ValueError):
    """Raised when state or gate shapes do not fit together."""


# -- states -------------------------------------------------------------------

def n_qubits(state: np.ndarray) -> int:
    dim = np.shape(state)[-1]
    n = int(dim).bit_length() - 1
    if dim < 2 or 1 << n != dim:
        raise DimensionError(f"state dimension {dim} is not a power of two >= 2")
    if n > MAX_QUBITS:
        raise DimensionError(f"{n} qubits exceeds the {MAX_QUBITS}-qubit limit")
    return n


def check_state(state, tol: float = NORM_TOL) -> np.ndarray:
    """Return ``state`` as a complex array after checking shape and norm."""
    state = np.asarray(state, dtype=complex)
    n_qubits(state)
    if not np.all(np.isfinite(state)):
        raise InvalidParameterError("state has non-finite amplitudes")
    norms = np.sum(np.abs(state) ** 2, axis=-1)
    if np.any(np.abs(norms - 1.0) > tol):
        raise InvalidParameterError(f"state is not normalized (|psi|^2 = {np.max(norms)!r})")
    return state


def basis_state(bits: str | list[int]) -> np.ndarray:
    """``basis_state("10")`` is |10>."""
    bits = [int(b) for b in bits]
    if not bits or any(b not in (0, 1) for b in bits):
        raise InvalidParameterError(f"bad bit string {bits!r}")
    out = np.zeros(1 << len(bits), dtype=complex)
    out[int("".join(map(str, bits)), 2)] = 1.0
    return out


ZERO = basis_state("0")
ONE = basis_state("1")
PLUS = np.array([_SQRT2_INV, _SQRT2_INV], dtype=complex)
MINUS = np.array([_SQRT2_INV, -_SQRT2_INV], dtype=complex)


def tensor(a, b) -> np.ndarray:
    """Kronecker product ``a ⊗ b``; ``a`` supplies the leading qubits."""
    a = check_state(a)
    b = check_state(b)
    if n_qubits(a) + n_qubits(b) > MAX_QUBITS:
        raise DimensionError("tensor product exceeds the register limit")
    out = a[..., :, None] * b[..., None, :]
    return out.reshape(out.shape[:-2] + (-1,))


def inner_product(a, b):
    """<a|b> = sum_i conj(a_i) b_i, over the last axis."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape[-1] != b.shape[-1]:
        raise DimensionError(f"dimension mismatch: {a.shape[-1]} vs {b.shape[-1]}")
    return np.sum(np.conj(a) * b, axis=-1)


def fidelity(a, b):
    """|<a|b>|^2; insensitive to global phase."""
    return np.abs(inner_product(a, b)) ** 2


# -- gates --------------------------------------------------------------------

def _angle(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(theta)):
        raise InvalidParameterError(f"rotation angle must be finite, got {theta!r}")
    return theta


def rotation_xz(theta) -> np.ndarray:
    """Real rotation [[cos t, sin t], [-sin t, cos t]] in the XZ plane."""
    theta = _angle(theta)
    c, s = np.cos(theta), np.sin(theta)
    return np.stack([np.stack([c, s], -1), np.stack([-s, c], -1)], -2).astype(complex)


def rotation_z(theta) -> np.ndarray:
    """exp(i t sigma_z / 2) = diag(e^{it/2}, e^{-it/2})."""
    theta = _angle(theta)
    phase = np.exp(0.5j * theta)
    out = np.zeros(theta.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = phase
    out[..., 1, 1] = np.conj(phase)
    return out


def _permutation(mapping: list[int]) -> np.ndarray:
    out = np.zeros((len(mapping), len(mapping)), dtype=complex)
    out[mapping, np.arange(len(mapping))] = 1.0
    return out


IDENTITY = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT2_INV


def hadamard() -> np.ndarray:
    return HADAMARD.copy()


def mcx(n_controls: int) -> np.ndarray:
    """X on the last qubit, controlled on all preceding qubits being |1>."""
    if n_controls < 0:
        raise InvalidParameterError("n_controls must be >= 0")
    dim = 1 << (n_controls + 1)
    mapping = list(range(dim))
    mapping[-2], mapping[-1] = dim - 1, dim - 2
    return _permutation(mapping)


def cnot() -> np.ndarray:
    return mcx(1)


def toffoli() -> np.ndarray:
    return mcx(2)


def cswap() -> np.ndarray:
    """Fredkin: swaps qubits 1 and 2 when qubit 0 is |1>."""
    mapping = list(range(8))
    mapping[0b101], mapping[0b110] = 0b110, 0b101
    return _permutation(mapping)


def dagger(gate) -> np.ndarray:
    return np.conj(np.swapaxes(np.asarray(gate), -1, -2))


def is_unitary(gate, tol: float = UNITARY_TOL) -> bool:
    gate = np.asarray(gate, dtype=complex)
    eye = np.eye(gate.shape[-1])
    return bool(np.all(np.abs(dagger(gate) @ gate - eye) <= tol))


# -- evolution ----------------------------------------------------------------

def apply(state, gate, targets) -> np.ndarray:
    """Apply ``gate`` to the listed qubits (in gate order) of ``state``.

    Batch axes of ``gate`` (everything before the last two) broadcast against
    the batch axes of ``state``.
    """
    state = np.asarray(state, dtype=complex)
    gate = np.asarray(gate, dtype=complex)
    n = n_qubits(state)
    targets = [int(t) for t in targets]
    k = len(targets)
    if gate.ndim < 2 or gate.shape[-1] != gate.shape[-2] or gate.shape[-1] != 1 << k:
        raise DimensionError(f"gate of shape {gate.shape} does not act on {k} qubit(s)")
    if len(set(targets)) != k or any(not 0 <= t < n for t in targets):
        raise DimensionError(f"bad targets {targets} for a {n}-qubit state")

    batch = np.broadcast_shapes(state.shape[:-1], gate.shape[:-2])
    nb = len(batch)
    psi = np.broadcast_to(state, batch + state.shape[-1:]).reshape(batch + (2,) * n)
    axes = [nb + t for t in targets]
    psi = np.moveaxis(psi, axes, range(nb + n - k, nb + n))
    moved = psi.shape
    psi = psi.reshape(batch + (-1, 1 << k))
    # row-vector form: psi' = psi @ U^T, gate batch aligned on the leading axes
    g = np.broadcast_to(gate, batch + gate.shape[-2:])
    psi = psi @ np.swapaxes(g, -1, -2)
    psi = np.moveaxis(psi.reshape(moved), range(nb + n - k, nb + n), axes)
    return psi.reshape(batch + (1 << n,))


@dataclass(frozen=True)
class MeasurementOutcome:
    """Result of a computational-basis measurement of one qubit.

    With batched input, ``bit`` and ``probability`` are arrays over the batch.
    """

    bit: int | np.ndarray
    probability: float | np.ndarray
    post_state: np.ndarray


def branch_probability(state, qubit: int) -> np.ndarray:
    """Born probability of reading 1 on ``qubit``."""
    state = np.asarray(state, dtype=complex)
    n = n_qubits(state)
    psi = state.reshape(state.shape[:-1] + (2,) * n)
    psi = np.moveaxis(psi, state.ndim - 1 + qubit, -1)
    return np.sum(np.abs(psi[..., 1]) ** 2, axis=tuple(range(state.ndim - 1, psi.ndim - 1)))


def measure(state, qubit: int, rng: np.random.Generator) -> MeasurementOutcome:
    """Projective measurement of ``qubit`` in {|0>, |1>}.

    Draws one uniform per batch element from ``rng``; the post-measurement
    state is renormalized.
    """
    state = check_state(state)
    n = n_qubits(state)
    if not 0 <= qubit < n:
        raise DimensionError(f"qubit {qubit} out of range for {n} qubits")
    batch = state.shape[:-1]
    p1 = np.clip(branch_probability(state, qubit), 0.0, 1.0)
    bit = (rng.random(batch) < p1).astype(np.int8)
    prob = np.where(bit == 1, p1, 1.0 - p1)
    if np.any(prob <= 0.0):
        raise InvalidParameterError("sampled a branch with zero norm")

    psi = state.reshape(batch + (2,) * n).copy()
    psi = np.moveaxis(psi, len(batch) + qubit, -1)
    keep = (np.arange(2) == bit[..., None]).reshape(batch + (1,) * (n - 1) + (2,))
    psi = np.where(keep, psi, 0.0)
    psi = np.moveaxis(psi, -1, len(batch) + qubit).reshape(state.shape)
    psi = psi / np.sqrt(prob)[..., None]
    if not batch:
        return MeasurementOutcome(int(bit), float(prob), psi)
    return MeasurementOutcome(bit, prob, psi)


def factor_out(state, qubit: int, bit) -> np.ndarray:
    """Remaining register after ``qubit`` has collapsed to ``|bit>``.

    Only valid for a post-measurement state, where the register factorizes.
    """
    state = np.asarray(state, dtype=complex)
    n = n_qubits(state)
    batch = state.shape[:-1]
    psi = np.moveaxis(state.reshape(batch + (2,) * n), len(batch) + qubit, -1)
    bit = np.asarray(bit).reshape(batch + (1,) * (n - 1) + (1,))
    psi = np.take_along_axis(psi, np.broadcast_to(bit, psi.shape[:-1] + (1,)), -1)[..., 0]
    return psi.reshape(batch + (1 << (n - 1),))


def equal_up_to_phase(a, b, tol: float = 1e-10) -> bool:
    """Amplitude-wise equality after removing the relative global phase."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    ov = inner_product(b, a)
    phase = np.where(np.abs(ov) > 0, ov / np.where(np.abs(ov) > 0, np.abs(ov), 1), 1.0)
    return bool(np.all(np.abs(a - phase[..., None] * b) <= tol))
