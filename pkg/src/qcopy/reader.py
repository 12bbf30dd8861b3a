"""The honest reader: applying a stored rotation without knowing its angle.

A CNOT from the data qubit onto a key qubit |t>, followed by measuring the
key, leaves the data in R_t|d> (key reads 0) or R_t^dagger|d> (key reads 1),
each with probability 1/2. After ``j`` failures the data carries
R_{-(2^j - 1) t}, which the next slot |2^j t> repairs with probability 1/2.

The conditioning of the correction on earlier failures is done classically
(branch on the measured key bit) rather than with a Toffoli ladder; the
coherent ladder is :func:`coherent_cascade_state` and produces the same
statistics.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qsim
from .issuer import QuantumMedium


@dataclass(frozen=True)
class CascadeResult:
    """Outcome of one decryption cascade (or a batch of them).

    ``transcript`` holds the measured key bits per slot, -1 for slots that
    were never used.
    """

    final_state: np.ndarray
    attempts_used: int | np.ndarray
    success: bool | np.ndarray
    transcript: np.ndarray

    @property
    def outcome_transcript(self) -> list[int]:
        return [int(b) for b in np.ravel(self.transcript) if b >= 0]


@dataclass(frozen=True)
class TrialReport:
    position: int
    result: CascadeResult
    decoded_bit: int | None


def stored_rotation_circuit(data, key) -> np.ndarray:
    """Two-qubit state after the CNOT, before the key is measured."""
    pair = qsim.tensor(data, key)
    return qsim.apply(pair, qsim.cnot(), [0, 1])


def stored_rotation_step(data, key, rng: np.random.Generator):
    """Run the stored-rotation gadget once.

    Returns ``(data_state, bit)``; ``bit == 0`` means the rotation landed.
    """
    data = qsim.check_state(data)
    key = qsim.check_state(key)
    if data.shape[-1] != 2 or key.shape[-1] != 2:
        raise qsim.DimensionError("data and key must be single qubits")
    out = qsim.measure(stored_rotation_circuit(data, key), 1, rng)
    return qsim.factor_out(out.post_state, 1, out.bit), out.bit


def decrypt_cascade(data, key_string, rng: np.random.Generator) -> CascadeResult:
    """Apply the rotation stored in ``key_string`` (shape ``(..., l, 2)``).

    Slots are consumed in order until one reads 0. Leading axes of ``data``
    and ``key_string`` broadcast, one cascade per batch element.
    """
    data = np.asarray(data, dtype=complex)
    keys = np.asarray(key_string, dtype=complex)
    if keys.ndim < 2 or keys.shape[-2] == 0:
        raise qsim.InvalidParameterError("key string must hold at least one slot")
    l = keys.shape[-2]
    batch = np.broadcast_shapes(data.shape[:-1], keys.shape[:-2])
    size = int(np.prod(batch))
    state = np.broadcast_to(data, batch + (2,)).reshape(size, 2).copy()
    keys = np.broadcast_to(keys, batch + keys.shape[-2:]).reshape(size, l, 2)

    done = np.zeros(size, dtype=bool)
    attempts = np.zeros(size, dtype=np.int64)
    transcript = np.full((size, l), -1, dtype=np.int8)
    for j in range(l):
        live = np.flatnonzero(~done)
        if live.size == 0:
            break
        new, bit = stored_rotation_step(state[live], keys[live, j], rng)
        state[live] = new
        attempts[live] = j + 1
        transcript[live, j] = bit
        done[live] = bit == 0

    if not batch:
        return CascadeResult(state[0], int(attempts[0]), bool(done[0]), transcript[0])
    return CascadeResult(
        state.reshape(batch + (2,)),
        attempts.reshape(batch),
        done.reshape(batch),
        transcript.reshape(batch + (l,)),
    )


def coherent_cascade_state(data, key_string) -> np.ndarray:
    """Fully coherent cascade: register ``data ⊗ key_1 ⊗ ... ⊗ key_l``.

    Slot ``j`` receives a CNOT from the data qubit controlled additionally on
    every earlier slot reading |1> (a Toffoli for ``j = 2``). Nothing is
    measured.
    """
    keys = [qsim.check_state(k) for k in np.asarray(key_string, dtype=complex)]
    state = qsim.check_state(data)
    for key in keys:
        state = qsim.tensor(state, key)
    for j in range(len(keys)):
        targets = [*range(1, j + 1), 0, j + 1]
        state = qsim.apply(state, qsim.mcx(j + 1), targets)
    return state


def hadamard_decode(states, rng: np.random.Generator):
    """Undo the Hadamard frame and read the bit."""
    return qsim.measure(qsim.apply(states, qsim.HADAMARD, [0]), 0, rng).bit


def decode_positions(data, keys, rng: np.random.Generator):
    """Cascade + decode for arrays of positions.

    Returns ``(cascade, bits)`` where ``bits`` is -1 wherever the cascade
    failed. Decoding draws are made for every element so the stream usage
    does not depend on which positions succeeded.
    """
    cascade = decrypt_cascade(data, keys, rng)
    bits = np.asarray(hadamard_decode(cascade.final_state, rng))
    return cascade, np.where(cascade.success, bits, -1)


def decrypt_all(medium: QuantumMedium, rng: np.random.Generator) -> list[TrialReport]:
    """Decrypt every position of ``medium`` with its own key string."""
    cascade, bits = decode_positions(medium.data, medium.keys, rng)
    reports = []
    for i in range(medium.n):
        result = CascadeResult(
            cascade.final_state[i],
            int(cascade.attempts_used[i]),
            bool(cascade.success[i]),
            cascade.transcript[i],
        )
        reports.append(TrialReport(i, result, int(bits[i]) if bits[i] >= 0 else None))
    return reports


def read_classical(medium: QuantumMedium, rng: np.random.Generator) -> list[int]:
    """Read the data qubits as they are, without any key."""
    return [int(b) for b in qsim.measure(medium.data, 0, rng).bit]
