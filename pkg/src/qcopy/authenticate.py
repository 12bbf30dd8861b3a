"""Hash-state authentication of a medium.

The reader pushes a fixed qubit |d> through every position's stored rotation
in turn, producing R_{t1}...R_{tn}|d>, and the result is compared with the
reference hash by a controlled-SWAP test. A single SWAP test passes unequal
states with probability at least 1/2, so verification repeats it ``m`` times
on freshly generated hashes and accepts only if every run reads 0.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qsim
from .issuer import QuantumMedium
from .reader import decrypt_cascade

DEFAULT_REPETITIONS = 16
DEFAULT_MAX_REGENERATIONS = 32


@dataclass(frozen=True)
class SwapTestResult:
    outcome: int | np.ndarray
    analytic_p0: float | np.ndarray


@dataclass(frozen=True)
class VerificationVerdict:
    accepted: bool
    tests_run: int
    first_rejection_index: int | None
    discarded_hashes: int = 0

    def to_dict(self) -> dict:
        return {
            "accepted": self.accepted,
            "tests_run": self.tests_run,
            "first_rejection_index": self.first_rejection_index,
        }


def generate_hash(key_strings, hash_input, rng: np.random.Generator):
    """Rotate ``hash_input`` by each position's stored angle, in order.

    ``key_strings`` has shape ``(..., n, l, 2)``. Returns the final qubit and
    whether every cascade succeeded; only then is the qubit the true hash.
    """
    keys = np.asarray(key_strings, dtype=complex)
    if keys.ndim < 3:
        raise qsim.DimensionError("key_strings must have shape (..., n, l, 2)")
    state = np.asarray(hash_input, dtype=complex)
    ok = True
    for i in range(keys.shape[-3]):
        res = decrypt_cascade(state, keys[..., i, :, :], rng)
        state, ok = res.final_state, ok & res.success
    return state, ok


def swap_test_circuit(phi, psi) -> np.ndarray:
    """Ancilla ⊗ phi ⊗ psi after H, controlled-SWAP, H (ancilla is qubit 0)."""
    phi = qsim.check_state(phi)
    psi = qsim.check_state(psi)
    if phi.shape[-1] != 2 or psi.shape[-1] != 2:
        raise qsim.DimensionError("swap test compares two single qubits")
    reg = qsim.tensor(qsim.tensor(qsim.ZERO, phi), psi)
    reg = qsim.apply(reg, qsim.HADAMARD, [0])
    reg = qsim.apply(reg, qsim.cswap(), [0, 1, 2])
    return qsim.apply(reg, qsim.HADAMARD, [0])


def swap_test(phi, psi, rng: np.random.Generator) -> SwapTestResult:
    """One SWAP test; outcome 0 with probability 1/2 + |<psi|phi>|^2 / 2."""
    out = qsim.measure(swap_test_circuit(phi, psi), 0, rng)
    return SwapTestResult(out.bit, 0.5 + 0.5 * qsim.fidelity(phi, psi))


def _hash_until_success(keys, hash_input, rng, max_regenerations):
    state, ok = generate_hash(keys, hash_input, rng)
    ok = np.broadcast_to(ok, state.shape[:-1]).copy()
    discarded = np.zeros(ok.shape, dtype=np.int64)
    for _ in range(max_regenerations):
        redo = np.flatnonzero(~ok)
        if redo.size == 0:
            break
        discarded[redo] += 1
        state[redo], ok[redo] = generate_hash(keys[redo], hash_input[redo], rng)
    return state, discarded


def verify_states(keys, hash_input, reference, m: int, rng: np.random.Generator,
                  max_regenerations: int = DEFAULT_MAX_REGENERATIONS):
    """Batched verification over a leading axis of media.

    ``keys`` is ``(B, n, l, 2)``, ``hash_input`` and ``reference`` are
    ``(B, 2)``. Returns arrays ``(accepted, tests_run, first_rejection,
    discarded)`` with -1 marking "no rejection".

    A generation whose cascade transcript shows a failure is known to be bad
    by whoever ran it, so it is discarded and regenerated (up to
    ``max_regenerations`` times) before being submitted to the SWAP test.
    """
    if m < 1:
        raise qsim.InvalidParameterError("need at least one SWAP test")
    keys = np.asarray(keys, dtype=complex)
    size = keys.shape[0]
    hash_input = np.broadcast_to(np.asarray(hash_input, dtype=complex), (size, 2))
    reference = np.broadcast_to(np.asarray(reference, dtype=complex), (size, 2))

    first_rejection = np.full(size, -1, dtype=np.int64)
    tests_run = np.zeros(size, dtype=np.int64)
    discarded = np.zeros(size, dtype=np.int64)
    for r in range(m):
        live = np.flatnonzero(first_rejection < 0)
        if live.size == 0:
            break
        generated, dropped = _hash_until_success(keys[live], hash_input[live], rng,
                                                 max_regenerations)
        discarded[live] += dropped
        outcome = swap_test(generated, reference[live], rng).outcome
        tests_run[live] = r + 1
        first_rejection[live[outcome == 1]] = r
    return first_rejection < 0, tests_run, first_rejection, discarded


def verify_medium(medium: QuantumMedium, m: int = DEFAULT_REPETITIONS,
                  rng: np.random.Generator | None = None, *, reference=None,
                  max_regenerations: int = DEFAULT_MAX_REGENERATIONS) -> VerificationVerdict:
    """Verify ``medium`` against ``reference`` (default: the hash on the medium).

    The Issuer passes its own re-prepared hash as ``reference``; leaving it
    unset compares against whatever hash the medium carries.
    """
    if rng is None:
        raise ValueError("verify_medium needs an rng")
    ref = medium.hash_state if reference is None else qsim.check_state(reference)
    accepted, tests_run, first, discarded = verify_states(
        medium.keys[None], medium.hash_input[None], ref[None], m, rng, max_regenerations
    )
    return VerificationVerdict(
        bool(accepted[0]),
        int(tests_run[0]),
        None if first[0] < 0 else int(first[0]),
        int(discarded[0]),
    )
