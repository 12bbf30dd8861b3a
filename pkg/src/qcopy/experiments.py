"""Seeded Monte Carlo estimators and the curve sweeps built on them.

Every estimator splits its trials into blocks (see :mod:`qcopy.streams`),
runs the batched protocol code on each block and only sums counters, so the
result is the same for any number of worker processes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial

import numpy as np

from . import analysis, qsim
from .adversary import fake_projection_prob, measure_reprepare, reprepare_pass
from .authenticate import swap_test, verify_states
from .issuer import IssuerSecrets, QuantumMedium, make_hash_state, make_key_string, phase_key_state
from .reader import decode_positions, decrypt_cascade
from .streams import derive_seed, run_blocks


@dataclass(frozen=True)
class Estimate:
    hits: int
    trials: int

    @property
    def p(self) -> float:
        return self.hits / self.trials

    @property
    def stderr(self) -> float:
        return math.sqrt(self.p * (1 - self.p) / self.trials)

    def sigma(self, p_true: float) -> float:
        """Binomial standard deviation of the estimate under ``p_true``."""
        return math.sqrt(p_true * (1 - p_true) / self.trials)


def random_qubits(rng: np.random.Generator, size: int) -> np.ndarray:
    """Haar-random single-qubit states."""
    z = rng.normal(size=(size, 2)) + 1j * rng.normal(size=(size, 2))
    return z / np.linalg.norm(z, axis=-1, keepdims=True)


def _estimate(blocks) -> Estimate:
    return Estimate(sum(int(h) for h, _ in blocks), sum(int(t) for _, t in blocks))


# -- decryption ---------------------------------------------------------------

def _cascade_block(l, rng, count, first):
    theta = rng.uniform(0, 2 * np.pi, count)
    res = decrypt_cascade(random_qubits(rng, count), make_key_string(theta, l), rng)
    return int(np.sum(res.success)), count


def cascade_success_rate(l: int, trials: int, seed: int, jobs: int = 1) -> Estimate:
    """Fraction of cascades with an ``l``-slot key that apply R_t."""
    return _estimate(run_blocks(partial(_cascade_block, l), derive_seed(seed, 10, l), trials, jobs))


def _attempts_block(l, rng, count, first):
    theta = rng.uniform(0, 2 * np.pi, count)
    res = decrypt_cascade(random_qubits(rng, count), make_key_string(theta, l), rng)
    a = res.attempts_used
    return int(np.sum(a)), int(np.sum(a * a)), count, int(np.sum(~res.success))


def mean_attempts(trials: int, seed: int, jobs: int = 1, l: int = 32):
    """Mean number of slots consumed when the key is long enough to be
    effectively unlimited (default 32 slots). Returns (mean, stderr,
    exhausted) where ``exhausted`` counts cascades that ran out of slots."""
    blocks = run_blocks(partial(_attempts_block, l), derive_seed(seed, 11, l), trials, jobs)
    s1 = sum(b[0] for b in blocks)
    s2 = sum(b[1] for b in blocks)
    n = sum(b[2] for b in blocks)
    mean = s1 / n
    var = s2 / n - mean * mean
    return mean, math.sqrt(var / n), sum(b[3] for b in blocks)


def _decrypt_block(medium_arrays, rng, count, first):
    data, keys, bits = medium_arrays
    n = data.shape[0]
    cascade, decoded = decode_positions(
        np.broadcast_to(data, (count, n, 2)), np.broadcast_to(keys, (count,) + keys.shape), rng
    )
    success = cascade.success
    correct = np.all(decoded == bits, axis=1)
    return (success.sum(axis=0), int(np.all(success, axis=1).sum()),
            int(correct.sum()), int((np.all(success, axis=1) & ~correct).sum()), count)


@dataclass(frozen=True)
class DecryptStats:
    per_position_success: np.ndarray
    all_success: Estimate
    exact_recovery: Estimate
    wrong_on_success: int


def decrypt_statistics(medium: QuantumMedium, trials: int, seed: int, jobs: int = 1,
                       bits=None) -> DecryptStats:
    """Repeat :func:`decrypt_all` ``trials`` times on fresh copies of ``medium``.

    ``bits`` (the plaintext, if known) is used to count exact recoveries and
    runs where every cascade succeeded yet a bit came out wrong.
    """
    bits = np.full(medium.n, -2) if bits is None else np.asarray(bits)
    blocks = run_blocks(partial(_decrypt_block, (medium.data, medium.keys, bits)),
                        derive_seed(seed, 12), trials, jobs)
    per_pos = sum(b[0] for b in blocks) / trials
    return DecryptStats(
        per_pos,
        Estimate(sum(b[1] for b in blocks), trials),
        Estimate(sum(b[2] for b in blocks), trials),
        sum(b[3] for b in blocks),
    )


# -- authentication -----------------------------------------------------------

def _swap_block(delta, rng, count, first):
    base = rng.uniform(0, 2 * np.pi, count)
    out = swap_test(phase_key_state(base), phase_key_state(base + delta), rng).outcome
    return int(np.sum(out == 0)), count


def swap_pass_rate(delta: float, trials: int, seed: int, jobs: int = 1) -> Estimate:
    """Empirical SWAP-test Pr[0] for phase states ``delta`` apart."""
    return _estimate(run_blocks(partial(_swap_block, float(delta)),
                                derive_seed(seed, 20, int(round(delta * 1e9))), trials, jobs))


def _pair_swap_block(pair, rng, count, first):
    phi, psi = pair
    out = swap_test(np.broadcast_to(phi, (count, 2)), np.broadcast_to(psi, (count, 2)), rng).outcome
    return int(np.sum(out == 0)), count


def swap_pair_rate(phi, psi, trials: int, seed: int, jobs: int = 1) -> Estimate:
    """Empirical SWAP-test Pr[0] for a fixed pair of states."""
    pair = (np.asarray(phi, dtype=complex), np.asarray(psi, dtype=complex))
    return _estimate(run_blocks(partial(_pair_swap_block, pair), seed, trials, jobs))


def _verify_block(setup, rng, count, first):
    keys, hash_input, reference, m, pirate = setup
    keys = np.broadcast_to(keys, (count,) + keys.shape)
    hash_input = np.broadcast_to(hash_input, (count, 2))
    if pirate:
        keys = measure_reprepare(keys, rng)
        pirated_hash = measure_reprepare(np.broadcast_to(reference, (count, 2)), rng)
        hash_input = measure_reprepare(hash_input, rng)
        if pirate == "medium":
            reference = pirated_hash
    accepted, *_ = verify_states(keys, hash_input, reference, m, rng)
    return int(np.sum(accepted)), count


def acceptance_rate(medium: QuantumMedium, m: int, trials: int, seed: int, jobs: int = 1,
                    reference=None) -> Estimate:
    """How often :func:`verify_medium` accepts ``medium``."""
    ref = medium.hash_state if reference is None else reference
    setup = (medium.keys, medium.hash_input, np.asarray(ref, dtype=complex), m, None)
    return _estimate(run_blocks(partial(_verify_block, setup), derive_seed(seed, 30, m), trials, jobs))


def pirated_acceptance_rate(medium: QuantumMedium, secrets: IssuerSecrets, m: int, trials: int,
                            seed: int, jobs: int = 1, reference: str = "issuer") -> Estimate:
    """Each trial copies ``medium`` by measure-and-keep and verifies the copy.

    ``reference="issuer"`` checks against the Issuer's own hash; ``"medium"``
    against the hash the pirate copied onto the disk.
    """
    if reference not in ("issuer", "medium"):
        raise ValueError(f"unknown reference {reference!r}")
    setup = (medium.keys, medium.hash_input, make_hash_state(secrets), m, reference)
    return _estimate(run_blocks(partial(_verify_block, setup), derive_seed(seed, 31, m), trials, jobs))


# -- attacks ------------------------------------------------------------------

def _attack_block(setup, rng, count, first):
    thetas, theta_star = setup
    passed = reprepare_pass(np.broadcast_to(thetas, (count,) + thetas.shape), rng, theta_star)
    return passed.sum(axis=0), int(np.all(passed, axis=-1).sum()), count


@dataclass(frozen=True)
class AttackStats:
    thetas: np.ndarray
    theta_star: float
    per_position: list[Estimate]
    all_pass: Estimate

    def rows(self):
        for theta, est in zip(self.thetas, self.per_position):
            yield {
                "theta": float(theta),
                "theta_star": self.theta_star,
                "p_analytic": float(fake_projection_prob(theta, self.theta_star)),
                "p_empirical": est.p,
                "trials": est.trials,
                "stderr": est.stderr,
            }


def attack_statistics(thetas, trials: int, seed: int, jobs: int = 1,
                      theta_star: float = 0.0) -> AttackStats:
    """Measure-and-reprepare pass rates per carrier and for all carriers at once."""
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    blocks = run_blocks(partial(_attack_block, (thetas, float(theta_star))),
                        derive_seed(seed, 40), trials, jobs)
    hits = sum(b[0] for b in blocks)
    return AttackStats(
        thetas,
        float(theta_star),
        [Estimate(int(h), trials) for h in np.atleast_1d(hits)],
        Estimate(sum(b[1] for b in blocks), trials),
    )


# -- curves -------------------------------------------------------------------

def decryption_curve(trials: int, seed: int, jobs: int = 1, l_max: int = 12) -> list[dict]:
    rows = []
    for l in range(1, l_max + 1):
        est = cascade_success_rate(l, trials, seed, jobs)
        rows.append({"l": l, "p_success_analytic": analysis.cascade_success_prob(l),
                     "p_success_empirical": est.p, "stderr": est.stderr})
    return rows


def swap_curve(trials: int, seed: int, jobs: int = 1, points: int = 20) -> list[dict]:
    rows = []
    for delta in np.linspace(0.0, np.pi, points):
        est = swap_pass_rate(delta, trials, seed, jobs)
        rows.append({"overlap_angle": float(delta), "p0_analytic": float(analysis.swap_pass_prob(delta)),
                     "p0_empirical": est.p, "stderr": est.stderr})
    return rows


def distance_curve(points: int = 20) -> list[dict]:
    rows = []
    for delta in np.linspace(0.0, np.pi, points):
        d = analysis.gate_distance(qsim.rotation_z(0.0), qsim.rotation_z(delta))
        rows.append({"theta_delta": float(delta), "gate_distance": d,
                     "swap_p0": float(analysis.swap_pass_prob(delta))})
    return rows
