"""Pirate strategies against the medium, and their closed-form success rates.

The attack model follows the angle-carrier picture: position ``i`` is guarded
by ``cos t_i|0> + sin t_i|1>``, and the Issuer checks a returned copy by
projecting it onto that state. A pirate who measures the carrier and writes
back a fresh state can only pass that check with probability below one unless
the angle is a multiple of pi/2.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qsim
from .issuer import IssuerSecrets, QuantumMedium, amplitude_angle_state


@dataclass(frozen=True)
class AttackOutcome:
    pirated_medium: QuantumMedium
    per_position_pass: list[bool]
    passed_all: bool


def fake_projection_prob(theta, theta_star):
    """cos^2 t cos^2(t - t*) + sin^2 t sin^2(t + t*), implemented verbatim.

    This is the pass rate of the mirrored re-preparation in
    :func:`reprepare_pass`: outcome 0 is rewritten as |t*>, outcome 1 as
    |pi/2 - t*>. It does not reach 1 at ``t* = t``.
    """
    theta = np.asarray(theta, dtype=float)
    theta_star = np.asarray(theta_star, dtype=float)
    return (np.cos(theta) ** 2 * np.cos(theta - theta_star) ** 2
            + np.sin(theta) ** 2 * np.sin(theta + theta_star) ** 2)


def optimal_copy_prob(theta):
    """1 - sin^2(2t)/2: measure the carrier and keep the collapsed state."""
    return 1.0 - 0.5 * np.sin(2 * np.asarray(theta, dtype=float)) ** 2


def total_copy_prob(thetas) -> float:
    """Chance that a measure-and-keep copy of every carrier passes."""
    return float(np.prod(optimal_copy_prob(thetas)))


def reprepared_states(bits, theta_star: float = 0.0) -> np.ndarray:
    """The pirate's replacement for a carrier that read ``bits``."""
    bits = np.asarray(bits)
    angle = np.where(bits == 0, theta_star, np.pi / 2 - theta_star)
    return amplitude_angle_state(angle)


def measure_reprepare(states, rng: np.random.Generator, theta_star: float = 0.0) -> np.ndarray:
    """Measure each single-qubit state and write back the pirate's guess."""
    return reprepared_states(qsim.measure(states, 0, rng).bit, theta_star)


def issuer_check(states, thetas, rng: np.random.Generator):
    """Project each state onto |t> vs its complement; True on |t>.

    rotation_xz(t) maps cos t|0> + sin t|1> to |0>, so the check is that
    rotation followed by a computational-basis readout of 0.
    """
    rotated = qsim.apply(states, qsim.rotation_xz(thetas), [0])
    return np.asarray(qsim.measure(rotated, 0, rng).bit) == 0


def reprepare_pass(thetas, rng: np.random.Generator, theta_star: float = 0.0):
    """Simulate measure-and-reprepare on carriers with angles ``thetas``
    (any shape) and return the Issuer's per-carrier verdicts."""
    carriers = amplitude_angle_state(thetas)
    forged = measure_reprepare(carriers, rng, theta_star)
    return issuer_check(forged, thetas, rng)


def _pirate_copy(medium: QuantumMedium, rng, theta_star):
    return QuantumMedium(
        data=measure_reprepare(medium.data, rng, theta_star),
        keys=measure_reprepare(medium.keys, rng, theta_star),
        hash_state=measure_reprepare(medium.hash_state, rng, theta_star),
        hash_input=measure_reprepare(medium.hash_input, rng, theta_star),
    )


def measure_and_reprepare_attack(medium: QuantumMedium, secrets: IssuerSecrets,
                                 rng: np.random.Generator,
                                 theta_star: float = 0.0) -> AttackOutcome:
    """Copy every qubit of ``medium`` by measuring it, and run the Issuer's
    carrier check against the true angles in ``secrets``."""
    if secrets.n != medium.n:
        raise qsim.DimensionError("secrets and medium cover different positions")
    pirated = _pirate_copy(medium, rng, theta_star)
    passed = reprepare_pass(np.asarray(secrets.thetas), rng, theta_star)
    return AttackOutcome(pirated, [bool(p) for p in passed], bool(np.all(passed)))


def cloning_defect(psi1, psi2) -> float:
    """|s| - |s|^2 with s = <psi1|psi2>.

    A single unitary U(psi|0>) = psi|psi> for both states forces s = s^2, so
    the pair is clonable only when the states are identical (up to phase) or
    orthogonal; the defect measures the distance from that.
    """
    psi1 = qsim.check_state(psi1)
    psi2 = qsim.check_state(psi2)
    s = float(np.abs(qsim.inner_product(psi1, psi2)))
    return abs(s - s * s)


def pirated_acceptance_prob(m: int, reference: str = "issuer") -> float:
    """Acceptance probability of ``m`` SWAP tests for a measure-and-keep copy
    of a freshly minted medium (hash input and hash on the equator).

    The copied hash input is a basis state |x>, which every copied stored
    rotation leaves untouched, so the generated hash is |x>.

    ``"issuer"``: reference is the true hash, overlap 1/2, so (3/4)^m.
    ``"medium"``: reference is the copied hash |y>, equal to |x> half the time,
    so 1/2 + (1/2)^(m+1).
    """
    if m < 1:
        raise qsim.InvalidParameterError("m must be >= 1")
    if reference == "issuer":
        return 0.75 ** m
    if reference == "medium":
        return 0.5 + 0.5 ** (m + 1)
    raise ValueError(f"unknown reference {reference!r}")
