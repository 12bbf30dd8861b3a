"""Closed-form quantities of the scheme."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import qsim


@dataclass(frozen=True)
class CurvePoint:
    x: float
    y: float
    y_err: float | None = None


@dataclass(frozen=True)
class EntropyTerm:
    j: int
    theta: float
    x: float
    entropy: float


@dataclass(frozen=True)
class EntropyTable:
    """Truncated storage-cost series.

    ``total_cost`` is sum_k S_k (2 - 2^(1-k)); ``tail_bound`` bounds what the
    dropped terms could still add.
    """

    terms: tuple[EntropyTerm, ...]
    total_cost: float
    entropy_sum: float
    tail_bound: float

    @property
    def doubled_entropy_sum(self) -> float:
        return 2 * self.entropy_sum


def _binary_entropy(p: float, q: float) -> float:
    # p + q = 1, passed separately so the small one keeps full precision
    return -sum(v * math.log2(v) for v in (p, q) if v > 0)


def entropy_term(j: int) -> float:
    """Binary entropy of x_j = (1 + cos(pi / 2^j)) / 2."""
    return entropy_terms(j)[-1].entropy


def entropy_terms(k_max: int) -> tuple[EntropyTerm, ...]:
    if k_max < 1:
        raise qsim.InvalidParameterError("entropy terms start at j = 1")
    out = []
    for j in range(1, k_max + 1):
        theta = math.pi / 2 ** j
        x = (1 + math.cos(theta)) / 2
        out.append(EntropyTerm(j, theta, x, _binary_entropy(x, math.sin(theta / 2) ** 2)))
    return tuple(out)


def total_storage_cost(convergence_tol: float = 1e-9, max_terms: int = 200) -> EntropyTable:
    """Sum S_k * sum_{l<k} 2^-l until the remaining tail is below ``tol``.

    Tail bound: from k = 2 on, S_{k+1} <= S_k / 2, so the terms beyond K add
    at most 2 * S_K (the weight never exceeds 2). The ratio condition is
    checked on every computed term.
    """
    if convergence_tol <= 0:
        raise qsim.InvalidParameterError("tolerance must be positive")
    terms: list[EntropyTerm] = []
    total = entropy_sum = 0.0
    tail = math.inf
    for term in entropy_terms(max_terms):
        if terms and term.j > 2 and term.entropy > terms[-1].entropy / 2:
            raise ArithmeticError(f"entropy ratio bound fails at j={term.j}")
        terms.append(term)
        total += term.entropy * (2 - 2.0 ** (1 - term.j))
        entropy_sum += term.entropy
        tail = 2 * term.entropy if term.j >= 2 else math.inf
        if tail < convergence_tol:
            break
    else:
        raise ArithmeticError("storage-cost series did not converge")
    if not (total <= 2 * entropy_sum <= 4):
        raise ArithmeticError(f"bound violated: cost {total}, 2*sum S {2 * entropy_sum}")
    return EntropyTable(tuple(terms), total, entropy_sum, tail)


def average_key_length(max_l: int) -> float:
    """sum_{l=1}^{max_l} l / 2^l (tends to 2)."""
    if max_l < 1:
        raise qsim.InvalidParameterError("max_l must be >= 1")
    return math.fsum(l / 2.0 ** l for l in range(1, max_l + 1))


def cascade_success_prob(l: int) -> float:
    if l < 1:
        raise qsim.InvalidParameterError("key length must be >= 1")
    return 1.0 - 0.5 ** l


def retrieval_failure(N: int) -> float:
    if N < 1:
        raise qsim.InvalidParameterError("N must be >= 1")
    return 0.5 ** N


def average_success_prob(l: int, p_theta=None, samples: int = 4096) -> float:
    """Uniform average over theta in [0, 2*pi) of a success probability.

    The integrand is periodic, so the equispaced (trapezoid) rule is used.
    By default ``p_theta`` is the cascade's success, which does not depend on
    theta.
    """
    thetas = np.arange(samples) * (2 * np.pi / samples)
    if p_theta is None:
        values = np.full(samples, cascade_success_prob(l))
    else:
        values = np.asarray([p_theta(t) for t in thetas], dtype=float)
    return float(np.mean(values))


def verification_pass_curve(epsilon: float, n_max: int) -> list[CurvePoint]:
    """Points (n, (1 - eps)^n) for n = 1..n_max.

    The power is taken in exact rational arithmetic and rounded once, since
    rounding 1 - eps first would be amplified n-fold.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise qsim.InvalidParameterError("epsilon must be a probability")
    if n_max < 1:
        raise qsim.InvalidParameterError("n_max must be >= 1")
    base = 1 - Fraction(epsilon)
    return [CurvePoint(float(n), float(base ** n)) for n in range(1, n_max + 1)]


def gate_distance(g1, g2) -> float:
    """sqrt(Tr((g1 - g2)^dagger (g1 - g2))), the Frobenius distance."""
    g1 = np.asarray(g1, dtype=complex)
    g2 = np.asarray(g2, dtype=complex)
    if g1.shape != g2.shape or g1.ndim != 2:
        raise qsim.DimensionError(f"cannot compare gates of shape {g1.shape} and {g2.shape}")
    diff = g1 - g2
    return float(np.sqrt(np.trace(qsim.dagger(diff) @ diff).real))


def swap_pass_prob(delta):
    """SWAP-test Pr[0] for two phase states whose angles differ by ``delta``."""
    return 0.5 + 0.5 * np.cos(np.asarray(delta, dtype=float) / 2) ** 2
