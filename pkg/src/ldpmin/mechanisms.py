"""Local-privacy primitives: binary randomized response and a Laplace sanitizer.

Randomized response reports a {-1,+1} bit truthfully with probability
e^eps / (1 + e^eps) and flipped otherwise, so the likelihood ratio between
the two possible inputs is exactly e^eps for every output.  Averaged reports
are debiased by the factor (e^eps + 1)/(e^eps - 1), which turns the noisy
mean back into an unbiased frequency estimate.

All sampling goes through an explicitly passed random stream and each
operation consumes a fixed number of uniform variates (one per sanitized
value), so a run is replayable from its seed.  ``epsilon = math.inf`` is
accepted everywhere as the no-noise switch used by equivalence tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def _validate_epsilon(value: float, name: str) -> None:
    if math.isnan(value) or value <= 0.0:
        raise ValueError(f"{name} must be positive, got {value!r}")


@dataclass(frozen=True)
class PrivacyBudget:
    """Total privacy loss epsilon for one user across a whole session.

    ``epsilon = math.inf`` disables the noise entirely; it is allowed so that
    noise-free runs can exercise the exact same code paths.
    """

    epsilon: float

    def __post_init__(self):
        _validate_epsilon(self.epsilon, "epsilon")

    def split(self, rounds: int) -> "RoundBudget":
        """Evenly split the budget over ``rounds`` sequential queries."""
        if rounds < 1:
            raise ValueError(f"rounds must be >= 1, got {rounds}")
        return RoundBudget(self.epsilon / rounds)


@dataclass(frozen=True)
class RoundBudget:
    """Per-query privacy parameter (epsilon / depth under an even split)."""

    epsilon_round: float

    def __post_init__(self):
        _validate_epsilon(self.epsilon_round, "epsilon_round")


def rr_keep_probability(budget: RoundBudget) -> float:
    """Probability e^eps/(1+e^eps) that randomized response keeps the bit.

    Strictly inside (1/2, 1) for finite eps; 1/2 in the eps -> 0 limit and
    exactly 1.0 at eps = inf.
    """
    return 1.0 / (1.0 + math.exp(-budget.epsilon_round))


def rr_flip_probability(budget: RoundBudget) -> float:
    """Probability 1/(1+e^eps) that the reported bit is negated."""
    return 1.0 / (1.0 + math.exp(budget.epsilon_round))


def randomized_response(bit: int, budget: RoundBudget, rng) -> int:
    """Sanitize one {-1,+1} bit, consuming exactly one uniform variate."""
    if bit not in (-1, 1):
        raise ValueError(f"bit must be -1 or +1, got {bit!r}")
    if rng.random() < rr_keep_probability(budget):
        return bit
    return -bit


def rr_respond_many(bits: np.ndarray, budget: RoundBudget, rng) -> np.ndarray:
    """Vectorized randomized response over a bit vector.

    Consumes one uniform per entry, in index order, so the output is
    bit-identical to calling :func:`randomized_response` in a loop over the
    same stream.
    """
    bits = np.asarray(bits)
    u = rng.random(bits.shape[0])
    return np.where(u < rr_keep_probability(budget), bits, -bits)


def phi_correction(budget: RoundBudget) -> float:
    """Debiasing factor (e^eps + 1)/(e^eps - 1) = coth(eps/2).

    Tends to 1 as eps -> inf (no correction needed without noise) and to
    2/eps as eps -> 0.
    """
    return 1.0 / math.tanh(budget.epsilon_round / 2.0)


def unbiased_phi(sum_z: int, n: int, budget: RoundBudget) -> float:
    """Unbiased estimate of the fraction of users whose raw bit was +1.

    Given the sum of n sanitized bits, returns

        (1/2n) * (e^eps + 1)/(e^eps - 1) * sum_z + 1/2 .

    The estimate is intentionally not clamped: it can land outside [0, 1]
    for finite eps, and downstream threshold tests compare it raw.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if abs(sum_z) > n:
        raise ValueError(f"|sum_z| = {abs(sum_z)} exceeds n = {n}")
    if (sum_z - n) % 2 != 0:
        raise ValueError(f"sum_z = {sum_z} has wrong parity for n = {n}")
    return phi_correction(budget) * sum_z / (2.0 * n) + 0.5


def laplace_scale(budget: PrivacyBudget) -> float:
    """Noise scale 2/eps for a single release of a value in [-1, 1]."""
    return 2.0 / budget.epsilon


def _laplace_from_uniform(u: float, scale: float) -> float:
    # Inverse CDF from a single uniform; keeps runs replayable from a seed.
    v = u - 0.5
    w = 1.0 - 2.0 * abs(v)
    if w <= 0.0:  # u == 0.0 happens with probability 2^-53; avoid log(0)
        w = 5e-324
    noise = -scale * math.log(w)
    return noise if v >= 0.0 else -noise


def laplace_sanitize(x: float, budget: PrivacyBudget, rng) -> float:
    """Report x + Laplace(0, 2/eps) noise; consumes one uniform variate.

    The output is deliberately unclamped, even though the input lives in
    [-1, 1].
    """
    if not -1.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [-1, 1], got {x!r}")
    return x + _laplace_from_uniform(rng.random(), laplace_scale(budget))


def laplace_noise_many(n: int, budget: PrivacyBudget, rng) -> np.ndarray:
    """n Laplace(0, 2/eps) draws, one uniform each, in index order."""
    u = rng.random(n)
    v = u - 0.5
    w = 1.0 - 2.0 * np.abs(v)
    w[w <= 0.0] = 5e-324
    return np.where(v >= 0.0, -1.0, 1.0) * (laplace_scale(budget) * np.log(w))
