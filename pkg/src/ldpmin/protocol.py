"""Interactive bisection for minimum finding, with and without sanitization.

Both variants maintain a shrinking interval [lo, hi] starting from the data
domain [-1, 1].  Each round queries every user about the midpoint tau: the
raw answer is sign(tau - x_i) with sign(0) = +1, so +1 means "my value is
at most tau".  The non-private search keeps the left half whenever any user
answered +1 (empirical CDF at tau strictly positive); the private search
sanitizes every answer through randomized response at budget eps/L, debiases
the mean, and keeps the left half when the estimate reaches a threshold
gamma.  After L rounds the midpoint of the final interval is returned, so
the discretization error alone is at most 2^-L.

Threshold comparisons are deliberately asymmetric: strictly greater than
zero in the noise-free search, greater-or-equal to gamma in the sanitized
one.  The difference only matters on degenerate inputs but both are kept
exactly as specified.

A simulated run consumes a single random stream in user-index order within
each round (exactly N uniforms per round), which makes transcripts
replayable from (cohort, config, seed).  A deployment where each user owns
an independent stream is simulated by passing ``user_rngs``; the estimator
distribution is identical either way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .datagen import Cohort
from .mechanisms import (
    PrivacyBudget,
    RoundBudget,
    laplace_noise_many,
    phi_correction,
    randomized_response,
    rr_respond_many,
)

BRANCH_LEFT = "left"
BRANCH_RIGHT = "right"


def sign(v: float) -> int:
    """+1 for v >= 0, -1 otherwise (zero counts as positive)."""
    return 1 if v >= 0 else -1


@dataclass(frozen=True)
class Interval:
    """Current search interval; always a dyadic piece of [-1, 1]."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (-1.0 <= self.lo < self.hi <= 1.0):
            raise ValueError(f"need -1 <= lo < hi <= 1, got [{self.lo}, {self.hi}]")

    @property
    def midpoint(self) -> float:
        # lo + (hi - lo)/2 keeps the midpoint an exact dyadic rational
        return self.lo + (self.hi - self.lo) / 2.0

    def left_half(self) -> "Interval":
        return Interval(self.lo, self.midpoint)

    def right_half(self) -> "Interval":
        return Interval(self.midpoint, self.hi)


@dataclass(frozen=True)
class ProtocolConfig:
    """Run parameters: total budget, depth, decision threshold, cohort size."""

    epsilon: float
    depth: int
    gamma: float
    n: int

    def __post_init__(self):
        if math.isnan(self.epsilon) or self.epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon!r}")
        if self.depth < 1:
            raise ValueError(f"depth must be >= 1, got {self.depth}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")

    @property
    def budget(self) -> PrivacyBudget:
        return PrivacyBudget(self.epsilon)

    @property
    def round_budget(self) -> RoundBudget:
        return self.budget.split(self.depth)


@dataclass(frozen=True)
class RoundRecord:
    """One audited round: queried midpoint, aggregate and branch taken."""

    round: int
    tau: float
    sum_z: int
    phi: float
    branch: str


@dataclass(frozen=True)
class Transcript:
    """Full audit trail of one run plus the final estimate.

    ``degenerate_gamma`` flags a threshold beyond the largest value the
    debiased estimate can reach, which forces every branch to the right;
    such runs are legal (tiny cohorts can produce them) but worth marking.
    """

    config: ProtocolConfig
    rounds: tuple[RoundRecord, ...]
    estimate: float
    degenerate_gamma: bool = False


def user_respond(x: float, tau: float, budget: RoundBudget, rng) -> int:
    """Sanitized sign(tau - x): one user's answer to one round's query."""
    if not -1.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [-1, 1], got {x!r}")
    if not -1.0 <= tau <= 1.0:
        raise ValueError(f"tau must lie in [-1, 1], got {tau!r}")
    return randomized_response(sign(tau - x), budget, rng)


def respond_round(values: np.ndarray, tau: float, budget: RoundBudget, rng) -> np.ndarray:
    """All N sanitized answers for one round, drawn in user-index order."""
    raw = np.where(tau - values >= 0.0, 1, -1)
    return rr_respond_many(raw, budget, rng)


def run_nonprivate_min(cohort: Cohort, depth: int) -> Transcript:
    """Noise-free bisection; deterministic, error at most 2^-depth.

    Branches left exactly when the empirical CDF at the midpoint is
    strictly positive, i.e. when at least one user sits at or below tau.
    """
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    values = cohort.values
    n = cohort.n
    interval = Interval(-1.0, 1.0)
    rounds = []
    for t in range(1, depth + 1):
        tau = interval.midpoint
        count = int(np.count_nonzero(values <= tau))
        phi = count / n
        if phi > 0.0:
            branch, interval = BRANCH_LEFT, interval.left_half()
        else:
            branch, interval = BRANCH_RIGHT, interval.right_half()
        rounds.append(RoundRecord(t, tau, 2 * count - n, phi, branch))
    config = ProtocolConfig(epsilon=math.inf, depth=depth, gamma=0.0, n=n)
    return Transcript(config, tuple(rounds), interval.midpoint)


def max_phi(config: ProtocolConfig) -> float:
    """Largest value the debiased estimate can attain (all answers +1)."""
    return 0.5 * phi_correction(config.round_budget) + 0.5


def run_private_min(cohort: Cohort, config: ProtocolConfig, rng=None, *, user_rngs=None) -> Transcript:
    """Sanitized bisection under an even eps/L split across rounds.

    Pass either ``rng`` (one shared stream, consumed in user-index order
    within each round, exactly N draws per round) or ``user_rngs`` (one
    independent stream per user, as a networked deployment would have).
    """
    if cohort.n != config.n:
        raise ValueError(f"cohort size {cohort.n} != configured n {config.n}")
    if (rng is None) == (user_rngs is None):
        raise ValueError("pass exactly one of rng or user_rngs")
    if user_rngs is not None and len(user_rngs) != config.n:
        raise ValueError(f"need {config.n} user streams, got {len(user_rngs)}")

    values = cohort.values
    n = config.n
    budget = config.round_budget
    correction = phi_correction(budget)
    degenerate = config.gamma > 0.5 * correction + 0.5

    interval = Interval(-1.0, 1.0)
    rounds = []
    for t in range(1, config.depth + 1):
        tau = interval.midpoint
        if user_rngs is not None:
            z = np.array([user_respond(x, tau, budget, g) for x, g in zip(values, user_rngs)])
        else:
            z = respond_round(values, tau, budget, rng)
        sum_z = int(z.sum())
        phi = correction * sum_z / (2.0 * n) + 0.5
        if phi >= config.gamma:
            branch, interval = BRANCH_LEFT, interval.left_half()
        else:
            branch, interval = BRANCH_RIGHT, interval.right_half()
        rounds.append(RoundRecord(t, tau, sum_z, phi, branch))
    return Transcript(config, tuple(rounds), interval.midpoint, degenerate_gamma=degenerate)


def run_private_max(cohort: Cohort, config: ProtocolConfig, rng=None, *, user_rngs=None) -> Transcript:
    """Maximum finding by reflection: negate the data, search, negate back.

    With the same stream, the estimate is exactly the negation of
    :func:`run_private_min` on the negated cohort.  Round records carry the
    reflected midpoints (the queries as seen in the original orientation);
    branch labels remain the literal threshold-test outcomes of the
    underlying mirrored search.
    """
    mirrored = run_private_min(cohort.negated(), config, rng, user_rngs=user_rngs)
    rounds = tuple(
        RoundRecord(r.round, -r.tau, r.sum_z, r.phi, r.branch) for r in mirrored.rounds
    )
    return Transcript(config, rounds, -mirrored.estimate, mirrored.degenerate_gamma)


def baseline_min(cohort: Cohort, budget: PrivacyBudget, rng) -> float:
    """Naive estimate: sanitize every value with Laplace(0, 2/eps), take the min.

    The whole budget is spent on a single release per user.  The output is
    unclamped and, since the minimum of N noise draws grows like
    -(2/eps) ln N, typically falls far outside the data domain.
    """
    noisy = cohort.values + laplace_noise_many(cohort.n, budget, rng)
    return float(noisy.min())
