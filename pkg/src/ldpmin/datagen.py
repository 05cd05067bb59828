"""Synthetic data models with controllable left-tail fatness, plus cohorts.

A model here is any object with ``cdf``, ``quantile``, ``x_min``, ``x_max``
and ``fat_alpha``.  The parametric ones are a rescaled beta distribution
(whose first shape parameter is exactly the fatness exponent of the left
tail) and a truncated normal (always exponent 1, like any truncated
density).  ``EmpiricalCDF`` wraps observed values.

Cohorts come in two flavours:

* fixed: user i holds the deterministic quantile F*((i-1)/(N-1)), so the
  empirical CDF of the cohort interpolates F exactly;
* iid: users hold independent draws from F.

Quantiles of the parametric models are computed by bisection on the CDF
(monotone, derivative-free, and robust next to the density singularities
that appear when the fatness exponent drops below 1); sampling is inverse
CDF from one uniform per value so that seeded runs are replayable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

_BISECT_STEPS = 48  # halves a width-2 bracket below 1e-14, past the 1e-12 target


def _bisect_quantile(model, q: np.ndarray) -> np.ndarray:
    """inf{x : cdf(x) >= q} by bisection, exact at the support endpoints."""
    q = np.asarray(q, dtype=float)
    if np.any((q < 0.0) | (q > 1.0)):
        raise ValueError("quantile levels must lie in [0, 1]")
    lo = np.full(q.shape, model.x_min)
    hi = np.full(q.shape, model.x_max)
    for _ in range(_BISECT_STEPS):
        mid = lo + (hi - lo) / 2.0
        ge = model.cdf(mid) >= q
        hi = np.where(ge, mid, hi)
        lo = np.where(ge, lo, mid)
    # the endpoint levels denote the support edges exactly; q = 0 in
    # particular means the left edge, not inf over the whole line
    return np.where(q == 0.0, model.x_min, np.where(q == 1.0, model.x_max, hi))


@dataclass(frozen=True)
class BetaScaled:
    """Beta(alpha, beta) stretched onto [x_min, x_min + delta] within [-1, 1].

    The left tail satisfies F(x) >= C (x - x_min)^alpha all the way up to
    the right support edge, so ``alpha`` is literally the model's fatness
    exponent (alpha = beta = 1 is the uniform distribution).
    """

    alpha: float
    beta: float
    x_min: float
    delta: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError("shape parameters must be positive")
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if self.x_min < -1.0 or self.x_min + self.delta > 1.0:
            raise ValueError(
                f"support [{self.x_min}, {self.x_min + self.delta}] leaves [-1, 1]"
            )

    @property
    def x_max(self) -> float:
        return self.x_min + self.delta

    @property
    def fat_alpha(self) -> float:
        return self.alpha

    def cdf(self, x):
        _check_domain(x)
        u = np.clip((np.asarray(x, dtype=float) - self.x_min) / self.delta, 0.0, 1.0)
        out = special.betainc(self.alpha, self.beta, u)
        return float(out) if np.isscalar(x) else out

    def quantile(self, q):
        out = _bisect_quantile(self, np.atleast_1d(q))
        return float(out[0]) if np.isscalar(q) else out


@dataclass(frozen=True)
class TruncNormal:
    """Normal(mu, sigma^2) conditioned on [x_min, x_max] subset of [-1, 1]."""

    mu: float
    sigma: float
    x_min: float
    x_max: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if not -1.0 <= self.x_min < self.x_max <= 1.0:
            raise ValueError(
                f"need -1 <= x_min < x_max <= 1, got [{self.x_min}, {self.x_max}]"
            )

    @property
    def fat_alpha(self) -> float:
        # any truncated density is bounded away from zero near its minimum
        return 1.0

    def _standardized(self, x):
        return (np.asarray(x, dtype=float) - self.mu) / self.sigma

    def cdf(self, x):
        _check_domain(x)
        a = special.ndtr(self._standardized(self.x_min))
        b = special.ndtr(self._standardized(self.x_max))
        xs = np.clip(np.asarray(x, dtype=float), self.x_min, self.x_max)
        out = (special.ndtr(self._standardized(xs)) - a) / (b - a)
        return float(out) if np.isscalar(x) else out

    def quantile(self, q):
        out = _bisect_quantile(self, np.atleast_1d(q))
        return float(out[0]) if np.isscalar(q) else out


@dataclass(frozen=True)
class EmpiricalCDF:
    """Step CDF of observed values: F(x) = (1/N) #{x_i <= x}.

    ``quantile(q)`` returns inf{t : F(t) >= q}, which for q in (0, 1] is the
    ceil(qN)-th order statistic.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.sort(np.asarray(self.values, dtype=float))
        if v.size == 0:
            raise ValueError("need at least one value")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return int(self.values.size)

    @property
    def x_min(self) -> float:
        return float(self.values[0])

    @property
    def x_max(self) -> float:
        return float(self.values[-1])

    @property
    def fat_alpha(self):
        return None

    def cdf(self, x):
        out = np.searchsorted(self.values, np.asarray(x, dtype=float), side="right") / self.n
        return float(out) if np.isscalar(x) else out

    def quantile(self, q):
        qs = np.atleast_1d(np.asarray(q, dtype=float))
        if np.any((qs < 0.0) | (qs > 1.0)):
            raise ValueError("quantile levels must lie in [0, 1]")
        idx = np.maximum(np.ceil(qs * self.n).astype(int), 1) - 1
        out = self.values[idx]
        return float(out[0]) if np.isscalar(q) else out


def _check_domain(x) -> None:
    xs = np.asarray(x, dtype=float)
    if np.any(xs < -1.0) or np.any(xs > 1.0):
        raise ValueError("evaluation points must lie in [-1, 1]")


def cdf(model, x):
    """CDF of a data model at x (x constrained to the data domain [-1, 1])."""
    return model.cdf(x)


@dataclass(frozen=True)
class Cohort:
    """N user values in [-1, 1] plus how they were generated."""

    values: np.ndarray
    setting: str  # "fixed" or "iid"
    source: str = ""

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.size == 0:
            raise ValueError("cohort must contain at least one value")
        if v.min() < -1.0 or v.max() > 1.0:
            raise ValueError("cohort values must lie in [-1, 1]")
        if self.setting not in ("fixed", "iid"):
            raise ValueError(f"setting must be 'fixed' or 'iid', got {self.setting!r}")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return int(self.values.size)

    def true_min(self) -> float:
        return float(self.values.min())

    def negated(self) -> "Cohort":
        return Cohort(-self.values, self.setting, self.source)


def fixed_cohort(model, n: int) -> Cohort:
    """Deterministic cohort x_(i) = F*((i-1)/(N-1)), i = 1..N, sorted.

    The first value is the support minimum exactly and the last the support
    maximum.
    """
    if n < 2:
        raise ValueError(f"fixed cohorts need n >= 2, got {n}")
    levels = np.arange(n, dtype=float) / (n - 1)
    return Cohort(model.quantile(levels), "fixed", source=repr(model))


def iid_cohort(model, n: int, rng) -> Cohort:
    """n independent inverse-CDF draws, one uniform variate per value."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return Cohort(model.quantile(rng.random(n)), "iid", source=repr(model))


def fatness_constant(model) -> tuple[float, float]:
    """Closed-form (C, x_bar) with F(x) >= C (x - x_min)^alpha on (x_min, x_bar).

    For the rescaled beta model the sharp constant is
    min{1, 1/(alpha B(alpha, beta))} / delta^alpha with x_bar the right
    support edge.  For the truncated normal the exponent is 1 and C is the
    smallest density value on the support (attained at a boundary).
    Empirical models carry no closed form and are rejected.
    """
    if isinstance(model, BetaScaled):
        c0 = min(1.0, 1.0 / (model.alpha * special.beta(model.alpha, model.beta)))
        return c0 / model.delta**model.alpha, model.x_max
    if isinstance(model, TruncNormal):
        a = (model.x_min - model.mu) / model.sigma
        b = (model.x_max - model.mu) / model.sigma
        z = special.ndtr(b) - special.ndtr(a)
        dens = min(_normal_pdf(a), _normal_pdf(b)) / (model.sigma * z)
        return dens, model.x_max
    raise TypeError(f"no closed-form fatness constant for {type(model).__name__}")


def _normal_pdf(t: float) -> float:
    return math.exp(-0.5 * t * t) / math.sqrt(2.0 * math.pi)


def rescale_to_unit(x: float, lo: float, hi: float) -> float:
    """Affine map [lo, hi] -> [-1, 1]."""
    return 2.0 * (x - lo) / (hi - lo) - 1.0


def rescale_from_unit(y: float, lo: float, hi: float) -> float:
    """Inverse of :func:`rescale_to_unit`."""
    return lo + (y + 1.0) * (hi - lo) / 2.0


def ingest_csv_cohort(path, lo: float, hi: float) -> Cohort:
    """Load a one-value-per-line file and rescale [lo, hi] to [-1, 1].

    A non-numeric first line is treated as a header and skipped.  Parse
    failures and out-of-range values are reported with their line number.
    """
    if not lo < hi:
        raise ValueError(f"need lo < hi, got lo={lo}, hi={hi}")
    raw: list[float] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                value = float(text)
            except ValueError:
                if lineno == 1:
                    continue  # header row
                raise ValueError(f"{path}: line {lineno}: not a number: {text!r}") from None
            if not lo <= value <= hi:
                raise ValueError(
                    f"{path}: line {lineno}: value {value!r} outside [{lo}, {hi}]"
                )
            raw.append(value)
    if not raw:
        raise ValueError(f"{path}: no numeric rows found")
    values = np.array([rescale_to_unit(v, lo, hi) for v in raw])
    return Cohort(values, "fixed", source=f"csv:{path}")
