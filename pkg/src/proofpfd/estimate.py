"""Failure rate and partial-test effectiveness from test feedback counts."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from scipy import stats

from .model import TestSchedule, ValidationError


@dataclass(frozen=True)
class TestObservations:
    """Failures ``counts[i-1]`` found at test i among ``k_total`` observed components."""

    __test__ = False

    schedule: TestSchedule
    counts: tuple[int, ...]
    k_total: int

    def __init__(self, schedule: TestSchedule, counts: Sequence[int], k_total: int):
        if isinstance(k_total, bool) or not isinstance(k_total, int) or k_total < 1:
            raise ValidationError(f"K must be a positive integer, got {k_total!r}", field="K")
        counts = tuple(counts)
        if len(counts) != schedule.n:
            raise ValidationError(
                f"expected {schedule.n} counts (one per test), got {len(counts)}",
                field="counts")
        for i, k in enumerate(counts, start=1):
            if isinstance(k, bool) or not isinstance(k, int):
                raise ValidationError(f"count k_{i} must be an integer, got {k!r}",
                                      field="counts")
            if not 0 <= k <= k_total:
                raise ValidationError(f"count k_{i} = {k} outside [0, K = {k_total}]",
                                      field="counts")
        object.__setattr__(self, "schedule", schedule)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "k_total", k_total)

    @property
    def total(self) -> int:
        return sum(self.counts)

    @property
    def partial_total(self) -> int:
        return sum(self.counts[:-1])


@dataclass(frozen=True)
class EstimationResult:
    lambda_hat: float
    lambda_ci: tuple[float, float]
    level: float
    e_hat: Optional[float]
    e_hat_unclamped: Optional[float]


def observe_probability(i: int, lam: float, efficiency: float, schedule: TestSchedule) -> float:
    """Linearized probability that a component is found failed at test i."""
    if not 1 <= i <= schedule.n:
        raise ValidationError(f"test index {i} out of range 1..{schedule.n}", field="i")
    p = efficiency * lam * schedule.intervals[i - 1]
    if i == schedule.n:
        p += (1.0 - efficiency) * lam * schedule.tau
    return min(1.0, max(0.0, p))


def lambda_from_counts(counts: Sequence[float], k_total: float, tau: float) -> float:
    """Failure rate estimate sum(k) / (K tau). Counts may be non-integer (expected counts)."""
    return math.fsum(counts) / (k_total * tau)


def efficiency_from_counts(counts: Sequence[float], schedule: TestSchedule) -> Optional[float]:
    """Unclamped effectiveness estimate (tau / t_{n-1}) * sum_{i<n} k_i / sum k_i."""
    total = math.fsum(counts)
    if total == 0:
        return None
    return schedule.tau / schedule.test_times[-2] * math.fsum(counts[:-1]) / total


def estimate_lambda(obs: TestObservations) -> float:
    return lambda_from_counts(obs.counts, obs.k_total, obs.schedule.tau)


def estimate_efficiency(obs: TestObservations, clamp: bool = True) -> Optional[float]:
    """Share of failures caught by partial tests, scaled by tau / t_{n-1}.

    Returns None when no failure was observed at all. Noisy counts can push the
    raw ratio above 1; it is clamped to [0, 1] unless ``clamp`` is False.
    """
    schedule = obs.schedule
    if schedule.n < 2:
        raise ValidationError("efficiency is not identifiable without partial tests",
                              field="counts")
    raw = efficiency_from_counts(obs.counts, schedule)
    if raw is None:
        return None
    return min(1.0, max(0.0, raw)) if clamp else raw


def lambda_confidence_interval(obs: TestObservations, level: float = 0.90) -> tuple[float, float]:
    """Two-sided Clopper-Pearson interval on sum(k)/K, expressed as a rate (per hour)."""
    if not (0.0 < level < 1.0):
        raise ValidationError(f"confidence level must lie in (0, 1), got {level!r}",
                              field="level")
    x, n = obs.total, obs.k_total
    alpha = 1.0 - level
    lower = 0.0 if x == 0 else float(stats.beta.ppf(alpha / 2, x, n - x + 1))
    upper = 1.0 if x == n else float(stats.beta.isf(alpha / 2, x + 1, n - x))
    tau = obs.schedule.tau
    return lower / tau, upper / tau


def estimate(obs: TestObservations, level: float = 0.90) -> EstimationResult:
    lam = estimate_lambda(obs)
    ci = lambda_confidence_interval(obs, level)
    if obs.schedule.n >= 2:
        e_hat = estimate_efficiency(obs)
        e_raw = estimate_efficiency(obs, clamp=False)
    else:
        e_hat = e_raw = None
    return EstimationResult(lam, ci, level, e_hat, e_raw)


def expected_counts(lam: float, efficiency: float, schedule: TestSchedule,
                    k_total: int) -> list[float]:
    """K * Obs_i for each test; the noiseless data the estimators invert exactly."""
    return [k_total * observe_probability(i, lam, efficiency, schedule)
            for i in range(1, schedule.n + 1)]

