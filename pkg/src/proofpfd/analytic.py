"""Closed-form availability and PFD of MooN systems under partial and full tests.

Exact mode evaluates the expanded exponential sums weighted by the integer
coefficients S(M, N, x). Those sums alternate in sign, so they are computed in
extended precision with compensated summation and an a-priori error bound;
when the bound is too loose for the result (tiny PFD, large redundancy), the
interval averages are recomputed by Gauss-Legendre quadrature of the
cancellation-free binomial tail instead.

Approximate mode uses the first-order Taylor forms, clamped to [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Sequence

import numpy as np

from .combinatorics import binomial, s_coefficients
from .model import SystemSpec, TestPolicy, TestSchedule, ValidationError, periodic_schedule

_LD = np.longdouble
_EPS_LD = float(np.finfo(_LD).eps)
# Relative error bound above which exact PFD falls back to quadrature.
_CANCELLATION_LIMIT = 1e-12
_SERIES_CUTOFF = 1e-5
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(48)


class EvaluationMode(Enum):
    EXACT = "exact"
    APPROXIMATE = "approx"

    @classmethod
    def parse(cls, value: "str | EvaluationMode") -> "EvaluationMode":
        if isinstance(value, EvaluationMode):
            return value
        key = str(value).lower()
        if key in ("approx", "approximate"):
            return cls.APPROXIMATE
        if key == "exact":
            return cls.EXACT
        raise ValueError(f"unknown evaluation mode {value!r}")


EXACT = EvaluationMode.EXACT
APPROXIMATE = EvaluationMode.APPROXIMATE


@dataclass(frozen=True)
class IntervalPFD:
    index: int
    start: float
    end: float
    pfd: float


@dataclass(frozen=True)
class PFDReport:
    pfd_avg: float
    per_interval: tuple[IntervalPFD, ...]
    max_unavailability: float
    max_unavailability_time: float
    mode: EvaluationMode


@dataclass(frozen=True)
class AvailabilityCurve:
    t: np.ndarray
    availability: np.ndarray

    @property
    def unavailability(self) -> np.ndarray:
        return 1.0 - self.availability

    def __len__(self):
        return len(self.t)

    def rows(self):
        return zip(self.t.tolist(), self.availability.tolist(), self.unavailability.tolist())


# ---------------------------------------------------------------------------
# helpers


def one_minus_exp_over(u):
    """(1 - e^{-u}) / u, accurate for small u; accepts arrays (longdouble)."""
    u = np.asarray(u, dtype=_LD)
    small = u < _SERIES_CUTOFF
    safe = np.where(small, _LD(1), u)
    out = -np.expm1(-safe) / safe
    series = 1 - u / 2 + u * u / 6 - u * u * u / 24
    return np.where(small, series, out)


def _compensated_sum(values) -> tuple:
    """Neumaier sum of longdouble values; returns (sum, sum of magnitudes)."""
    total = _LD(0)
    comp = _LD(0)
    mag = _LD(0)
    for v in values:
        v = _LD(v)
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
        mag += abs(v)
    return total + comp, mag


@lru_cache(maxsize=256)
def _coefficients(m: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    coeffs = s_coefficients(m, n)
    orders = np.array(list(coeffs.orders), dtype=_LD)
    values = np.array([_LD(v) for v in coeffs.values], dtype=_LD)
    return orders, values


def _clamp(p: float) -> float:
    return min(1.0, max(0.0, float(p)))


def _check_t(t: float, tau: float) -> None:
    if not (0.0 <= t <= tau):
        raise ValidationError(f"t = {t} h is outside [0, {tau}]", field="t")


def _check_mode(mode) -> EvaluationMode:
    return EvaluationMode.parse(mode)


# ---------------------------------------------------------------------------
# availability


def component_availability(t: float, policy: TestPolicy, lam: float,
                           mode: EvaluationMode | str = EXACT,
                           left_limit: bool = False) -> float:
    """Probability that one component is working at ``t`` (hours).

    At a test instant the post-repair value is returned unless ``left_limit``.
    """
    mode = _check_mode(mode)
    schedule = policy.schedule
    _check_t(t, schedule.tau)
    i = schedule.interval_index(t, left_limit)
    if i > schedule.n or lam == 0.0:
        return 1.0
    start = schedule.starts[i - 1]
    e = policy.efficiency
    if mode is APPROXIMATE:
        return _clamp(1.0 + e * lam * start - lam * t)
    # both parts in series: partial-testable part renewed at start, the rest aged t
    return math.exp(-lam * (t - e * start))


def _system_availability_ld(t: float, system: SystemSpec, policy: TestPolicy,
                            left_limit: bool):
    schedule = policy.schedule
    i = schedule.interval_index(t, left_limit)
    if i > schedule.n or system.lam == 0.0:
        return _LD(1)
    start = schedule.starts[i - 1]
    orders, values = _coefficients(system.m, system.n_components)
    age = _LD(system.lam) * (_LD(t) - _LD(policy.efficiency) * _LD(start))
    terms = values * np.exp(-orders * age)
    total, _ = _compensated_sum(terms)
    return total


def system_availability(t: float, system: SystemSpec, policy: TestPolicy,
                        mode: EvaluationMode | str = EXACT,
                        left_limit: bool = False) -> float:
    """A(t) of the MooN system; post-repair at test instants unless ``left_limit``."""
    mode = _check_mode(mode)
    schedule = policy.schedule
    _check_t(t, schedule.tau)
    if mode is APPROXIMATE:
        i = schedule.interval_index(t, left_limit)
        if i > schedule.n or system.lam == 0.0:
            return 1.0
        start = schedule.starts[i - 1]
        r = system.redundancy
        u = binomial(system.n_components, system.m - 1) * (
            system.lam * (t - policy.efficiency * start)) ** r
        return _clamp(1.0 - u)
    return _clamp(_system_availability_ld(t, system, policy, left_limit))


def system_unavailability(t: float, system: SystemSpec, policy: TestPolicy,
                          mode: EvaluationMode | str = EXACT,
                          left_limit: bool = False) -> float:
    mode = _check_mode(mode)
    if mode is APPROXIMATE:
        return 1.0 - system_availability(t, system, policy, mode, left_limit)
    _check_t(t, policy.tau)
    return _clamp(_LD(1) - _system_availability_ld(t, system, policy, left_limit))


# ---------------------------------------------------------------------------
# exact PFD


def _binomial_tail_integral(system: SystemSpec, u0: float, u1: float) -> float:
    """Integral over u in [u0, u1] of P(at least N-M+1 of N components failed),
    each failed with probability 1 - e^{-u}."""
    n = system.n_components
    r = system.redundancy
    width = u1 - u0
    if width <= 0:
        return 0.0
    panels = max(1, math.ceil(width * n / 2.0))
    edges = np.linspace(u0, u1, panels + 1)
    half = np.diff(edges) / 2.0
    mid = (edges[:-1] + edges[1:]) / 2.0
    u = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    q = -np.expm1(-u)
    p = np.exp(-u)
    tail = np.zeros_like(u)
    for k in range(r, n + 1):
        tail += math.comb(n, k) * q ** k * p ** (n - k)
    return float(math.fsum(w * tail))


def _interval_pfd_quadrature(system: SystemSpec, e: float, start: float, length: float) -> float:
    lam = system.lam
    u0 = lam * (1.0 - e) * start
    integral = _binomial_tail_integral(system, u0, u0 + lam * length)
    return integral / (lam * length)


def _expanded_pfd(system: SystemSpec, e: float, starts: np.ndarray, lengths: np.ndarray,
                  horizon: float):
    """1 - sum_x S_x sum_i e^{-x(1-E) lam s_i} (1 - e^{-x lam T_i}) / (x lam horizon).

    Returns (value, reliable) where ``reliable`` is False when cancellation in the
    alternating sum may have destroyed more than the allowed relative accuracy.
    """
    lam = _LD(system.lam)
    orders, values = _coefficients(system.m, system.n_components)
    x = orders[:, None]
    s = np.asarray(starts, dtype=_LD)[None, :]
    big_t = np.asarray(lengths, dtype=_LD)[None, :]
    decay = np.exp(-x * (1 - _LD(e)) * lam * s)
    inner = (decay * one_minus_exp_over(x * lam * big_t) * big_t).sum(axis=1) / _LD(horizon)
    total, magnitude = _compensated_sum(values * inner)
    result = _LD(1) - total
    bound = 16 * _EPS_LD * (float(magnitude) + 1.0)
    reliable = bound <= _CANCELLATION_LIMIT * abs(float(result))
    return float(result), reliable


def _pfd_interval_exact(system: SystemSpec, e: float, start: float, length: float) -> float:
    if system.lam == 0.0:
        return 0.0
    value, ok = _expanded_pfd(system, e, np.array([start]), np.array([length]), length)
    if not ok:
        value = _interval_pfd_quadrature(system, e, start, length)
    return _clamp(value)


def _pfd_average_exact(system: SystemSpec, e: float, starts: Sequence[float],
                       lengths: Sequence[float], tau: float) -> float:
    if system.lam == 0.0:
        return 0.0
    value, ok = _expanded_pfd(system, e, np.asarray(starts), np.asarray(lengths), tau)
    if not ok:
        value = math.fsum(
            length * _interval_pfd_quadrature(system, e, start, length)
            for start, length in zip(starts, lengths) if length > 0
        ) / tau
    return _clamp(value)


# ---------------------------------------------------------------------------
# approximate PFD


def _approx_interval_integral(system: SystemSpec, e: float, start: float, end: float) -> float:
    """Integral of the Taylor unavailability over [start, end] (not divided by T)."""
    r = system.redundancy
    coeff = binomial(system.n_components, system.m - 1) * system.lam ** r / (r + 1)
    return coeff * ((end - e * start) ** (r + 1) - (start * (1.0 - e)) ** (r + 1))


# ---------------------------------------------------------------------------
# public PFD operations


def pfd_interval(i: int, system: SystemSpec, policy: TestPolicy,
                 mode: EvaluationMode | str = EXACT) -> float:
    """Mean unavailability between the (i-1)th and the ith test (1-based ``i``)."""
    mode = _check_mode(mode)
    schedule = policy.schedule
    if isinstance(i, bool) or not isinstance(i, int) or not 1 <= i <= schedule.n:
        raise ValidationError(f"test index {i!r} out of range 1..{schedule.n}", field="i")
    start = schedule.starts[i - 1]
    length = schedule.intervals[i - 1]
    if system.lam == 0.0:
        return 0.0
    if mode is APPROXIMATE:
        return _clamp(_approx_interval_integral(system, policy.efficiency, start,
                                                schedule.test_times[i - 1]) / length)
    return _pfd_interval_exact(system, policy.efficiency, start, length)


def _pfd_avg_value(system: SystemSpec, policy: TestPolicy, mode: EvaluationMode) -> float:
    schedule = policy.schedule
    if system.lam == 0.0:
        return 0.0
    if mode is APPROXIMATE:
        total = math.fsum(
            _approx_interval_integral(system, policy.efficiency, s, t)
            for s, t in zip(schedule.starts, schedule.test_times))
        return _clamp(total / schedule.tau)
    return _pfd_average_exact(system, policy.efficiency, schedule.starts,
                              schedule.intervals, schedule.tau)


def pfd_average(system: SystemSpec, policy: TestPolicy,
                mode: EvaluationMode | str = EXACT) -> PFDReport:
    """PFD_avg over the full test interval with the per-interval breakdown."""
    mode = _check_mode(mode)
    schedule = policy.schedule
    per_interval = tuple(
        IntervalPFD(i, s, t, pfd_interval(i, system, policy, mode))
        for i, (s, t) in enumerate(zip(schedule.starts, schedule.test_times), start=1)
    )
    u_max, t_max = max_unavailability(system, policy, mode)
    return PFDReport(
        pfd_avg=_pfd_avg_value(system, policy, mode),
        per_interval=per_interval,
        max_unavailability=u_max,
        max_unavailability_time=t_max,
        mode=mode,
    )


def pfd_average_no_partial(system: SystemSpec, tau: float,
                           mode: EvaluationMode | str = EXACT) -> float:
    """PFD_avg when only the full test at ``tau`` hours is performed."""
    mode = _check_mode(mode)
    if not (math.isfinite(tau) and tau > 0):
        raise ValidationError(f"full test interval must be positive, got {tau!r}", field="tau")
    if system.lam == 0.0:
        return 0.0
    if mode is APPROXIMATE:
        r = system.redundancy
        return _clamp(binomial(system.n_components, system.m - 1)
                      * (system.lam * tau) ** r / (r + 1))
    return _pfd_interval_exact(system, 0.0, 0.0, tau)


def pfd_average_periodic(system: SystemSpec, efficiency: float, n: int, tau: float,
                         mode: EvaluationMode | str = EXACT) -> float:
    """PFD_avg for n - 1 equally spaced partial tests followed by the full test."""
    mode = _check_mode(mode)
    schedule = periodic_schedule(n, tau)
    policy = TestPolicy(schedule, efficiency)
    if system.lam == 0.0:
        return 0.0
    step = tau / n
    lam = system.lam
    r = system.redundancy
    if mode is APPROXIMATE:
        a = 1.0 - efficiency
        total = math.fsum((1 + j * a) ** (r + 1) - (j * a) ** (r + 1) for j in range(n))
        coeff = binomial(system.n_components, system.m - 1) * (lam * step) ** r / (r + 1)
        return _clamp(coeff * total / n)
    orders, values = _coefficients(system.m, system.n_components)
    x = orders[:, None]
    j = np.arange(n, dtype=_LD)[None, :]
    ld_step = _LD(step)
    mean_decay = np.exp(-x * (1 - _LD(efficiency)) * _LD(lam) * j * ld_step).sum(axis=1) / n
    inner = one_minus_exp_over(orders * _LD(lam) * ld_step) * mean_decay
    total, magnitude = _compensated_sum(values * inner)
    result = _LD(1) - total
    if 16 * _EPS_LD * (float(magnitude) + 1.0) > _CANCELLATION_LIMIT * abs(float(result)):
        return _pfd_avg_value(system, policy, mode)
    return _clamp(result)


# ---------------------------------------------------------------------------
# curves and extrema


def availability_curve(system: SystemSpec, policy: TestPolicy, step: float,
                       mode: EvaluationMode | str = EXACT) -> AvailabilityCurve:
    """Sample A(t) on [0, tau] every ``step`` hours.

    Every test instant appears twice: first the value just before the test,
    then the value just after repair (1 after the full test at tau).
    """
    mode = _check_mode(mode)
    if not (math.isfinite(step) and step > 0):
        raise ValidationError(f"step must be positive, got {step!r}", field="step")
    schedule = policy.schedule
    tests = set(schedule.test_times)
    grid = [k * step for k in range(int(math.floor(schedule.tau / step)) + 1)]
    points = sorted(set(t for t in grid if t not in tests and t < schedule.tau) | tests)
    ts, values = [], []
    for t in points:
        if t in tests:
            ts.append(t)
            values.append(system_availability(t, system, policy, mode, left_limit=True))
        ts.append(t)
        values.append(system_availability(t, system, policy, mode))
    return AvailabilityCurve(np.array(ts, dtype=float), np.array(values, dtype=float))


def max_unavailability(system: SystemSpec, policy: TestPolicy,
                       mode: EvaluationMode | str = EXACT) -> tuple[float, float]:
    """Largest U(t) on [0, tau] and the test instant (left limit) where it occurs.

    U only grows between tests, so only the instants just before each test
    need to be inspected. Ties go to the earliest instant.
    """
    mode = _check_mode(mode)
    best_u, best_t = -1.0, policy.schedule.test_times[0]
    for t in policy.schedule.test_times:
        u = system_unavailability(t, system, policy, mode, left_limit=True)
        if u > best_u:
            best_u, best_t = u, t
    return best_u, best_t


SIL_BANDS = (
    (1e-5, 1e-4, "SIL 4"),
    (1e-4, 1e-3, "SIL 3"),
    (1e-3, 1e-2, "SIL 2"),
    (1e-2, 1e-1, "SIL 1"),
)


def sil_band(pfd_avg: float) -> str:
    """Low-demand SIL band for a PFD_avg (IEC 61508 table, informative)."""
    for low, high, label in SIL_BANDS:
        if low <= pfd_avg < high:
            return label
    return "none"
