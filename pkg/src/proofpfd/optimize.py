"""Placement of partial tests inside the full test interval to minimize PFD_avg."""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .analytic import _pfd_average_exact, max_unavailability, pfd_average_no_partial
from .model import SystemSpec, TestPolicy, TestSchedule, ValidationError, periodic_schedule

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
MIN_GAP_FRACTION = 1e-6
TIE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class OptimizedPolicy:
    schedule: TestSchedule
    pfd_avg_star: float
    reference: TestSchedule
    reference_pfd_avg: float
    improvement_fraction: float
    u_max_star: float
    u_max_reference: float
    flat_objective: bool
    sweeps: int
    evaluations: int
    starts: int

    @property
    def intervals(self) -> tuple[float, ...]:
        return self.schedule.intervals

    @property
    def u_max_reduction(self) -> float:
        if self.u_max_reference == 0:
            return 0.0
        return 1.0 - self.u_max_star / self.u_max_reference


@dataclass
class _Search:
    times: np.ndarray
    value: float
    sweeps: int = 0
    evaluations: int = 0


def _objective(system: SystemSpec, efficiency: float, times: np.ndarray) -> float:
    """PFD_avg for raw instants; zero-length gaps are allowed."""
    starts = np.concatenate(([0.0], times[:-1]))
    return _pfd_average_exact(system, efficiency, starts, times - starts, float(times[-1]))


def evaluate_candidate(system: SystemSpec, efficiency: float, schedule: TestSchedule) -> float:
    """Exact PFD_avg of a schedule, the quantity being minimized."""
    if schedule.n == 1:
        return pfd_average_no_partial(system, schedule.tau)
    return _objective(system, efficiency, np.asarray(schedule.test_times, dtype=float))


def _golden_section(f, lo: float, hi: float, tol: float):
    """Minimize a unimodal ``f`` on [lo, hi]; returns (x, f(x), evaluations)."""
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    evals = 2
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
        evals += 1
    if fc <= fd:
        return c, fc, evals
    return d, fd, evals


def _descend(system: SystemSpec, efficiency: float, start: np.ndarray,
             rel_tol: float, max_evals: int) -> _Search:
    tau = float(start[-1])
    times = start.copy()
    state = _Search(times, _objective(system, efficiency, times), evaluations=1)
    line_tol = 1e-10 * tau
    while state.evaluations < max_evals:
        before = state.value
        for i in range(len(times) - 1):
            lo = times[i - 1] if i > 0 else 0.0
            hi = times[i + 1]

            def along(x, i=i):
                trial = times.copy()
                trial[i] = x
                return _objective(system, efficiency, trial)

            x, fx, used = _golden_section(along, lo, hi, line_tol)
            state.evaluations += used
            if fx < state.value:
                times[i] = x
                state.value = fx
            if state.evaluations >= max_evals:
                break
        state.sweeps += 1
        if before - state.value <= rel_tol * abs(before):
            break
    state.times = times
    return state


def _starting_points(n: int, tau: float) -> list[np.ndarray]:
    """The periodic schedule followed by 2^(n-1) lattice perturbations of its gaps."""
    step = tau / n
    points = [np.array([i * step for i in range(1, n)] + [tau])]
    for corner in itertools.product((-0.5, 0.5), repeat=n - 1):
        gaps = np.array([step * (1.0 + c) for c in corner] + [step])
        gaps *= tau / gaps.sum()
        times = np.cumsum(gaps)
        times[-1] = tau
        points.append(times)
    return points


def _repair(times: np.ndarray, tau: float) -> np.ndarray:
    """Enforce a minimum gap between consecutive instants; the last stays at tau."""
    gap = MIN_GAP_FRACTION * tau
    out = times.astype(float).copy()
    out[-1] = tau
    for i in range(len(out) - 2, -1, -1):
        out[i] = min(out[i], out[i + 1] - gap)
    for i in range(len(out) - 1):
        lower = (out[i - 1] if i > 0 else 0.0) + gap
        out[i] = max(out[i], lower)
    return out


def optimize_schedule(system: SystemSpec, efficiency: float, n: int, tau: float,
                      reference: Optional[TestSchedule] = None, *,
                      workers: int = 1, rel_tol: float = 1e-12,
                      max_evals_per_start: int = 10_000) -> OptimizedPolicy:
    """Choose t_1 <= ... <= t_{n-1} in [0, tau] minimizing the exact PFD_avg.

    ``tau`` is in hours. ``reference`` defaults to the periodic schedule and is
    always kept as a candidate, so the result is never worse than it. Starts
    may be refined on ``workers`` threads; the result does not depend on it.
    """
    TestPolicy(periodic_schedule(n, tau), efficiency)  # validates n, tau, efficiency
    periodic = periodic_schedule(n, tau)
    if reference is None:
        reference = periodic
    if reference.n != n or not math.isclose(reference.tau, tau, rel_tol=1e-12):
        raise ValidationError(
            f"reference schedule has n = {reference.n}, tau = {reference.tau} h; "
            f"expected n = {n}, tau = {tau} h", field="reference")

    ref_value = evaluate_candidate(system, efficiency, reference)
    flat = efficiency == 0.0 or system.lam == 0.0
    if n == 1 or flat:
        return _result(system, efficiency, reference, ref_value, reference, ref_value,
                       flat, 0, 1, 0)

    starts = _starting_points(n, tau)

    def run(start):
        return _descend(system, efficiency, start, rel_tol, max_evals_per_start)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            searches = list(pool.map(run, starts))
    else:
        searches = [run(s) for s in starts]

    periodic_gaps = np.diff(np.concatenate(([0.0], periodic.test_times)))
    candidates = [(np.asarray(reference.test_times, dtype=float), ref_value)]
    candidates.append((np.asarray(periodic.test_times, dtype=float),
                       evaluate_candidate(system, efficiency, periodic)))
    for s in searches:
        repaired = _repair(s.times, tau)
        candidates.append((repaired, _objective(system, efficiency, repaired)))

    best_value = min(v for _, v in candidates)

    def distance(times):
        gaps = np.diff(np.concatenate(([0.0], times)))
        return float(np.linalg.norm(gaps - periodic_gaps))

    near = [(distance(t), k) for k, (t, v) in enumerate(candidates)
            if v <= best_value + TIE_TOLERANCE * abs(best_value)]
    _, k_best = min(near)
    best_times, best = candidates[k_best]
    schedule = reference if k_best == 0 else TestSchedule(best_times)
    return _result(system, efficiency, schedule, best, reference, ref_value, flat,
                   sum(s.sweeps for s in searches),
                   sum(s.evaluations for s in searches) + 2 + len(searches),
                   len(starts))


def _result(system, efficiency, schedule, value, reference, ref_value, flat,
            sweeps, evaluations, starts) -> OptimizedPolicy:
    u_star, _ = max_unavailability(system, TestPolicy(schedule, efficiency))
    u_ref, _ = max_unavailability(system, TestPolicy(reference, efficiency))
    improvement = 0.0 if ref_value == 0 else 1.0 - value / ref_value
    return OptimizedPolicy(
        schedule=schedule,
        pfd_avg_star=value,
        reference=reference,
        reference_pfd_avg=ref_value,
        improvement_fraction=improvement,
        u_max_star=u_star,
        u_max_reference=u_ref,
        flat_objective=flat,
        sweeps=sweeps,
        evaluations=evaluations,
        starts=starts,
    )


def optimize_policy(system: SystemSpec, policy: TestPolicy, **kwargs) -> OptimizedPolicy:
    """Optimize starting from an existing policy, which serves as the reference."""
    schedule = policy.schedule
    return optimize_schedule(system, policy.efficiency, schedule.n, schedule.tau,
                             reference=schedule, **kwargs)


def schedule_from_gaps(gaps: Sequence[float]) -> TestSchedule:
    return TestSchedule(np.cumsum(np.asarray(gaps, dtype=float)).tolist())
