"""Monte Carlo oracle for availability and PFD_avg.

Each component carries two independent exponential failure modes: one with
rate E*lambda that every test detects and repairs, one with rate
(1-E)*lambda that only the full test at tau repairs. Per trial the downtime of
the system is computed exactly from event times: inside each inter-test
segment a component is down from its first failure onwards, so the system is
down from the (N-M+1)-th smallest component failure time to the segment end.

Random numbers come from numpy's Philox4x64 counter-based generator keyed by
the master seed. Trials are grouped in fixed blocks of ``BLOCK_TRIALS``; block
b uses the stream whose counter's top word is b, and within a block trial j
consumes uniforms j*D .. j*D + D - 1. A trial's draws therefore depend only on
(seed, trial index), never on how blocks are spread over workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import SystemSpec, TestPolicy, ValidationError

BLOCK_TRIALS = 1 << 14


@dataclass(frozen=True)
class SimulationConfig:
    trials: int = 100_000
    master_seed: int = 20240101
    time_grid_step: Optional[float] = None
    workers: int = 1

    def __post_init__(self):
        if isinstance(self.trials, bool) or not isinstance(self.trials, int) or self.trials < 1:
            raise ValidationError(f"trials must be a positive integer, got {self.trials!r}",
                                  field="trials")
        if not 0 <= self.master_seed < 2 ** 64:
            raise ValidationError("seed must be a 64-bit unsigned integer", field="seed")
        if self.time_grid_step is not None and not self.time_grid_step > 0:
            raise ValidationError("time grid step must be positive", field="step")


@dataclass(frozen=True)
class SimulationResult:
    pfd_avg_estimate: float
    standard_error: float
    trials: int
    curve_estimate: Optional[tuple[np.ndarray, np.ndarray]] = None

    @property
    def standard_error_defined(self) -> bool:
        return math.isfinite(self.standard_error)


def _block_generator(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, block]))


def _block_sizes(trials: int):
    full, rest = divmod(trials, BLOCK_TRIALS)
    return [BLOCK_TRIALS] * full + ([rest] if rest else [])


def _down_starts(system: SystemSpec, policy: TestPolicy, uniforms: np.ndarray) -> np.ndarray:
    """Per trial, segment and component: the instant the component goes down.

    Shape (trials, n, N); the value equals the segment end when the component
    survives the segment.
    """
    n_comp = system.n_components
    schedule = policy.schedule
    n = schedule.n
    starts = np.asarray(schedule.starts)
    ends = np.asarray(schedule.test_times)
    e = policy.efficiency
    lam_p = e * system.lam
    lam_f = (1.0 - e) * system.lam
    u = uniforms.reshape(-1, n + 1, n_comp)
    with np.errstate(divide="ignore"):
        # -log1p(-u) is Exp(1); u < 1 so it is finite
        exp_p = -np.log1p(-u[:, :n, :])
        exp_f = -np.log1p(-u[:, n, :])
        p_fail = starts[None, :, None] + (exp_p / lam_p if lam_p > 0 else np.inf)
        f_fail = exp_f / lam_f if lam_f > 0 else np.full_like(exp_f, np.inf)
    first = np.minimum(p_fail, f_fail[:, None, :])
    return np.clip(first, starts[None, :, None], ends[None, :, None])


def _trial_downtime(system: SystemSpec, policy: TestPolicy, down: np.ndarray) -> np.ndarray:
    """Fraction of [0, tau] each trial spends with fewer than M components up."""
    r = system.redundancy
    ends = np.asarray(policy.schedule.test_times)
    kth = np.partition(down, r - 1, axis=2)[:, :, r - 1]
    return (ends[None, :] - kth).sum(axis=1) / policy.schedule.tau


def _system_up_at(system: SystemSpec, policy: TestPolicy, down: np.ndarray,
                  t: np.ndarray) -> np.ndarray:
    """Boolean (trials, len(t)): system up just before each instant t (left limit)."""
    schedule = policy.schedule
    times = np.asarray(schedule.test_times)
    seg = np.searchsorted(times, t, side="left")  # (t_{i-1}, t_i] -> i-1
    seg = np.minimum(seg, schedule.n - 1)
    failed = (down[:, seg, :] < t[None, :, None]).sum(axis=2)
    up = failed < system.redundancy
    up[:, t <= 0] = True
    return up


def _run_block(system, policy, seed, block, size, grid):
    n = policy.schedule.n
    draws = (n + 1) * system.n_components
    uniforms = _block_generator(seed, block).random(size * draws)
    down = _down_starts(system, policy, uniforms)
    frac = _trial_downtime(system, policy, down)
    counts = None
    if grid is not None:
        counts = _system_up_at(system, policy, down, grid).sum(axis=0)
    return frac, counts


def _simulate_blocks(system, policy, config, grid=None):
    sizes = _block_sizes(config.trials)
    jobs = [(b, s) for b, s in enumerate(sizes)]

    def work(job):
        block, size = job
        return _run_block(system, policy, config.master_seed, block, size, grid)

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(work, jobs))
    else:
        results = [work(j) for j in jobs]
    fractions = np.concatenate([r[0] for r in results])
    counts = None
    if grid is not None:
        counts = np.sum([r[1] for r in results], axis=0)
    return fractions, counts


def simulate_pfd(system: SystemSpec, policy: TestPolicy,
                 config: SimulationConfig = SimulationConfig()) -> SimulationResult:
    """Monte Carlo estimate of PFD_avg with its standard error.

    With a single trial the standard error is undefined and reported as NaN.
    """
    grid = None
    if config.time_grid_step is not None:
        tau = policy.tau
        grid = np.arange(0.0, tau, config.time_grid_step)
        grid = np.append(grid, tau)
    if system.lam == 0.0:
        curve = None
        if grid is not None:
            curve = (grid, np.ones_like(grid))
        return SimulationResult(0.0, 0.0, config.trials, curve)
    fractions, counts = _simulate_blocks(system, policy, config, grid)
    mean = float(np.mean(fractions))
    se = float(np.std(fractions, ddof=1) / math.sqrt(config.trials)) if config.trials > 1 \
        else math.nan
    curve = None
    if grid is not None:
        curve = (grid, counts / config.trials)
    return SimulationResult(min(1.0, max(0.0, mean)), se, config.trials, curve)


def simulate_availability(system: SystemSpec, policy: TestPolicy, config: SimulationConfig,
                          t: float) -> tuple[float, float]:
    """Fraction of trials with the system up at ``t`` (left limit at test instants)."""
    if not 0.0 <= t <= policy.tau:
        raise ValidationError(f"t = {t} h is outside [0, {policy.tau}]", field="t")
    if t == 0.0 or system.lam == 0.0:
        return 1.0, 0.0
    _, counts = _simulate_blocks(system, policy, config, np.array([float(t)]))
    p = float(counts[0]) / config.trials
    return p, math.sqrt(p * (1.0 - p) / config.trials)


def simulate_downtime_fractions(system: SystemSpec, policy: TestPolicy,
                                config: SimulationConfig) -> np.ndarray:
    """Per-trial downtime fractions, in trial order (for diagnostics and tests)."""
    if system.lam == 0.0:
        return np.zeros(config.trials)
    fractions, _ = _simulate_blocks(system, policy, config)
    return fractions
