"""Validated domain types: system architecture, test schedules and policies, time units.

All times are carried in hours internally. Rates are per hour.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence


class ValidationError(ValueError):
    """Raised when an input violates a domain invariant.

    ``field`` names the offending input so that callers (the CLI in
    particular) can point at it.
    """

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class TimeUnit(Enum):
    HOUR = "hour"
    MONTH = "month"
    YEAR = "year"

    @property
    def hours(self) -> float:
        return _HOURS_PER_UNIT[self]

    @classmethod
    def parse(cls, value: "str | TimeUnit") -> "TimeUnit":
        if isinstance(value, TimeUnit):
            return value
        key = str(value).strip().lower()
        aliases = {"h": "hour", "hours": "hour", "months": "month", "years": "year",
                   "y": "year", "yr": "year"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ValidationError(
                f"unknown time unit {value!r}; expected one of hour, month, year"
            ) from None


HOURS_PER_MONTH = 730.0
HOURS_PER_YEAR = 8760.0

_HOURS_PER_UNIT = {
    TimeUnit.HOUR: 1.0,
    TimeUnit.MONTH: HOURS_PER_MONTH,
    TimeUnit.YEAR: HOURS_PER_YEAR,
}


def convert_time(value: float, from_unit: TimeUnit | str, to_unit: TimeUnit | str) -> float:
    """Convert ``value`` between time units (month = 730 h, year = 8760 h)."""
    if not math.isfinite(value):
        raise ValidationError(f"time value must be finite, got {value!r}")
    src = TimeUnit.parse(from_unit)
    dst = TimeUnit.parse(to_unit)
    if src is dst:
        return float(value)
    return value * src.hours / dst.hours


@dataclass(frozen=True)
class SystemSpec:
    """An M-out-of-N system of identical components with constant failure rate."""

    m: int
    n_components: int
    lam: float

    def __post_init__(self):
        _check_system(self.m, self.n_components, self.lam)

    @property
    def redundancy(self) -> int:
        """Number of component failures that fail the system, N - M + 1."""
        return self.n_components - self.m + 1

    @property
    def label(self) -> str:
        return f"{self.m}oo{self.n_components}"


def _check_system(m, n, lam) -> None:
    if isinstance(m, bool) or not isinstance(m, int):
        raise ValidationError(f"M must be an integer, got {m!r}", field="m")
    if isinstance(n, bool) or not isinstance(n, int):
        raise ValidationError(f"N must be an integer, got {n!r}", field="n")
    if n < 1:
        raise ValidationError(f"N must be at least 1, got {n}", field="n")
    if m < 1:
        raise ValidationError(f"M must be at least 1, got {m}", field="m")
    if m > n:
        raise ValidationError(f"M exceeds N ({m} > {n})", field="m")
    try:
        lam_f = float(lam)
    except (TypeError, ValueError):
        raise ValidationError(f"failure rate must be a number, got {lam!r}", field="lambda") from None
    if not math.isfinite(lam_f):
        raise ValidationError(f"failure rate must be finite, got {lam!r}", field="lambda")
    if lam_f < 0:
        raise ValidationError(f"failure rate must be nonnegative, got {lam!r}", field="lambda")


def validate_system(m, n_components, lam) -> SystemSpec:
    """Build a :class:`SystemSpec` from raw inputs, raising :class:`ValidationError`."""
    _check_system(m, n_components, lam)
    return SystemSpec(int(m), int(n_components), float(lam))


@dataclass(frozen=True)
class TestSchedule:
    """Test instants t_1 < ... < t_n in hours; the last one is the full test."""

    __test__ = False  # not a pytest class

    test_times: tuple[float, ...]

    def __init__(self, test_times: Sequence[float]):
        times = tuple(float(t) for t in test_times)
        if not times:
            raise ValidationError("schedule needs at least one test instant", field="times")
        prev = 0.0
        for i, t in enumerate(times, start=1):
            if not math.isfinite(t):
                raise ValidationError(f"test time t_{i} is not finite", field="times")
            if t <= prev:
                if t == prev and i > 1:
                    raise ValidationError(
                        f"coincident test times at t_{i} = {t} h", field="times")
                raise ValidationError(
                    f"test times must be strictly increasing and positive (t_{i} = {t} h)",
                    field="times")
            prev = t
        object.__setattr__(self, "test_times", times)

    @property
    def n(self) -> int:
        return len(self.test_times)

    @property
    def tau(self) -> float:
        return self.test_times[-1]

    @property
    def starts(self) -> tuple[float, ...]:
        """t_0 .. t_{n-1}."""
        return (0.0,) + self.test_times[:-1]

    @property
    def intervals(self) -> tuple[float, ...]:
        """T_i = t_i - t_{i-1}."""
        return tuple(t - s for s, t in zip(self.starts, self.test_times))

    def in_unit(self, unit: TimeUnit | str) -> tuple[float, ...]:
        return tuple(convert_time(t, TimeUnit.HOUR, unit) for t in self.test_times)

    def interval_index(self, t: float, left_limit: bool = False) -> int:
        """1-based index i of the interval containing ``t``.

        Intervals are [t_{i-1}, t_i); with ``left_limit`` they are (t_{i-1}, t_i]
        so that a test instant maps to the interval it closes. ``t = tau``
        maps to n + 1 (after the renewing full test) unless ``left_limit``.
        """
        if t < 0 or t > self.tau or math.isnan(t):
            raise ValidationError(f"t = {t} h is outside [0, {self.tau}]", field="t")
        times = self.test_times
        for i, ti in enumerate(times, start=1):
            if t < ti or (left_limit and t == ti):
                return i
        return self.n + 1


@dataclass(frozen=True)
class TestPolicy:
    __test__ = False

    schedule: TestSchedule
    efficiency: float

    def __post_init__(self):
        e = self.efficiency
        if isinstance(e, bool) or not isinstance(e, (int, float)) or not math.isfinite(e):
            raise ValidationError(f"efficiency must be a finite number, got {e!r}",
                                  field="efficiency")
        if not 0.0 <= e <= 1.0:
            raise ValidationError(f"efficiency must lie in [0, 1], got {e}", field="efficiency")
        object.__setattr__(self, "efficiency", float(e))

    @property
    def tau(self) -> float:
        return self.schedule.tau

    @property
    def n(self) -> int:
        return self.schedule.n


def periodic_schedule(n: int, tau: float, unit: TimeUnit | str = TimeUnit.HOUR) -> TestSchedule:
    """Tests at t_i = i * tau / n for i = 1..n (``tau`` given in ``unit``)."""
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ValidationError(f"number of tests must be a positive integer, got {n!r}",
                              field="n_tests")
    if not math.isfinite(tau) or tau <= 0:
        raise ValidationError(f"full test interval must be positive, got {tau!r}",
                              field="full_test_interval")
    tau_h = convert_time(tau, unit, TimeUnit.HOUR)
    step = tau_h / n
    times = [i * step for i in range(1, n)] + [tau_h]
    return TestSchedule(times)
