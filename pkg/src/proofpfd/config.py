"""JSON configuration documents for the command-line tool.

Example::

    {
      "system": {"m": 2, "n": 6, "lambda": 6.1e-5, "lambda_unit": "hour"},
      "policy": {
        "efficiency": 0.42,
        "time_unit": "month",
        "schedule": {"periodic": {"n_tests": 4, "full_test_interval": 12}}
      },
      "observations": {"K": 96, "counts": [5, 5, 6, 35]},
      "simulation": {"trials": 100000, "seed": 12345}
    }

``lambda_unit`` is the time unit the rate is expressed per. An explicit
schedule is given as ``{"times": [...]}`` in ``time_unit``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

from .model import (
    SystemSpec,
    TestPolicy,
    TestSchedule,
    TimeUnit,
    ValidationError,
    convert_time,
    periodic_schedule,
    validate_system,
)


class ConfigError(ValidationError):
    """Invalid configuration document; ``field`` is a dotted path like ``system.m``."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        super().__init__(message, field)
        self.line = line

    def __str__(self):
        where = []
        if self.line is not None:
            where.append(f"line {self.line}")
        if self.field:
            where.append(f"field '{self.field}'")
        prefix = ", ".join(where)
        return f"{prefix}: {self.args[0]}" if prefix else self.args[0]


@dataclass(frozen=True)
class SystemSection:
    m: int
    n: int
    lam: float
    lambda_unit: TimeUnit = TimeUnit.HOUR

    def to_spec(self) -> SystemSpec:
        per_hour = self.lam / self.lambda_unit.hours
        return validate_system(self.m, self.n, per_hour)


@dataclass(frozen=True)
class PolicySection:
    efficiency: float
    time_unit: TimeUnit
    n_tests: Optional[int] = None
    full_test_interval: Optional[float] = None
    times: Optional[tuple[float, ...]] = None

    @property
    def is_periodic(self) -> bool:
        return self.times is None

    def schedule(self) -> TestSchedule:
        if self.is_periodic:
            return periodic_schedule(self.n_tests, self.full_test_interval, self.time_unit)
        return TestSchedule([convert_time(t, self.time_unit, TimeUnit.HOUR) for t in self.times])

    def to_policy(self) -> TestPolicy:
        return TestPolicy(self.schedule(), self.efficiency)


@dataclass(frozen=True)
class ObservationSection:
    k_total: int
    counts: tuple[int, ...]


@dataclass(frozen=True)
class SimulationSection:
    trials: int
    seed: int


@dataclass(frozen=True)
class ConfigDocument:
    system: Optional[SystemSection]
    policy: PolicySection
    observations: Optional[ObservationSection] = None
    simulation: Optional[SimulationSection] = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        if self.system is not None:
            out["system"] = {"m": self.system.m, "n": self.system.n, "lambda": self.system.lam,
                             "lambda_unit": self.system.lambda_unit.value}
        p = self.policy
        if p.is_periodic:
            sched: dict[str, Any] = {"periodic": {"n_tests": p.n_tests,
                                                  "full_test_interval": p.full_test_interval}}
        else:
            sched = {"times": list(p.times)}
        out["policy"] = {"efficiency": p.efficiency, "schedule": sched,
                         "time_unit": p.time_unit.value}
        if self.observations is not None:
            out["observations"] = {"K": self.observations.k_total,
                                   "counts": list(self.observations.counts)}
        if self.simulation is not None:
            out["simulation"] = {"trials": self.simulation.trials, "seed": self.simulation.seed}
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _require(mapping: dict, key: str, path: str) -> Any:
    if not isinstance(mapping, dict):
        raise ConfigError("expected an object", field=path)
    if key not in mapping:
        raise ConfigError("missing required field", field=f"{path}.{key}" if path else key)
    return mapping[key]


def _integer(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"expected an integer, got {value!r}", field=path)
    return value


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", field=path)
    return float(value)


def _unit(value, path: str) -> TimeUnit:
    try:
        return TimeUnit.parse(value)
    except ValidationError as exc:
        raise ConfigError(str(exc), field=path) from None


def _check(fn, path_prefix: str):
    try:
        return fn()
    except ConfigError:
        raise
    except ValidationError as exc:
        field = f"{path_prefix}.{exc.field}" if exc.field else path_prefix
        raise ConfigError(str(exc), field=field) from None


def parse_config(data: Any, require_system: bool = True) -> ConfigDocument:
    """Validate a decoded JSON object into a :class:`ConfigDocument`."""
    if not isinstance(data, dict):
        raise ConfigError("top level must be an object")
    unknown = set(data) - {"system", "policy", "observations", "simulation"}
    if unknown:
        raise ConfigError("unknown section", field=sorted(unknown)[0])

    system = None
    if "system" in data or require_system:
        raw = _require(data, "system", "")
        system = SystemSection(
            m=_integer(_require(raw, "m", "system"), "system.m"),
            n=_integer(_require(raw, "n", "system"), "system.n"),
            lam=_number(_require(raw, "lambda", "system"), "system.lambda"),
            lambda_unit=_unit(raw.get("lambda_unit", "hour"), "system.lambda_unit"),
        )
        _check(system.to_spec, "system")

    raw = _require(data, "policy", "")
    efficiency = _number(_require(raw, "efficiency", "policy"), "policy.efficiency")
    time_unit = _unit(raw.get("time_unit", "hour"), "policy.time_unit")
    sched = _require(raw, "schedule", "policy")
    if not isinstance(sched, dict):
        raise ConfigError("expected an object", field="policy.schedule")
    forms = [k for k in ("periodic", "times") if k in sched]
    if len(forms) != 1:
        raise ConfigError("exactly one of 'periodic' or 'times' is required",
                          field="policy.schedule")
    if forms[0] == "periodic":
        per = sched["periodic"]
        policy = PolicySection(
            efficiency=efficiency, time_unit=time_unit,
            n_tests=_integer(_require(per, "n_tests", "policy.schedule.periodic"),
                             "policy.schedule.periodic.n_tests"),
            full_test_interval=_number(
                _require(per, "full_test_interval", "policy.schedule.periodic"),
                "policy.schedule.periodic.full_test_interval"),
        )
    else:
        times = sched["times"]
        if not isinstance(times, list):
            raise ConfigError("expected a list of test instants", field="policy.schedule.times")
        policy = PolicySection(
            efficiency=efficiency, time_unit=time_unit,
            times=tuple(_number(t, f"policy.schedule.times[{i}]") for i, t in enumerate(times)),
        )
    _check(policy.to_policy, "policy")

    observations = None
    if "observations" in data:
        raw = data["observations"]
        k_total = _integer(_require(raw, "K", "observations"), "observations.K")
        counts = _require(raw, "counts", "observations")
        if not isinstance(counts, list):
            raise ConfigError("expected a list of counts", field="observations.counts")
        observations = ObservationSection(
            k_total, tuple(_integer(c, f"observations.counts[{i}]") for i, c in enumerate(counts)))

    simulation = None
    if "simulation" in data:
        raw = data["simulation"]
        simulation = SimulationSection(
            trials=_integer(raw.get("trials", 100_000), "simulation.trials"),
            seed=_integer(raw.get("seed", 20240101), "simulation.seed"),
        )

    return ConfigDocument(system, policy, observations, simulation)


def loads(text: str, require_system: bool = True) -> ConfigDocument:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, line=exc.lineno) from None
    return parse_config(data, require_system)


def load_config(path: str | Path, require_system: bool = True) -> ConfigDocument:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror or exc}") from None
    return loads(text, require_system)
