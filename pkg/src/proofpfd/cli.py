"""Command-line interface: ``proofpfd {assess,curve,estimate,optimize,simulate}``.

Exit codes: 0 success, 2 invalid input or configuration, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from typing import Optional, Sequence, TextIO

from .analytic import (
    APPROXIMATE,
    EvaluationMode,
    availability_curve,
    pfd_average,
    pfd_average_no_partial,
    sil_band,
)
from .config import ConfigDocument, ConfigError, load_config
from .estimate import TestObservations, estimate
from .model import TimeUnit, ValidationError, convert_time
from .optimize import optimize_policy
from .simulate import SimulationConfig, simulate_pfd

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_INPUT = 2

CSV_HEADER = ("t_hours", "availability", "unavailability")
APPROX_LIMIT = 1e-2


def fmt(x: float, digits: int = 3) -> str:
    """Scientific notation with ``digits`` significant digits, e.g. 2.06e-3."""
    if x == 0:
        return "0"
    if not math.isfinite(x):
        return str(x)
    mantissa, exp = f"{x:.{digits - 1}e}".split("e")
    return f"{mantissa}e{int(exp)}"


def fmt_csv(x: float) -> str:
    return f"{x:.16e}"


def _times(values, unit: TimeUnit) -> str:
    return ", ".join(f"{convert_time(t, TimeUnit.HOUR, unit):.4g}" for t in values)


def _echo_inputs(doc: ConfigDocument, out: TextIO) -> None:
    policy = doc.policy
    unit = policy.time_unit
    if doc.system is not None:
        s = doc.system
        spec = s.to_spec()
        print(f"system: {s.m}oo{s.n}, lambda = {fmt(s.lam)} /{s.lambda_unit.value}"
              f" ({fmt(spec.lam)} /h)", file=out)
    schedule = policy.schedule()
    kind = "periodic" if policy.is_periodic else "explicit"
    print(f"policy: E = {policy.efficiency:g}, {kind} schedule, n = {schedule.n} tests, "
          f"tau = {convert_time(schedule.tau, TimeUnit.HOUR, unit):g} {unit.value}", file=out)
    print(f"test instants ({unit.value}): {_times(schedule.test_times, unit)}", file=out)


def cmd_assess(doc: ConfigDocument, mode: EvaluationMode, out: TextIO) -> int:
    system = doc.system.to_spec()
    policy = doc.policy.to_policy()
    unit = doc.policy.time_unit
    _echo_inputs(doc, out)
    print(f"mode: {mode.value}", file=out)
    if mode is APPROXIMATE and system.lam * policy.tau > APPROX_LIMIT:
        print(f"warning: lambda*tau = {fmt(system.lam * policy.tau)} exceeds {APPROX_LIMIT:g}; "
              "the approximate formulas may be inaccurate", file=out)
    report = pfd_average(system, policy, mode)
    print("", file=out)
    print(f"{'i':>3}  {'t_(i-1)':>9}  {'t_i':>9}  {'PFD_i':>9}", file=out)
    for row in report.per_interval:
        print(f"{row.index:>3}  {convert_time(row.start, TimeUnit.HOUR, unit):>9.4g}  "
              f"{convert_time(row.end, TimeUnit.HOUR, unit):>9.4g}  {fmt(row.pfd):>9}", file=out)
    print("", file=out)
    print(f"PFD_avg = {fmt(report.pfd_avg)}", file=out)
    t_max = convert_time(report.max_unavailability_time, TimeUnit.HOUR, unit)
    print(f"U_max = {fmt(report.max_unavailability)} at t = {t_max:.4g} {unit.value} "
          "(just before the test)", file=out)
    print(f"SIL band (low demand, IEC 61508, informative): {sil_band(report.pfd_avg)}", file=out)
    if policy.efficiency == 0.0 and policy.n > 1:
        no_partial = pfd_average_no_partial(system, policy.tau, mode)
        print(f"note: E = 0, partial tests are ineffective; PFD_avg equals the value "
              f"without partial tests ({fmt(no_partial)})", file=out)
    return EXIT_OK


def cmd_curve(doc: ConfigDocument, mode: EvaluationMode, step: Optional[float],
              out_path: Optional[str], out: TextIO) -> int:
    system = doc.system.to_spec()
    policy = doc.policy.to_policy()
    if step is None:
        step = policy.tau / 1000.0
    curve = availability_curve(system, policy, step, mode)

    def write(handle):
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for t, a, u in curve.rows():
            writer.writerow((fmt_csv(t), fmt_csv(a), fmt_csv(u)))

    if out_path is None:
        write(out)
        return EXIT_OK
    try:
        with open(out_path, "w", encoding="utf-8", newline="") as handle:
            write(handle)
    except OSError as exc:
        print(f"error: cannot write {out_path}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"wrote {len(curve)} rows to {out_path}", file=out)
    return EXIT_OK


def cmd_estimate(doc: ConfigDocument, level: float, out: TextIO) -> int:
    if doc.observations is None:
        raise ConfigError("missing required section", field="observations")
    schedule = doc.policy.schedule()
    try:
        obs = TestObservations(schedule, list(doc.observations.counts),
                               doc.observations.k_total)
    except ValidationError as exc:
        raise ConfigError(str(exc), field=f"observations.{exc.field or 'counts'}") from None
    result = estimate(obs, level)
    unit = doc.policy.time_unit
    print(f"observations: K = {obs.k_total}, counts = {list(obs.counts)} "
          f"(partial total {obs.partial_total}, full {obs.counts[-1]})", file=out)
    print(f"test instants ({unit.value}): {_times(schedule.test_times, unit)}", file=out)
    lo, hi = result.lambda_ci
    print(f"lambda_hat = {fmt(result.lambda_hat)} /h", file=out)
    print(f"lambda {level:.0%} CI (Clopper-Pearson) = [{fmt(lo)}, {fmt(hi)}] /h", file=out)
    if schedule.n < 2:
        print("E_hat: undefined (no partial tests)", file=out)
    elif result.e_hat is None:
        print("E_hat: undefined (no failures observed)", file=out)
    else:
        print(f"E_hat = {result.e_hat:.3f}", file=out)
        if result.e_hat != result.e_hat_unclamped:
            print(f"note: raw estimate {result.e_hat_unclamped:.3f} was clamped to [0, 1]",
                  file=out)
    return EXIT_OK


def cmd_optimize(doc: ConfigDocument, out: TextIO) -> int:
    system = doc.system.to_spec()
    policy = doc.policy.to_policy()
    unit = doc.policy.time_unit
    _echo_inputs(doc, out)
    result = optimize_policy(system, policy)
    no_partial = pfd_average_no_partial(system, policy.tau)

    def row(label, sched, value):
        times = _times(sched.test_times, unit)
        gaps = _times(sched.intervals, unit)
        print(f"{label:<22} t = ({times})  T = ({gaps})  PFD_avg = {fmt(value)}", file=out)

    print("", file=out)
    print(f"{'Without partial test':<22} tau = {convert_time(policy.tau, TimeUnit.HOUR, unit):g}"
          f"  PFD_avg = {fmt(no_partial)}", file=out)
    row("Reference policy", result.reference, result.reference_pfd_avg)
    row("Optimized policy", result.schedule, result.pfd_avg_star)
    print("", file=out)
    print(f"improvement = {result.improvement_fraction:.1%}", file=out)
    print(f"U_max: {fmt(result.u_max_reference)} -> {fmt(result.u_max_star)} "
          f"(reduction {result.u_max_reduction:.1%})", file=out)
    if result.flat_objective:
        print("note: objective is flat in the schedule (E = 0 or lambda = 0); "
              "reference kept", file=out)
    print(f"search: {result.starts} starts, {result.sweeps} sweeps, "
          f"{result.evaluations} evaluations", file=out)
    return EXIT_OK


def cmd_simulate(doc: ConfigDocument, trials: Optional[int], seed: Optional[int],
                 out: TextIO) -> int:
    system = doc.system.to_spec()
    policy = doc.policy.to_policy()
    sim = doc.simulation
    trials = trials if trials is not None else (sim.trials if sim else 100_000)
    seed = seed if seed is not None else (sim.seed if sim else 20240101)
    try:
        config = SimulationConfig(trials=trials, master_seed=seed)
    except ValidationError as exc:
        raise ConfigError(str(exc), field=f"simulation.{exc.field}") from None
    _echo_inputs(doc, out)
    print(f"simulation: {trials} trials, seed {seed}", file=out)
    result = simulate_pfd(system, policy, config)
    analytic = pfd_average(system, policy).pfd_avg
    print("", file=out)
    if result.standard_error_defined:
        print(f"PFD_avg (Monte Carlo) = {fmt(result.pfd_avg_estimate)} "
              f"+/- {fmt(result.standard_error)} (1 s.e.)", file=out)
    else:
        print(f"PFD_avg (Monte Carlo) = {fmt(result.pfd_avg_estimate)} "
              "(standard error undefined: fewer than 2 trials)", file=out)
    print(f"PFD_avg (analytic)    = {fmt(analytic)}", file=out)
    if result.standard_error_defined and result.standard_error > 0:
        z = (result.pfd_avg_estimate - analytic) / result.standard_error
        print(f"difference = {z:+.2f} standard errors", file=out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON configuration file")
    common.add_argument("--mode", choices=("exact", "approx"), default="exact")
    common.add_argument("--out", help="output path (curve CSV)")
    common.add_argument("--step", type=float, help="curve sampling step in hours")
    common.add_argument("--trials", type=int, help="Monte Carlo trials")
    common.add_argument("--seed", type=int, help="Monte Carlo master seed")
    common.add_argument("--level", type=float, default=0.90,
                        help="confidence level for the lambda interval")
    common.add_argument("--dump-config", action="store_true",
                        help="print the normalized configuration and exit")

    parser = argparse.ArgumentParser(
        prog="proofpfd",
        description="PFD of MooN safety systems under partial and full proof tests")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("assess", parents=[common], help="PFD_avg, PFD_i, U_max and SIL band")
    sub.add_parser("curve", parents=[common], help="availability curve as CSV")
    sub.add_parser("estimate", parents=[common], help="lambda and E from test counts")
    sub.add_parser("optimize", parents=[common], help="optimal partial test instants")
    sub.add_parser("simulate", parents=[common], help="Monte Carlo check of PFD_avg")
    return parser


def main(argv: Optional[Sequence[str]] = None, out: TextIO | None = None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    mode = EvaluationMode.parse(args.mode)
    try:
        doc = load_config(args.config, require_system=args.command != "estimate")
        if args.dump_config:
            out.write(doc.dumps())
            return EXIT_OK
        if args.command == "assess":
            return cmd_assess(doc, mode, out)
        if args.command == "curve":
            if args.step is not None and not args.step > 0:
                raise ConfigError("step must be positive", field="--step")
            return cmd_curve(doc, mode, args.step, args.out, out)
        if args.command == "estimate":
            if not 0.0 < args.level < 1.0:
                raise ConfigError("confidence level must lie in (0, 1)", field="--level")
            return cmd_estimate(doc, args.level, out)
        if args.command == "optimize":
            return cmd_optimize(doc, out)
        return cmd_simulate(doc, args.trials, args.seed, out)
    except ValidationError as exc:
        if not isinstance(exc, ConfigError) and exc.field:
            exc = ConfigError(str(exc), field=exc.field)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ArithmeticError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
