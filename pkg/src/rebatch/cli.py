"""Command-line surface: gen, solve, validate, bench, sweep, gantt, export-lp.

Exit codes: 0 ok, 1 invalid input, 2 solver failure, 3 refused (oracle
limits).  Every subcommand accepts ``--config FILE`` with a JSON object whose
keys mirror the long flag names (hyphens as underscores); explicit flags win
over config values.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click

from . import bench as bench_mod
from .gantt import gantt_svg
from .generator import GenConfig, generate
from .lbbd import LbbdParams, SolveResult, solve_lbbd, warmstart_construct
from .lp_export import emit_milp
from .model import compute_timing, validate_instance, validate_schedule
from .oracle import OracleLimitError, OracleLimits, brute_force
from .serialize import load_instance, load_schedule, save_instance, save_schedule

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_SOLVER = 2
EXIT_REFUSED = 3


def _apply_config(ctx: click.Context, _param: click.Parameter, value: str | None):
    """Fill defaults from a JSON config file; explicit flags keep priority."""
    if value is None:
        return None
    try:
        data = json.loads(Path(value).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise click.ClickException(f"cannot read config {value}: {exc}")
    if not isinstance(data, dict):
        raise click.ClickException(f"config {value} must hold a JSON object")
    ctx.default_map = {**data, **(ctx.default_map or {})}
    return value


def _config_option(fn):
    return click.option(
        "--config",
        type=click.Path(exists=True, dir_okay=False),
        callback=_apply_config,
        is_eager=True,
        expose_value=False,
        help="JSON file whose keys mirror the flags; flags win.",
    )(fn)


def _load_instance_or_exit(path: str):
    try:
        instance = load_instance(path)
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INVALID)
    violations = validate_instance(instance)
    if violations:
        for v in violations:
            click.echo(f"invalid instance: {v}", err=True)
        sys.exit(EXIT_INVALID)
    return instance


@click.group()
def main() -> None:
    """Batch scheduling on parallel reconfigurable machines."""


@main.command()
@_config_option
@click.option("--orders", type=int, required=True, help="Number of orders.")
@click.option("--machines", type=int, required=True, help="Number of machines.")
@click.option("--configs", type=int, required=True, help="Configurations per machine.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--remanuf-frac", type=float, default=0.5, show_default=True)
@click.option("--eligibility-prob", type=float, default=0.75, show_default=True)
@click.option("--scale-reconfig", type=float, default=1.0, show_default=True)
@click.option("--scale-setup", type=float, default=1.0, show_default=True)
@click.option("--scale-area", type=float, default=1.0, show_default=True)
@click.option("--scale-opt-variance", type=float, default=1.0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def gen(orders, machines, configs, seed, remanuf_frac, eligibility_prob,
        scale_reconfig, scale_setup, scale_area, scale_opt_variance, out):
    """Generate a random instance and write it as JSON."""
    try:
        cfg = GenConfig(
            n_orders=orders,
            n_machines=machines,
            n_configs_per_machine=configs,
            seed=seed,
            remanufacturing_fraction=remanuf_frac,
            eligibility_prob=eligibility_prob,
            scale_reconfig=scale_reconfig,
            scale_setup=scale_setup,
            scale_area=scale_area,
            scale_opt_variance=scale_opt_variance,
        )
        instance = generate(cfg)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INVALID)
    save_instance(out, instance)
    click.echo(f"wrote {cfg.label()} instance to {out}")


def _write_iteration_log(result: SolveResult, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["iter", "mp_obj", "max_sp", "ub", "lb", "wall_ms"])
        for rec in result.per_iteration_log:
            writer.writerow(
                [
                    rec.iteration,
                    rec.mp_objective,
                    rec.max_sp_makespan,
                    rec.upper_bound,
                    rec.lower_bound,
                    rec.wall_ms,
                ]
            )


@main.command()
@_config_option
@click.argument("instance_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--method", type=click.Choice(["lbbd", "warmstart", "oracle"]),
              default="lbbd", show_default=True)
@click.option("--time-limit", type=float, default=600.0, show_default=True,
              help="Total wall-clock budget in seconds.")
@click.option("--mp-gap", type=float, default=1.0, show_default=True,
              help="Master-problem optimality gap in percent.")
@click.option("--sp-time-limit", type=float, default=60.0, show_default=True,
              help="Per-iteration subproblem time limit in seconds.")
@click.option("--max-iters", type=int, default=None)
@click.option("--mrt-mode", type=click.Choice(["static", "dynamic"]),
              default="static", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Write the best schedule as JSON.")
@click.option("--log", "log_path", type=click.Path(dir_okay=False), default=None,
              help="Write the per-iteration log as CSV.")
def solve(instance_file, method, time_limit, mp_gap, sp_time_limit, max_iters,
          mrt_mode, out, log_path):
    """Solve an instance and report makespan, bound, and gap."""
    instance = _load_instance_or_exit(instance_file)
    try:
        if method == "lbbd":
            params = LbbdParams(
                total_time_limit=time_limit,
                mp_gap_limit=mp_gap,
                sp_time_limit=sp_time_limit,
                max_iterations=max_iters,
                mrt_mode=mrt_mode,
            )
            result = solve_lbbd(instance, params)
            timed = result.best_schedule
            click.echo(
                f"lbbd: makespan {result.upper_bound}, lower bound {result.lower_bound},"
                f" gap {result.gap_percent:.2f}%, iterations {result.iterations},"
                f" proven_optimal {result.proven_optimal}"
            )
            if log_path:
                _write_iteration_log(result, log_path)
        elif method == "warmstart":
            timed = warmstart_construct(instance, time_limit, mp_gap)
            click.echo(f"warmstart: makespan {timed.makespan}")
        else:
            timed, makespan = brute_force(instance, OracleLimits())
            click.echo(f"oracle: optimal makespan {makespan}")
    except OracleLimitError as exc:
        click.echo(f"refused: {exc}", err=True)
        sys.exit(EXIT_REFUSED)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INVALID)
    except Exception as exc:  # noqa: BLE001
        click.echo(f"solver failure: {exc}", err=True)
        sys.exit(EXIT_SOLVER)
    if out:
        save_schedule(out, timed.schedule, timed.makespan)
        click.echo(f"wrote schedule to {out}")


@main.command()
@_config_option
@click.argument("instance_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--schedule", "schedule_file", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Also validate a schedule against the instance.")
def validate(instance_file, schedule_file):
    """Validate an instance (and optionally a schedule) against the model."""
    try:
        instance = load_instance(instance_file)
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INVALID)
    violations = validate_instance(instance)
    for v in violations:
        click.echo(f"instance: {v}")
    if schedule_file and not violations:
        try:
            schedule, makespan = load_schedule(schedule_file)
        except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_INVALID)
        sched_violations = validate_schedule(instance, schedule)
        for v in sched_violations:
            click.echo(f"schedule: {v}")
        if not sched_violations:
            timed = compute_timing(instance, schedule)
            if timed.makespan != makespan:
                click.echo(
                    f"schedule: stored makespan {makespan} differs from computed"
                    f" {timed.makespan}"
                )
                sys.exit(EXIT_INVALID)
        violations = violations or sched_violations
    if violations:
        sys.exit(EXIT_INVALID)
    click.echo("ok")


@main.command()
@_config_option
@click.argument("instance_files", type=click.Path(exists=True, dir_okay=False), nargs=-1,
                required=True)
@click.option("--methods", default="lbbd,warmstart", show_default=True,
              help="Comma-separated subset of lbbd,warmstart,oracle.")
@click.option("--time-limit", type=float, default=600.0, show_default=True)
@click.option("--mp-gap", type=float, default=1.0, show_default=True)
@click.option("--sp-time-limit", type=float, default=60.0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def bench(instance_files, methods, time_limit, mp_gap, sp_time_limit, out):
    """Benchmark methods over instance files and write a CSV."""
    method_list = [m.strip() for m in methods.split(",") if m.strip()]
    for m in method_list:
        if m not in bench_mod.METHODS:
            click.echo(f"error: unknown method {m!r}", err=True)
            sys.exit(EXIT_INVALID)
    instances = []
    for path in instance_files:
        instances.append((Path(path).stem, _load_instance_or_exit(path)))
    params = LbbdParams(
        total_time_limit=time_limit, mp_gap_limit=mp_gap, sp_time_limit=sp_time_limit
    )
    rows = bench_mod.run_bench(instances, method_list, time_limit, params)
    bench_mod.write_bench_csv(rows, out)
    click.echo(f"wrote {len(rows)} rows to {out}")


@main.command()
@_config_option
@click.option("--axis", type=click.Choice(sorted(bench_mod.SWEEP_AXES)), required=True)
@click.option("--levels", required=True, help="Comma-separated level values.")
@click.option("--replications", type=int, default=3, show_default=True)
@click.option("--orders", type=int, default=50, show_default=True)
@click.option("--machines", type=int, default=5, show_default=True)
@click.option("--configs", type=int, default=5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--time-limit", type=float, default=60.0, show_default=True,
              help="Budget per solve.")
@click.option("--mp-gap", type=float, default=1.0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def sweep(axis, levels, replications, orders, machines, configs, seed, time_limit,
          mp_gap, out):
    """Sensitivity sweep over one generator parameter; writes mean results."""
    try:
        level_values = [float(v) for v in levels.split(",") if v.strip()]
    except ValueError:
        click.echo(f"error: cannot parse levels {levels!r}", err=True)
        sys.exit(EXIT_INVALID)
    base = GenConfig(
        n_orders=orders, n_machines=machines, n_configs_per_machine=configs, seed=seed
    )
    params = LbbdParams(total_time_limit=time_limit, mp_gap_limit=mp_gap)
    try:
        rows = bench_mod.run_sweep(base, axis, level_values, replications, params)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INVALID)
    bench_mod.write_sweep_csv(rows, out)
    click.echo(f"wrote {len(rows)} levels to {out}")


@main.command()
@_config_option
@click.argument("instance_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("schedule_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def gantt(instance_file, schedule_file, out):
    """Render a schedule as an SVG Gantt chart."""
    instance = _load_instance_or_exit(instance_file)
    try:
        schedule, _ = load_schedule(schedule_file)
        timed = compute_timing(instance, schedule)
        svg = gantt_svg(instance, timed)
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INVALID)
    Path(out).write_text(svg, encoding="utf-8")
    click.echo(f"wrote {out}")


@main.command("export-lp")
@_config_option
@click.argument("instance_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def export_lp(instance_file, out):
    """Write the instance's MILP in LP file format."""
    instance = _load_instance_or_exit(instance_file)
    try:
        text = emit_milp(instance)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INVALID)
    Path(out).write_text(text, encoding="utf-8", newline="\n")
    click.echo(f"wrote {out}")


if __name__ == "__main__":
    main()
