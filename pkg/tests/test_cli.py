"""Command-line surface: subcommands, exit codes, config-file merging."""

from __future__ import annotations

import json

from click.testing import CliRunner

from rebatch.cli import main
from rebatch.serialize import load_instance, load_schedule, save_instance
from rebatch import GenConfig, generate

from conftest import make_instance, make_machine


def _gen_args(out, seed=7, orders=4, machines=2, configs=2):
    return [
        "gen", "--orders", str(orders), "--machines", str(machines),
        "--configs", str(configs), "--seed", str(seed), "--out", str(out),
    ]


def test_gen_writes_identical_instance_to_library(tmp_path):
    runner = CliRunner()
    out = tmp_path / "inst.json"
    result = runner.invoke(main, _gen_args(out))
    assert result.exit_code == 0, result.output
    assert load_instance(out) == generate(
        GenConfig(n_orders=4, n_machines=2, n_configs_per_machine=2, seed=7)
    )


def test_solve_oracle_and_schedule_roundtrip(tmp_path):
    runner = CliRunner()
    inst_path = tmp_path / "inst.json"
    sched_path = tmp_path / "sched.json"
    runner.invoke(main, _gen_args(inst_path))
    result = runner.invoke(
        main, ["solve", str(inst_path), "--method", "oracle", "--out", str(sched_path)]
    )
    assert result.exit_code == 0, result.output
    assert "optimal makespan" in result.output
    schedule, makespan = load_schedule(sched_path)
    assert schedule.assignment
    validate = runner.invoke(
        main, ["validate", str(inst_path), "--schedule", str(sched_path)]
    )
    assert validate.exit_code == 0, validate.output
    assert "ok" in validate.output


def test_solve_lbbd_writes_iteration_log(tmp_path):
    runner = CliRunner()
    inst_path = tmp_path / "inst.json"
    log_path = tmp_path / "iters.csv"
    runner.invoke(main, _gen_args(inst_path))
    result = runner.invoke(
        main,
        ["solve", str(inst_path), "--method", "lbbd", "--time-limit", "10",
         "--mp-gap", "0", "--out", str(tmp_path / "s.json"), "--log", str(log_path)],
    )
    assert result.exit_code == 0, result.output
    header = log_path.read_text(encoding="utf-8").splitlines()[0]
    assert header == "iter,mp_obj,max_sp,ub,lb,wall_ms"


def test_oracle_refusal_exit_code(tmp_path):
    runner = CliRunner()
    inst_path = tmp_path / "big.json"
    runner.invoke(main, _gen_args(inst_path, orders=9))
    result = runner.invoke(main, ["solve", str(inst_path), "--method", "oracle"])
    assert result.exit_code == 3
    assert "refused" in result.output


def test_invalid_instance_exit_code(tmp_path):
    runner = CliRunner()
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"orders": [], "machines": [], "batch_slots": 1, "x": 1}))
    result = runner.invoke(main, ["validate", str(bad)])
    assert result.exit_code == 1


def test_validate_reports_violations(tmp_path):
    machine = make_machine(configs={1: {"setup": 5, "eligible": {1: 20}}})
    inst = make_instance([(1, 40, 100), (2, 40, 100)], [machine])  # order 2 stuck
    path = tmp_path / "inst.json"
    save_instance(path, inst)
    runner = CliRunner()
    result = runner.invoke(main, ["validate", str(path)])
    assert result.exit_code == 1
    assert "no feasible" in result.output


def test_bench_command(tmp_path):
    runner = CliRunner()
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    runner.invoke(main, _gen_args(a, seed=1))
    runner.invoke(main, _gen_args(b, seed=2))
    out = tmp_path / "bench.csv"
    result = runner.invoke(
        main,
        ["bench", str(a), str(b), "--methods", "lbbd,warmstart,oracle",
         "--time-limit", "10", "--mp-gap", "0", "--out", str(out)],
    )
    assert result.exit_code == 0, result.output
    lines = out.read_text(encoding="utf-8").strip().splitlines()
    assert len(lines) == 1 + 6  # header + 2 instances x 3 methods


def test_sweep_command(tmp_path):
    runner = CliRunner()
    out = tmp_path / "sweep.csv"
    result = runner.invoke(
        main,
        ["sweep", "--axis", "setup", "--levels", "1.0,1.5", "--replications", "1",
         "--orders", "4", "--machines", "2", "--configs", "2", "--seed", "3",
         "--time-limit", "10", "--mp-gap", "0", "--out", str(out)],
    )
    assert result.exit_code == 0, result.output
    lines = out.read_text(encoding="utf-8").strip().splitlines()
    assert lines[0] == "level,mean_makespan,mean_gap_percent,failures"
    assert len(lines) == 3


def test_gantt_command(tmp_path):
    runner = CliRunner()
    inst_path = tmp_path / "inst.json"
    sched_path = tmp_path / "sched.json"
    svg_path = tmp_path / "out.svg"
    runner.invoke(main, _gen_args(inst_path))
    runner.invoke(main, ["solve", str(inst_path), "--method", "warmstart",
                         "--time-limit", "5", "--out", str(sched_path)])
    result = runner.invoke(
        main, ["gantt", str(inst_path), str(sched_path), "--out", str(svg_path)]
    )
    assert result.exit_code == 0, result.output
    assert svg_path.read_text(encoding="utf-8").startswith("<svg")


def test_export_lp_command(tmp_path):
    runner = CliRunner()
    inst_path = tmp_path / "inst.json"
    lp_path = tmp_path / "model.lp"
    runner.invoke(main, _gen_args(inst_path))
    result = runner.invoke(main, ["export-lp", str(inst_path), "--out", str(lp_path)])
    assert result.exit_code == 0, result.output
    text = lp_path.read_text(encoding="utf-8")
    assert text.startswith("\\")
    assert text.endswith("End\n")


def test_config_file_supplies_defaults_flags_win(tmp_path):
    runner = CliRunner()
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"orders": 5, "machines": 2, "configs": 2, "seed": 9}))
    out_a = tmp_path / "a.json"
    result = runner.invoke(main, ["gen", "--config", str(cfg), "--out", str(out_a)])
    assert result.exit_code == 0, result.output
    assert len(load_instance(out_a).orders) == 5
    # explicit flag beats the config value
    out_b = tmp_path / "b.json"
    result = runner.invoke(
        main, ["gen", "--config", str(cfg), "--orders", "3", "--out", str(out_b)]
    )
    assert result.exit_code == 0, result.output
    assert len(load_instance(out_b).orders) == 3
