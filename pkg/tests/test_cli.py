import json
import subprocess
import sys

import pytest

from streamsched.cli import main
from streamsched.graph import load as load_graph
from streamsched.graph import store
from streamsched.scheduler import load_schedule
from streamsched.validator import check_schedule


def run(*argv):
    return main([str(a) for a in argv])


def test_generate_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run("generate", "--tasks", 20, "--ccr", 1.0, "--seed", 7, "-o", a) == 0
    assert run("generate", "--tasks", 20, "--ccr", 1.0, "--seed", 7, "-o", b) == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(load_graph(a).tasks) == 20


def test_generate_infeasible(tmp_path, capsys):
    assert run("generate", "--tasks", 3, "--min-entry", 2, "--min-exit", 2, "-o", tmp_path / "g.json") == 1
    assert "infeasible" in capsys.readouterr().err


def test_generate_then_schedule_pipeline(tmp_path, topo):
    g = tmp_path / "g50.json"
    out = tmp_path / "run" / "s.json"
    out.parent.mkdir()
    assert run("generate", "--tasks", 50, "--seed", 3, "-o", g) == 0
    assert run("schedule", g, "--variant", "HVLB_CC_A", "--alpha-step", 0.5, "-o", out) == 0
    for suffix in (".json", ".metrics.csv", ".svg", ".curve.csv"):
        assert (out.parent / f"s{suffix}").exists()
    sched = load_schedule(out)
    assert check_schedule(sched, load_graph(g), topo) == []
    curve = (out.parent / "s.curve.csv").read_text().splitlines()
    assert curve[0] == "alpha,makespan" and len(curve) == 1 + 41
    header, row = (out.parent / "s.metrics.csv").read_text().splitlines()
    assert header == "graph,variant,alpha,makespan,slr,speedup,lb"
    assert row.startswith("g50,HVLB_CC_A,")


def test_fixture_schedule_validates(tmp_path, spg, capsys):
    g = tmp_path / "spg.json"
    store(spg, g)
    out = tmp_path / "s.json"
    assert run("schedule", g, "--variant", "HVLB_CC_A", "--alpha-step", 1, "--rounding", "--exact", "-o", out) == 0
    assert run("validate", out, g) == 0
    assert "0 violation(s)" in capsys.readouterr().out


def test_alpha_zero_matches_baseline_file(tmp_path):
    g = tmp_path / "g.json"
    run("generate", "--tasks", 30, "--seed", 11, "-o", g)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run("schedule", g, "--variant", "HVLB_CC_A", "--alpha", 0, "-o", a) == 0
    assert run("schedule", g, "--variant", "HSV_CC", "--alpha", 0, "-o", b) == 0
    da, db = json.loads(a.read_text()), json.loads(b.read_text())
    assert da.pop("variant") == "HVLB_CC_A" and db.pop("variant") == "HSV_CC"
    assert da == db


def test_scheduling_failure_exit_status(tmp_path, capsys):
    failed = 0
    for seed in range(20):
        g = tmp_path / f"u{seed}.json"
        run("generate", "--tasks", 20, "--seed", seed, "--unconstrained", "-o", g)
        out = tmp_path / f"u{seed}.sched.json"
        code = run("schedule", g, "--variant", "HSV_CC", "-o", out)
        assert code in (0, 2)
        if code == 2:
            failed += 1
            info = json.loads((tmp_path / f"u{seed}.sched.failure.json").read_text())
            assert info["variant"] == "HSV_CC" and info["task"] and info["predecessor"]
    assert failed > 0


def test_validate_reports_violations(tmp_path, capsys):
    g = tmp_path / "g.json"
    run("generate", "--tasks", 10, "--seed", 1, "-o", g)
    out = tmp_path / "s.json"
    run("schedule", g, "--alpha", 1, "-o", out)
    data = json.loads(out.read_text())
    data["makespan"] = "1"
    out.write_text(json.dumps(data))
    assert run("validate", out, g) == 3
    assert "makespan" in capsys.readouterr().out


def test_gantt_outputs(tmp_path, capsys):
    g = tmp_path / "g.json"
    run("generate", "--tasks", 8, "--seed", 2, "-o", g)
    s = tmp_path / "s.json"
    run("schedule", g, "--alpha", 0.5, "-o", s)
    assert run("gantt", s, "-o", tmp_path / "c.svg") == 0
    assert (tmp_path / "c.svg").read_text().startswith("<svg")
    capsys.readouterr()
    assert run("gantt", s, "--ascii", "--width", 40) == 0
    assert capsys.readouterr().out.splitlines()[0].startswith("p1")


@pytest.mark.parametrize(
    "argv",
    [
        ["bogus"],
        [],
        ["schedule"],
        ["schedule", "missing.json"],
        ["generate", "--weights", "x", "y"],
        ["experiment"],
    ],
)
def test_usage_errors_exit_1(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(argv) == 1


def test_malformed_inputs_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    assert run("schedule", bad) == 1
    assert run("gantt", bad) == 1
    assert "line 1" in capsys.readouterr().err


def test_experiment_command(tmp_path, capsys):
    code = run("experiment", "exp1", "--graphs", 2, "--tasks", "10,20", "--permutations", "0",
               "--alpha-step", 1, "-o", tmp_path)
    assert code == 0
    out = tmp_path / "exp1"
    assert {"instances.csv", "summary.csv", "config.json"} <= {p.name for p in out.iterdir()}
    assert "exp1:" in capsys.readouterr().out


def test_experiment_config_file(tmp_path):
    cfg = tmp_path / "exp.ini"
    cfg.write_text(f"[experiment]\nexperiment = exp5\nlambdas = 1.0, 1.5, 2.0\nalpha_step = 0.5\n"
                   f"output_dir = {tmp_path}\n")
    assert run("experiment", "--config", cfg) == 0
    lines = (tmp_path / "exp5" / "precision.csv").read_text().splitlines()
    assert len(lines) == 1 + 3 * 4 * 2
    assert run("experiment", "exp1", "--config", cfg) == 1


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "streamsched", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "generate" in proc.stdout
