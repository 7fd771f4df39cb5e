import json

import pytest

from jsgpr.cli import build_parser, run


def test_subcommands_exist():
    sub = build_parser()._subparsers._group_actions[0].choices
    assert set(sub) == {"validate", "solve", "exact", "round", "experiment-a", "experiment-b", "sweep-dmax"}


def test_validate(capsys):
    assert run(["validate", "Ans"]) == 0
    out = capsys.readouterr().out
    assert "Ans: 18 nodes, 25 links" in out
    assert "FallbackCapacityApplied" in out


def test_validate_json(capsys):
    assert run(["validate", "Digex", "-o", "-"]) == 0
    out = capsys.readouterr().out
    doc = json.loads(out[out.index("{"):])
    assert (doc["nodes"], doc["links"]) == (31, 35)


def test_round_writes_json(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert run(["round", "Ans", "--seed", "2", "-o", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["status"] == "Accepted"
    assert doc["metrics"]["residuals"]["demand"] <= 1e-6
    assert "wall_time_s" not in doc["metrics"]
    assert "total cost" in capsys.readouterr().out


def test_round_output_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(["round", "Ans", "-o", str(a)])
    run(["round", "Ans", "-o", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_rejected_exit_code(capsys):
    code = run(["round", "Ans", "--d-max", "0.0001", "--candidates", "0,1", "--demands", "5,6"])
    assert code == 1
    assert "Rejected" in capsys.readouterr().out


def test_exact_csv_to_stdout(capsys):
    assert run(["exact", "Ans", "-o", "-", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    header = next(l for l in lines if l.startswith("status,"))
    row = lines[lines.index(header) + 1]
    assert row.startswith("Optimal,")


def test_solve_dispatch_and_limits(capsys):
    assert run(["solve", "Ans", "--method", "exact", "--node-limit", "1"]) == 3
    assert "NodeLimit" in capsys.readouterr().out


def test_usage_errors(capsys):
    assert run(["solve"]) == 2
    assert run(["round", "no-such-topology"]) == 2
    assert run(["round", "Ans", "--candidates", "zz"]) == 2


def test_lb_formulation(tmp_path):
    out = tmp_path / "lb.json"
    assert run(["round", "Ans", "--formulation", "LB", "-o", str(out)]) == 0
    assert json.loads(out.read_text())["solution"]["l_max"] is not None


def test_experiment_a_files(tmp_path, capsys):
    out = tmp_path / "a.csv"
    code = run(["experiment-a", "Ans", "--methods", "rounding", "--num-seeds", "2", "-o", str(out), "--format", "csv"])
    assert code == 0
    rows = out.read_text().strip().splitlines()
    assert len(rows) == 3 and "wall_time_s" not in rows[0]
    man = json.loads((tmp_path / "a.csv.manifest.json").read_text())
    assert man["record_count"] == 2


def test_sweep_jsonl(tmp_path, capsys):
    out = tmp_path / "s.jsonl"
    assert run(["sweep-dmax", "Ans", "--methods", "rounding", "--d-max", "2", "inf", "-o", str(out)]) == 0
    recs = [json.loads(l) for l in out.read_text().splitlines()]
    assert [r["d_max"] for r in recs] == [2.0, "inf"]
    assert all("wall_time_s" not in r for r in recs)
    assert "monotone series" in capsys.readouterr().out


def test_experiment_b(capsys):
    assert run(["experiment-b", "Ans", "--methods", "rounding"]) == 0
    assert "LB cost ratio" in capsys.readouterr().out


def test_format_follows_output_suffix(tmp_path):
    csv_out, json_out = tmp_path / "r.csv", tmp_path / "r.out"
    assert run(["round", "Ans", "--seed", "1", "-o", str(csv_out)]) == 0
    assert run(["round", "Ans", "--seed", "1", "-o", str(json_out)]) == 0
    assert csv_out.read_text().startswith("status,")
    assert json.loads(json_out.read_text())["status"] == "Accepted"
