"""Command-line interface: exit codes, formats, determinism."""
import json
import subprocess
import sys

import pytest

from mushy.cli import main

THRESH = ["thresholds", "--alpha", "1/8", "--beta", "1", "--gamma", "1"]


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_thresholds_stdout(capsys):
    code, out, _ = run(THRESH, capsys)
    assert code == 0
    obj = json.loads(out)
    assert obj["thresholds"]["lambda_c"] == "8/11"
    assert "λ_c = 8/11" in obj["summary"] and "WeakRetain" in obj["summary"]


def test_thresholds_dissolve_summary(capsys):
    code, out, _ = run(["thresholds", "--alpha", "1", "--beta", "1",
                        "--gamma", "1"], capsys)
    obj = json.loads(out)
    assert code == 0 and "WeakDissolve" in obj["summary"]
    assert obj["thresholds"]["lambda_plus"] == "2/3"


def test_thresholds_csv_out(tmp_path, capsys):
    path = tmp_path / "th.csv"
    code, _, _ = run(THRESH + ["--out", str(path)], capsys)
    assert code == 0
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "key,value" and any(l.startswith("lambda_c,") for l in lines)


def test_simulate_discrete_example(tmp_path, capsys):
    path = tmp_path / "trace.csv"
    code, _, err = run(["simulate-discrete", "--alpha", "1/8", "--beta", "1",
                        "--gamma", "1", "--eps", "1/100", "--L1", "2/5",
                        "--L2", "2/5", "--steps", "50", "--out", str(path)],
                       capsys)
    # finite-eps corrections are notes, not violations: exit 0
    assert code == 0 and err == ""
    rows = path.read_text().strip().splitlines()
    assert rows[0].startswith("step,") and len(rows) >= 3


def test_simulate_discrete_notes(capsys):
    code, out, _ = run(["simulate-discrete", "--alpha", "1/8", "--beta", "1",
                        "--gamma", "1", "--eps", "1/100", "--L1", "2/5",
                        "--L2", "2/5"], capsys)
    obj = json.loads(out)
    assert code == 0 and obj["hypothesis_ok"] is True
    assert any("finite-eps" in n for n in obj["hypothesis_notes"])
    assert any("terminal extinction" in n for n in obj["hypothesis_notes"])


def test_simulate_discrete_clean(capsys):
    code, out, _ = run(["simulate-discrete", "--alpha", "1/8", "--beta", "1",
                        "--gamma", "1", "--eps", "1/200", "--L1", "2/5",
                        "--L2", "2/5", "--steps", "2"], capsys)
    obj = json.loads(out)
    assert code == 0 and obj["hypothesis_ok"] and obj["hypothesis_notes"] == []


def test_simulate_limit_csv(tmp_path, capsys):
    path = tmp_path / "limit.csv"
    code, _, _ = run(["simulate-limit", "--alpha", "1/8", "--beta", "1",
                      "--gamma", "1", "--L1", "3/5", "--L2", "3/5",
                      "--T", "0.05", "--out", str(path)], capsys)
    assert code == 0
    assert path.read_text().splitlines()[0] == "t,L1,L2,event"


def test_oracle_match_exit_zero(capsys):
    code, out, _ = run(["oracle", "--alpha", "1/8", "--beta", "1",
                        "--gamma", "1/4", "--eps", "1/4", "--width", "2",
                        "--height", "2", "--collar", "0"], capsys)
    obj = json.loads(out)
    assert code == 0 and obj["matches_structured"] is True


def test_oracle_mismatch_exit_three(capsys):
    code, out, _ = run(["oracle", "--alpha", "1/8", "--beta", "1",
                        "--gamma", "1", "--eps", "1/2", "--width", "2",
                        "--height", "2", "--collar", "1"], capsys)
    obj = json.loads(out)
    assert code == 3 and obj["matches_structured"] is False


def test_oracle_oversize_exit_two(capsys):
    code, _, err = run(["oracle", "--alpha", "1", "--beta", "1", "--gamma", "1",
                        "--eps", "1/40", "--width", "4", "--height", "4",
                        "--collar", "1"], capsys)
    assert code == 2 and "28" in err


def test_algebra_check_cli(capsys):
    code, out, _ = run(["algebra-check", "--alpha", "1/8", "--beta", "1",
                        "--gamma", "1", "--eps", "1/60", "--L1", "2/5",
                        "--L2", "2/5"], capsys)
    obj = json.loads(out)
    assert code == 0 and obj["ok"] is True


def test_convergence_cli(tmp_path, capsys):
    path = tmp_path / "conv.csv"
    code, _, _ = run(["convergence", "--alpha", "1/8", "--beta", "1",
                      "--gamma", "1", "--L1", "3/5", "--L2", "3/5",
                      "--T", "0.05", "--eps-list", "1/50,1/100",
                      "--out", str(path)], capsys)
    assert code == 0
    assert path.read_text().splitlines()[0] == \
        "eps,tau,t_probe,L1_discrete,L1_limit,err"


def test_report_bundle(tmp_path, capsys):
    code, out, _ = run(["report", "--alpha", "1/8", "--beta", "1", "--gamma",
                        "1", "--eps", "1/200", "--out-dir", str(tmp_path)],
                       capsys)
    assert code == 0
    obj = json.loads(out)
    expected = {"trace.csv", "limit.csv", "convergence.csv", "sweep.csv",
                "thresholds.json", "trajectory.png", "convergence.png",
                "velocity.png", "report.md"}
    assert set(obj["files"]) == expected
    for name in expected:
        assert (tmp_path / name).stat().st_size > 0
    text = (tmp_path / "report.md").read_text()
    assert text.startswith("# Double-porosity flow report")


def test_exit_two_paths(tmp_path, capsys):
    assert run(["thresholds", "--alpha", "x/8", "--beta", "1", "--gamma", "1"],
               capsys)[0] == 2
    assert run(["simulate-discrete", "--alpha", "1/8", "--beta", "1",
                "--gamma", "1", "--eps", "1/100", "--tau", "1/50",
                "--L1", "2/5", "--L2", "2/5"], capsys)[0] == 2
    assert run(THRESH + ["--out", str(tmp_path / "x.txt")], capsys)[0] == 2
    assert run(["no-such-command"], capsys)[0] == 2
    assert run([], capsys)[0] == 2


def test_gamma_tau_consistency_ok(capsys):
    code, out, _ = run(["simulate-discrete", "--alpha", "1/8", "--beta", "1",
                        "--gamma", "1", "--eps", "1/200", "--tau", "1/200",
                        "--L1", "2/5", "--L2", "2/5", "--steps", "1"], capsys)
    assert code == 0 and json.loads(out)["params"]["tau"] == "1/200"


def test_config_file_merge(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({
        "command": "thresholds", "alpha": "1/8", "beta": "1", "gamma": "1"}))
    code, out, _ = run(["thresholds", "--config", str(cfg)], capsys)
    assert code == 0 and json.loads(out)["thresholds"]["lambda_c"] == "8/11"
    # explicit flags win over file values
    code, out, _ = run(["thresholds", "--config", str(cfg),
                        "--alpha", "1"], capsys)
    assert json.loads(out)["thresholds"]["lambda_plus"] == "2/3"
    # unknown keys are rejected
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"command": "thresholds", "alfa": "1/8"}))
    assert run(["thresholds", "--config", str(bad)], capsys)[0] == 2
    # config command must match the invoked subcommand
    assert run(["simulate-limit", "--config", str(cfg)], capsys)[0] == 2


def test_byte_identical_determinism(tmp_path):
    cmd = [sys.executable, "-m", "mushy.cli", "simulate-discrete",
           "--alpha", "1/8", "--beta", "1", "--gamma", "1", "--eps", "1/100",
           "--L1", "2/5", "--L2", "2/5", "--steps", "50"]
    a = subprocess.run(cmd, capture_output=True)
    b = subprocess.run(cmd, capture_output=True)
    assert a.returncode == b.returncode == 0
    assert a.stdout == b.stdout and a.stdout
