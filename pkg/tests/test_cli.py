import json
import subprocess
import sys
from importlib.resources import files

import jsonschema
import numpy as np
import pytest

from qmaxent import __version__, catalog
from qmaxent.cli import main
from qmaxent.operators import operator_to_json

SCHEMA = json.loads(files("qmaxent").joinpath("schema/summary.schema.json").read_text())


def run(argv, capsys):
    code = main(argv)
    return code, capsys.readouterr()


def test_no_arguments_prints_usage(capsys):
    code, out = run([], capsys)
    assert code == 2 and out.out.startswith("usage: qmaxent")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qmaxent", "version"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and __version__ in proc.stdout


def test_version_text_and_json(capsys):
    code, out = run(["version"], capsys)
    assert code == 0 and "degeneracy" in out.out and "seed        42" in out.out
    code, out = run(["version", "--json", "--seed", "7", "--tol", "degeneracy=1e-6"], capsys)
    info = json.loads(out.out)
    assert info["seed"] == 7 and info["tolerances"]["degeneracy"] == 1e-6 and info["version"] == __version__


def test_bad_tolerance_is_rejected(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["version", "--tol", "bogus=1"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit):
        main(["version", "--tol", "degeneracy"])
    with pytest.raises(SystemExit):
        main(["version", "--threads", "0"])


def write_observables(path, F):
    path.write_text(json.dumps({"observables": [operator_to_json(f) for f in F]}))
    return path


def test_maxent_command(tmp_path, capsys):
    F = catalog.degenerate_coupled_pair()
    prob = tmp_path / "p.json"
    prob.write_text(json.dumps({"observables": [operator_to_json(f) for f in F], "alpha": [1, 1]}))
    code, _ = run(["maxent", "--problem", str(prob), "--out", str(tmp_path / "s.json")], capsys)
    sol = json.loads((tmp_path / "s.json").read_text())
    assert code == 0 and sol["rank"] == 2 and sol["entropy_bits"] == pytest.approx(1, abs=1e-6)
    code, out = run(["maxent", "--problem", str(prob)], capsys)
    assert json.loads(out.out)["status"] == "face-reduced"


def test_maxent_command_reports_errors(tmp_path, capsys):
    prob = tmp_path / "p.json"
    prob.write_text(json.dumps({"observables": [operator_to_json(np.diag([1.0, -1.0]))], "alpha": [3]}))
    code, out = run(["maxent", "--problem", str(prob)], capsys)
    assert code == 1 and "error" in out.err
    code, out = run(["maxent", "--problem", str(tmp_path / "missing.json")], capsys)
    assert code == 1


def test_numrange_csv_is_reproducible(tmp_path, capsys):
    obs = write_observables(tmp_path / "obs.json", catalog.degenerate_split_pair())
    outs = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for out in outs:
        code, _ = run(["numrange", "--observables", str(obs), "--resolution", "60", "--face-samples", "20", "--out", str(out)], capsys)
        assert code == 0
    assert outs[0].read_bytes() == outs[1].read_bytes()
    assert outs[0].read_text().splitlines()[0].startswith("theta_1,theta_2,angle,alpha_1")


def test_qcmi_sweep_csv_is_reproducible(tmp_path, capsys):
    outs = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for out, threads in zip(outs, ("1", "2")):
        code, printed = run(["qcmi-sweep", "--n", "4,8", "--lambda", "0.5:1.5:0.25", "--threads", threads, "--out", str(out)], capsys)
        assert code == 0
    assert outs[0].read_bytes() == outs[1].read_bytes()
    lines = outs[0].read_text().splitlines()
    assert lines[0] == "n,lambda,I_bits,S_AB,S_BC,S_B,S_ABC" and len(lines) == 11
    assert "crossing n=4,8" in printed.out


def test_qcmi_sweep_line3_periodic_needs_flag(tmp_path, capsys):
    args = ["qcmi-sweep", "--n", "8", "--scheme", "line3", "--boundary", "periodic", "--lambda", "1.0", "--out", str(tmp_path / "s.csv")]
    code, _ = run(args, capsys)
    assert code == 1
    code, _ = run(args + ["--allow-adjacent"], capsys)
    assert code == 0


def test_ising_command(tmp_path, capsys):
    code, out = run(["ising", "--n", "6", "--lambda-x", "0.5", "--ground-state", str(tmp_path / "gs.json")], capsys)
    assert code == 0 and "ground energy" in out.out
    gs = json.loads((tmp_path / "gs.json").read_text())
    assert gs["n_sites"] == 6 and len(gs["re"]) == 64
    pauli = tmp_path / "h.txt"
    pauli.write_text("-1 Z0 Z1\n-1 Z1 Z2\n-0.2 X0\n")
    code, out = run(["ising", "--pauli", str(pauli)], capsys)
    assert code == 0 and "n=3 terms=3" in out.out
    pauli.write_text("-1 Z0 Q1\n")
    code, _ = run(["ising", "--pauli", str(pauli)], capsys)
    assert code == 1


def test_discontinuity_command(tmp_path, capsys):
    obs = write_observables(tmp_path / "obs.json", catalog.degenerate_coupled_pair())
    path = tmp_path / "path.json"
    path.write_text(json.dumps({"scale": [0, 1], "grid": [1e-1, 1e-2, 1e-3, 1e-4]}))
    h0 = tmp_path / "h0.json"
    h0.write_text(json.dumps({"h0": [-1, 0]}))
    report = tmp_path / "r.json"
    code, out = run(["discontinuity", "--observables", str(obs), "--h0", str(h0), "--path", str(path), "--report", str(report)], capsys)
    assert code == 0 and "verdict discontinuous" in out.out
    assert json.loads(report.read_text())["gap_entropy_bits"] == pytest.approx(1, abs=1e-3)
    code, _ = run(["discontinuity", "--observables", str(obs), "--path", str(path)], capsys)
    assert code == 1


@pytest.mark.parametrize("example", ["ex1", "ex2", "ghz", "ex7", "ex8"])
def test_reproduce_summary_validates(tmp_path, capsys, example):
    code, out = run(["reproduce", example, "--out", str(tmp_path)], capsys)
    summary = json.loads((tmp_path / example / "summary.json").read_text())
    jsonschema.validate(summary, SCHEMA)
    assert code == 0 and summary["passed"] and summary["seed"] == 42
    assert "checks passed" in out.out
    for name in summary["artifacts"]:
        assert (tmp_path / example / name).exists()


def test_reproduce_artifacts_are_byte_identical(tmp_path, capsys):
    for sub in ("a", "b"):
        assert run(["reproduce", "ex3", "--out", str(tmp_path / sub)], capsys)[0] == 0
    assert (tmp_path / "a/ex3/points.csv").read_bytes() == (tmp_path / "b/ex3/points.csv").read_bytes()


def test_reproduce_failure_sets_exit_code(tmp_path, capsys):
    # a grid that never reaches the ordered phase cannot satisfy the limit check
    code, out = run(["reproduce", "fig5", "--n", "4,8", "--lambda", "1.5:2.0:0.25", "--out", str(tmp_path)], capsys)
    summary = json.loads((tmp_path / "fig5" / "summary.json").read_text())
    jsonschema.validate(summary, SCHEMA)
    assert code == 1 and not summary["passed"] and "FAIL  ordered_limit" in out.out


def test_reproduce_rejects_unknown_id(capsys):
    with pytest.raises(SystemExit):
        main(["reproduce", "ex99"])


@pytest.mark.slow
def test_reproduce_all_summary(tmp_path, capsys):
    code, _ = run(["reproduce", "all", "--out", str(tmp_path)], capsys)
    summary = json.loads((tmp_path / "summary.json").read_text())
    jsonschema.validate(summary, SCHEMA)
    assert code == 0 and summary["passed"]
    assert set(summary["details"]) == {"ex1", "ex2", "ex3", "ghz", "ising-finite", "ex6", "ex7", "ex8", "fig5", "fig7", "fig9"}
    for part in summary["details"]:
        jsonschema.validate(json.loads((tmp_path / part / "summary.json").read_text()), SCHEMA)
