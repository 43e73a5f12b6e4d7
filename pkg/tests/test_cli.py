import json
import subprocess
import sys

import numpy as np
import pytest

from framelab import io as fio
from framelab.cli import main


@pytest.fixture
def files(tmp_path, mb3):
    fio.write_frame_csv(tmp_path / "mb3.csv", mb3.vectors)
    fio.write_frame_csv(tmp_path / "eye.csv", np.eye(3))
    fio.write_frame_csv(tmp_path / "one.csv", [[1.0, 0.0]])
    specs = {
        "sphere.json": {"type": "uniform_sphere", "d": 3},
        "bern.json": {"type": "bernoulli_hypercube", "d": 4},
        "vm.json": {"type": "von_mises_mixture", "funtf_csv": "mb3.csv", "kappa": 2.0},
        "badvm.json": {"type": "von_mises_mixture", "funtf": [[1, 0], [1, 0]], "kappa": 2.0},
        "conv.json": {"specs": {"repeat": 3, "spec": {"type": "uniform_sphere", "d": 3}}, "trials": 2000},
        "gauss.json": {"specs": {"repeat": 50, "spec": {"type": "isotropic_gaussian", "d": 4}},
                       "trials": 2000},
        "dft.json": {"specs": {"type": "dft_rows", "d": 4}, "trials": 2000},
    }
    for name, obj in specs.items():
        (tmp_path / name).write_text(json.dumps(obj))
    return tmp_path


def run(*args):
    return main([str(a) for a in args])


def read_csv(path):
    lines = path.read_text().splitlines()
    head = lines[0].split(",")
    return [dict(zip(head, ln.split(","))) for ln in lines[1:]]


def test_analyze(files, capsys):
    assert run("analyze", "--input", files / "mb3.csv", "--out", files / "r.json") == 0
    rep = json.loads((files / "r.json").read_text())
    assert rep["lower_bound"] == pytest.approx(1.5) and rep["upper_bound"] == pytest.approx(1.5)
    assert rep["tight"] and rep["frame_potential"] == pytest.approx(4.5)
    assert run("analyze", "--input", files / "eye.csv") == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["lower_bound"] == pytest.approx(1) and rep["frame_potential"] == pytest.approx(3)
    assert run("analyze", "--input", files / "one.csv") == 0
    cap = capsys.readouterr()
    assert "warning" in cap.err and json.loads(cap.out)["lower_bound"] == pytest.approx(0, abs=1e-15)


def test_analyze_writes_duals(files):
    assert run("analyze", "--input", files / "mb3.csv", "--out", files / "r.json",
               "--dual", files / "dual.csv", "--parseval", files / "pars.csv") == 0
    mb = fio.read_frame_csv(files / "mb3.csv").vectors
    assert np.allclose(fio.read_frame_csv(files / "dual.csv").vectors, 2 / 3 * mb)
    assert run("analyze", "--input", files / "one.csv", "--dual", files / "x.csv") == 2


def test_sample(files):
    assert run("sample", "--spec", files / "sphere.json", "--n", 5, "--seed", 7, "--out", files / "s.csv") == 0
    v = fio.read_frame_csv(files / "s.csv").vectors
    assert v.shape == (5, 3) and np.allclose(np.linalg.norm(v, axis=1), 1)
    first = (files / "s.csv").read_bytes()
    run("sample", "--spec", files / "sphere.json", "--n", 5, "--seed", 7, "--out", files / "s.csv")
    assert (files / "s.csv").read_bytes() == first
    assert run("sample", "--spec", files / "bern.json", "--n", 10, "--out", files / "b.csv") == 0
    assert np.allclose(np.abs(fio.read_frame_csv(files / "b.csv").vectors), 0.5)
    assert run("sample", "--spec", files / "badvm.json", "--n", 3) == 2
    # sample output is valid analyze input
    assert run("analyze", "--input", files / "s.csv", "--out", files / "a.json") == 0


def test_seed_env(files, monkeypatch):
    out = files / "e.csv"
    monkeypatch.setenv("FRAMELAB_SEED", "7")
    run("sample", "--spec", files / "sphere.json", "--n", 4, "--out", out)
    env_bytes = out.read_bytes()
    run("sample", "--spec", files / "sphere.json", "--n", 4, "--seed", 7, "--out", out)
    assert out.read_bytes() == env_bytes
    run("sample", "--spec", files / "sphere.json", "--n", 4, "--seed", 0, "--out", out)
    assert out.read_bytes() != env_bytes
    monkeypatch.delenv("FRAMELAB_SEED")
    run("sample", "--spec", files / "sphere.json", "--n", 4, "--out", out)
    default = out.read_bytes()
    run("sample", "--spec", files / "sphere.json", "--n", 4, "--seed", 0, "--out", out)
    assert out.read_bytes() == default


def test_converge(files):
    assert run("converge", "--spec", files / "conv.json", "--n-grid", "10,100,1000",
               "--out", files / "c.csv") == 0
    rows = read_csv(files / "c.csv")
    assert [float(r["closed_form"]) for r in rows] == pytest.approx([0.2 / 3, 0.02 / 3, 0.002 / 3])
    assert set(rows[0]) == {"n", "d", "trials", "empirical_mse", "standard_error", "closed_form"}
    rep = json.loads((files / "c.json").read_text())
    assert len(rep["results"]) == 3 and "per_entry_empirical" in rep["results"][0]
    assert run("converge", "--spec", files / "gauss.json", "--out", files / "g.csv") == 0
    assert float(read_csv(files / "g.csv")[0]["closed_form"]) == pytest.approx(0.025)
    assert run("converge", "--spec", files / "dft.json", "--n", 20, "--out", files / "d.csv") == 0
    assert float(read_csv(files / "d.csv")[0]["closed_form"]) == pytest.approx(0.0375)


def test_converge_strict(files):
    # one trial has a zero-width band, so the check fails deterministically
    (files / "tiny.json").write_text(json.dumps(
        {"specs": {"repeat": 2, "spec": {"type": "uniform_sphere", "d": 2}}, "trials": 1}))
    args = ("converge", "--spec", files / "tiny.json", "--out", files / "t.csv")
    assert run(*args) == 0
    assert run(*args, "--strict") == 3


def test_minimize(files):
    out = files / "m" / "f.csv"
    assert run("minimize", "--n", 5, "--d", 3, "--out", out) == 0
    cert = json.loads((files / "m" / "f_cert.json").read_text())
    assert cert["passed"] and cert["theoretical_min"] == pytest.approx(25 / 3)
    trace = read_csv(files / "m" / "f_trace.csv")
    assert set(trace[0]) == {"iter", "fp", "grad_norm"}
    assert run("minimize", "--n", 2, "--d", 3, "--out", files / "o.csv") == 0
    v = fio.read_frame_csv(files / "o.csv").vectors
    assert np.allclose(v @ v.T, np.eye(2), atol=1e-5)
    assert run("minimize", "--n", 1, "--d", 1, "--out", files / "p.csv") == 0
    assert json.loads((files / "p_cert.json").read_text())["fp"] == pytest.approx(1.0)


def test_design_check(files, capsys):
    assert run("design-check", "--input", files / "mb3.csv", "--strict") == 0
    assert json.loads(capsys.readouterr().out)["verdict"]
    assert run("design-check", "--spec", files / "sphere.json", "--mc-budget", 100000, "--strict") == 0
    assert json.loads(capsys.readouterr().out)["verdict"]
    (files / "pm.csv").write_text("x1,x2\n1,0\n")
    assert run("design-check", "--input", files / "pm.csv") == 0
    assert not json.loads(capsys.readouterr().out)["verdict"]
    assert run("design-check", "--input", files / "pm.csv", "--strict") == 3
    (files / "big.csv").write_text("x1,x2\n2,0\n0,2\n")
    assert run("design-check", "--input", files / "big.csv") == 2


def test_usage_errors(files, capsys):
    assert run("bogus") == 1
    assert run() == 1
    assert run("sample", "--spec", files / "sphere.json") == 1
    assert run("analyze", "--input", files / "missing.csv") == 1
    (files / "bad.csv").write_text("x1,x2\n1,2,3\n")
    assert run("analyze", "--input", files / "bad.csv") == 1
    assert "bad.csv:2" in capsys.readouterr().err
    assert run("design-check") == 1


def test_reproducible_outputs(files):
    def outputs(tag, workers):
        d = files / tag
        run("converge", "--spec", files / "conv.json", "--n-grid", "10,50", "--workers", workers,
            "--seed", 3, "--out", d / "c.csv")
        run("minimize", "--n", 7, "--d", 3, "--seed", 3, "--out", d / "f.csv")
        run("design-check", "--spec", files / "vm.json", "--seed", 3, "--out", d / "dc.json")
        run("sample", "--spec", files / "vm.json", "--n", 20, "--seed", 3, "--out", d / "s.csv")
        return {p.name: p.read_bytes() for p in sorted(d.iterdir())}

    a, b = outputs("a", 1), outputs("b", 4)
    assert len(a) == 7 and a == b


def test_console_script_entry_point(files):
    out = subprocess.run([sys.executable, "-m", "framelab", "analyze", "--input", str(files / "mb3.csv")],
                         capture_output=True, text=True)
    assert out.returncode == 0 and json.loads(out.stdout)["tight"]
