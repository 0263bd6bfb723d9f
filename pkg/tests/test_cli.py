import json
import math
import subprocess
import sys

import pytest

from schattenlab.cli import main
from schattenlab.fitting import PowerLawFit
from schattenlab.spectral_analysis import SchattenReport
from schattenlab.order_calculus import Threshold


def run(tmp_path, sub, *sets, fmt="both", config=None):
    argv = [sub, "--out", str(tmp_path), "--format", fmt]
    for s in sets:
        argv += ["--set", s]
    if config:
        argv += ["--config", str(config)]
    return main(argv)


def test_thresholds(tmp_path, capsys):
    assert run(tmp_path, "thresholds", "params.n=2", "params.k=1", "params.rho=1",
               "params.p=2", "params.kappa=0", "params.r=1") == 0
    out = json.loads(capsys.readouterr().out)
    th = out["entries"][0]["thresholds"]["schatten"]
    assert th["value"] == -2 and th["sharp"] == "iff"
    assert Threshold.from_dict(th).value == -2
    assert json.loads((tmp_path / "thresholds.json").read_text()) == out


def test_threshold_grid(tmp_path, capsys):
    assert run(tmp_path, "thresholds", "params.n=2", "params.p=1.5,2,4", "params.r=1,2") == 0
    assert len(json.loads(capsys.readouterr().out)["entries"]) == 6
    assert (tmp_path / "thresholds.csv").read_text().count("\n") == 7


def test_weyl(tmp_path, capsys):
    assert run(tmp_path, "weyl", "manifold=torus:2") == 0
    out = json.loads(capsys.readouterr().out)
    assert abs(PowerLawFit.from_dict(out["fit"]).exponent - 2) < 0.05
    lines = (tmp_path / "weyl.csv").read_text().splitlines()
    assert lines[0] == "lambda,count,fit" and len(lines) == 41


def test_spectrum(tmp_path, capsys):
    assert run(tmp_path, "spectrum", "spectrum.lambda_max=3", fmt="json") == 0
    out = json.loads(capsys.readouterr().out)
    assert [(lv["multiplicity"], lv["modes"]) for lv in out["levels"]] == [
        (1, [[0]]), (2, [[-1], [1]]), (2, [[-2], [2]])]
    assert not (tmp_path / "spectrum.csv").exists()


def test_sogge(tmp_path, capsys):
    assert run(tmp_path, "sogge", "manifold=sphere", "sogge.p=inf", "sogge.family=zonal",
               "sogge.ell_max=100") == 0
    fit = json.loads(capsys.readouterr().out)["fits"][0]
    assert abs(fit["fit"]["exponent"] - 0.5) < 0.02 and fit["phi"] == 0.5


def test_schatten_roundtrip(tmp_path, capsys):
    assert run(tmp_path, "schatten", "operator.factors=bessel(s=2)", "schatten.r=1,2",
               "cutoff.lambda=64", "cutoff.lambda2=128") == 0
    out = json.loads(capsys.readouterr().out)
    reps = [SchattenReport.from_dict(r["report"]) for r in out["runs"]]
    assert [r.verdict for r in reps] == ["Member", "Member"]
    assert all(r["crosscheck"]["consistent"] for r in out["runs"])


def test_operator_and_trace(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("manifold = torus:1\n[operator]\nfactors = multiply(0:2; 1:0.5; -1:0.5) | bessel(s=3)\n"
                   "[cutoff]\nlambda = 16\n")
    assert run(tmp_path, "operator", config=cfg) == 0
    assert (tmp_path / "operator_matrix.bin").stat().st_size == 31 * 31 * 16
    capsys.readouterr()
    assert run(tmp_path, "trace", config=cfg) == 0
    out = json.loads(capsys.readouterr().out)
    assert abs(out["nuclear_trace"]["re"] - out["kernel_diagonal"]["re"]) < 1e-9


def test_lidskii(tmp_path, capsys):
    assert run(tmp_path, "lidskii", "operator.factors=bessel(s=3)", "cutoff.lambda=64",
               "lidskii.p=4") == 0
    out = json.loads(capsys.readouterr().out)
    assert out["verdicts"]["trace_formula"] is True and abs(out["r"] - 0.8) < 1e-15


def test_errors_are_json(tmp_path, capsys):
    assert run(tmp_path, "lidskii", "operator.factors=bessel(s=1.1)", "lidskii.p=4") == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["code"] == "threshold" and "mu" in err["error"]["inequality"]
    assert run(tmp_path, "spectrum", "manifold=torus:5") == 2
    assert json.loads(capsys.readouterr().err)["error"]["code"] == "configuration"
    assert run(tmp_path, "sogge", "manifold=torus:1") == 2
    assert run(tmp_path, "schatten") == 2


def test_reproducible_bytes(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["operator.factors=compose(tau=0.7; eps=0.2) | bessel(s=4)", "cutoff.lambda=32",
            "trace.budget=300"]
    for d in (a, b):
        assert run(d, "lidskii", *args) == 0
        assert run(d, "weyl", "manifold=sphere") == 0
    for name in ("lidskii.json", "lidskii.csv", "weyl.json", "weyl.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_console_script(tmp_path):
    out = subprocess.run([sys.executable, "-m", "schattenlab.cli", "thresholds", "--out",
                          str(tmp_path), "--threads", "1"], capture_output=True, text=True)
    assert out.returncode == 0
    assert json.loads(out.stdout)["entries"][0]["params"]["n"] == 1
