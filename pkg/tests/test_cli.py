import csv
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from toralclt import cli
from toralclt.catalog import named_example
from toralclt.lattice import action_to_json
from toralclt.spectral import apply_coboundary_operator
from toralclt.trigpoly import TrigPolynomial

DATA = Path(__file__).resolve().parents[1] / "demos" / "data"


def run(capsys, *argv):
    code = cli.run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_check_quartic(capsys):
    code, out, _ = run(capsys, "check", "--action", str(DATA / "t4.json"), "--radius", "6")
    doc = json.loads(out)
    assert code == 0
    assert doc["totally_ergodic"] is True and doc["path"] == "irreducible+box"
    assert doc["schema"] == "toralclt.check/1"


def test_example_round_trip(capsys):
    code, out, _ = run(capsys, "example", "--name", "cubic-12-10")
    doc = json.loads(out)
    assert code == 0 and doc["dim"] == 3 and doc["rank"] == 2
    assert doc["generators"][0] == [-3, -3, 1, 10, 9, -3, -30, -26, 9]


def test_domain_error_is_one_json_line(capsys):
    code, out, err = run(capsys, "example", "--name", "missing")
    assert code == 1 and out == ""
    lines = err.strip().splitlines()
    assert len(lines) == 1
    doc = json.loads(lines[0])
    assert doc["error"] == "InvalidParameterError" and doc["module"] == "action_catalog"
    bad = json.dumps({"generators": [[[2, 1], [1, 1]], [[1, 1], [0, 1]]]})
    code, _, err = run(capsys, "check", "--action", bad)
    assert code == 1 and json.loads(err)["module"] == "lattice_algebra"


def test_unknown_subcommand_exits_2():
    res = subprocess.run([sys.executable, "-m", "toralclt", "frobnicate"], capture_output=True, text=True)
    assert res.returncode == 2 and "usage" in res.stderr


def test_kernels_csv(capsys):
    code, out, _ = run(capsys, "kernels", "--sequence", '{"kind": "square", "side": 4, "dim": 1}', "--grid", "8")
    rows = list(csv.reader(out.splitlines()))
    assert rows[0] == ["t", "value"] and len(rows) == 9
    assert float(rows[1][1]) == 4.0


def test_density_and_variance(capsys, tmp_path):
    act = named_example("cubic-12-10")
    a = tmp_path / "a.json"
    a.write_text(json.dumps(action_to_json(act)))
    f = tmp_path / "f.json"
    f.write_text(json.dumps(TrigPolynomial.real_pair((1, 0, 0)).to_json()))
    code, out, _ = run(capsys, "density", "--action", str(a), "--f", str(f), "--grid", "4")
    rows = list(csv.reader(out.splitlines()))
    assert rows[0] == ["t1", "t2", "phi"] and len(rows) == 17
    code, out, _ = run(capsys, "--seed", "2", "variance", "--action", str(a), "--f", str(f), "--theta", "0.1,0.2")
    doc = json.loads(out)
    assert doc["sigma2"] == 1.0 and doc["rotated"][0]["theta"] == [0.1, 0.2] and not doc["coboundary"]


def test_output_is_deterministic(capsys, tmp_path):
    cfg = {"action": str(DATA / "cubic_12_10.json"), "f": str(DATA / "real_pair.json"),
           "sequence": {"kind": "square", "side": 16}, "M": 500, "seed": 4, "thetas": [[0.3, 0.2]]}
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg))
    outs = []
    for threads in ("1", "2"):
        target = tmp_path / f"r{threads}.json"
        cli.run(["--threads", threads, "--out", str(target), "simulate", "--config", str(p)])
        outs.append(target.read_bytes())
    capsys.readouterr()
    assert outs[0] == outs[1]
    assert json.loads(outs[0])["schema"] == "toralclt.clt-report/1"


def test_simulate_delta0_and_cumulants(capsys, tmp_path):
    act = named_example("cubic-12-10")
    u = TrigPolynomial.random(3, 4, np.random.default_rng(2))
    g = apply_coboundary_operator(u, act, 0)
    cfg = {"action": action_to_json(act), "f": g.to_json(), "sequence": {"kind": "square", "side": 64},
           "M": 400, "seed": 1}
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg))
    samples = tmp_path / "s.csv"
    code, out, _ = run(capsys, "simulate", "--config", str(p), "--samples-out", str(samples))
    doc = json.loads(out)
    assert code == 0 and doc["limit"] == "delta0" and doc["passed"]
    rows = list(csv.DictReader(samples.open()))
    assert len(rows) == 400 and set(rows[0]) == {"index", "re", "im"}
    code, out, _ = run(capsys, "cumulants", "--samples", str(samples), "--columns", "re")
    k = json.loads(out)["cumulants"]
    assert code == 0 and len(k) == 4


def test_daka(capsys, tmp_path):
    a = tmp_path / "d.json"
    a.write_text(json.dumps(action_to_json(named_example("doubling"))))
    code, out, _ = run(capsys, "daka", "--action", str(a), "--N", "10")
    doc = json.loads(out)
    assert code == 0 and abs(doc["tau"] - 0.69314718056) < 1e-9 and doc["certified"]


def test_console_script_installed():
    res = subprocess.run(["toralclt", "example", "--name", "golden"], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["generators"] == [[2, 1, 1, 1]]
