import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from peakedsim import cli, peaked
from peakedsim.circuit import gate, identity, save, single_layer
from peakedsim.eigen import EigenResult


def _run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, out


@pytest.fixture
def ident(tmp_path):
    p = tmp_path / "id.json"
    save(identity(3), p)
    return p


def test_prob_identity(capsys, ident):
    code, out = _run(capsys, "prob", ident, "--x", "000")
    data = json.loads(out)
    assert code == 0 and data["status"] == "ok" and data["p"] == 1.0
    assert data["config"]["x"] == "000" and "limits" in data["config"]


def test_theory_mode_rejects_w(capsys, ident):
    code, _ = _run(capsys, "simulate", ident, "--W", "2")
    assert code == 1


def test_simulate_not_peaked_exit_code(capsys, ident, monkeypatch):
    # theory mode at this size clamps W to n, so the solver is stubbed to fail the success test
    def low(matvec, dim, **kw):
        return EigenResult(0.5, np.eye(dim, 1)[:, 0].astype(complex), 0.0, 1, True)

    monkeypatch.setattr(peaked, "largest_eigenpair", low)
    code, out = _run(capsys, "simulate", ident)
    assert code == 2
    assert json.loads(out)["status"] == "not_peaked"


def test_sample2d_not_peaked_exit_code(capsys, tmp_path):
    path = tmp_path / "v.json"
    code, _ = _run(capsys, "gen-vtheta", "--rows", 4, "--cols", 6, "--d", 3, "--theta", 0.1,
                   "--pattern", "v-even,v-odd,h-even", "--out", path)
    assert code == 0
    code, out = _run(capsys, "sample2d", path, "--samples", 5)
    assert code == 2 and json.loads(out)["status"] == "not_peaked"


def test_simulate_and_state_outputs(capsys, tmp_path):
    c = single_layer(3, [gate("x", 1)])
    path = tmp_path / "x.json"
    save(c, path)
    state = tmp_path / "s.txt"
    code, out = _run(capsys, "simulate", path, "--mode", "practical", "--W", 1, "--samples", 4,
                     "--state-out", state)
    data = json.loads(out)
    assert code == 0 and data["flips"] == "010" and data["samples"] == ["010"] * 4
    assert data["D"] == 4 and data["certified"]
    first = state.read_text().splitlines()[0].split()
    assert first[0] == "010" and abs(float(first[1]) ** 2 + float(first[2]) ** 2 - 1) < 1e-12


def test_rerun_from_embedded_config_is_identical(capsys, tmp_path):
    path = tmp_path / "v.json"
    _run(capsys, "gen-vtheta", "--rows", 3, "--cols", 3, "--d", 2, "--theta", 0.1, "--out", path)
    _, out1 = _run(capsys, "simulate", path, "--mode", "practical", "--W", 3, "--samples", 20)
    first = json.loads(out1)
    cfg = first["config"]
    _, out2 = _run(capsys, "simulate", cfg["circuit"], "--mode", cfg["mode"], "--W", cfg["W"],
                   "--samples", cfg["samples"], "--seed", cfg["seed"], "--epsilon", cfg["epsilon"])
    assert json.loads(out2) == first


def test_trace_meanvalue_oracle(capsys, tmp_path):
    cx = tmp_path / "cx.json"
    save(single_layer(2, [gate("cx", 0, 1)]), cx)
    code, out = _run(capsys, "trace", cx, "--epsilon", 0.05)
    assert code == 0 and abs(json.loads(out)["value"] - 0.25) <= 0.05
    h = tmp_path / "h.json"
    save(single_layer(1, [gate("h", 0)]), h)
    code, out = _run(capsys, "meanvalue", h, "--pauli", "X")
    assert code == 0 and json.loads(out)["value"] == pytest.approx(1)
    obs = tmp_path / "obs.json"
    obs.write_text(json.dumps([[[[0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]]]))
    code, out = _run(capsys, "meanvalue", h, "--observables", obs)
    assert code == 0 and json.loads(out)["value"] == pytest.approx(0.25)
    code, out = _run(capsys, "oracle", h, "--x", "1")
    assert json.loads(out)["p"] == pytest.approx(0.5)


def test_frobenius_and_frame_potential(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    save(identity(2), a)
    save(single_layer(2, [gate("z", 0)]), b)
    code, out = _run(capsys, "frobenius", a, b)
    assert code == 0 and json.loads(out)["distance"] == pytest.approx(2)
    code, out = _run(capsys, "frame-potential", "--family", "pauli1", "--enumerate")
    assert json.loads(out)["mean"] == 0.25
    code, out = _run(capsys, "frame-potential", "--family", "identity", "--n", 2, "--M", 3)
    assert json.loads(out)["mean"] == pytest.approx(1)


def test_bench_vtheta_csv(capsys, tmp_path):
    code, out = _run(capsys, "bench-vtheta", "--rows", 4, "--cols", 4, "--d", 2, "--theta", 0.1,
                     "--w-max", 4, "--workers", 1)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "# peakedsim bench-vtheta csv v1"
    assert lines[1].startswith("# config: ")
    rows = list(csv.DictReader(io.StringIO("\n".join(lines[2:]))))
    assert list(rows[0]) == cli.BENCH_COLUMNS
    assert [int(r["W"]) for r in rows] == [0, 1, 2, 3, 4]
    errs = []
    for r in rows:
        err = abs(float(r["p_est"]) - float(r["p_exact"]))
        assert err <= float(r["error_bound"]) + 1e-12
        assert float(r["l1_exact"]) <= float(r["error_bound"]) + 1e-12
        errs.append(err)
    lams = [float(r["lambda1"]) for r in rows]
    assert all(b >= a - 1e-12 for a, b in zip(lams, lams[1:]))
    assert errs[-1] <= errs[0]


def test_module_entry_point(tmp_path):
    p = tmp_path / "id.json"
    save(identity(2), p)
    proc = subprocess.run([sys.executable, "-m", "peakedsim", "prob", str(p), "--x", "00"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["p"] == 1.0
    proc = subprocess.run([sys.executable, "-m", "peakedsim", "prob", str(tmp_path / "missing.json"),
                           "--x", "00"], capture_output=True, text=True)
    assert proc.returncode == 1 and "error" in proc.stderr
