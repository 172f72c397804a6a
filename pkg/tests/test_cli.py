import json

import numpy as np
import pytest

from oddsym import io
from oddsym.cli import main
from oddsym.insulator import build_kane_mele
from oddsym.symmetry import Kind, SymmetryForm
from oddsym.toeplitz import make_fn_loop


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def mat(tmp_path):
    def write(M, name="m.json"):
        p = tmp_path / name
        p.write_text(json.dumps(io.matrix_to_dict(np.asarray(M, dtype=complex))))
        return p

    return write


def test_check_symmetry(capsys, mat):
    code, out, _ = run(capsys, "check-symmetry", mat(np.eye(2)), "std-odd:2")
    assert code == 0 and json.loads(out)["results"]["odd"] == "PASS"
    code, out, _ = run(capsys, "check-symmetry", mat(np.diag([1, 2])), "std-odd:2")
    rep = json.loads(out)
    assert code == 1 and rep["results"]["odd"] == "FAIL"
    assert np.isclose(rep["residuals"]["odd"], np.sqrt(2))
    code, _, _ = run(capsys, "check-symmetry", mat(np.eye(2)), "std-odd:2", "--predicate", "even")
    assert code == 3


def test_check_symmetry_on_stored_kane_mele(capsys, mat, tmp_path):
    m = build_kane_mele(4, 4, lambda_r=0.03, disorder_w=0.2, seed=1)
    form = tmp_path / "is.json"
    form.write_text(json.dumps(io.form_to_dict(m.I_s)))
    code, out, _ = run(capsys, "check-symmetry", mat(m.hamiltonian), form)
    assert code == 0 and json.loads(out)["passed"]


def test_factorize_and_completion(capsys, mat):
    rng = np.random.default_rng(0)
    I4 = np.kron(np.eye(2), [[0, -1], [1, 0]])
    X = rng.normal(size=(4, 2)) @ rng.normal(size=(2, 4))
    P = mat(I4.T @ X.T @ I4 @ X)
    fp = P.parent / "f.json"
    fp.write_text(json.dumps(io.form_to_dict(SymmetryForm(Kind.ODD, I4))))
    code, out, _ = run(capsys, "factorize", P, fp)
    rep = json.loads(out)
    assert code == 0 and rep["rank_A"] == rep["rank_T"] == 2
    code, out, _ = run(capsys, "completion", P, fp)
    assert code == 0 and json.loads(out)["certified"]
    code, _, err = run(capsys, "completion", mat(np.diag([1, 2])), "std-odd:2")
    assert code == 3 and json.loads(err)["error"] == "CONTRACT"


def test_ind2(capsys, mat):
    code, out, _ = run(capsys, "ind2", "--fn", 1, "--sites", 32)
    rep = json.loads(out)
    assert code == 0 and rep["ind2"] == 1 and rep["kernel_dim_raw"] == 2
    code, out, _ = run(capsys, "ind2", mat(np.eye(4)), "std-odd:4")
    assert json.loads(out)["ind2"] == 0
    code, out, _ = run(capsys, "ind2", mat(np.diag([1, 1, 5e-9, 5e-9])), "std-odd:4")
    assert code == 2 and json.loads(out)["status"] == "UNRESOLVED"
    code, _, err = run(capsys, "ind2")
    assert code == 3 and json.loads(err)["error"] == "USAGE"


def test_ind2_from_loop_file(capsys, tmp_path):
    p = tmp_path / "loop.json"
    p.write_text(json.dumps(make_fn_loop(3, 64).to_dict()))
    code, out, _ = run(capsys, "ind2", "--loop", p, "--sites", 32)
    assert code == 0 and json.loads(out)["ind2"] == 1


def test_gk_table_and_crossings(capsys, tmp_path):
    cross = tmp_path / "cross.csv"
    code, out, _ = run(capsys, "gk", "--sites", 32, "--format", "csv", "--crossings", cross)
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "n,n_sites,wind2,ind2,equal,resolved" and len(lines) == 6
    assert [ln.split(",")[2:5] for ln in lines[1:]] == [[str(n % 2), str(n % 2), "True"] for n in range(5)]
    assert cross.read_text().startswith("loop,t,index,phase\n")
    code, out, _ = run(capsys, "gk", "--n", 2, "--sites", 32)
    assert json.loads(out)["rows"][0]["wind2"] == 0


def test_winding(capsys):
    code, out, _ = run(capsys, "winding", "--scalar")
    assert code == 0 and json.loads(out)["wind"] == 1
    code, out, _ = run(capsys, "winding", "--n", 3)
    rep = json.loads(out)
    assert rep["wind"] == 0 and rep["wind2"] == 1
    code, out, _ = run(capsys, "winding", "--n", 1, "--format", "csv", "--samples", 16)
    assert out.splitlines()[0] == "t,index,phase" and len(out.splitlines()) == 1 + 17 * 2


def test_sweep_and_config(capsys, tmp_path):
    cfg = tmp_path / "sweep.json"
    cfg.write_text(json.dumps({"Lx": 6, "Ly": 6, "w": 0.2, "values": [0.1, 0.6], "seed": 3}))
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, "insulator-sweep", "--config", cfg, "--format", "csv", "--out", out1)[0] == 0
    # config overrides flags: --Lx 20 is ignored
    assert run(capsys, "insulator-sweep", "--config", cfg, "--format", "csv", "--out", out2, "--Lx", 20)[0] == 0
    assert out1.read_bytes() == out2.read_bytes()
    rows = out1.read_text().splitlines()
    assert len(rows) == 3 and rows[1].split(",")[1] == "6"
    code, out, _ = run(capsys, "insulator-sweep", "--format", "csv")
    assert code == 0 and len(out.splitlines()) == 1
    code, out, _ = run(capsys, "insulator-sweep", "--Lx", 6, "--Ly", 6, "--start", 0.1, "--stop", 0.14,
                       "--step", 0.02, "--format", "csv")
    assert [r.split(",")[6] for r in out.splitlines()[1:]] == ["0.1", "0.12", "0.14"]


def test_theorem11(capsys):
    code, out, _ = run(capsys, "theorem11", "--Lx", 8, "--Ly", 8)
    assert code == 0 and json.loads(out)["status"] == "HOLDS"
    code, out, _ = run(capsys, "theorem11", "--Lx", 8, "--Ly", 8, "--lambda-v", 0.6)
    assert code == 0 and json.loads(out)["status"] == "VACUOUS"
    code, out, _ = run(capsys, "theorem11", "--Lx", 6, "--Ly", 6, "--E-F", -10)
    assert code == 2 and json.loads(out)["status"] == "NOT_APPLICABLE"


def test_usage_errors(capsys, tmp_path):
    assert run(capsys, "bogus")[0] == 3
    assert run(capsys)[0] == 3
    assert run(capsys, "gk", "--tol", "-1")[0] == 3
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"nope": 1}))
    code, _, err = run(capsys, "gk", "--config", bad)
    assert code == 3 and json.loads(err)["error"] == "USAGE"
    bad.write_text(json.dumps({"sites": -4}))
    assert run(capsys, "gk", "--config", bad)[0] == 3
    code, out, err = run(capsys, "check-symmetry", tmp_path / "missing.json", "std-odd:2")
    assert code == 3 and out == "" and "error" in json.loads(err)
