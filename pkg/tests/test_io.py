import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oddsym import io
from oddsym.errors import ContractError
from oddsym.symmetry import Kind, standard_I, standard_J


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_matrix_round_trips(r, c, seed):
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(r, c)) + 1j * rng.normal(size=(r, c))
    assert np.array_equal(io.matrix_from_dict(json.loads(json.dumps(io.matrix_to_dict(M)))), M)
    assert np.array_equal(io.matrix_from_text(io.matrix_to_text(M)), M)


def test_read_matrix_detects_format(tmp_path):
    M = np.array([[1, 2j], [3, 4]])
    (tmp_path / "a.json").write_text(json.dumps(io.matrix_to_dict(M)))
    (tmp_path / "a.txt").write_text(io.matrix_to_text(M))
    assert np.array_equal(io.read_matrix(tmp_path / "a.json"), M)
    assert np.array_equal(io.read_matrix(tmp_path / "a.txt"), M)


def test_malformed_matrices():
    with pytest.raises(ContractError):
        io.matrix_from_dict({"rows": 2, "cols": 2, "re": [[1, 2]], "im": [[0, 0]]})
    with pytest.raises(ContractError):
        io.matrix_from_text("2 2\n1 0\n")
    with pytest.raises(ContractError):
        io.read_matrix("/nonexistent/file")


def test_forms(tmp_path):
    assert np.array_equal(io.read_form("std-odd:4").matrix, standard_I(4).matrix)
    assert np.array_equal(io.read_form("std-even:1,2").matrix, standard_J(1, 2).matrix)
    p = tmp_path / "f.json"
    p.write_text(json.dumps(io.form_to_dict(standard_I(2))))
    F = io.read_form(str(p))
    assert F.kind is Kind.ODD and F.dim == 2
    with pytest.raises(ContractError):
        io.read_form("std-odd:x")
    with pytest.raises(ContractError):
        io.form_from_dict({"kind": "ODD", "dim": 3, "matrix": [[0, -1], [1, 0]]})


def test_dumps_is_canonical():
    a = io.dumps({"b": np.float64(1.5), "a": np.arange(2), "c": float("inf"), "z": 1 + 2j})
    assert a == io.dumps({"c": float("inf"), "z": 1 + 2j, "a": [0, 1], "b": 1.5})
    assert json.loads(a)["c"] == "inf"


def test_csv_text():
    text = io.csv_text([{"a": 0.1, "b": "x"}], ("a", "b"))
    assert text == "a,b\n0.1,x\n"
    assert io.csv_text([], ("a", "b")) == "a,b\n"
