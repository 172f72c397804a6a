"""File formats for matrices, symmetry forms and symbol loops.

Matrices are JSON ``{"rows", "cols", "re", "im"}`` (nested lists) or plain
text: a header line ``rows cols`` followed by one ``re im`` pair per entry in
row-major order.  Forms are JSON ``{"kind", "dim", "matrix"}``; on the command
line ``std-odd:N`` and ``std-even:P,M`` name the standard forms directly.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .errors import ContractError
from .symmetry import Kind, SymmetryForm, standard_I, standard_J


def matrix_to_dict(M):
    M = np.asarray(M, dtype=complex)
    return {"rows": M.shape[0], "cols": M.shape[1], "re": M.real.tolist(), "im": M.imag.tolist()}


def matrix_from_dict(d):
    try:
        re = np.asarray(d["re"], dtype=float)
        im = np.asarray(d.get("im", np.zeros_like(re)), dtype=float)
        shape = (int(d["rows"]), int(d["cols"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ContractError(f"malformed matrix record: {exc}") from exc
    if re.shape != shape or im.shape != shape:
        raise ContractError("matrix entries do not match rows/cols", shape=list(shape))
    return re + 1j * im


def matrix_to_text(M):
    M = np.asarray(M, dtype=complex)
    lines = [f"{M.shape[0]} {M.shape[1]}"]
    lines += [f"{float(z.real)!r} {float(z.imag)!r}" for z in M.ravel()]
    return "\n".join(lines) + "\n"


def matrix_from_text(text):
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    try:
        r, c = (int(x) for x in rows[0])
        vals = np.array([[float(a), float(b)] for a, b in rows[1:]])
    except (IndexError, ValueError) as exc:
        raise ContractError(f"malformed matrix text: {exc}") from exc
    if vals.shape[0] != r * c:
        raise ContractError("entry count does not match the header", expected=r * c, found=len(vals))
    return (vals[:, 0] + 1j * vals[:, 1]).reshape(r, c)


def _read(path):
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ContractError(f"cannot read {path}: {exc.strerror}", code="USAGE") from exc


def _json(text, path):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ContractError(f"{path} is not valid JSON: {exc}") from exc


def read_matrix(path):
    text = _read(path)
    if text.lstrip().startswith("{"):
        return matrix_from_dict(_json(text, path))
    return matrix_from_text(text)


def form_to_dict(F):
    return {"kind": F.kind.value, "dim": F.dim, "matrix": F.matrix.real.tolist()}


def form_from_dict(d):
    try:
        M = np.asarray(d["matrix"], dtype=float)
        kind = Kind(d["kind"])
    except (KeyError, ValueError, TypeError) as exc:
        raise ContractError(f"malformed form record: {exc}") from exc
    if "dim" in d and int(d["dim"]) != M.shape[0]:
        raise ContractError("form dim does not match its matrix")
    return SymmetryForm(kind, M)


def read_form(spec):
    """Load a form from a JSON file, or build ``std-odd:N`` / ``std-even:P,M``."""
    if spec.startswith("std-odd:"):
        return standard_I(_int(spec[8:]))
    if spec.startswith("std-even:"):
        p, _, m = spec[9:].partition(",")
        return standard_J(_int(p), _int(m or "0"))
    return form_from_dict(_json(_read(spec), spec))


def _int(s):
    try:
        return int(s)
    except ValueError as exc:
        raise ContractError(f"expected an integer, got {s!r}", code="USAGE") from exc


def read_loop(path):
    from .toeplitz import SymbolLoop

    d = _json(_read(path), path)
    try:
        return SymbolLoop.from_dict(d)
    except (KeyError, TypeError) as exc:
        raise ContractError(f"malformed loop record: {exc}") from exc


def jsonable(obj):
    """Recursively convert numpy scalars/arrays and non-finite floats for JSON."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return jsonable(obj.item())
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def dumps(obj):
    return json.dumps(jsonable(obj), sort_keys=True, indent=2) + "\n"


def csv_text(rows, columns):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: _cell(r.get(k, "")) for k in columns})
    return buf.getvalue()


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.generic):
        return v.item()
    return v
