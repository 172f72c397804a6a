"""Command line entry point: ``oddsym <subcommand> ...``.

Values from ``--config FILE`` (JSON) override flags, which override defaults.
Exit codes: 0 pass, 1 assertion failed, 2 unresolved or numerical failure,
3 usage or contract error.  Errors are written to stderr as JSON.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .errors import ContractError, NumericalError, OddSymError
from .factorization import RECON_TOL, even_factorize, odd_factorize
from .matrix_core import DEFAULT_REL_TOL
from .symmetry import Kind, is_even_symmetric, is_odd_symmetric, is_quaternionic
from .toeplitz import make_fn_loop, make_scalar_loop, toeplitz_truncate, verify_gk, wind2, winding_number
from .z2_index import Boundary, TruncatedOperator, completion_isometry, ind2

EXIT_PASS, EXIT_FAIL, EXIT_UNRESOLVED, EXIT_USAGE = 0, 1, 2, 3

MODEL_DEFAULTS = {
    "Lx": 12,
    "Ly": 12,
    "t": 1.0,
    "lambda_so": 0.06,
    "lambda_r": 0.0,
    "lambda_v": 0.1,
    "w": 0.0,
    "boundary": "OPEN",
    "E_F": 0.0,
}
GK_COLUMNS = ("n", "n_sites", "wind2", "ind2", "equal", "resolved")
CROSSING_COLUMNS = ("t", "index", "phase")


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _positive(kind):
    def parse(s):
        try:
            v = kind(s)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"invalid value {s!r}") from exc
        if v <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {s}")
        return v

    return parse


def build_parser():
    common = Parser(add_help=False)
    common.add_argument("--config", help="JSON file whose keys override flags")
    common.add_argument("--tol", type=_positive(float), default=DEFAULT_REL_TOL, help="relative kernel tolerance")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--sites", type=_positive(int), default=64, help="truncation size (sites)")
    common.add_argument("--out", help="write the result here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    p = Parser(prog="oddsym", description="Odd symmetric matrices and their Z2 index.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=Parser)

    c = sub.add_parser("check-symmetry", parents=[common], help="odd/even/quaternionic residuals")
    c.add_argument("matrix")
    c.add_argument("form", help="form JSON file, std-odd:N or std-even:P,M")
    c.add_argument("--predicate", choices=("odd", "even", "quaternionic"))

    c = sub.add_parser("factorize", parents=[common], help="T = I* A^t I A (or J A^t J A)")
    c.add_argument("matrix")
    c.add_argument("form")

    c = sub.add_parser("ind2", parents=[common], help="kernel parity with edge filtering")
    c.add_argument("matrix", nargs="?")
    c.add_argument("form", nargs="?")
    c.add_argument("--site-dim", type=_positive(int), help="fiber dimension for a half-infinite operator")
    c.add_argument("--fn", type=int, help="build the Toeplitz truncation of f_n instead of reading a matrix")
    c.add_argument("--loop", help="build the Toeplitz truncation of a loop file")

    c = sub.add_parser("completion", parents=[common], help="odd symmetric partial isometry V")
    c.add_argument("matrix")
    c.add_argument("form")

    c = sub.add_parser("gk", parents=[common], help="compare Wind2 and Ind2 of Toeplitz truncations")
    c.add_argument("--n", type=int, nargs="*", default=None, help="f_n indices (default 0..4)")
    c.add_argument("--loop")
    c.add_argument("--samples", type=_positive(int), default=256)
    c.add_argument("--crossings", help="CSV file for the eigenphase branches")

    c = sub.add_parser("winding", parents=[common], help="winding number and Wind2 of a loop")
    c.add_argument("--n", type=int, default=1)
    c.add_argument("--loop")
    c.add_argument("--scalar", action="store_true", help="use z -> z^n on a 1d fiber (no symmetry)")
    c.add_argument("--samples", type=_positive(int), default=256)

    c = sub.add_parser("insulator-sweep", parents=[common], help="Kane-Mele phase table as CSV")
    c.add_argument("--axis", default="lambda_v")
    c.add_argument("--values", type=float, nargs="*")
    c.add_argument("--start", type=float)
    c.add_argument("--stop", type=float)
    c.add_argument("--step", type=_positive(float))
    _model_flags(c)

    c = sub.add_parser("theorem11", parents=[common], help="Ind2(T_P) = 1 implies nonzero spin Chern")
    _model_flags(c)
    return p


def _model_flags(c):
    for k, v in MODEL_DEFAULTS.items():
        flag = "--" + k.replace("_", "-")
        if isinstance(v, str):
            c.add_argument(flag, dest=k, default=v, choices=("OPEN", "TORUS"))
        elif isinstance(v, int):
            c.add_argument(flag, dest=k, type=_positive(int), default=v)
        else:
            c.add_argument(flag, dest=k, type=float, default=v)


def apply_config(args):
    if not args.config:
        return args
    try:
        cfg = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot load config {args.config}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    for key, value in cfg.items():
        attr = key.replace("-", "_")
        if attr in ("command", "config") or not hasattr(args, attr):
            raise UsageError(f"unknown config key {key!r} for {args.command}")
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            if attr in ("tol", "sites", "samples", "step", "Lx", "Ly") and value <= 0:
                raise UsageError(f"config value {key} must be positive")
        setattr(args, attr, value)
    return args


# ---------------------------------------------------------------- commands


def cmd_check_symmetry(args):
    T = io.read_matrix(args.matrix)
    F = io.read_form(args.form)
    checks = {}
    if F.kind is Kind.ODD:
        checks["odd"] = is_odd_symmetric(T, F)
        checks["quaternionic"] = is_quaternionic(T, F)
    else:
        checks["even"] = is_even_symmetric(T, F)
    pred = args.predicate or ("odd" if F.kind is Kind.ODD else "even")
    if pred not in checks:
        raise ContractError(f"predicate {pred} needs a different form kind")
    report = {
        "predicate": pred,
        "passed": bool(checks[pred].passed),
        "residuals": {k: v.residual for k, v in checks.items()},
        "results": {k: "PASS" if v else "FAIL" for k, v in checks.items()},
    }
    return report, EXIT_PASS if checks[pred] else EXIT_FAIL


def cmd_factorize(args):
    T = io.read_matrix(args.matrix)
    F = io.read_form(args.form)
    fac = odd_factorize if F.kind is Kind.ODD else even_factorize
    res = fac(T, F, args.tol)
    report = res.to_dict()
    report["A"] = io.matrix_to_dict(res.A)
    ok = res.residual <= RECON_TOL and res.rank_A == res.rank_T
    return report, EXIT_PASS if ok else EXIT_FAIL


def _operator(args):
    if args.fn is not None:
        return toeplitz_truncate(make_fn_loop(args.fn), args.sites)
    if args.loop:
        return toeplitz_truncate(io.read_loop(args.loop), args.sites)
    if not (args.matrix and args.form):
        raise UsageError("ind2 needs MATRIX FORM, --fn N or --loop FILE")
    T = io.read_matrix(args.matrix)
    F = io.read_form(args.form)
    if args.site_dim:
        n = T.shape[0]
        if n % args.site_dim:
            raise ContractError("matrix dimension is not a multiple of --site-dim")
        return TruncatedOperator(T, args.site_dim, n // args.site_dim, Boundary.HALF_INFINITE_LEFT, F)
    return TruncatedOperator(T, T.shape[0], 1, Boundary.FINITE, F)


def cmd_ind2(args):
    rep = ind2(_operator(args), args.tol)
    return rep.to_dict(), EXIT_PASS if rep.resolved else EXIT_UNRESOLVED


def cmd_completion(args):
    T = io.read_matrix(args.matrix)
    F = io.read_form(args.form)
    comp = completion_isometry(T, F, args.tol)
    report = comp.to_dict()
    report["V"] = io.matrix_to_dict(comp.V)
    return report, EXIT_PASS if comp.certified else EXIT_FAIL


def cmd_gk(args):
    if args.loop:
        loops = [("loop", io.read_loop(args.loop))]
    else:
        ns = args.n if args.n else range(5)
        loops = [(n, make_fn_loop(n, args.samples)) for n in ns]
    rows, reports, branches = [], [], []
    for label, loop in loops:
        rep = verify_gk(loop, args.sites, args.tol)
        reports.append({"n": label, **rep.to_dict()})
        rows.append({
            "n": label,
            "n_sites": args.sites,
            "wind2": rep.wind2,
            "ind2": rep.ind2,
            "equal": rep.equal,
            "resolved": rep.winding.resolved and rep.index.resolved,
        })
        branches.extend({"loop": label, "t": t, "index": j, "phase": p} for t, j, p in rep.winding.crossing_rows())
    if args.crossings:
        _write(args.crossings, io.csv_text(branches, ("loop",) + CROSSING_COLUMNS))
    if not all(r["resolved"] for r in rows):
        code = EXIT_UNRESOLVED
    else:
        code = EXIT_PASS if all(r["equal"] for r in rows) else EXIT_FAIL
    if args.format == "csv":
        return io.csv_text(rows, GK_COLUMNS), code
    return {"rows": rows, "reports": reports}, code


def cmd_winding(args):
    if args.loop:
        loop = io.read_loop(args.loop)
    elif args.scalar:
        loop = make_scalar_loop(args.n, args.samples)
    else:
        loop = make_fn_loop(args.n, args.samples)
    full = winding_number(loop)
    report = {"wind": full.wind, "winding": full.to_dict()}
    flags = list(full.flags)
    if loop.form is not None:
        w2 = wind2(loop)
        report["wind2"] = w2.wind2
        report["half_circle"] = w2.to_dict()
        flags += w2.flags
    code = EXIT_UNRESOLVED if flags else EXIT_PASS
    if args.format == "csv":
        rows = [dict(zip(CROSSING_COLUMNS, r)) for r in full.crossing_rows()]
        return io.csv_text(rows, CROSSING_COLUMNS), code
    return report, code


def _sweep_values(args):
    if args.values is not None:
        return list(args.values)
    if args.start is None and args.stop is None:
        return []
    if None in (args.start, args.stop, args.step):
        raise UsageError("give --values, or all of --start --stop --step")
    count = int(np.floor((args.stop - args.start) / args.step + 1e-9)) + 1
    return [round(args.start + i * args.step, 12) for i in range(max(count, 0))]


def _model_cfg(args):
    cfg = {k: getattr(args, k) for k in MODEL_DEFAULTS}
    cfg["seed"] = args.seed
    return cfg


def cmd_insulator_sweep(args):
    from .insulator import SWEEP_COLUMNS, sweep

    if args.axis not in MODEL_DEFAULTS:
        raise UsageError(f"cannot sweep {args.axis!r}")
    rows = sweep(_model_cfg(args), args.axis, _sweep_values(args))
    if args.format == "json":
        return {"columns": list(SWEEP_COLUMNS), "rows": rows}, EXIT_PASS
    return io.csv_text(rows, SWEEP_COLUMNS), EXIT_PASS


def cmd_theorem11(args):
    from .insulator import build_kane_mele, fermi_projection, theorem11_check

    cfg = _model_cfg(args)
    model = build_kane_mele(
        cfg["Lx"], cfg["Ly"], cfg["t"], cfg["lambda_so"], cfg["lambda_r"], cfg["lambda_v"],
        cfg["w"], cfg["seed"], cfg["boundary"],
    )
    report = theorem11_check(fermi_projection(model, cfg["E_F"]))
    report["model"] = cfg
    if report["status"] == "VIOLATED":
        code = EXIT_FAIL
    elif report["status"] == "NOT_APPLICABLE" or not report.get("resolved", False):
        code = EXIT_UNRESOLVED
    else:
        code = EXIT_PASS
    return report, code


COMMANDS = {
    "check-symmetry": cmd_check_symmetry,
    "factorize": cmd_factorize,
    "ind2": cmd_ind2,
    "completion": cmd_completion,
    "gk": cmd_gk,
    "winding": cmd_winding,
    "insulator-sweep": cmd_insulator_sweep,
    "theorem11": cmd_theorem11,
}


def _write(path, text):
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from exc


def _fail(code, message, exit_code, details=None):
    err = {"error": code, "message": message}
    if details:
        err["details"] = details
    sys.stderr.write(io.dumps(err))
    return exit_code


def main(argv=None):
    try:
        args = apply_config(build_parser().parse_args(argv))
        result, code = COMMANDS[args.command](args)
    except UsageError as exc:
        return _fail("USAGE", str(exc), EXIT_USAGE)
    except ContractError as exc:
        return _fail(exc.code, str(exc), EXIT_USAGE, exc.to_dict().get("details"))
    except NumericalError as exc:
        return _fail(exc.code, str(exc), EXIT_UNRESOLVED, exc.to_dict().get("details"))
    except OddSymError as exc:  # pragma: no cover - every raise site uses a subclass
        return _fail(exc.code, str(exc), EXIT_UNRESOLVED)
    text = result if isinstance(result, str) else io.dumps(result)
    try:
        if args.out:
            _write(args.out, text)
        else:
            sys.stdout.write(text)
    except UsageError as exc:
        return _fail("USAGE", str(exc), EXIT_USAGE)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
