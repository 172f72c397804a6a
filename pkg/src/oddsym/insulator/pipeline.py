"""The Ind2-implies-spin-Chern check and deterministic parameter sweeps."""

from __future__ import annotations

import numpy as np

from ..errors import NumericalError
from .chern import INDEX_SIGN, bloch_frames, chern_oracle_plaquette, spin_chern
from .index import fermi_projection, ind2_tp
from .kane_mele import KMParams, build_kane_mele

SWEEP_COLUMNS = (
    "index", "Lx", "Ly", "t", "lambda_so", "lambda_r", "lambda_v", "w", "seed",
    "boundary", "E_F", "gap", "psp_gap", "ind2", "c_plus", "c_minus",
    "chern_oracle", "flags",
)


def theorem11_check(fd, S=None):
    """If ``Ind2(T_P) = 1`` then both spin Chern numbers are nonzero.

    Status is HOLDS or VIOLATED when ``ind2 = 1``, VACUOUS when ``ind2 = 0``
    and NOT_APPLICABLE when ``P S P`` has no spectral gap at zero.
    """
    rep = ind2_tp(fd)
    out = {"ind2": rep.to_dict()}
    try:
        ch = spin_chern(fd, S)
    except NumericalError as exc:
        if exc.code != "NO_SPIN_SPLIT":
            raise
        out.update(status="NOT_APPLICABLE", reason=str(exc), spin_chern=None)
        return out
    out["spin_chern"] = ch.to_dict()
    nonzero = ch.c_plus != 0 and ch.c_minus != 0
    if rep.ind2 == 1:
        out["status"] = "HOLDS" if nonzero else "VIOLATED"
    else:
        out["status"] = "VACUOUS"
        out["witness"] = {"c_plus": ch.c_plus, "c_minus": ch.c_minus}
    out["resolved"] = rep.resolved and not ch.flags
    return out


def point_seed(seed, index):
    """Disorder seed of sweep point ``index``, split from the root seed."""
    return int(np.random.SeedSequence(seed, spawn_key=(index,)).generate_state(1)[0])


def phase_oracle(params, E_F=0.0, n_k=24):
    """Plaquette spin Chern number ``c_plus`` of the clean Bloch bundle (None if gapless)."""
    fr = bloch_frames(params, E_F, n_k, "plus")
    return None if fr is None else INDEX_SIGN * chern_oracle_plaquette(fr)


def sweep_point(cfg, index):
    """Evaluate one sweep configuration; never raises for numerical trouble."""
    seed = point_seed(cfg["seed"], index)
    row = {k: cfg[k] for k in ("Lx", "Ly", "t", "lambda_so", "lambda_r", "lambda_v", "w", "boundary", "E_F")}
    row.update(index=index, seed=seed, gap="", psp_gap="", ind2="", c_plus="", c_minus="", chern_oracle="")
    flags = []
    model = build_kane_mele(
        cfg["Lx"], cfg["Ly"], cfg["t"], cfg["lambda_so"], cfg["lambda_r"], cfg["lambda_v"],
        cfg["w"], seed, cfg["boundary"],
    )
    params = KMParams(cfg["t"], cfg["lambda_so"], cfg["lambda_r"], cfg["lambda_v"], 0.0)
    oracle = phase_oracle(params, cfg["E_F"])
    row["chern_oracle"] = "" if oracle is None else oracle
    try:
        fd = fermi_projection(model, cfg["E_F"])
    except Exception as exc:  # E_F on an eigenvalue
        row["flags"] = f"{getattr(exc, 'code', 'ERROR')}: {exc}"
        return row
    row["gap"] = fd.gap
    rep = ind2_tp(fd)
    row["ind2"] = rep.ind2
    flags.extend(rep.flags)
    try:
        ch = spin_chern(fd)
        row.update(psp_gap=ch.psp_gap, c_plus=ch.c_plus, c_minus=ch.c_minus)
        flags.extend(ch.flags)
    except NumericalError as exc:
        flags.append(f"{exc.code}: {exc}")
    row["flags"] = "; ".join(flags)
    return row


def sweep(base, axis, values):
    """One row per value of ``axis`` (in order); ``base`` holds every model key."""
    rows = []
    for i, v in enumerate(values):
        cfg = dict(base)
        cfg[axis] = float(v)
        rows.append(sweep_point(cfg, i))
    return rows
