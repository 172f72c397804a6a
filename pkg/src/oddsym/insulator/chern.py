"""Chern numbers: a momentum-space plaquette oracle and a real-space index.

The oracle is the gauge-invariant lattice field strength of Fukui, Hatsugai
and Suzuki: link variables are determinants of overlap matrices between
neighbouring frames, and the plaquette phases sum to ``2 pi`` times an integer.

Sign convention: ``Ind(P F P)`` with ``F = (X1 + i X2)/|X1 + i X2|`` equals
minus the plaquette sum for the orientation used here (``k1`` then ``k2``), so
``INDEX_SIGN`` converts one into the other.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import NumericalError
from .index import PSP_GAP_MIN, central_count, riesz_split
from .kane_mele import BoundaryKind, SZ, bloch_hamiltonian

INDEX_SIGN = -1
DEFAULT_K_GRID = 24


def chern_oracle_plaquette(frames):
    """Chern number of a family of orthonormal frames on a periodic 2d grid.

    ``frames`` has shape ``(N1, N2, dim, m)``; returns the rounded plaquette sum.
    """
    fr = np.asarray(frames, dtype=complex)
    if fr.shape[-1] == 0:
        return 0
    nxt1 = np.roll(fr, -1, axis=0)
    nxt2 = np.roll(fr, -1, axis=1)

    def link(a, b):
        return np.linalg.det(np.einsum("...im,...in->...mn", a.conj(), b))

    u1 = link(fr, nxt1)
    u2 = link(fr, nxt2)
    flux = np.angle(u1 * np.roll(u2, -1, axis=0) / (np.roll(u1, -1, axis=1) * u2))
    c = flux.sum() / (2 * np.pi)
    if abs(c - round(c)) > 1e-6:
        raise NumericalError("plaquette sum is not an integer", value=float(c))
    return int(round(c))


def bloch_frames(params, E_F=0.0, n_k=DEFAULT_K_GRID, part="occupied", min_gap=PSP_GAP_MIN):
    """Occupied Bloch frames, optionally split by the sign of ``V^* s^z V``.

    Returns ``None`` when the occupied count varies over the Brillouin zone
    (no gap at ``E_F``) or the spin split has no gap.
    """
    S4 = np.kron(np.eye(2), SZ)
    occ = None
    out = None
    for a in range(n_k):
        for b in range(n_k):
            k = 2 * np.pi * np.array([a, b]) / n_k
            E, V = np.linalg.eigh(bloch_hamiltonian(k, params))
            V = V[:, E < E_F]
            if occ is None:
                occ = V.shape[1]
                width = occ if part == "occupied" else None
            elif V.shape[1] != occ:
                return None
            if part != "occupied":
                e, R = np.linalg.eigh(V.conj().T @ S4 @ V)
                if np.min(np.abs(e), initial=np.inf) < min_gap:
                    return None
                V = V @ R[:, e > 0] if part == "plus" else V @ R[:, e < 0]
                if width is None:
                    width = V.shape[1]
                elif V.shape[1] != width:
                    return None
            if out is None:
                out = np.zeros((n_k, n_k, 4, V.shape[1]), complex)
            out[a, b] = V
    return out


def real_space_index(frame, phase, radius):
    """``Ind(W^* F W)`` counted from small singular vectors localized at the origin."""
    if frame.shape[1] == 0:
        return 0
    G = frame.conj().T @ (phase[:, None] * frame)
    U, s, Vh = np.linalg.svd(G)
    small = np.flatnonzero(s < 0.5)
    _, right = central_count(frame @ Vh[small].conj().T, radius)
    _, left = central_count(frame @ U[:, small], radius)
    return right - left


@dataclass
class SpinChernReport:
    c_plus: int
    c_minus: int
    method: str
    real_space: tuple
    plaquette: tuple | None
    psp_gap: float
    flags: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def spin_chern(fd, S=None, n_k=DEFAULT_K_GRID):
    """Spin Chern numbers ``Ind(P_+ F P_+)`` and ``Ind(P_- F P_-)``.

    The real-space index is always evaluated.  For clean models with the
    default spin operator the plaquette oracle on the Bloch bundle is computed
    too; on TORUS it is the reported value, elsewhere it is a cross-check.
    """
    split = riesz_split(fd, S)
    r = fd.radius()
    rs = (
        real_space_index(split.frame_plus, fd.phase, r),
        real_space_index(split.frame_minus, fd.phase, r),
    )
    pq = None
    model = fd.model
    if model.clean and S is None:
        fp = bloch_frames(model.params, fd.E_F, n_k, "plus")
        fm = bloch_frames(model.params, fd.E_F, n_k, "minus")
        if fp is not None and fm is not None:
            pq = (INDEX_SIGN * chern_oracle_plaquette(fp), INDEX_SIGN * chern_oracle_plaquette(fm))
    flags = []
    use_pq = pq is not None and model.boundary is BoundaryKind.TORUS
    value, method = (pq, "plaquette") if use_pq else (rs, "real_space")
    if pq is not None and pq != rs:
        flags.append(f"oracle/surrogate disagreement: plaquette {pq}, real space {rs}")
    if value[0] != -value[1]:
        flags.append("c_plus != -c_minus")
    return SpinChernReport(value[0], value[1], method, rs, pq, split.psp_gap, flags)
