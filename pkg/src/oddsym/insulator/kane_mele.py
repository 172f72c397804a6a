"""Kane-Mele tight-binding model on a honeycomb lattice (conventions in MODEL.md).

Basis index ``((i * Ly + j) * 2 + sublattice) * 2 + spin`` with unit cell
``(i, j)``, sublattice ``A = 0`` / ``B = 1`` and spin up/down ``0 / 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..errors import ContractError
from ..matrix_core import norm
from ..symmetry import Kind, SymmetryForm

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)
S0 = np.eye(2, dtype=complex)
# exp(i pi s^y) for spin 1/2, i.e. i sigma_y
SPIN_FLIP = np.array([[0.0, 1.0], [-1.0, 0.0]])

A1 = np.array([1.0, 0.0])
A2 = np.array([0.5, np.sqrt(3) / 2])
DELTA = (A1 + A2) / 3
NN_CELLS = ((0, 0), (-1, 0), (0, -1))
NNN_CELLS = ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))
MAX_HOP_RANGE = 2.0


class BoundaryKind(str, Enum):
    TORUS = "TORUS"
    OPEN = "OPEN"


@dataclass(frozen=True)
class KMParams:
    t: float = 1.0
    lambda_so: float = 0.06
    lambda_r: float = 0.0
    lambda_v: float = 0.1
    w: float = 0.0


def site_position(cell, sub):
    return cell[0] * A1 + cell[1] * A2 + (DELTA if sub == 1 else 0.0)


def _chirality(sub, dR):
    """``nu = sign((d1 x d2)_z)`` for the two-step path from ``sub`` to its NNN image."""
    start = site_position((0, 0), sub)
    end = site_position(dR, sub)
    bond = np.linalg.norm(DELTA)
    for cell in NN_CELLS + ((1, 0), (0, 1)):
        mid = site_position(cell, 1 - sub)
        d1, d2 = mid - start, end - mid
        if abs(np.linalg.norm(d1) - bond) < 1e-9 and abs(np.linalg.norm(d2) - bond) < 1e-9:
            return float(np.sign(d1[0] * d2[1] - d1[1] * d2[0]))
    raise AssertionError("no intermediate site")  # pragma: no cover


def hopping_table(p):
    """``{(dR, a, b): 2x2 block}`` with ``H[(R, a), (R + dR, b)] = block``."""
    hop = {}

    def add(dR, a, b, m):
        hop[(dR, a, b)] = hop.get((dR, a, b), 0) + m

    add((0, 0), 0, 0, p.lambda_v * S0)
    add((0, 0), 1, 1, -p.lambda_v * S0)
    for dR in NN_CELLS:
        d = site_position(dR, 1) - site_position((0, 0), 0)
        d /= np.linalg.norm(d)
        m = -p.t * S0 + 1j * p.lambda_r * (SX * d[1] - SY * d[0])
        add(dR, 0, 1, m)
        add((-dR[0], -dR[1]), 1, 0, m.conj().T)
    for sub in (0, 1):
        for dR in NNN_CELLS:
            add(dR, sub, sub, 1j * p.lambda_so * _chirality(sub, dR) * SZ)
    return hop


def bloch_hamiltonian(k, p):
    """4x4 Bloch matrix in the basis (sublattice, spin); ``k`` dual to cell indices."""
    H = np.zeros((4, 4), complex)
    for (dR, a, b), m in hopping_table(p).items():
        H[2 * a : 2 * a + 2, 2 * b : 2 * b + 2] += m * np.exp(1j * (k[0] * dR[0] + k[1] * dR[1]))
    return H


def time_reversal_form(n_cells):
    """``I_s = 1 (x) exp(i pi s^y)``."""
    return SymmetryForm(Kind.ODD, np.kron(np.eye(2 * n_cells), SPIN_FLIP))


def spin_z(n_cells):
    return np.kron(np.eye(2 * n_cells), SZ)


@dataclass
class LatticeModel:
    Lx: int
    Ly: int
    params: KMParams
    hamiltonian: np.ndarray
    I_s: SymmetryForm
    disorder_seed: int
    boundary: BoundaryKind
    onsite_disorder: np.ndarray = field(repr=False, default=None)

    @property
    def dim(self):
        return self.hamiltonian.shape[0]

    @property
    def n_cells(self):
        return self.Lx * self.Ly

    @property
    def clean(self):
        return self.params.w == 0

    def cell_coordinates(self):
        """Cell-index coordinates of every basis vector, centred on the lattice midpoint.

        Centring at ``(L - 1)/2`` puts every coordinate on a half-integer for
        even ``L``; odd ``L`` gets an extra ``1/2`` so that ``X1 + i X2`` never
        vanishes.
        """

        def centred(L):
            c = np.arange(L) - (L - 1) / 2
            return c + 0.5 if L % 2 else c

        X1 = np.repeat(centred(self.Lx), self.Ly * 4)
        X2 = np.tile(np.repeat(centred(self.Ly), 4), self.Lx)
        return X1, X2

    def cartesian_positions(self):
        i = np.repeat(np.arange(self.Lx), self.Ly * 4)
        j = np.tile(np.repeat(np.arange(self.Ly), 4), self.Lx)
        sub = np.tile(np.repeat([0, 1], 2), self.n_cells)
        return np.outer(i, A1) + np.outer(j, A2) + np.outer(sub, DELTA)

    def invariants(self):
        H = self.hamiltonian
        Im = self.I_s.matrix
        herm = norm(H - H.conj().T)
        tr = norm(Im.T @ H.T @ Im - H)
        xy = self.cartesian_positions()
        rows, cols = np.nonzero(np.abs(H) > 1e-14)
        off = rows != cols
        d = xy[rows[off]] - xy[cols[off]]
        if self.boundary is BoundaryKind.TORUS:
            # minimal image in cell coordinates
            cell = np.linalg.solve(np.column_stack([A1, A2]), d.T).T
            L = np.array([self.Lx, self.Ly])
            cell -= L * np.round(cell / L)
            d = cell @ np.vstack([A1, A2])
        reach = float(np.max(np.linalg.norm(d, axis=1), initial=0.0))
        return {"hermitian_residual": herm, "time_reversal_residual": tr, "hop_range": reach}


def build_kane_mele(Lx, Ly, t=1.0, lambda_so=0.06, lambda_r=0.0, lambda_v=0.1,
                    disorder_w=0.0, seed=0, boundary="OPEN"):
    """Real-space Kane-Mele Hamiltonian with optional Anderson disorder."""
    if Lx < 4 or Ly < 4:
        raise ContractError("lattice needs Lx, Ly >= 4", Lx=Lx, Ly=Ly)
    if disorder_w < 0:
        raise ContractError("disorder strength must be non-negative")
    boundary = BoundaryKind(boundary)
    torus = boundary is BoundaryKind.TORUS
    p = KMParams(t, lambda_so, lambda_r, lambda_v, disorder_w)
    n_cells = Lx * Ly
    n = 4 * n_cells
    H = np.zeros((n, n), complex)

    def at(i, j, s):
        return ((i * Ly + j) * 2 + s) * 2

    for (dR, a, b), m in hopping_table(p).items():
        for i in range(Lx):
            for j in range(Ly):
                i2, j2 = i + dR[0], j + dR[1]
                if torus:
                    i2, j2 = i2 % Lx, j2 % Ly
                elif not (0 <= i2 < Lx and 0 <= j2 < Ly):
                    continue
                r, c = at(i, j, a), at(i2, j2, b)
                H[r : r + 2, c : c + 2] += m
    rng = np.random.default_rng(seed)
    v = rng.uniform(-disorder_w / 2, disorder_w / 2, size=2 * n_cells) if disorder_w else np.zeros(2 * n_cells)
    H += np.diag(np.repeat(v, 2))
    model = LatticeModel(Lx, Ly, p, H, time_reversal_form(n_cells), seed, boundary, v)
    inv = model.invariants()
    if inv["hermitian_residual"] > 1e-10:
        raise ContractError("Hamiltonian is not Hermitian", **inv)
    if inv["time_reversal_residual"] > 1e-9:
        raise ContractError("parameters break time-reversal symmetry", **inv)
    if inv["hop_range"] > MAX_HOP_RANGE + 1e-9:
        raise ContractError("hopping range exceeds two lattice constants", **inv)
    return model
