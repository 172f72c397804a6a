"""Fermi projections, the Dirac-phase operator ``T_P`` and its kernel parity.

``T_P = P F P + (1 - P)`` is a finite matrix here, so its kernel is empty; the
index is read off from small singular values instead.  Their right singular
vectors either sit at the origin of the Dirac phase (the finite-volume image
of the infinite-volume kernel) or at the sample boundary, where ``F`` is
discontinuous relative to the truncated projection.  Only the former count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractError, NumericalError
from ..matrix_core import cluster_reals, localize, norm, svd
from ..symmetry import is_odd_symmetric
from ..z2_index import AMBIGUOUS_BAND, UNRESOLVED, IndexReport
from .kane_mele import spin_z

EIGEN_GAP_MIN = 1e-8
SIGMA_CUT = 0.5
KRAMERS_REL_GAP = 1e-6
PSP_GAP_MIN = 1e-3


@dataclass
class FermiData:
    model: object
    E_F: float
    energies: np.ndarray
    eigenvectors: np.ndarray
    phase: np.ndarray
    gap: float

    @property
    def frame(self):
        return self.eigenvectors[:, self.energies < self.E_F]

    @property
    def P(self):
        return self.frame @ self.frame.conj().T

    @property
    def F(self):
        return np.diag(self.phase)

    @property
    def rank(self):
        return self.frame.shape[1]

    def radius(self):
        """Distance from the Dirac origin, normalized by the half-width of the sample."""
        X1, X2 = self.model.cell_coordinates()
        half = (max(self.model.Lx, self.model.Ly) - 1) / 2
        return np.hypot(X1, X2) / half


def fermi_projection(model, E_F=0.0):
    """Spectral projection onto energies ``<= E_F`` together with the Dirac phase."""
    E, V = np.linalg.eigh(model.hamiltonian)
    gap = float(np.min(np.abs(E - E_F)))
    if gap <= EIGEN_GAP_MIN:
        raise ContractError("Fermi energy sits on an eigenvalue; move E_F", code="FERMI_LEVEL", gap=gap)
    X1, X2 = model.cell_coordinates()
    z = X1 + 1j * X2
    fd = FermiData(model, float(E_F), E, V, z / np.abs(z), gap)
    chk = is_odd_symmetric(fd.P, model.I_s)
    if not chk:
        raise NumericalError("Fermi projection is not odd symmetric", residual=chk.residual)
    return fd


def tp_operator(fd):
    """``T_P = P F P + 1 - P``."""
    P = fd.P
    T = P @ (fd.phase[:, None] * P) + np.eye(P.shape[0]) - P
    chk = is_odd_symmetric(T, fd.model.I_s)
    if not chk:
        raise NumericalError("T_P is not odd symmetric", residual=chk.residual)
    return T


def _smoothstep(x):
    x = np.clip(x, 0.0, 1.0)
    return x * x * (3 - 2 * x)


def tp_regularized(fd, width=0.2):
    """``T'_P = g(H) F g(H) + g'(H)^2`` with ``g^2 + g'^2 = 1``.

    ``g = cos(pi s / 2)`` and ``g' = sin(pi s / 2)`` where ``s`` is a cubic
    smoothstep rising from 0 at ``E_F - width`` to 1 at ``E_F + width``.
    """
    E, V = fd.energies, fd.eigenvectors
    s = _smoothstep((E - fd.E_F + width) / (2 * width))
    g = (V * np.cos(np.pi * s / 2)) @ V.conj().T
    gp = (V * np.sin(np.pi * s / 2)) @ V.conj().T
    return g @ (fd.phase[:, None] * g) + gp @ gp


def central_count(vectors, radius):
    """Centres of the localized basis of ``span(vectors)`` and how many are central."""
    centers, _ = localize(vectors, radius)
    return centers, int(np.sum(centers < 0.5))


def index_from_small_singular(T, radius, sigma_cut=SIGMA_CUT):
    """Count small singular directions of ``T`` localized at the Dirac origin.

    Returns ``(right_count, left_count, diagnostics)``.  Right vectors span the
    approximate kernel, left vectors the approximate cokernel.
    """
    U, s, V = svd(T)
    small = np.flatnonzero(s < sigma_cut)
    rc, right = central_count(V[:, small], radius)
    lc, left = central_count(U[:, small], radius)
    above = s[s >= sigma_cut]
    clusters = [int(c.size) for c in cluster_reals(s[small], KRAMERS_REL_GAP * max(s[0], 1e-300))]
    lo, hi = AMBIGUOUS_BAND
    amb = [float(c) for c in np.concatenate([rc, lc]) if lo < c < hi]
    edge = np.flatnonzero((s > 0.8 * sigma_cut) & (s < 1.2 * sigma_cut))
    borderline, _ = localize(V[:, edge], radius)
    diag = {
        "singular_values_below_cut": s[small].tolist(),
        "right_centers": rc.tolist(),
        "left_centers": lc.tolist(),
        "cluster_sizes": clusters,
        "margin": float(above.min()) if above.size else float("inf"),
        "ambiguous_centers": amb,
        "borderline_central": int(np.sum(borderline < AMBIGUOUS_BAND[1])),
    }
    return right, left, diag


def ind2_tp(fd, sigma_cut=SIGMA_CUT, operator=None):
    """Kernel parity of ``T_P`` (or of ``operator`` if given) with abstention."""
    T = tp_operator(fd) if operator is None else operator
    right, left, d = index_from_small_singular(T, fd.radius(), sigma_cut)
    flags = []
    if d["ambiguous_centers"]:
        flags.append(f"{UNRESOLVED}: singular vector centred in the abstention band; enlarge the sample")
    if d["borderline_central"]:
        flags.append(f"{UNRESOLVED}: central singular value near the cut {sigma_cut}")
    if right != left:
        flags.append(f"{UNRESOLVED}: Noether check failed (kernel {right}, cokernel {left})")
    if any(c % 2 for c in d["cluster_sizes"]):
        flags.append("Kramers clusters of odd size")
    return IndexReport(
        kernel_dim_raw=len(d["singular_values_below_cut"]),
        kernel_dim_filtered=right,
        ind2=right % 2,
        singular_margin=d["margin"],
        localization_centers=d["right_centers"],
        tolerance_used=sigma_cut,
        rel_tol=sigma_cut,
        flags=flags,
        cokernel_dim_filtered=left,
    )


@dataclass
class RieszSplit:
    frame_plus: np.ndarray
    frame_minus: np.ndarray
    psp_gap: float
    certificates: dict

    @property
    def P_plus(self):
        return self.frame_plus @ self.frame_plus.conj().T

    @property
    def P_minus(self):
        return self.frame_minus @ self.frame_minus.conj().T


def default_spin(fd):
    return spin_z(fd.model.n_cells)


def riesz_split(fd, S=None, min_gap=PSP_GAP_MIN):
    """Split ``P`` along the sign of ``P S P`` restricted to ``range(P)``."""
    if S is None:
        S = default_spin(fd)
    S = np.asarray(S, dtype=complex)
    Im = fd.model.I_s.matrix
    if norm(S - S.conj().T) > 1e-9:
        raise ContractError("S must be self-adjoint")
    if norm(Im.T @ S.T @ Im + S) > 1e-9:
        raise ContractError("S must be odd skew-symmetric")
    W = fd.frame
    if W.shape[1] == 0:
        raise NumericalError("P is zero; P S P has no spectrum", code="NO_SPIN_SPLIT", psp_gap=0.0)
    e, R = np.linalg.eigh(W.conj().T @ S @ W)
    psp_gap = float(np.min(np.abs(e)))
    if psp_gap < min_gap:
        raise NumericalError(
            "zero is not separated from the spectrum of P S P",
            code="NO_SPIN_SPLIT",
            psp_gap=psp_gap,
        )
    Wp, Wm = W @ R[:, e > 0], W @ R[:, e < 0]
    Pp, Pm = Wp @ Wp.conj().T, Wm @ Wm.conj().T
    P = fd.P
    cert = {
        "sum": norm(P - Pp - Pm),
        "orthogonal": norm(Pp @ Pm),
        "exchange": norm(Im.T @ Pp.T @ Im - Pm),
    }
    if max(cert.values()) > 1e-8:
        raise NumericalError("Riesz split certificates failed", **cert)
    return RieszSplit(Wp, Wm, psp_gap, cert)
