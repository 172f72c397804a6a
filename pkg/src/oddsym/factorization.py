"""Canonical forms of skew-symmetric matrices and the odd/even factorizations.

The constructions mirror the classical finite-dimensional argument:

1. diagonalise ``B^* B = Q D Q^*`` (via the right singular vectors of ``B``);
2. ``N = Q^t B Q`` is then normal (``N^* N = D``) and skew-symmetric;
3. split ``N = N1 + i N2`` into commuting purely imaginary Hermitian parts,
   diagonalise them jointly, and pair each eigenvector ``v`` with ``conj(v)``;
4. the real combinations ``sqrt(2) Re v`` and ``sqrt(2) Im v`` give a real
   orthogonal matrix bringing ``N`` to ``2x2`` canonical cells.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, NumericalError
from .matrix_core import (
    DEFAULT_REL_TOL,
    as_matrix,
    cluster_reals,
    norm,
    numerical_kernel,
    polar_decompose,
    svd,
)
from .symmetry import Kind, is_even_symmetric, is_odd_symmetric, normalize_form

CLUSTER_GAP = 1e-8
RECON_TOL = 1e-8


@dataclass
class SkewCanonicalForm:
    """``U^t B U = diag(M, M, 0) @ J3 @ diag(M, M, 0)^t``.

    ``U`` columns are graded as ``(H+, H-, kernel)`` with ``len(M)`` columns in
    each of the first two blocks.  ``M`` holds the diagonal of the (diagonal)
    middle factor.
    """

    U: np.ndarray
    M: np.ndarray
    kernel_dim: int
    residual: float

    @property
    def k(self):
        return self.M.size

    def middle(self):
        n = self.U.shape[0]
        k = self.k
        G = np.zeros((n, n), dtype=complex)
        sq = self.M**2
        G[:k, k : 2 * k] = -np.diag(sq)
        G[k : 2 * k, :k] = np.diag(sq)
        return G


def _check_skew(B, tol):
    A = as_matrix(B, square=True, name="B")
    r = norm(A + A.T)
    if r > tol * (1 + norm(A)):
        raise ContractError("B is not skew-symmetric", residual=r)
    return (A - A.T) / 2


def _nearest_orthogonal(O):
    u, _, vt = np.linalg.svd(O)
    return u @ vt


def _real_basis(Y):
    """Real orthonormal basis of a conjugation-invariant column span."""
    proj = (Y @ Y.conj().T).real
    w, R = np.linalg.eigh((proj + proj.T) / 2)
    return R[:, w > 0.5]


def skew_canonical(B, rel_tol=DEFAULT_REL_TOL):
    A = _check_skew(B, 1e-9)
    n = A.shape[0]
    scale = norm(A)
    if scale == 0:
        return SkewCanonicalForm(np.eye(n, dtype=complex), np.zeros(0, complex), n, 0.0)

    # right singular vectors diagonalise B^* B without squaring the conditioning
    _, s, Q = svd(A)
    nz = np.flatnonzero(s > rel_tol * s[0])
    if nz.size % 2:
        # singular values pair up; a pair straddling the threshold goes to the kernel
        nz = nz[:-1]
    ker = np.setdiff1d(np.arange(n), nz)
    Qn, Qk = Q[:, nz], Q[:, ker]
    r = nz.size

    N = Qn.T @ A @ Qn
    N1 = (N - N.conj()) / 2
    N2 = (N + N.conj()) / 2j
    w1, Y = np.linalg.eigh((N1 + N1.conj().T) / 2)
    nscale = max(np.abs(w1).max(initial=0.0), 1e-300)
    gap = CLUSTER_GAP * nscale

    reps = []
    for idx in cluster_reals(w1, gap):
        centre = w1[idx].mean()
        Yc = Y[:, idx]
        if centre > gap:
            K = Yc.conj().T @ N2 @ Yc
            _, R = np.linalg.eigh((K + K.conj().T) / 2)
            reps.append(Yc @ R)
        elif abs(centre) <= gap:
            R0 = _real_basis(Yc)
            if R0.shape[1] != idx.size or idx.size % 2:
                raise NumericalError(
                    "zero cluster of the real part is not conjugation invariant",
                    cluster_size=int(idx.size),
                    real_dim=int(R0.shape[1]),
                )
            K = R0.T @ N2 @ R0
            w0, W0 = np.linalg.eigh((K + K.conj().T) / 2)
            neg = w0 < 0
            if neg.sum() * 2 != idx.size:
                raise NumericalError("imaginary part not balanced on its kernel cluster")
            reps.append(R0 @ W0[:, neg])
    Vp = np.hstack(reps) if reps else np.zeros((r, 0), complex)
    k = Vp.shape[1]
    if 2 * k != r:
        raise NumericalError("eigenvalue pairs are unbalanced", found=k, expected=r // 2)

    Op = np.sqrt(2) * np.hstack([Vp.real, Vp.imag])
    Op = _nearest_orthogonal(Op)
    mu = np.einsum("ij,ij->j", Vp.conj(), N @ Vp)
    imu = 1j * mu
    if np.any((imu.real < 0) & (np.abs(imu.imag) <= 1e-12 * nscale)):
        raise NumericalError("square root argument on the branch cut")
    M = np.sqrt(imu)
    U = np.hstack([Qn @ Op, Qk])
    sc = SkewCanonicalForm(U, M, n - r, 0.0)
    sc.residual = norm(U.T @ A @ U - sc.middle()) / scale
    if sc.residual > RECON_TOL:
        raise NumericalError(
            "skew canonical form failed to reconstruct",
            residual=sc.residual,
            clusters=[float(w1[i].mean()) for i in cluster_reals(w1, gap)],
        )
    return sc


@dataclass
class FactorizationResult:
    A: np.ndarray
    residual: float
    rank_T: int
    rank_A: int
    kernel_dim: int
    rel_tol: float
    kernel_guarantee: bool = True

    def to_dict(self):
        return {
            "residual": self.residual,
            "rank_T": self.rank_T,
            "rank_A": self.rank_A,
            "kernel_dim": self.kernel_dim,
            "kernel_guarantee": self.kernel_guarantee,
            "tolerances": {"rel_tol": self.rel_tol, "reconstruction": RECON_TOL},
        }


def odd_factorize(T, I, rel_tol=DEFAULT_REL_TOL):
    """Find ``A`` with ``T = I^* A^t I A`` and ``Ker(A) = Ker(T)``.

    In finite dimensions ``B = I T`` is skew-symmetric, so its rank is even
    and ``Ker(T)`` is automatically even dimensional; the kernel statement
    therefore always applies.
    """
    if I.kind is not Kind.ODD:
        raise ContractError("odd_factorize needs an ODD form")
    T = as_matrix(T, square=True, name="T")
    chk = is_odd_symmetric(T, I)
    if not chk:
        raise ContractError("T is not odd symmetric", residual=chk.residual)
    n = T.shape[0]
    B = I.matrix @ T
    B = (B - B.T) / 2
    sc = skew_canonical(B, rel_tol)
    k, kern = sc.k, sc.kernel_dim
    if kern % 2:  # pragma: no cover - excluded by the even rank of B
        raise NumericalError("odd kernel dimension in an even dimensional space")
    h = kern // 2
    Uh = sc.U
    # regrade (H+, H-, K) -> (H+, K1, H-, K2) so the middle factor is standard_I
    Uperm = np.hstack(
        [Uh[:, :k], Uh[:, 2 * k : 2 * k + h], Uh[:, k : 2 * k], Uh[:, 2 * k + h :]]
    )
    D = np.concatenate([sc.M, np.zeros(h), sc.M, np.zeros(h)])
    A0 = D[:, None] * Uperm.conj().T
    O, _ = normalize_form(I)
    A = O @ A0
    rebuilt = I.matrix.T @ A.T @ I.matrix @ A
    residual = norm(T - rebuilt) / (1 + norm(T))
    rank_T = numerical_kernel(T, rel_tol).rank
    rank_A = numerical_kernel(A, rel_tol).rank
    return FactorizationResult(A, residual, rank_T, rank_A, n - rank_T, rel_tol)


def even_factorize(T, J, rel_tol=DEFAULT_REL_TOL):
    """Find ``A`` with ``T = J A^t J A`` and ``Ker(A) = Ker(T)``.

    ``N = Q^t J T Q`` (with ``T^* T = Q D Q^*``) is normal and symmetric, so
    its real and imaginary parts are commuting real symmetric matrices with a
    joint real orthogonal eigenbasis.  The signature of ``J`` is absorbed by a
    phase ``i`` on its ``-1`` eigenvectors.
    """
    if J.kind is not Kind.EVEN:
        raise ContractError("even_factorize needs an EVEN form")
    T = as_matrix(T, square=True, name="T")
    chk = is_even_symmetric(T, J)
    if not chk:
        raise ContractError("T is not even symmetric", residual=chk.residual)
    n = T.shape[0]
    Bs = J.matrix @ T
    Bs = (Bs + Bs.T) / 2
    scale = norm(Bs)
    if scale == 0:
        return FactorizationResult(np.zeros((n, n), complex), 0.0, 0, 0, n, rel_tol)
    _, s, Q = svd(T)
    nz = np.flatnonzero(s > rel_tol * s[0])
    ker = np.setdiff1d(np.arange(n), nz)
    Qn, Qk = Q[:, nz], Q[:, ker]
    N = Qn.T @ Bs @ Qn
    N1 = ((N + N.conj()) / 2).real
    N2 = ((N - N.conj()) / 2j).real
    w1, O1 = np.linalg.eigh((N1 + N1.T) / 2)
    gap = CLUSTER_GAP * max(np.abs(w1).max(initial=0.0), 1e-300)
    cols = []
    for idx in cluster_reals(w1, gap):
        Oc = O1[:, idx]
        K = Oc.T @ N2 @ Oc
        _, R = np.linalg.eigh((K + K.T) / 2)
        cols.append(Oc @ R)
    Oc = np.hstack(cols) if cols else np.zeros((0, 0))
    z = np.einsum("ij,ij->j", Oc, N @ Oc)
    Kfull = np.vstack([Oc.T @ Qn.conj().T, Qk.conj().T])
    S = np.concatenate([np.sqrt(z.astype(complex)), np.zeros(ker.size)])
    Op, std = normalize_form(J)
    E = np.where(np.diag(std.matrix).real > 0, 1.0, 1j)
    A = Op @ ((E * S)[:, None] * Kfull)
    rebuilt = J.matrix @ A.T @ J.matrix @ A
    residual = norm(T - rebuilt) / (1 + norm(T))
    rank_T = numerical_kernel(T, rel_tol).rank
    rank_A = numerical_kernel(A, rel_tol).rank
    return FactorizationResult(A, residual, rank_T, rank_A, n - rank_T, rel_tol)


def polar_relation_check(T, I, rel_tol=DEFAULT_REL_TOL):
    """Compare the polar data of ``T`` and ``T^*``.

    For odd symmetric ``T = V |T|`` one expects ``|T^*| = I^* conj(|T|) I`` and
    ``T^* = (I^* conj(V) I) |T^*|`` with the phase of ``T^*`` equal to
    ``I^* conj(V) I``.  Residuals are relative to ``1 + ||T||``.
    """
    T = as_matrix(T, square=True, name="T")
    chk = is_odd_symmetric(T, I)
    if not chk:
        raise ContractError("T is not odd symmetric", residual=chk.residual)
    Im = I.matrix
    V, P = polar_decompose(T, rel_tol)
    Vs, Ps = polar_decompose(T.conj().T, rel_tol)
    scale = 1 + norm(T)
    abs_res = norm(Ps - Im.T @ P.conj() @ Im) / scale
    phase_res = norm(Vs - Im.T @ V.conj() @ Im)
    recon_res = norm(T.conj().T - Im.T @ V.conj() @ Im @ Ps) / scale
    return {
        "abs_residual": abs_res,
        "phase_residual": phase_res,
        "reconstruction_residual": recon_res,
        "passed": bool(max(abs_res, phase_res, recon_res) <= 1e-8),
    }
