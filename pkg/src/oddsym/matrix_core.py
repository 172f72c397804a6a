"""Dense complex linear algebra used by every other module.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``.  The
helpers here add the few things numpy does not ship: a numerical kernel with a
declared relative tolerance, a Pfaffian, generalized kernel dimensions, a polar
decomposition returning the partial isometry, and clustering utilities used for
degeneracy counting.
"""

from __future__ import annotations

from dataclasses import dataclass
import warnings

import numpy as np
import scipy.linalg

from .errors import ContractError, NumericalError

DEFAULT_REL_TOL = 1e-9


def as_matrix(M, square=False, name="matrix"):
    """Return ``M`` as a finite 2d complex array, validating the basics."""
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2:
        raise ContractError(f"{name} must be two dimensional, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ContractError(f"{name} has non-finite entries")
    if square and A.shape[0] != A.shape[1]:
        raise ContractError(f"{name} must be square, got shape {A.shape}")
    return A


def norm(M):
    """Frobenius norm; used for every residual in the package."""
    return float(np.linalg.norm(M))


def svd(M):
    """Full singular value decomposition ``M = U @ diag(sigma) @ V.conj().T``.

    Returns ``(U, sigma, V)`` with ``sigma`` nonincreasing.  Note that ``V`` is
    returned un-adjointed, unlike :func:`numpy.linalg.svd`.
    """
    A = as_matrix(M)
    try:
        U, s, Vh = np.linalg.svd(A)
    except np.linalg.LinAlgError:
        try:
            U, s, Vh = scipy.linalg.svd(A, lapack_driver="gesvd")
        except np.linalg.LinAlgError as exc:
            raise NumericalError("SVD did not converge", residual=float("nan")) from exc
    return U, s, Vh.conj().T


@dataclass
class RankResult:
    rank: int
    singular_values: np.ndarray
    kernel_basis: np.ndarray
    tolerance_used: float
    threshold: float

    @property
    def kernel_dim(self):
        return self.kernel_basis.shape[1]

    @property
    def margin(self):
        """Smallest singular value counted in the rank (inf if rank is 0)."""
        if self.rank == 0:
            return float("inf")
        return float(self.singular_values[self.rank - 1])


def numerical_kernel(M, rel_tol=DEFAULT_REL_TOL):
    """Numerical rank and an orthonormal kernel basis of ``M``.

    Singular values ``sigma_i > rel_tol * sigma_max`` count towards the rank;
    the right singular vectors of the others span the kernel.  For the zero
    matrix the kernel is the whole space.
    """
    if not 0 < rel_tol < 1:
        raise ContractError("rel_tol must lie in (0, 1)", rel_tol=rel_tol)
    A = as_matrix(M)
    n = A.shape[1]
    if A.size == 0:
        return RankResult(0, np.zeros(0), np.eye(n, dtype=complex), rel_tol, 0.0)
    _, s, V = svd(A)
    smax = float(s[0]) if s.size else 0.0
    threshold = rel_tol * smax
    rank = int(np.sum(s > threshold)) if smax > 0 else 0
    sigma = np.zeros(n)
    sigma[: s.size] = s
    return RankResult(rank, sigma, V[:, rank:], rel_tol, threshold)


def pfaffian(B, tol=1e-10):
    """Pfaffian of a skew-symmetric matrix.

    Skew-symmetric Parlett-Reid reduction: at each step the largest entry of
    the pivot column is moved into the sub-diagonal position (each swap flips
    the sign) and the trailing block receives a rank-two update.
    """
    A = as_matrix(B, square=True, name="B").copy()
    n = A.shape[0]
    if n % 2:
        raise ContractError("Pfaffian needs an even dimension", dim=n)
    scale = 1.0 + norm(A)
    asym = norm(A + A.T)
    if asym > tol * scale:
        raise ContractError("matrix is not skew-symmetric", residual=asym)
    pf = 1.0 + 0.0j
    for k in range(0, n - 1, 2):
        kp = k + 1 + int(np.argmax(np.abs(A[k + 1 :, k])))
        if kp != k + 1:
            A[[k + 1, kp], k:] = A[[kp, k + 1], k:]
            A[k:, [k + 1, kp]] = A[k:, [kp, k + 1]]
            pf = -pf
        piv = A[k, k + 1]
        if piv == 0:
            return 0.0 + 0.0j
        pf *= piv
        if k + 2 < n:
            tau = A[k, k + 2 :] / piv
            col = A[k + 2 :, k + 1]
            A[k + 2 :, k + 2 :] += np.outer(tau, col) - np.outer(col, tau)
    return complex(pf)


def generalized_kernel_dim(T, lam, k, rel_tol=DEFAULT_REL_TOL):
    """Dimension of ``Ker((T - lam)^k)``.

    The shifted matrix is normalised to unit norm before powering; only the
    kernel matters, so the scaling is free and keeps the power finite.
    """
    A = as_matrix(T, square=True, name="T")
    if k < 1:
        raise ContractError("k must be at least 1", k=k)
    X = A - lam * np.eye(A.shape[0])
    scale = np.linalg.norm(X, 2)
    if scale == 0:
        return A.shape[0]
    X = X / scale
    Xk = np.linalg.matrix_power(X, k)
    res = numerical_kernel(Xk, rel_tol)
    if res.rank:
        cond = res.singular_values[0] / res.singular_values[res.rank - 1]
        if cond > 1e12:
            warnings.warn(
                f"power {k} of the shifted matrix is ill conditioned (cond {cond:.2e})",
                RuntimeWarning,
                stacklevel=2,
            )
    return res.kernel_dim


def polar_decompose(T, rel_tol=DEFAULT_REL_TOL):
    """Polar decomposition ``T = V @ P``.

    ``P = (T^* T)^{1/2}`` and ``V`` is the partial isometry with the same
    kernel as ``T`` (directions below the kernel tolerance are dropped).
    """
    A = as_matrix(T, square=True, name="T")
    U, s, W = svd(A)
    smax = s[0] if s.size else 0.0
    r = int(np.sum(s > rel_tol * smax)) if smax > 0 else 0
    V = U[:, :r] @ W[:, :r].conj().T
    P = (W * s) @ W.conj().T
    return V, P


def cluster_reals(values, gap):
    """Group sorted real values into clusters separated by more than ``gap``.

    Returns a list of index arrays into the original (unsorted) ``values``.
    """
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return []
    order = np.argsort(v, kind="stable")
    clusters = [[order[0]]]
    for a, b in zip(order[:-1], order[1:]):
        if v[b] - v[a] > gap:
            clusters.append([])
        clusters[-1].append(b)
    return [np.array(c) for c in clusters]


def cluster_complex(values, gap):
    """Single-linkage clusters of complex values (distance ``<= gap`` links)."""
    z = np.asarray(values, dtype=complex)
    n = z.size
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    dist = np.abs(z[:, None] - z[None, :])
    for i, j in zip(*np.nonzero(np.triu(dist <= gap, 1))):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return [np.array(g) for g in groups.values()]


def localize(basis, weights):
    """Rotate an orthonormal basis to diagonalise a real position observable.

    ``weights`` is the diagonal of the observable (one real number per
    coordinate).  Returns ``(centers, rotated_basis)`` where ``centers`` are the
    expectation values of the observable in the rotated vectors.
    """
    Q = np.asarray(basis, dtype=complex)
    if Q.shape[1] == 0:
        return np.zeros(0), Q
    X = Q.conj().T @ (np.asarray(weights, dtype=float)[:, None] * Q)
    centers, R = np.linalg.eigh((X + X.conj().T) / 2)
    return centers, Q @ R


def principal_angles(A, B):
    """Principal angles (radians) between the column spans of ``A`` and ``B``."""
    if A.shape[1] == 0 and B.shape[1] == 0:
        return np.zeros(0)
    return scipy.linalg.subspace_angles(A, B)
