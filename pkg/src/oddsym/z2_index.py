"""Kernel-parity index of odd symmetric matrices and its companions.

Finite truncations of half-infinite operators pick up spurious kernel vectors
at the amputated (right) edge.  :func:`ind2` separates those from genuine
left-edge kernel vectors by first rotating the numerical kernel into its most
localized basis (eigenvectors of the compressed site-index operator) and then
classifying each vector by its centre of mass.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg

from .errors import ContractError
from .factorization import odd_factorize
from .matrix_core import DEFAULT_REL_TOL, as_matrix, localize, norm, numerical_kernel
from .symmetry import (
    Kind,
    SymmetryForm,
    is_odd_symmetric,
    is_quaternionic,
    kramers_pairing_basis,
)

# abstention band for centre-of-mass classification, as a fraction of the extent
AMBIGUOUS_BAND = (0.4, 0.6)
# a singular value within this factor of the threshold makes the count unreliable
MARGIN_FACTOR = 10.0
UNRESOLVED = "UNRESOLVED"


class Boundary(str, Enum):
    HALF_INFINITE_LEFT = "HALF_INFINITE_LEFT"
    FINITE = "FINITE"


@dataclass
class TruncatedOperator:
    matrix: np.ndarray
    site_dim: int
    n_sites: int
    boundary: Boundary
    form: SymmetryForm

    def __post_init__(self):
        self.boundary = Boundary(self.boundary)
        self.matrix = as_matrix(self.matrix, square=True, name="operator")
        n = self.matrix.shape[0]
        if n != self.site_dim * self.n_sites:
            raise ContractError(
                "matrix dimension must equal site_dim * n_sites",
                dim=n,
                site_dim=self.site_dim,
                n_sites=self.n_sites,
            )
        if self.form.dim != n:
            raise ContractError("symmetry form has the wrong dimension")
        if self.boundary is Boundary.HALF_INFINITE_LEFT:
            bw = self.bandwidth()
            if bw > self.n_sites / 4:
                raise ContractError(
                    "half-infinite truncation must be banded with bandwidth <= n_sites/4",
                    bandwidth=bw,
                    n_sites=self.n_sites,
                )

    @property
    def sites(self):
        return np.arange(self.matrix.shape[0]) // self.site_dim

    def bandwidth(self, tol=1e-13):
        A = self.matrix
        big = np.abs(A) > tol * max(np.abs(A).max(initial=0.0), 1e-300)
        rows, cols = np.nonzero(big)
        if rows.size == 0:
            return 0
        s = self.sites
        return int(np.max(np.abs(s[rows] - s[cols])))

    def with_matrix(self, M):
        return TruncatedOperator(M, self.site_dim, self.n_sites, self.boundary, self.form)


def finite(T, form):
    """Wrap a plain matrix as a FINITE operator (one site holding everything)."""
    T = as_matrix(T, square=True, name="T")
    return TruncatedOperator(T, T.shape[0], 1, Boundary.FINITE, form)


@dataclass
class IndexReport:
    kernel_dim_raw: int
    kernel_dim_filtered: int
    ind2: int
    singular_margin: float
    localization_centers: list
    tolerance_used: float
    rel_tol: float
    flags: list = field(default_factory=list)
    cokernel_dim_filtered: int | None = None

    @property
    def resolved(self):
        return not self.flags

    def to_dict(self):
        d = asdict(self)
        d["resolved"] = self.resolved
        d["status"] = "RESOLVED" if self.resolved else UNRESOLVED
        return d


def ind2(T, rel_tol=DEFAULT_REL_TOL):
    """Kernel parity of a :class:`TruncatedOperator`.

    For HALF_INFINITE_LEFT operators, localized kernel vectors whose centre of
    mass lies in the left half count as genuine; the others are truncation
    artifacts of the right edge.  Centres inside the abstention band, or a
    singular value too close to the threshold, flag the report UNRESOLVED.
    """
    res = numerical_kernel(T.matrix, rel_tol)
    flags = []
    margin = res.margin
    if res.rank and margin <= MARGIN_FACTOR * res.threshold:
        flags.append(f"{UNRESOLVED}: singular value {margin:.3e} near threshold")
    if res.kernel_dim and res.rank < res.singular_values.size:
        top = res.singular_values[res.rank]
        if top * MARGIN_FACTOR > res.threshold:
            flags.append(f"{UNRESOLVED}: kernel singular value {top:.3e} near threshold")

    if T.boundary is Boundary.FINITE:
        centers = []
        filtered = res.kernel_dim
    else:
        c, _ = localize(res.kernel_basis, T.sites)
        centers = [float(x) for x in c]
        half = T.n_sites / 2
        filtered = int(np.sum(c < half))
        lo, hi = (b * T.n_sites for b in AMBIGUOUS_BAND)
        amb = [x for x in centers if lo < x < hi]
        if amb:
            flags.append(f"{UNRESOLVED}: kernel vector centred mid-lattice at {amb}; increase n_sites")
    return IndexReport(
        kernel_dim_raw=res.kernel_dim,
        kernel_dim_filtered=filtered,
        ind2=filtered % 2,
        singular_margin=margin,
        localization_centers=centers,
        tolerance_used=res.threshold,
        rel_tol=rel_tol,
        flags=flags,
    )


@dataclass
class Completion:
    V: np.ndarray
    kernel_dim: int
    sigma_min: float
    odd_residual: float
    isometry_residual: float
    range_residual: float

    @property
    def certified(self):
        return (
            self.odd_residual <= 1e-9
            and self.isometry_residual <= 1e-9
            and self.range_residual <= 1e-9
            and self.sigma_min > 0
        )

    def to_dict(self):
        d = asdict(self)
        del d["V"]
        d["certified"] = self.certified
        return d


def completion_isometry(T, I, rel_tol=DEFAULT_REL_TOL):
    """Odd symmetric partial isometry ``V`` with ``T + V`` invertible.

    With an orthonormal kernel basis ``phi_1..phi_2N`` (SVD right singular
    vectors, paired in index order),
    ``V = sum_n I|conj(phi_n)><phi_{n+N}| - I|conj(phi_{n+N})><phi_n|``.
    """
    if I.kind is not Kind.ODD:
        raise ContractError("completion needs an ODD form")
    T = as_matrix(T, square=True, name="T")
    chk = is_odd_symmetric(T, I)
    if not chk:
        raise ContractError("T is not odd symmetric", residual=chk.residual)
    res = numerical_kernel(T, rel_tol)
    Phi = res.kernel_basis
    d = Phi.shape[1]
    if d % 2:
        raise ContractError(
            "kernel dimension is odd; no completion exists",
            code="PARITY",
            kernel_dim=d,
            singular_values=res.singular_values[res.rank - 1 :].tolist(),
        )
    N = d // 2
    a, b = Phi[:, :N], Phi[:, N:]
    Im = I.matrix
    V = Im @ a.conj() @ b.conj().T - Im @ b.conj() @ a.conj().T
    ker_proj = Phi @ Phi.conj().T
    coker = Im @ Phi.conj()
    odd_res = norm(Im.T @ V.T @ Im - V)
    iso_res = norm(V.conj().T @ V - ker_proj)
    ran_res = norm(V @ V.conj().T - coker @ coker.conj().T)
    smin = float(np.linalg.svd(T + V, compute_uv=False)[-1]) if T.size else 0.0
    return Completion(V, d, smin, odd_res, iso_res, ran_res)


def random_localized_perturbation(T, rng, rank=4, max_norm=10.0):
    """Random odd symmetric ``K`` of the given (even) rank on the first quarter of sites.

    Built as ``K = I^* B`` from a skew-symmetric ``B`` that is a sum of
    ``rank/2`` elementary skew pairs, then scaled to a spectral norm drawn
    uniformly from ``(0, max_norm]``.
    """
    if rank % 2:
        raise ContractError("rank of a skew-symmetric matrix is even", rank=rank)
    m = max(T.n_sites // 4, 1) * T.site_dim
    if m < rank:
        raise ContractError("support too small for the requested rank")
    n = T.matrix.shape[0]
    Isub = T.form.matrix[:m, :m]
    B = np.zeros((m, m), complex)
    for _ in range(rank // 2):
        u = rng.normal(size=m) + 1j * rng.normal(size=m)
        v = rng.normal(size=m) + 1j * rng.normal(size=m)
        B += np.outer(u, v) - np.outer(v, u)
    Ksub = Isub.T @ B
    Ksub *= (1.0 - rng.uniform()) * max_norm / np.linalg.norm(Ksub, 2)
    K = np.zeros((n, n), complex)
    K[:m, :m] = Ksub
    return K


def perturbation_stability_trial(T, K, rel_tol=DEFAULT_REL_TOL):
    """Index reports for ``T`` and ``T + K`` with ``K`` localized at the left edge."""
    K = as_matrix(K, square=True, name="K")
    chk = is_odd_symmetric(K, T.form)
    if not chk:
        raise ContractError("perturbation is not odd symmetric", residual=chk.residual)
    if T.boundary is Boundary.HALF_INFINITE_LEFT:
        rows, cols = np.nonzero(np.abs(K) > 0)
        limit = T.n_sites / 4
        s = T.sites
        if rows.size and (s[rows].max() > limit or s[cols].max() > limit):
            raise ContractError("perturbation must be supported on sites [0, n_sites/4]")
    return ind2(T, rel_tol), ind2(T.with_matrix(T.matrix + K), rel_tol)


@dataclass
class HomotopyPath:
    s: np.ndarray
    matrices: np.ndarray
    odd_residuals: np.ndarray
    sigma_min: np.ndarray
    leg: np.ndarray
    junction_residual: float
    completion: Completion

    def summary(self):
        leg2 = self.leg == 2
        return {
            "samples": int(self.s.size),
            "max_odd_residual": float(self.odd_residuals.max()),
            "min_sigma_leg2": float(self.sigma_min[leg2].min()),
            "junction_residual": self.junction_residual,
            "end_to_identity": float(norm(self.matrices[-1] - np.eye(self.matrices.shape[1]))),
        }


def homotopy_path_to_identity(T, I, samples_per_leg=64, rel_tol=DEFAULT_REL_TOL):
    """Sampled path of odd symmetric matrices from ``T`` to the identity.

    Leg 1 is ``T + s V`` for ``s`` in ``[0, 1]`` with ``V`` the completion.
    Leg 2 factors ``T + V = I^* A^t I A``, writes ``A = exp(iH) |A|`` and
    follows ``A_s = exp(iH (2 - s)) |A|^(2 - s)`` for ``s`` in ``[1, 2]``.
    """
    T = as_matrix(T, square=True, name="T")
    comp = completion_isometry(T, I, rel_tol)
    n = T.shape[0]
    Im = I.matrix
    T1 = T + comp.V
    A = odd_factorize(T1, I, rel_tol).A
    U, sig, W = np.linalg.svd(A)
    W = W.conj().T
    phase = U @ W.conj().T
    D, Z = scipy.linalg.schur(phase, output="complex")
    theta = np.angle(np.diag(D))

    s1 = np.linspace(0.0, 1.0, samples_per_leg)
    s2 = np.linspace(1.0, 2.0, samples_per_leg)
    mats = [T + s * comp.V for s in s1]
    for s in s2:
        tau = 2.0 - s
        As = (Z * np.exp(1j * theta * tau)) @ Z.conj().T @ ((W * sig**tau) @ W.conj().T)
        mats.append(Im.T @ As.T @ Im @ As)
    mats = np.array(mats)
    odd_res = np.array([norm(Im.T @ M.T @ Im - M) / (1 + norm(M)) for M in mats])
    smin = np.array([np.linalg.svd(M, compute_uv=False)[-1] for M in mats])
    leg = np.concatenate([np.ones(samples_per_leg, int), 2 * np.ones(samples_per_leg, int)])
    junction = norm(mats[samples_per_leg] - T1) / (1 + norm(T1))
    return HomotopyPath(np.concatenate([s1, s2]), mats, odd_res, smin, leg, junction, comp)


def quaternionic_index_check(T, I, rel_tol=DEFAULT_REL_TOL):
    """Kernels of a quaternionic ``T`` and of ``T^*`` are both even dimensional.

    Evenness is certified constructively by a Kramers pairing basis.
    """
    T = as_matrix(T, square=True, name="T")
    chk = is_quaternionic(T, I)
    if not chk:
        raise ContractError("T is not quaternionic", residual=chk.residual)
    ker = numerical_kernel(T, rel_tol)
    coker = numerical_kernel(T.conj().T, rel_tol)
    kp = kramers_pairing_basis(ker.kernel_basis, I)
    cp = kramers_pairing_basis(coker.kernel_basis, I)
    return {
        "kernel_dim": ker.kernel_dim,
        "cokernel_dim": coker.kernel_dim,
        "noether_index": ker.kernel_dim - coker.kernel_dim,
        "kernel_even": ker.kernel_dim % 2 == 0,
        "cokernel_even": coker.kernel_dim % 2 == 0,
        "pairing_pairs": (kp.shape[1] // 2, cp.shape[1] // 2),
        "quaternionic_residual": chk.residual,
    }
