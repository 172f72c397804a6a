"""Real unitary symmetry forms and the odd/even/quaternionic predicates.

Complex conjugation and transposition are always taken entrywise in the
computational basis, which pins the meaning of "real" for the forms below.

An ODD form ``I`` is real, unitary and squares to ``-1``; an EVEN form ``J`` is
real, unitary and squares to ``+1``.  A matrix ``T`` is

* odd symmetric w.r.t. ``I`` if ``I^* T^t I = T``,
* even symmetric w.r.t. ``J`` if ``J T^t J = T``,
* quaternionic w.r.t. ``I`` if ``I^* conj(T) I = T``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .errors import ContractError
from .matrix_core import as_matrix, norm

DEFAULT_TOL = 1e-9
FORM_TOL = 1e-12


class Kind(str, Enum):
    ODD = "ODD"
    EVEN = "EVEN"


@dataclass(frozen=True)
class SymmetryForm:
    kind: Kind
    matrix: np.ndarray

    def __post_init__(self):
        kind = Kind(self.kind)
        object.__setattr__(self, "kind", kind)
        M = as_matrix(self.matrix, square=True, name="symmetry form")
        n = M.shape[0]
        if np.max(np.abs(M.imag), initial=0.0) > FORM_TOL:
            raise ContractError("symmetry form must be real")
        M = M.real.astype(complex)
        eye = np.eye(n)
        if norm(M.conj().T @ M - eye) > FORM_TOL * max(1, n):
            raise ContractError("symmetry form must be unitary")
        sign = -1.0 if kind is Kind.ODD else 1.0
        if norm(M @ M - sign * eye) > FORM_TOL * max(1, n):
            raise ContractError(f"{kind.value} form must square to {sign:+.0f}")
        if kind is Kind.ODD and n % 2:
            raise ContractError("an ODD form needs an even dimension", dim=n)
        object.__setattr__(self, "matrix", M)

    @property
    def dim(self):
        return self.matrix.shape[0]

    def direct_sum(self, other):
        """Block-diagonal form acting on the direct sum of the two spaces."""
        if self.kind is not other.kind:
            raise ContractError("cannot sum forms of different kinds")
        n, m = self.dim, other.dim
        M = np.zeros((n + m, n + m), dtype=complex)
        M[:n, :n] = self.matrix
        M[n:, n:] = other.matrix
        return SymmetryForm(self.kind, M)

    def tensor_identity(self, copies):
        """The form ``Id_copies (x) matrix`` (site-major ordering)."""
        return SymmetryForm(self.kind, np.kron(np.eye(copies), self.matrix))


class Check(NamedTuple):
    passed: bool
    residual: float

    def __bool__(self):
        return bool(self.passed)


def standard_I(dim):
    """``[[0, -Id], [Id, 0]]`` in ``dim/2`` blocks."""
    if dim < 2 or dim % 2:
        raise ContractError("standard_I needs an even dimension >= 2", dim=dim)
    m = dim // 2
    M = np.zeros((dim, dim))
    M[:m, m:] = -np.eye(m)
    M[m:, :m] = np.eye(m)
    return SymmetryForm(Kind.ODD, M)


def standard_J(n_plus, n_minus):
    return SymmetryForm(Kind.EVEN, np.diag([1.0] * n_plus + [-1.0] * n_minus))


def _canonical_basis(proj, rank, tol=1e-8):
    """Orthonormal basis of ``range(proj)`` by pivoted Gram-Schmidt on ``proj e_j``.

    Walking the standard basis in order makes the result reproducible; the
    first nonzero component of each vector is made real positive.
    """
    n = proj.shape[0]
    vecs = []
    for j in range(n):
        v = proj[:, j].copy()
        for u in vecs:
            v -= u * (u.conj() @ v)
        nv = np.linalg.norm(v)
        if nv > tol:
            v = v / nv
            for u in vecs:  # second pass for stability
                v -= u * (u.conj() @ v)
            v /= np.linalg.norm(v)
            lead = v[np.flatnonzero(np.abs(v) > tol)[0]]
            vecs.append(v * (abs(lead) / lead))
        if len(vecs) == rank:
            break
    if len(vecs) != rank:
        raise ContractError("eigenspace dimension mismatch", expected=rank, found=len(vecs))
    return np.array(vecs).T


def normalize_form(F):
    """Real orthogonal ``O`` bringing ``F`` to its normal form.

    Returns ``(O, standard)`` with ``O.T @ F.matrix @ O == standard.matrix``.
    For ODD forms an orthonormal basis ``v`` of the ``+i`` eigenspace is
    combined as ``(conj(v), v)`` and rotated by the Cayley transform, which
    yields ``O = sqrt(2) * (Re v, -Im v)``.  For EVEN forms the (real)
    ``+1`` and ``-1`` eigenspaces are stacked.
    """
    M = F.matrix
    n = F.dim
    if F.kind is Kind.ODD:
        # projector onto the +i eigenspace of I
        proj = (np.eye(n) - 1j * M) / 2
        v = _canonical_basis(proj, n // 2)
        m = n // 2
        V = np.hstack([v.conj(), v])
        C = np.block([[np.eye(m), -1j * np.eye(m)], [np.eye(m), 1j * np.eye(m)]]) / np.sqrt(2)
        O = V @ C
        if np.max(np.abs(O.imag)) > 1e-10:
            raise ContractError("normal-form transformation is not real")
        O = O.real
        return O, standard_I(n)
    pplus = ((np.eye(n) + M) / 2).real
    n_plus = int(round(np.trace(pplus)))
    vp = _canonical_basis(pplus, n_plus) if n_plus else np.zeros((n, 0))
    vm = _canonical_basis(np.eye(n) - pplus, n - n_plus) if n - n_plus else np.zeros((n, 0))
    O = np.hstack([vp, vm]).real
    return O, standard_J(n_plus, n - n_plus)


def _check_dims(T, F):
    A = as_matrix(T, square=True, name="T")
    if A.shape[0] != F.dim:
        raise ContractError("dimension mismatch", matrix=A.shape[0], form=F.dim)
    return A


def _require(F, kind):
    if F.kind is not kind:
        raise ContractError(f"expected a {kind.value} form, got {F.kind.value}")


def is_odd_symmetric(T, I, tol=DEFAULT_TOL):
    _require(I, Kind.ODD)
    A = _check_dims(T, I)
    r = norm(I.matrix.T @ A.T @ I.matrix - A)
    return Check(r <= tol * (1 + norm(A)), r)


def is_even_symmetric(T, J, tol=DEFAULT_TOL):
    _require(J, Kind.EVEN)
    A = _check_dims(T, J)
    r = norm(J.matrix @ A.T @ J.matrix - A)
    return Check(r <= tol * (1 + norm(A)), r)


def is_quaternionic(T, I, tol=DEFAULT_TOL):
    _require(I, Kind.ODD)
    A = _check_dims(T, I)
    r = norm(I.matrix.T @ A.conj() @ I.matrix - A)
    return Check(r <= tol * (1 + norm(A)), r)


def odd_symmetrize(A, I):
    """``(I^* A^t I + A) / 2``, the linear projection onto odd symmetric matrices."""
    _require(I, Kind.ODD)
    X = _check_dims(A, I)
    return (I.matrix.T @ X.T @ I.matrix + X) / 2


def even_symmetrize(A, J):
    _require(J, Kind.EVEN)
    X = _check_dims(A, J)
    return (J.matrix @ X.T @ J.matrix + X) / 2


def quaternionic_symmetrize(A, I):
    _require(I, Kind.ODD)
    X = _check_dims(A, I)
    return (I.matrix.T @ X.conj() @ I.matrix + X) / 2


def skew_correspondence(T, I, tol=DEFAULT_TOL):
    """``B = I T``, skew-symmetric exactly when ``T`` is odd symmetric."""
    chk = is_odd_symmetric(T, I, tol)
    if not chk:
        raise ContractError("T is not odd symmetric", residual=chk.residual)
    return I.matrix @ as_matrix(T)


def from_skew(B, I):
    """Inverse of :func:`skew_correspondence`: ``T = I^* B``."""
    return I.matrix.T @ as_matrix(B)


def time_reversal(vectors, I):
    """Apply the antiunitary ``psi -> I conj(psi)`` column-wise."""
    return I.matrix @ np.asarray(vectors, dtype=complex).conj()


def kramers_pairing_basis(V_basis, I, tol=1e-8):
    """Orthonormal basis of the span arranged in pairs ``(phi_k, I conj(phi_k))``.

    The span must be invariant under ``psi -> I conj(psi)``.  A vector and its
    image are automatically orthogonal since ``I`` is real skew-symmetric, so
    the procedure repeatedly takes the first remaining basis vector, adds its
    partner, and passes to the orthogonal complement inside the span (which is
    again invariant).  Columns are returned as
    ``phi_1, I conj(phi_1), phi_2, I conj(phi_2), ...``.
    """
    _require(I, Kind.ODD)
    Q = np.asarray(V_basis, dtype=complex)
    if Q.ndim != 2 or Q.shape[0] != I.dim:
        raise ContractError("basis has the wrong shape", shape=Q.shape, dim=I.dim)
    d = Q.shape[1]
    if d == 0:
        return Q.copy()
    Q, _ = np.linalg.qr(Q)
    image = time_reversal(Q, I)
    leak = norm(image - Q @ (Q.conj().T @ image))
    if leak > tol * np.sqrt(d):
        raise ContractError("span is not invariant under I conj", residual=leak)
    if d % 2:
        raise ContractError(
            "an invariant span has even dimension; odd input is impossible",
            code="PARITY",
            dim=d,
        )
    pairs = []
    rest = Q
    while rest.shape[1]:
        phi = rest[:, 0]
        psi = I.matrix @ phi.conj()
        pairs.extend([phi, psi])
        P2 = np.column_stack([phi, psi])
        comp = rest - P2 @ (P2.conj().T @ rest)
        U, s, _ = np.linalg.svd(comp, full_matrices=False)
        rest = U[:, s > 0.5]
        if rest.shape[1] == 1:
            raise ContractError("pairing left a single vector", code="PARITY")
    return np.column_stack(pairs)


def real_skew_to_odd(A, I, tol=DEFAULT_TOL):
    """``T = i I A`` for a real skew-adjoint ``A``."""
    _require(I, Kind.ODD)
    X = _check_dims(A, I)
    scale = 1 + norm(X)
    if norm(X.imag) > tol * scale:
        raise ContractError("A must be real")
    if norm(X + X.conj().T) > tol * scale:
        raise ContractError("A must be skew-adjoint")
    return 1j * I.matrix @ X
