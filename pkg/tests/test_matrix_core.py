import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import ortho_group

from helpers import cplx
from oddsym.errors import ContractError
from oddsym.matrix_core import (
    as_matrix,
    cluster_complex,
    cluster_reals,
    generalized_kernel_dim,
    localize,
    numerical_kernel,
    pfaffian,
    polar_decompose,
    svd,
)


def shifts(N):
    S = np.eye(N, k=1)
    return np.block([[S, np.zeros((N, N))], [np.zeros((N, N)), S.T]])


def test_as_matrix_rejects_bad_input():
    with pytest.raises(ContractError):
        as_matrix([[np.nan, 0], [0, 1]])
    with pytest.raises(ContractError):
        as_matrix([1, 2, 3])
    with pytest.raises(ContractError):
        as_matrix(np.zeros((2, 3)), square=True)


def test_svd_examples():
    assert np.allclose(svd(np.eye(3))[1], [1, 1, 1])
    assert np.allclose(svd(np.diag([2.0, 0.0]))[1], [2, 0])


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 32), st.integers(1, 32), st.integers(0, 2**32 - 1))
def test_svd_reconstructs(m, n, seed):
    M = cplx(np.random.default_rng(seed), m, n)
    U, s, V = svd(M)
    S = np.zeros((m, n))
    S[: s.size, : s.size] = np.diag(s)
    assert np.linalg.norm(U @ S @ V.conj().T - M) <= 1e-12 * s[0] * max(m, n)
    assert np.all(np.diff(s) <= 0)


def test_numerical_kernel_examples():
    r = numerical_kernel(np.zeros((2, 2)))
    assert (r.rank, r.kernel_dim) == (0, 2)
    r = numerical_kernel(np.diag([1.0, 1e-15]), 1e-9)
    assert (r.rank, r.kernel_dim) == (1, 1)
    r = numerical_kernel(shifts(8))
    assert r.kernel_dim == 2
    # one kernel vector at each shift edge: e_0 of S and e_{N-1} of S*
    support = sorted(int(np.argmax(np.abs(v))) for v in r.kernel_basis.T)
    assert support == [0, 15]


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 12), st.integers(0, 12), st.integers(0, 2**32 - 1))
def test_numerical_kernel_invariants(n, r, seed):
    r = min(r, n)
    rng = np.random.default_rng(seed)
    M = cplx(rng, n, r) @ cplx(rng, r, n) if r else np.zeros((n, n))
    res = numerical_kernel(M)
    assert res.rank + res.kernel_dim == n
    assert res.kernel_dim == n - r
    smax = res.singular_values[0]
    for v in res.kernel_basis.T:
        assert np.linalg.norm(M @ v) <= res.tolerance_used * (1 + smax)
    for c in (1e-3, 1.0, 1e3):
        assert numerical_kernel(c * M).kernel_dim == res.kernel_dim


def test_numerical_kernel_rejects_bad_tolerance():
    with pytest.raises(ContractError):
        numerical_kernel(np.eye(2), 0.0)


def test_pfaffian_examples():
    assert pfaffian([[0, 3], [-3, 0]]) == 3
    B = np.zeros((4, 4))
    B[0, 1], B[2, 3] = 2, 3
    assert np.isclose(pfaffian(B - B.T), 6)
    with pytest.raises(ContractError):
        pfaffian(np.zeros((3, 3)))
    with pytest.raises(ContractError):
        pfaffian(np.ones((2, 2)))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_pfaffian_squares_to_det_and_is_covariant(half, seed):
    rng = np.random.default_rng(seed)
    n = 2 * half
    X = cplx(rng, n, n)
    B = X - X.T
    pf = pfaffian(B)
    det = np.linalg.det(B)
    assert abs(pf**2 - det) <= 1e-8 * abs(det)
    O = ortho_group.rvs(n, random_state=rng)
    assert np.isclose(pfaffian(O.T @ B @ O), np.linalg.det(O) * pf, rtol=1e-8)


def test_generalized_kernel_dim_examples():
    J2 = np.array([[0, 1], [0, 0]])
    J = np.kron(np.eye(2), J2)
    assert generalized_kernel_dim(J, 0, 1) == 2
    assert generalized_kernel_dim(J, 0, 2) == 4
    assert generalized_kernel_dim(3 * np.eye(2), 3, 1) == 2
    with pytest.raises(ContractError):
        generalized_kernel_dim(J, 0, 0)


def test_generalized_kernel_dim_monotone_and_stabilizes():
    # Jordan blocks of sizes 3 and 1 at eigenvalue 2, plus eigenvalue 5
    T = np.diag([2.0, 2, 2, 2, 5]) + np.diag([1.0, 1, 0, 0], k=1)
    dims = [generalized_kernel_dim(T, 2, k) for k in range(1, 6)]
    assert dims == [2, 3, 4, 4, 4]


def test_polar_examples():
    rng = np.random.default_rng(3)
    U, _ = np.linalg.qr(cplx(rng, 3, 3))
    V, P = polar_decompose(U)
    assert np.allclose(V, U) and np.allclose(P, np.eye(3))
    V, P = polar_decompose(np.diag([2.0, 0.0]))
    assert np.allclose(V, np.diag([1, 0])) and np.allclose(P, np.diag([2, 0]))
    T = cplx(rng, 4, 4)
    V, P = polar_decompose(T)
    assert np.allclose(V.conj().T @ V, np.eye(4))
    assert np.all(np.linalg.eigvalsh(P) > 0)
    assert np.allclose(V @ P, T)


def test_clustering_and_localize():
    groups = cluster_reals([0.0, 1.0, 1e-9, 1.0 + 1e-9], 1e-6)
    assert sorted(sorted(g.tolist()) for g in groups) == [[0, 2], [1, 3]]
    groups = cluster_complex([1j, 1j + 1e-9, -1.0], 1e-6)
    assert sorted(len(g) for g in groups) == [1, 2]
    basis = np.eye(4)[:, [0, 3]]
    centers, _ = localize((basis + basis[:, ::-1]) / np.sqrt(2), np.arange(4))
    assert np.allclose(centers, [0, 3])
