"""Random test-matrix generators shared by the unit and acceptance tests."""

import numpy as np
from scipy.stats import ortho_group

from oddsym.symmetry import Kind, SymmetryForm, standard_I, standard_J, time_reversal


def cplx(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def random_orthogonal(rng, n):
    if n == 1:
        return np.array([[1.0]])
    return ortho_group.rvs(n, random_state=rng)


def random_odd_form(rng, n):
    Q = random_orthogonal(rng, n)
    return SymmetryForm(Kind.ODD, Q @ standard_I(n).matrix @ Q.T)


def random_even_form(rng, n):
    p = int(rng.integers(0, n + 1))
    Q = random_orthogonal(rng, n)
    return SymmetryForm(Kind.EVEN, Q @ standard_J(p, n - p).matrix @ Q.T)


def low_rank(rng, n, r):
    return cplx(rng, n, r) @ cplx(rng, r, n) if r else np.zeros((n, n), complex)


def odd_with_kernel(rng, n, kernel_dim, I=None):
    """``T = I^* X^t I X`` with ``rank X = n - kernel_dim`` (kernel_dim even)."""
    assert kernel_dim % 2 == 0
    I = I or random_odd_form(rng, n)
    X = low_rank(rng, n, n - kernel_dim)
    T = I.matrix.T @ X.T @ I.matrix @ X
    return T / np.linalg.norm(T, 2) if T.any() else T, I


def even_with_kernel(rng, n, kernel_dim, J=None):
    J = J or random_even_form(rng, n)
    X = low_rank(rng, n, n - kernel_dim)
    T = J.matrix @ X.T @ J.matrix @ X
    return T / np.linalg.norm(T, 2) if T.any() else T, J


def random_odd(rng, n, I=None):
    I = I or random_odd_form(rng, n)
    X = cplx(rng, n, n)
    return (I.matrix.T @ X.T @ I.matrix + X) / 2, I


def kramers_projection(rng, I, pairs):
    """Projection onto a random span of ``pairs`` Kramers pairs."""
    n = I.dim
    Q = np.zeros((n, 0), complex)
    for _ in range(pairs):
        v = cplx(rng, n)
        v -= Q @ (Q.conj().T @ v)
        v /= np.linalg.norm(v)
        Q = np.column_stack([Q, v, time_reversal(v, I)])
    return Q @ Q.conj().T


def quaternionic_with_kernel(rng, n, kernel_dim, I=None):
    """``X (1 - P)`` with ``X`` quaternionic and ``P`` a Kramers projection."""
    I = I or random_odd_form(rng, n)
    X = cplx(rng, n, n)
    X = (X + I.matrix.T @ X.conj() @ I.matrix) / 2
    if kernel_dim == n:
        return np.zeros((n, n), complex), I
    P = kramers_projection(rng, I, kernel_dim // 2)
    return X @ (np.eye(n) - P), I
