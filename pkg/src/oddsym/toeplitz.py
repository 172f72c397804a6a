"""Symbol loops, spectral-flow invariants and truncated block-Toeplitz operators.

Loops are sampled on the uniform grid ``t_k = -pi + 2 pi k / n`` (``n`` even),
so ``t = -pi`` stands for ``t = pi``, ``t = 0`` is sample ``n/2`` and the grid
is closed under ``t -> -t``.  Odd symmetry of a loop means
``f(t)^t = I^* f(-t) I`` at every sample.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.linalg
from scipy.stats import unitary_group

from .errors import ContractError, NumericalError
from .matrix_core import DEFAULT_REL_TOL, cluster_complex, norm
from .symmetry import Kind, SymmetryForm, standard_I
from .z2_index import Boundary, IndexReport, TruncatedOperator, ind2

UNITARY_TOL = 1e-10
SYMMETRY_TOL = 1e-9
KRAMERS_GAP = 1e-6
N_PHI_CANDIDATES = 64
PHI_OFFSET = (np.sqrt(5) - 1) / 2
DEFAULT_SAMPLES = 256
# Fourier tail allowed beyond n_samples/4 before a loop is rejected as not band-limited
DECAY_TOL = 1e-10
# coefficients below this (relative) are dropped when building the Toeplitz matrix
COEF_TOL = 1e-12


def grid(n_samples):
    if n_samples < 4 or n_samples % 2:
        raise ContractError("n_samples must be even and at least 4", n_samples=n_samples)
    return -np.pi + 2 * np.pi * np.arange(n_samples) / n_samples


def _mirror(n):
    """Index of ``-t_k`` on the grid."""
    return (-np.arange(n)) % n


@dataclass
class SymbolLoop:
    ts: np.ndarray
    matrices: np.ndarray
    form: SymmetryForm | None = None

    def __post_init__(self):
        self.ts = np.asarray(self.ts, dtype=float)
        self.matrices = np.asarray(self.matrices, dtype=complex)
        n = self.ts.size
        if not np.allclose(self.ts, grid(n), atol=1e-12):
            raise ContractError("samples must sit on the uniform grid -pi + 2 pi k / n")
        if self.matrices.shape[0] != n or self.matrices.ndim != 3:
            raise ContractError("need one square matrix per sample")
        d = self.fiber_dim
        eye = np.eye(d)
        worst = max(norm(U.conj().T @ U - eye) for U in self.matrices)
        if worst > UNITARY_TOL * max(1, d):
            raise ContractError("loop values must be unitary", residual=worst)
        if self.form is not None:
            if self.form.kind is not Kind.ODD or self.form.dim != d:
                raise ContractError("loop symmetry must be an ODD form on the fiber")
            r = self.symmetry_residual()
            if r > SYMMETRY_TOL:
                raise ContractError("loop violates the odd symmetry", residual=r)

    @property
    def fiber_dim(self):
        return self.matrices.shape[1]

    @property
    def n_samples(self):
        return self.ts.size

    def symmetry_residual(self):
        Im = self.form.matrix
        f = self.matrices
        g = f[_mirror(self.n_samples)]
        return float(max(norm(Im.T @ b @ Im - a.T) for a, b in zip(f, g)))

    def index_of(self, t):
        k = int(np.argmin(np.abs(np.angle(np.exp(1j * (self.ts - t))))))
        return k

    def conjugated(self, O):
        """Gauge change ``f -> O f O^t`` by a real orthogonal commuting with ``I``."""
        O = np.asarray(O, dtype=float)
        return SymbolLoop(self.ts, O @ self.matrices @ O.T, self.form)

    def to_dict(self):
        return {
            "fiber_dim": self.fiber_dim,
            "ts": self.ts.tolist(),
            "matrices": [{"re": m.real.tolist(), "im": m.imag.tolist()} for m in self.matrices],
            "form": None if self.form is None else self.form.matrix.real.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        mats = np.array([np.array(m["re"]) + 1j * np.array(m["im"]) for m in d["matrices"]])
        form = d.get("form")
        if form is not None:
            form = SymmetryForm(Kind.ODD, np.array(form, dtype=float))
        if mats.shape[1] != d["fiber_dim"]:
            raise ContractError("fiber_dim does not match the matrices")
        return cls(np.array(d["ts"]), mats, form)


def loop_from_function(fn, n_samples=DEFAULT_SAMPLES, form=None):
    ts = grid(n_samples)
    return SymbolLoop(ts, np.array([fn(t) for t in ts]), form)


def make_fn_loop(n, n_samples=DEFAULT_SAMPLES):
    """``f_n(z) = diag(z^n, conj(z)^n)`` with ``I = standard_I(2)``."""
    ts = grid(n_samples)
    mats = np.zeros((ts.size, 2, 2), complex)
    mats[:, 0, 0] = np.exp(1j * n * ts)
    mats[:, 1, 1] = np.exp(-1j * n * ts)
    return SymbolLoop(ts, mats, standard_I(2))


def make_scalar_loop(n=1, n_samples=DEFAULT_SAMPLES):
    """``z -> z^n`` on a one dimensional fiber; carries no symmetry."""
    ts = grid(n_samples)
    return SymbolLoop(ts, np.exp(1j * n * ts)[:, None, None])


def constant_loop(U, form, n_samples=DEFAULT_SAMPLES):
    U = np.asarray(U, dtype=complex)
    return SymbolLoop(grid(n_samples), np.repeat(U[None], n_samples, axis=0), form)


def _random_projection(rng, d, rank):
    X = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    Q, _ = np.linalg.qr(X)
    return Q @ Q.conj().T


def random_odd_loop(rng, fiber_dim=4, degree=2, n_samples=DEFAULT_SAMPLES):
    """Random odd symmetric unitary loop that is a trigonometric polynomial.

    ``h(z) = U_0 prod_j (1 - P_j + z P_j) U_j`` is a unitary polynomial of
    degree ``degree`` (rank one ``P_j``), and ``g(z) = I^* h(conj z)^t I h(z)``
    is odd symmetric with Fourier support in ``[-degree, degree]``.  Returns
    ``(loop, degree mod 2)``; with ``h = diag(z, 1)`` one recovers ``f_1``.
    """
    if fiber_dim % 2:
        raise ContractError("fiber_dim must be even")
    I = standard_I(fiber_dim)
    Im = I.matrix
    d = fiber_dim
    us = [unitary_group.rvs(d, random_state=rng) for _ in range(degree + 1)]
    ps = [_random_projection(rng, d, 1) for _ in range(degree)]

    def h(z):
        out = us[0]
        for P, U in zip(ps, us[1:]):
            out = out @ (np.eye(d) - P + z * P) @ U
        return out

    ts = grid(n_samples)
    mats = np.array([Im.T @ h(np.exp(-1j * t)).T @ Im @ h(np.exp(1j * t)) for t in ts])
    return SymbolLoop(ts, mats, I), degree % 2


def odd_symmetrize_loop(mats, form):
    Im = form.matrix
    mirrored = mats[_mirror(mats.shape[0])]
    return (mats + Im.T @ np.transpose(mirrored, (0, 2, 1)) @ Im) / 2


def perturbed_loop(loop, eps, rng):
    """Small odd symmetric perturbation of ``loop``, re-unitarized by polar phase.

    A random degree-one trigonometric polynomial is added with weight ``eps``,
    the result is odd symmetrized sample-wise and each sample is replaced by
    the unitary factor of its polar decomposition (which keeps the symmetry).
    The result is smooth but not polynomial; its Fourier tail decays
    geometrically.
    """
    d = loop.fiber_dim
    coeffs = rng.normal(size=(3, d, d)) + 1j * rng.normal(size=(3, d, d))
    z = np.exp(1j * loop.ts)[:, None, None]
    p = coeffs[0] + coeffs[1] * z + coeffs[2] / z
    X = odd_symmetrize_loop(loop.matrices + eps * p / np.linalg.norm(coeffs), loop.form)
    mats = []
    for x in X:
        u, _, vh = np.linalg.svd(x)
        mats.append(u @ vh)
    return SymbolLoop(loop.ts, np.array(mats), loop.form)


# ---------------------------------------------------------------- spectral flow


@dataclass
class WindingReport:
    wind: int
    wind2: int
    reference_phase: float
    crossings: list
    min_gap_to_reference: float
    kramers_certificate: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)
    phases: np.ndarray | None = field(default=None, repr=False)
    ts: np.ndarray | None = field(default=None, repr=False)

    @property
    def resolved(self):
        return not self.flags

    def to_dict(self):
        d = asdict(self)
        del d["phases"], d["ts"]
        d["crossings"] = [list(c) for c in self.crossings]
        d["resolved"] = self.resolved
        return d

    def crossing_rows(self):
        """``(t, eigenphase index, phase)`` rows of the tracked branches."""
        rows = []
        for t, ph in zip(self.ts, self.phases):
            for j, p in enumerate(ph):
                rows.append((float(t), j, float(p)))
        return rows


def _eig_unitary(U):
    D, Z = scipy.linalg.schur(U, output="complex")
    return np.diag(D), Z


def _match(Z0, Z1):
    """Permutation ``perm`` so that column ``perm[j]`` of ``Z1`` continues column ``j`` of ``Z0``."""
    ov = np.abs(Z0.conj().T @ Z1) ** 2
    d = ov.shape[0]
    perm = -np.ones(d, int)
    used = np.zeros(d, bool)
    for flat in np.argsort(-ov, axis=None, kind="stable"):
        i, j = divmod(int(flat), d)
        if perm[i] < 0 and not used[j]:
            perm[i] = j
            used[j] = True
    return perm


def track_eigenphases(loop):
    """Continuous eigenphase branches over the closed circle ``t_0 .. t_n = t_0 + 2 pi``.

    Returns ``(ts, phases)`` with ``phases`` of shape ``(n + 1, d)`` lifted to
    the reals.  Raises when consecutive samples move an eigenphase by more
    than ``pi/2``, which signals undersampling.
    """
    n = loop.n_samples
    lam, Z = _eig_unitary(loop.matrices[0])
    phases = np.zeros((n + 1, loop.fiber_dim))
    phases[0] = np.angle(lam)
    for k in range(1, n + 1):
        lam1, Z1 = _eig_unitary(loop.matrices[k % n])
        perm = _match(Z, Z1)
        lam1, Z1 = lam1[perm], Z1[:, perm]
        step = np.angle(lam1 / lam)
        if np.max(np.abs(step)) > np.pi / 2:
            raise NumericalError(
                "eigenphase moved too far between samples; increase n_samples",
                sample=k,
                step=float(np.max(np.abs(step))),
            )
        phases[k] = phases[k - 1] + step
        lam, Z = lam1, Z1
    ts = np.append(loop.ts, loop.ts[0] + 2 * np.pi)
    return ts, phases


def _crossings(ts, phases, phi, lo, hi):
    """Signed crossings of the lines ``phi + 2 pi m`` by the branches, for sample steps in ``[lo, hi)``."""
    out = []
    level = np.floor((phases - phi) / (2 * np.pi))
    for k in range(lo, hi):
        for j in np.flatnonzero(level[k + 1] != level[k]):
            a, b = phases[k, j], phases[k + 1, j]
            step = int(level[k + 1, j] - level[k, j])
            line = phi + 2 * np.pi * (level[k, j] + (1 if step > 0 else 0))
            frac = (line - a) / (b - a) if b != a else 0.0
            t = ts[k] + frac * (ts[k + 1] - ts[k])
            out.extend([(float(t), int(np.sign(step)))] * abs(step))
    return out


def _phase_gap(phi, lams):
    return float(np.min(np.abs(np.exp(1j * phi) - lams))) if len(lams) else np.inf


def _pick_phi(spectra):
    # an irrational offset keeps candidates off the rational sampling grid
    cands = 2 * np.pi * (np.arange(N_PHI_CANDIDATES) + PHI_OFFSET) / N_PHI_CANDIDATES
    gaps = [min(_phase_gap(p, s) for s in spectra) for p in cands]
    best = int(np.argmax(gaps))
    return float(cands[best]), float(gaps[best])


def winding_number(loop, min_gap=1e-9):
    """Signed spectral flow through a reference phase over the whole circle."""
    ts, phases = track_eigenphases(loop)
    spectra = [np.exp(1j * p) for p in phases[:-1]]
    phi, gap = _pick_phi(spectra)
    if gap < min_gap:
        raise NumericalError("no admissible reference phase on the search grid; sample more densely")
    cr = _crossings(ts, phases, phi, 0, loop.n_samples)
    wind = sum(s for _, s in cr)
    det_turns = (phases[-1].sum() - phases[0].sum()) / (2 * np.pi)
    flags = []
    if abs(det_turns - wind) > 1e-6:
        flags.append("crossing count disagrees with the determinant winding")
    if loop.form is not None and wind != 0:
        flags.append("odd symmetric loop with nonzero winding")
    return WindingReport(wind, wind % 2, phi, cr, gap, flags=flags, phases=phases, ts=ts)


def kramers_certificate(loop, gap=KRAMERS_GAP):
    """Eigenvalue cluster sizes of ``f`` at ``t = 0`` and ``t = pi``."""
    out = {}
    for name, t in (("t=0", 0.0), ("t=pi", np.pi)):
        lam, _ = _eig_unitary(loop.matrices[loop.index_of(t)])
        sizes = sorted(int(c.size) for c in cluster_complex(lam, gap))
        out[name] = sizes
    out["even"] = all(s % 2 == 0 for v in list(out.values()) for s in v)
    return out


def wind2(loop, phi=None):
    """Parity of the spectral flow through ``e^{i phi}`` over ``t in [0, pi)``."""
    if loop.form is None:
        raise ContractError("wind2 needs an odd symmetric loop")
    ts, phases = track_eigenphases(loop)
    n = loop.n_samples
    k0, kpi = n // 2, n  # t = 0 and t = pi (= the wrapped t_0)
    ends = [np.exp(1j * phases[k0]), np.exp(1j * phases[kpi])]
    if phi is None:
        phi, gap = _pick_phi(ends)
    else:
        gap = min(_phase_gap(phi, s) for s in ends)
    flags = []
    if gap < 1e-6:
        flags.append("UNRESOLVED: reference phase touches the spectrum at t=0 or t=pi")
    cr = _crossings(ts, phases, phi, k0, kpi)
    flow = sum(s for _, s in cr)
    full = _crossings(ts, phases, phi, 0, n)
    cert = kramers_certificate(loop)
    if not cert["even"]:
        flags.append("Kramers certificate failed")
    return WindingReport(
        sum(s for _, s in full),
        flow % 2,
        float(phi),
        cr,
        gap,
        kramers_certificate=cert,
        flags=flags,
        phases=phases,
        ts=ts,
    )


# ---------------------------------------------------------------- Toeplitz


def fourier_coefficients(loop):
    """``fhat[k] = (1/2pi) int f(t) e^{ikt} dt`` for ``k`` in ``-n/2 .. n/2 - 1``.

    Returns ``(ks, fhat)``.  With this sign ``f_1`` yields the upper shift in
    its first fiber component, so its Toeplitz kernel sits at the left edge.
    """
    n = loop.n_samples
    ks = np.arange(-n // 2, n // 2)
    phase = np.exp(1j * np.outer(ks, loop.ts)) / n
    fhat = np.einsum("kt,tij->kij", phase, loop.matrices)
    return ks, fhat


def toeplitz_truncate(loop, n_sites):
    """Block-Toeplitz truncation ``T[j, l] = fhat[j - l]`` on ``n_sites`` sites.

    Site-major ordering; the symmetry form is ``Id (x) I``.  The loop must be
    band-limited to ``n_samples / 4`` (checked on the Fourier tail) and its
    retained bandwidth must be at most ``n_sites / 4``.
    """
    if loop.form is None:
        raise ContractError("toeplitz_truncate needs an odd symmetric loop")
    n = loop.n_samples
    ks, fhat = fourier_coefficients(loop)
    mags = np.linalg.norm(fhat, axis=(1, 2))
    top = mags.max()
    tail = mags[np.abs(ks) > n // 4].max(initial=0.0)
    if tail > DECAY_TOL * top:
        raise ContractError(
            "loop is not band-limited on this grid; increase n_samples",
            tail=float(tail),
        )
    keep = mags > COEF_TOL * top
    band = int(np.abs(ks[keep]).max())
    if band > n_sites / 4:
        raise ContractError("symbol bandwidth exceeds n_sites/4", bandwidth=band, n_sites=n_sites)
    d = loop.fiber_dim
    T = np.zeros((n_sites * d, n_sites * d), complex)
    for k, c, kp in zip(ks, fhat, keep):
        if not kp:
            continue
        for j in range(max(0, k), min(n_sites, n_sites + k)):
            l = j - k
            T[j * d : (j + 1) * d, l * d : (l + 1) * d] = c
    form = loop.form.tensor_identity(n_sites)
    Im = form.matrix
    r = norm(Im.T @ T.T @ Im - T)
    if r > 1e-8:
        raise NumericalError("Toeplitz truncation is not odd symmetric", residual=r)
    return TruncatedOperator(T, d, n_sites, Boundary.HALF_INFINITE_LEFT, form)


@dataclass
class GKReport:
    wind2: int
    ind2: int
    equal: bool
    n_sites: int
    winding: WindingReport
    index: IndexReport

    def to_dict(self):
        return {
            "wind2": self.wind2,
            "ind2": self.ind2,
            "equal": self.equal,
            "n_sites": self.n_sites,
            "winding": self.winding.to_dict(),
            "index": self.index.to_dict(),
        }


def verify_gk(loop, n_sites, rel_tol=DEFAULT_REL_TOL):
    w = wind2(loop)
    rep = ind2(toeplitz_truncate(loop, n_sites), rel_tol)
    return GKReport(w.wind2, rep.ind2, w.wind2 == rep.ind2, n_sites, w, rep)
