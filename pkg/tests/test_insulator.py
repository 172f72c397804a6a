import numpy as np
import pytest
import scipy.linalg

from oddsym.errors import ContractError, NumericalError
from oddsym.insulator import (
    KMParams,
    bloch_frames,
    bloch_hamiltonian,
    build_kane_mele,
    chern_oracle_plaquette,
    fermi_projection,
    ind2_tp,
    phase_oracle,
    riesz_split,
    spin_chern,
    spin_z,
    sweep,
    theorem11_check,
    tp_operator,
    tp_regularized,
)
from oddsym.insulator.chern import INDEX_SIGN
from oddsym.insulator.pipeline import point_seed
from oddsym.symmetry import is_odd_symmetric

TOPO = dict(t=1.0, lambda_so=0.06, lambda_r=0.0, lambda_v=0.1)
TRIV = dict(TOPO, lambda_v=0.6)


@pytest.fixture(scope="module")
def topo():
    return fermi_projection(build_kane_mele(10, 10, **TOPO))


@pytest.fixture(scope="module")
def triv():
    return fermi_projection(build_kane_mele(10, 10, **TRIV))


def test_graphene_limit_is_particle_hole_symmetric():
    m = build_kane_mele(6, 6, lambda_so=0, lambda_v=0, boundary="TORUS")
    E = np.linalg.eigvalsh(m.hamiltonian)
    assert np.allclose(E, -E[::-1], atol=1e-12)


def test_spin_decouples_without_rashba():
    m = build_kane_mele(6, 6, **TOPO)
    S = spin_z(m.n_cells)
    assert np.linalg.norm(m.hamiltonian @ S - S @ m.hamiltonian) <= 1e-12
    m = build_kane_mele(6, 6, **dict(TOPO, lambda_r=0.05))
    assert np.linalg.norm(m.hamiltonian @ S - S @ m.hamiltonian) > 1e-3


def test_model_invariants_and_contracts():
    m = build_kane_mele(5, 7, **dict(TOPO, lambda_r=0.03), disorder_w=0.4, seed=3, boundary="TORUS")
    inv = m.invariants()
    assert inv["hermitian_residual"] <= 1e-10 and inv["time_reversal_residual"] <= 1e-9
    assert inv["hop_range"] <= 2
    with pytest.raises(ContractError):
        build_kane_mele(3, 8)
    with pytest.raises(ContractError):
        build_kane_mele(4, 4, t=0.5 + 0.5j)  # complex hopping breaks time reversal


def test_functional_calculus_keeps_odd_symmetry():
    m = build_kane_mele(6, 6, **dict(TOPO, lambda_r=0.03), disorder_w=0.3, seed=1)
    g = scipy.linalg.expm(-m.hamiltonian @ m.hamiltonian)
    assert is_odd_symmetric(g, m.I_s)


def test_torus_gap():
    fd = fermi_projection(build_kane_mele(8, 8, **TOPO, boundary="TORUS"), 0.0)
    assert fd.gap > 0.1
    assert fd.rank == fd.model.dim // 2


def test_fermi_projection_edge_cases():
    m = build_kane_mele(4, 4, **TOPO)
    E = np.linalg.eigvalsh(m.hamiltonian)
    assert fermi_projection(m, E[0] - 1).rank == 0
    full = fermi_projection(m, E[-1] + 1)
    assert np.allclose(full.P, np.eye(m.dim))
    with pytest.raises(ContractError):
        fermi_projection(m, E[5])
    fd = fermi_projection(m, 0.0)
    P = fd.P
    assert np.linalg.norm(P @ P - P) <= 1e-10 and np.linalg.norm(P - P.conj().T) <= 1e-10


def test_tp_operator_edge_cases():
    m = build_kane_mele(4, 4, **TOPO)
    E = np.linalg.eigvalsh(m.hamiltonian)
    assert np.allclose(tp_operator(fermi_projection(m, E[0] - 1)), np.eye(m.dim))
    full = fermi_projection(m, E[-1] + 1)
    assert np.allclose(tp_operator(full), full.F)
    assert ind2_tp(fermi_projection(m, E[0] - 1)).ind2 == 0


def test_dirac_phase_commutator_concentrates_at_origin(topo):
    P = topo.P
    C = topo.phase[:, None] * P - P * topo.phase[None, :]
    rows = np.linalg.norm(C, axis=1)
    r = topo.radius()
    assert rows[r < 0.3].mean() > 2 * rows[r > 0.5].mean()


def test_ind2_topological_and_trivial(topo, triv):
    a, b = ind2_tp(topo), ind2_tp(triv)
    assert a.ind2 == 1 and a.resolved
    assert a.kernel_dim_filtered == a.cokernel_dim_filtered
    assert b.ind2 == 0 and b.resolved


def test_regularized_operator_agrees(topo, triv):
    for fd in (topo, triv):
        T2 = tp_regularized(fd)
        assert is_odd_symmetric(T2, fd.model.I_s)
        assert ind2_tp(fd, operator=T2).ind2 == ind2_tp(fd).ind2


def test_ind2_constant_over_disorder():
    values = set()
    for seed in range(3):
        fd = fermi_projection(build_kane_mele(10, 10, **TOPO, disorder_w=0.3, seed=seed))
        rep = ind2_tp(fd)
        assert rep.resolved
        values.add(rep.ind2)
    assert values == {1}


def test_ind2_constant_along_gapped_path():
    for lr in (0.0, 0.02, 0.05):
        for lv in (0.0, 0.1, 0.15):
            fd = fermi_projection(build_kane_mele(10, 10, **dict(TOPO, lambda_r=lr, lambda_v=lv)))
            assert ind2_tp(fd).ind2 == 1


def test_riesz_split(topo):
    sp = riesz_split(topo)
    Sz = spin_z(topo.model.n_cells)
    up = (np.eye(topo.model.dim) + Sz) / 2
    assert np.allclose(sp.P_plus, topo.P @ up, atol=1e-10)
    assert max(sp.certificates.values()) <= 1e-8
    fd = fermi_projection(build_kane_mele(10, 10, **dict(TOPO, lambda_r=0.02)))
    sp = riesz_split(fd)
    assert sp.psp_gap > 0.5 and max(sp.certificates.values()) <= 1e-8
    E = fd.energies
    with pytest.raises(NumericalError) as exc:
        riesz_split(fermi_projection(fd.model, E[0] - 1))
    assert exc.value.code == "NO_SPIN_SPLIT"
    with pytest.raises(ContractError):
        riesz_split(topo, np.eye(topo.model.dim))  # not odd skew-symmetric


def test_spin_chern(topo, triv):
    r = spin_chern(topo)
    assert (r.c_plus, r.c_minus) == (1, -1)
    r = spin_chern(triv)
    assert (r.c_plus, r.c_minus) == (0, 0) and not r.flags
    E = topo.energies
    full = fermi_projection(topo.model, E[-1] + 1)
    r = spin_chern(full)
    assert (r.c_plus, r.c_minus) == (0, 0)


def test_plaquette_oracle():
    flat = np.zeros((8, 8, 4, 1), complex)
    flat[..., 0, 0] = 1
    assert chern_oracle_plaquette(flat) == 0
    p = KMParams(**TOPO)
    # spin-up sector at lambda_r = 0 is a Haldane-type model: lower band has |C| = 1
    up = bloch_frames(p, 0.0, 24, "plus")
    assert abs(chern_oracle_plaquette(up)) == 1
    allbands = bloch_frames(p, 10.0, 12, "occupied")
    assert chern_oracle_plaquette(allbands) == 0
    assert chern_oracle_plaquette(bloch_frames(p, 0.0, 12, "plus")) == chern_oracle_plaquette(up)
    assert phase_oracle(KMParams(**TRIV)) == 0
    assert INDEX_SIGN * chern_oracle_plaquette(up) == 1


def test_bloch_matches_torus_spectrum():
    p = KMParams(**dict(TOPO, lambda_r=0.03))
    L = 6
    m = build_kane_mele(L, L, **dict(TOPO, lambda_r=0.03), boundary="TORUS")
    ks = 2 * np.pi * np.arange(L) / L
    bloch = np.sort(np.concatenate([np.linalg.eigvalsh(bloch_hamiltonian((a, b), p)) for a in ks for b in ks]))
    assert np.allclose(bloch, np.linalg.eigvalsh(m.hamiltonian), atol=1e-10)


def test_theorem11_statuses(topo, triv):
    assert theorem11_check(topo)["status"] == "HOLDS"
    r = theorem11_check(triv)
    assert r["status"] == "VACUOUS" and r["witness"] == {"c_plus": 0, "c_minus": 0}
    E = topo.energies
    assert theorem11_check(fermi_projection(topo.model, E[0] - 1))["status"] == "NOT_APPLICABLE"


def test_sweep_is_deterministic():
    base = dict(Lx=6, Ly=6, **TOPO, w=0.2, seed=7, boundary="OPEN", E_F=0.0)
    a = sweep(base, "lambda_v", [0.1, 0.6])
    b = sweep(base, "lambda_v", [0.1, 0.6])
    assert a == b
    assert [r["seed"] for r in a] == [point_seed(7, 0), point_seed(7, 1)]
    assert sweep(base, "lambda_v", []) == []
