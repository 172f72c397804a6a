"""Time-reversal symmetric insulators: Kane-Mele model, ``Ind2(T_P)`` and spin Chern numbers."""

from .chern import SpinChernReport, bloch_frames, chern_oracle_plaquette, real_space_index, spin_chern
from .index import (
    FermiData,
    RieszSplit,
    fermi_projection,
    ind2_tp,
    riesz_split,
    tp_operator,
    tp_regularized,
)
from .kane_mele import BoundaryKind, KMParams, LatticeModel, bloch_hamiltonian, build_kane_mele, spin_z
from .pipeline import SWEEP_COLUMNS, phase_oracle, sweep, sweep_point, theorem11_check

__all__ = [
    "BoundaryKind",
    "FermiData",
    "KMParams",
    "LatticeModel",
    "RieszSplit",
    "SWEEP_COLUMNS",
    "SpinChernReport",
    "bloch_frames",
    "bloch_hamiltonian",
    "build_kane_mele",
    "chern_oracle_plaquette",
    "fermi_projection",
    "ind2_tp",
    "phase_oracle",
    "real_space_index",
    "riesz_split",
    "spin_chern",
    "spin_z",
    "sweep",
    "sweep_point",
    "theorem11_check",
    "tp_operator",
    "tp_regularized",
]
