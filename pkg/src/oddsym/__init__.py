"""Odd symmetric matrices and their Z2 index on finite truncations."""

from .errors import ContractError, NumericalError, OddSymError
from .factorization import even_factorize, odd_factorize, polar_relation_check, skew_canonical
from .matrix_core import generalized_kernel_dim, numerical_kernel, pfaffian, polar_decompose
from .symmetry import (
    Kind,
    SymmetryForm,
    is_even_symmetric,
    is_odd_symmetric,
    is_quaternionic,
    kramers_pairing_basis,
    normalize_form,
    standard_I,
    standard_J,
)
from .toeplitz import SymbolLoop, make_fn_loop, toeplitz_truncate, verify_gk, wind2, winding_number
from .z2_index import (
    Boundary,
    IndexReport,
    TruncatedOperator,
    completion_isometry,
    homotopy_path_to_identity,
    ind2,
    perturbation_stability_trial,
    quaternionic_index_check,
)

__version__ = "0.1.0"
