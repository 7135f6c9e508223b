"""Detailed balance for completely positive maps and quantum Markov semigroup generators on M_N.

Maps are represented as N^2 x N^2 matrices acting on row-major vectorized N x N matrices.
"""

from .errors import QdbError
from .linalg import DEFAULT_TOL, Tolerances
from .state import DensityMatrix, Measure, weighted_mean
from .superop import (
    CharacteristicMatrix,
    MatrixBasis,
    SuperOperator,
    adjoint_m,
    characteristic_matrix,
    decompose_HS,
    is_cp,
    is_qms_generator,
    is_selfadjoint_m,
    matrix_unit_basis,
    reduced_characteristic,
    standard_basis,
    unital_basis,
)
from .kraus import KrausRep, arveson_T, choi_extremal_unital, kraus_of
from .detailed_balance import (
    delta_s_structure,
    kms_extremal_decomposition,
    kms_rn_test,
    kms_space_basis,
)
from .qms import LindbladForm, fagnola_umanita_check, kms_complete_generator
from .even_bkm import bkm_transfer, even_decompose, even_extreme_cp, even_extreme_qms, psi_ij
from .n2 import N2Params, n2_characteristic, n2_extreme_sample, n2_G, n2_r0, n2_reduced

__all__ = [
    "QdbError", "DEFAULT_TOL", "Tolerances", "DensityMatrix", "Measure", "weighted_mean",
    "CharacteristicMatrix", "MatrixBasis", "SuperOperator", "adjoint_m", "characteristic_matrix",
    "decompose_HS", "is_cp", "is_qms_generator", "is_selfadjoint_m", "matrix_unit_basis",
    "reduced_characteristic", "standard_basis", "unital_basis", "KrausRep", "arveson_T",
    "choi_extremal_unital", "kraus_of", "delta_s_structure", "kms_extremal_decomposition",
    "kms_rn_test", "kms_space_basis", "LindbladForm", "fagnola_umanita_check",
    "kms_complete_generator", "bkm_transfer", "even_decompose", "even_extreme_cp",
    "even_extreme_qms", "psi_ij", "N2Params", "n2_characteristic", "n2_extreme_sample", "n2_G",
    "n2_r0", "n2_reduced",
]
