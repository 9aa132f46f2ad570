"""Distinguishing locally diagonal orthogonally invariant bipartite states.

The package stores LDOI operators as matrix triples, reduces discrimination
questions over LOCC, separable and PPT measurements to n x n linear algebra,
and solves the PPT optimum with a block interior-point method whose largest
matrix is n x n.
"""

from .basis import (
    BasisVector,
    LdoiBasisSpec,
    NotLdoiBasis,
    basis_labels,
    basis_spec_from_json,
    basis_spec_to_json,
    basis_vector_triple,
    basis_vectors_from_json,
    basis_vectors_to_json,
    build_basis,
    fourier_spec,
    random_basis_spec,
    recognize_basis,
    uniform_ensemble,
)
from .bounds import (
    closed_form_large_u,
    gap_bound,
    locc_lower_bound,
    max_assignment,
    ppt_upper_bound_opt_c,
    ppt_upper_bound_weak,
    universal_lower_bound,
)
from .blocksdp import BlockSdpProblem, SdpSolution, solve_block_sdp
from .measurements import (
    Povm,
    build_fourier_ppt_povm,
    build_local_povm,
    povm_from_json,
    povm_to_json,
    success_probability,
    verify_povm,
)
from .sdp import (
    build_diagonal_certificate,
    check_dual_certificate,
    solve_ppt,
    solve_ppt_primal_dense,
    unambiguous_ppt_feasible,
)
from .states import (
    Ensemble,
    ensemble_from_json,
    ensemble_to_json,
    maximally_entangled_triple,
    product_basis_triple,
    werner_triple,
    x_state_triple,
)
from .triples import (
    DimensionMismatch,
    LdoiTriple,
    NotHermitian,
    NotLdoi,
    block_decompose,
    hermitian_dimension,
    hs_inner,
    identity_triple,
    is_ppt,
    is_psd,
    ldoi_twirl,
    partial_transpose,
    triple_from_dense,
    triple_from_json,
    triple_to_dense,
    triple_to_json,
    zero_triple,
)

__version__ = "0.1.0"

__all__ = [
    "BasisVector",
    "BlockSdpProblem",
    "DimensionMismatch",
    "Ensemble",
    "LdoiBasisSpec",
    "LdoiTriple",
    "NotHermitian",
    "NotLdoi",
    "NotLdoiBasis",
    "Povm",
    "SdpSolution",
    "basis_labels",
    "basis_vector_triple",
    "block_decompose",
    "build_basis",
    "build_diagonal_certificate",
    "build_fourier_ppt_povm",
    "build_local_povm",
    "check_dual_certificate",
    "closed_form_large_u",
    "fourier_spec",
    "gap_bound",
    "hermitian_dimension",
    "hs_inner",
    "identity_triple",
    "is_ppt",
    "is_psd",
    "ldoi_twirl",
    "locc_lower_bound",
    "max_assignment",
    "maximally_entangled_triple",
    "partial_transpose",
    "ppt_upper_bound_opt_c",
    "ppt_upper_bound_weak",
    "product_basis_triple",
    "random_basis_spec",
    "recognize_basis",
    "solve_block_sdp",
    "solve_ppt",
    "solve_ppt_primal_dense",
    "success_probability",
    "triple_from_dense",
    "triple_to_dense",
    "unambiguous_ppt_feasible",
    "uniform_ensemble",
    "universal_lower_bound",
    "verify_povm",
    "werner_triple",
    "x_state_triple",
    "zero_triple",
    "basis_spec_from_json",
    "basis_spec_to_json",
    "basis_vectors_from_json",
    "basis_vectors_to_json",
    "ensemble_from_json",
    "ensemble_to_json",
    "povm_from_json",
    "povm_to_json",
    "triple_from_json",
    "triple_to_json",
    "__version__",
]
