"""Energy bounds and correlation extrema for spin lattices with fixed marginals."""

from .qcore import (
    EigenDecomposition,
    eig_hermitian,
    flip_operator,
    matrix_from_json,
    matrix_to_json,
    operator_library,
    partial_trace,
    tensor,
    validate_observable,
    validate_state,
)
from .infomeasures import (
    RoofValue,
    any_state_corr_max_qubit,
    expect,
    fidelity,
    qfi,
    sep_corr_max,
    sep_corr_max_heisenberg,
    sym_sep_corr_min,
    variance,
    wy_skew,
)
from .models import (
    CollectiveModel,
    ModelSpec,
    build_collective,
    build_hamiltonian,
    collective_spin,
    complete_graph_edges,
    ground_marginals,
    is_regular,
    lattice_edges,
    reduced_from_collective,
    spec_from_json,
    spec_to_json,
    two_body_hamiltonian,
)
from .oracles import (
    OptimizerConfig,
    OracleResult,
    ProductEnsemble,
    any_state_opt,
    ground_state,
    roof_max,
    roof_min,
    saturating_chain_state,
    sep_couple_opt,
    symmetric_extension_value,
)
from .bounds import (
    BlockMin,
    BoundReport,
    BoundValue,
    FidelityBound,
    WitnessReport,
    antiferro_symsep,
    block_min_marginal,
    e_lower_kblock,
    e_lower_wy,
    e_sep_chain,
    e_sep_lower,
    fidelity_upper_bound,
    heisenberg_sep_min,
    kprod_bound,
    pfeuty_energy,
    qfi_lower_bound,
    witness,
)

__version__ = "0.1.0"

__all__ = [
    "EigenDecomposition",
    "eig_hermitian",
    "flip_operator",
    "matrix_from_json",
    "matrix_to_json",
    "operator_library",
    "partial_trace",
    "tensor",
    "validate_observable",
    "validate_state",
    "RoofValue",
    "any_state_corr_max_qubit",
    "expect",
    "fidelity",
    "qfi",
    "sep_corr_max",
    "sep_corr_max_heisenberg",
    "sym_sep_corr_min",
    "variance",
    "wy_skew",
    "CollectiveModel",
    "ModelSpec",
    "build_collective",
    "build_hamiltonian",
    "collective_spin",
    "complete_graph_edges",
    "ground_marginals",
    "is_regular",
    "lattice_edges",
    "reduced_from_collective",
    "spec_from_json",
    "spec_to_json",
    "two_body_hamiltonian",
    "OptimizerConfig",
    "OracleResult",
    "ProductEnsemble",
    "any_state_opt",
    "ground_state",
    "roof_max",
    "roof_min",
    "saturating_chain_state",
    "sep_couple_opt",
    "symmetric_extension_value",
    "BlockMin",
    "BoundReport",
    "BoundValue",
    "FidelityBound",
    "WitnessReport",
    "antiferro_symsep",
    "block_min_marginal",
    "e_lower_kblock",
    "e_lower_wy",
    "e_sep_chain",
    "e_sep_lower",
    "fidelity_upper_bound",
    "heisenberg_sep_min",
    "kprod_bound",
    "pfeuty_energy",
    "qfi_lower_bound",
    "witness",
]
