"""Quantum combs for temporally correlated noise.

The package represents multi-time noise processes as combs, exposes
their channel forms, and implements three ways of taming them: Pauli
twirling, quasi-probability cancellation and virtual purification.
"""

from .channels import (
    Channel,
    apply,
    compose,
    depolarizing_channel,
    from_kraus,
    identity_channel,
    pauli_channel,
    random_channel,
    random_density_matrix,
    random_unitary,
    tensor_channels,
    to_chi,
    to_ptm,
    unitary_channel,
)
from .combs import (
    Comb,
    CombValidationReport,
    EnvModel,
    apply_comb,
    choi_channel,
    comb_chi,
    comb_choi_state,
    comb_from_env_model,
    markovian_comb,
    output_channel,
    random_env_model,
    simulate_env_model,
    slot_channel,
    validate_comb,
)
from .pec import (
    BasisOpSet,
    QuasiProbDecomposition,
    SingularNoiseError,
    decompose_inverse,
    default_basis,
    pec_correct_exact,
    pec_sample,
    verify_basis_completeness,
)
from .twirl import (
    PauliDiagTable,
    comb_from_pauli_table,
    env_model_from_pauli_table,
    extract_pauli_diag,
    marginals,
    mutual_information,
    product_of_marginals,
    sampled_twirl,
    tv_distance,
    twirl_comb,
)
from .vcp import VcpResult, reference_purified, vcp_channel, vcp_comb

__version__ = "0.1.0"

__all__ = [
    "Channel",
    "Comb",
    "CombValidationReport",
    "EnvModel",
    "BasisOpSet",
    "QuasiProbDecomposition",
    "SingularNoiseError",
    "PauliDiagTable",
    "VcpResult",
    "apply",
    "apply_comb",
    "choi_channel",
    "comb_chi",
    "comb_choi_state",
    "comb_from_env_model",
    "comb_from_pauli_table",
    "compose",
    "decompose_inverse",
    "default_basis",
    "depolarizing_channel",
    "env_model_from_pauli_table",
    "extract_pauli_diag",
    "from_kraus",
    "identity_channel",
    "marginals",
    "markovian_comb",
    "mutual_information",
    "output_channel",
    "pauli_channel",
    "pec_correct_exact",
    "pec_sample",
    "product_of_marginals",
    "random_channel",
    "random_density_matrix",
    "random_env_model",
    "random_unitary",
    "reference_purified",
    "sampled_twirl",
    "simulate_env_model",
    "slot_channel",
    "tensor_channels",
    "to_chi",
    "to_ptm",
    "tv_distance",
    "twirl_comb",
    "unitary_channel",
    "validate_comb",
    "vcp_channel",
    "vcp_comb",
]
