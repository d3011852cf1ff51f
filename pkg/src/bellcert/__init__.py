"""Bell-inequality certificates and entanglement witnesses for bipartite states."""

__version__ = "0.1.0"

from .certify import (
    FarkasCertificate,
    MembershipResult,
    cone_membership,
    membership_for_state,
    verify_certificate,
    violation_search,
)
from .lhvcone import build_generators, enumerate_assignments, generator_vector
from .measurements import (
    MeasurementConfig,
    POVM,
    complete_config,
    event_vector,
    expand_in_basis,
    projective_from_bloch,
    reconstruct_state,
    validate_povm,
)
from .qcore import DensityMatrix, hermitian_basis, partial_trace, partial_transpose, tensor_product
from .states import ppt_test, random_density, random_separable, singlet, tiles_upb_state, werner
from .witness import (
    Witness,
    chsh_bell_operator,
    chsh_farkas_vector,
    chsh_witness,
    min_over_products,
    verify_witness,
    witness_from_farkas,
    witness_to_farkas,
    witness_value,
)
