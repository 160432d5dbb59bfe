"""Common LOCC filters for sets of bipartite entangled pure states.

Decides when one local filter takes a whole set of states to
k-subspace-equivalent targets, builds that filter, and simulates it.
"""

from .errors import *  # noqa: F401,F403
from .numerics import (
    HermitianEig,
    hermitian_eig,
    psd_pinv_sqrt,
    psd_sqrt,
    subspace_intersection,
    svd,
)
from .states import (
    BipartitePureState,
    DensityOperator,
    SchmidtForm,
    from_schmidt,
    local_unitary_equivalent,
    marginal,
    maximally_entangled,
    product_state,
    schmidt,
)
from .similarity import (
    RelativeMarginal,
    SimilarityCertificate,
    check_similar_about_ik,
    k_subspace_equivalent,
    largest_common_block,
    relative_marginal,
)
from .transform import (
    LocalFilter,
    LocalProtocol,
    NecessityReport,
    ProtocolOutcome,
    apply_filter,
    apply_protocol,
    build_common_filter,
    decide_theorem1,
    decide_theorem2,
    extract_one_side_necessity,
    ricochet,
    transfer_bob_to_alice,
    two_side_reduction,
    verify_necessity,
)
from .applications import (
    ConcentrationResult,
    MixedStateEnsemble,
    SuperdenseTrial,
    concentrate_set,
    purify_mixed,
    superdense_run,
)

__version__ = "0.1.0"
