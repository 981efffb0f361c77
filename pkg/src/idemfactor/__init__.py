"""Exact factorization of singular matrices into products of idempotents."""

from .certificate import (
    FactorizationCertificate,
    TwoIdempotentCertificate,
    VerificationReport,
    checked,
    verify_certificate,
)
from .consistency import ConsistencyReport, check_consistency, peel_blocks
from .decomposition import (
    BlockRep,
    Decomposition,
    assemble,
    block_rep,
    complement_projector,
    extend_to_complement,
    local_block_rep,
    orthogonal_complement,
    projector,
)
from .douglas import douglas_solve, kernel_report, range_included
from .errors import *  # noqa: F401,F403
from .factorize import (
    RECIPES,
    auto_factor,
    embed_family,
    factor_corner_pair,
    factor_embed,
    factor_idempotent_block,
    factor_invertible_pair,
    factor_kernel_shift,
    factor_kernel_shift_idempotent,
    factor_range_swallow,
    factor_range_swallow_mirror,
    idempotent_block_family,
    invertible_pair_family,
    kernel_shift_family,
    kernel_shift_idempotent_family,
    lift_factorization,
    peel_candidate,
)
from .fields import F64, GF2, GF3, GF5, QQ, Field, get_field, gf
from .idempotent import (
    AnnihilatorReport,
    IdempotentClass,
    Tag,
    Verdict,
    annihilator_report,
    classify_idempotent,
    ek_module_action,
    ek_product,
    is_idempotent,
)
from .index_search import (
    IndexAtlas,
    build_atlas,
    check_layer_products,
    enumerate_idempotents,
    verify_minimal_structure,
)
from .matrix import (
    Matrix,
    block2x2,
    colspace_basis,
    hstack,
    inverse,
    nullity,
    nullspace_basis,
    pseudoinverse,
    rank,
    rref,
    solve_linear,
    vstack,
)
from .opcheck import (
    StructuredOperator,
    WeightRule,
    kernel_trivial,
    membership_report,
    range_classification,
    truncate,
)

__version__ = "0.1.0"
