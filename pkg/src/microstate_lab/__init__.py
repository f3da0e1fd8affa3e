"""Finite-N Monte Carlo laboratory for matricial and orbital microstates."""

__version__ = "0.1.0"

from .errors import FeasibilityError, InvalidInputError, SamplingBudgetError
from .linalg import (
    HermitianMatrix,
    HermitianTuple,
    UnitaryMatrix,
    UnitaryTuple,
    conjugate_tuple,
    d2_distance,
    matrix_from_json,
    matrix_to_json,
    op_norm,
    p_norm,
    trace_n,
    truncate_spectrum,
)
from .laws import (
    Letter,
    NCLaw,
    brownian_presence_law,
    empirical_law,
    enumerate_words,
    format_word,
    free_product_law,
    free_unitary_brownian_moment,
    law_deviation,
    law_from_json,
    law_from_spec,
    law_to_json,
    parse_word,
    projection_law,
    quantile_from_spec,
    semicircular_law,
    standard_law,
    two_point_law,
)
from .randmat import (
    BrownianConfig,
    RandomSeed,
    brownian_unitary,
    gue_hermitian,
    haar_special_unitary,
    haar_unitary,
    uniform_opnorm_ball,
)
from .microstates import (
    FreenessReport,
    MembershipReport,
    MicrostateParams,
    freeness_report,
    microstate_membership,
    orbital_membership,
    presence_membership,
)
from .estimators import (
    BaseTupleStrategy,
    BestBaseResult,
    FubiniReport,
    TruncationReport,
    VolumeEstimate,
    best_base_search,
    diagonal_base,
    fubini_check,
    lebesgue_volume_estimate,
    orbital_hit_probability,
    sample_uniform_microstates,
    truncation_check,
)
from .metric import (
    PackingProfile,
    PointCloud,
    exact_cover_pack,
    greedy_covering,
    greedy_packing,
    packing_profile,
)
