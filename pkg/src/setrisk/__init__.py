"""Exact set-valued dynamic risk measures on finite scenario trees.

Rational-arithmetic polyhedral calculus plus machine checks of the
multiportfolio time-consistency equivalences: acceptance-set decomposition,
penalty cocycle, and stability of dual variables under pasting.
"""

from .consistency import (
    ConsistencyReport,
    Witness,
    check_cocycle,
    check_mptc_acceptance,
    check_recursion,
    check_stability,
    check_Wmax_decomposition,
    compose,
    facet_dual_pairs,
    find_inconsistency_witness,
    random_positive_measures,
)
from .documents import DocumentError, Workspace
from .duality import (
    ConditionalPenaltyValue,
    DualPair,
    DualVariableError,
    H_operator,
    MembershipResult,
    PenaltyValue,
    conditional_penalty_value,
    evaluate_dual_representation,
    halfspace_G,
    halfspace_Gamma,
    in_W,
    pair_from_functional,
    penalty_value,
    project_pair,
    weight_process,
)
from .measures import (
    AvarMeasure,
    AvarParams,
    ComposedMeasure,
    ConvexSuperhedgingMeasure,
    DynamicRiskMeasure,
    EntropicMeasure,
    EntropicParams,
    EntropicValue,
    ModelInconsistencyError,
    NotPolyhedralError,
    SuperhedgingMeasure,
    avar_value,
    composed_avar_dual_support,
    composed_avar_measure,
    composed_avar_value,
    convex_shp_value,
    entropic_penalty,
    entropic_value,
    relative_entropy,
    shp_acceptance,
    shp_value,
)
from .polyhedra import Polyhedron, positive_dual_cone
from .rationals import NEG_INF, POS_INF, ExtRat, format_rational, parse_rational
from .tree import (
    AdaptedVector,
    DensityProcess,
    EligibleSubspace,
    ScenarioTree,
    VectorMeasure,
    conditional_expectation,
    expectation,
    modify_after,
    paste,
    restrict_equals_P,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
