"""Workbench for no-input quantum network strategies and their nonlocality.

Build or load a network, attach a token-counting or color-matching quantum
strategy, simulate it exactly, and certify that its output distribution
admits no classical model by reducing the question, through the rigidity of
such strategies, to a verifiable linear-program infeasibility check.
"""

from .catalog import (
    RotationParams,
    build,
    make_1_2_cm,
    make_5_0_tc,
    make_complete_cm,
    make_graph_coloring_cm,
    make_ring_tc,
    reflection_block,
    ring_blocks,
    ring_cm_twin,
    ring_twin_label_map,
)
from .classical import (
    ClassicalStrategy,
    HiddenPattern,
    ResponseMap,
    SourcePmf,
    StrategyError,
    classical_joint,
    enumerate_color_patterns,
    enumerate_token_patterns,
)
from .lp import (
    FeasibilityProblem,
    FeasibilityResult,
    IndeterminateError,
    LpError,
    Row,
    solve_feasibility,
    verify_certificate,
)
from .network import (
    Network,
    NetworkError,
    PfisWeights,
    build_complete,
    build_edge_network,
    build_ring,
    check_ecs,
    check_ndcs,
    find_pfis,
)
from .outcomes import (
    Ambiguous,
    ColorMatch,
    JointDistribution,
    RevealedTuple,
    TokenCount,
    color_marginal,
    is_ambiguous_output,
    token_marginal,
)
from .quantum import (
    BasisVector,
    DimensionError,
    InvalidStrategyError,
    MeasurementBasis,
    SourceState,
    Strategy,
    coarse_grain,
    decohere,
    event_distribution,
    joint_distribution,
    validate_strategy,
)
from .rigidity import (
    CertificationReport,
    Event,
    QSystemSpec,
    ambiguous_event,
    build_q_system,
    certify_nonlocality,
    classify_strategy,
    finner_check,
    to_feasibility_problem,
)

__version__ = "0.1.0"
