"""One-round join planning and simulation on heterogeneous machine fleets."""

from .bounds import (
    PLAN_KINDS,
    UNEQUAL_PLAN_KINDS,
    BoundReport,
    InstanceSchema,
    compute_bound_report,
    general_load_feasible,
    lower_bound_general,
    lower_bound_linear,
    lower_bound_unequal,
    per_machine_edge_packing,
    upper_bound_linear,
)
from .costs import (
    CostFunction,
    LinearCost,
    Machine,
    MachineFleet,
    PolynomialCost,
    TableCost,
    evaluate_cost,
    lp_norm,
    pseudo_inverse,
)
from .datagen import (
    DatabaseInstance,
    DenseSpec,
    MatchingSpec,
    expected_output_size,
    gen_dense,
    gen_matching,
)
from .engine import (
    HashFamily,
    LoadReport,
    RoundResult,
    brute_force_join,
    local_join,
    make_hash_family,
    plan_rectangles,
    route,
    run_one_round,
)
from .packing import Placement, pack, round_sides, round_up_pow2
from .partition import (
    Hyperrectangle,
    TriangleProfile,
    UnsupportedQueryError,
    binary_join_dims,
    cartesian_dims,
    equal_card_general_dims,
    equal_card_linear_dims,
    star_dims,
    triangle_dims,
    triangle_profile,
)
from .query import (
    Atom,
    EdgePacking,
    Query,
    VertexCover,
    maximum_fractional_edge_packing,
    minimum_fractional_vertex_cover,
    parse_query,
)

__version__ = "0.1.0"
