"""Generalized Bulgarian solitaire: sigma-rules, dynamics, stable and recurrent
configurations, the marked solitaire, and limit shapes."""

from .dynamics import (
    CycleInfo,
    Trajectory,
    advance,
    enumerate_recurrent,
    find_cycle,
    iterate,
    pile_lifetime,
    step,
    step_layers,
    trajectory,
)
from .errors import SolitaireError
from .marked import MarkedConfig, deviation, mark, marked_step, surplus_trace
from .partitions import (
    Partition,
    boundary,
    dominates,
    downscale_boundary,
    enumerate_partitions,
    is_convex,
    parse_partition,
    random_partition,
    validate_partition,
)
from .rules import (
    SigmaRule,
    is_well_behaved,
    make_levels_rule,
    make_q_rule,
    make_table_rule,
    ordinary_rule,
    parse_rule,
    pick_level,
    picked_levels,
    rule_from_convex,
)
from .shapes import (
    EXPONENTIAL,
    TRIANGLE,
    LimitShape,
    empirical_distance,
    g_of_z,
    interpolating_shape,
    regime_shape,
    shape_to_stable,
    solve_z,
)
from .stability import find_stable, n_star, stable_from_top

__version__ = "0.1.0"
