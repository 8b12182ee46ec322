"""Randomized k-cycle detection in bounded-degeneracy graphs."""

from .coins import CoinLog, HashCoins, ReplayCoins, ReplayError
from .detector import (
    GuidedRunError,
    OracleGuardError,
    SearchConfig,
    SearchResult,
    brute_force_k_cycle,
    color_coding_baseline,
    find_hr_cyclic_cycle,
    find_k_cycle,
    guided_coins_log,
    guided_coins_run,
    search_k_cycle,
)
from .gen import GenSpec, gen_degenerate, gen_grid, generate, plant_cycle
from .graph import (
    CyclePath,
    DegeneracyOrdering,
    EdgeLabeling,
    Graph,
    GraphError,
    VertexColoring,
    build_graph,
    degeneracy,
    degeneracy_ordering,
    find_cyclic_triangle,
    find_triangle,
    parse_edge_list,
    random_degenerate_labeling,
    read_edge_list,
    underlying_undirected,
    verify_cycle,
    verify_hr_cyclic,
    write_edge_list,
)
from .pipeline import (
    MinorSequence,
    RetraceError,
    StageRecord,
    StarContraction,
    buffer_target_color,
    cleaning_step,
    color_refinement_step,
    contraction_step,
    initial_coloring,
    produce_minor_sequence,
    retrace_cycle,
    winner_loser_cleanup,
    winner_loser_step,
)
from .schedule import Schedule, ScheduleElement, SegmentView, build_schedule, segments, validate_schedule

__version__ = "0.1.0"
