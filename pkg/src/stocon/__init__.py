"""Alignment-based conformance checking for stochastically known event logs.

A stochastically known log records, for every event, a probability
distribution over the activities it may stand for. This package aligns
such logs against labeled Petri net process models: the trace becomes a
weighted sequential net, the model and trace net combine into a
synchronous product, and a shortest-path search over the product's
reachability graph yields the minimum-cost alignment, where synchronous
moves are priced by how unlikely their chosen activity is. A seeded
perturbation harness generates stochastic benchmark logs from
deterministic ones, and the ``stocon`` CLI wraps alignment, perturbation,
parameter sweeps, oracle checks, and plotting.
"""

from .align import (
    Alignment,
    AlignmentMove,
    CostProfile,
    LogAlignmentResult,
    ProfileKind,
    TraceAlignment,
    admissible_heuristic,
    align_log,
    align_trace,
    brute_force_alignment,
    eq1_cost,
    move_cost,
    optimal_alignment,
)
from .errors import (
    CapacityError,
    NoAlignmentError,
    NotEnabledError,
    ParseError,
    StoconError,
    ValidationError,
)
from .logs import (
    StochasticEvent,
    StochasticLog,
    StochasticTrace,
    deterministic_trace,
    enumerate_realizations,
    import_xes,
    parse_log,
    realization_count,
    serialize_log,
)
from .perturb import (
    PerturbConfig,
    PerturbMode,
    add_parallel_transitions,
    duplicate_events,
    generate_experiment_log,
    generate_experiment_log_detailed,
    relabel_events,
    swap_events,
    trace_rng,
)
from .petri import (
    TAU,
    Marking,
    SystemNet,
    Transition,
    enabled_transitions,
    fire,
    import_pnml,
    parse_net,
    serialize_net,
    validate_net,
)
from .product import (
    GAP,
    MoveKind,
    ProductTransition,
    SyncProductNet,
    build_sync_product,
    serialize_product,
)
from .sweep import SweepSpec, SweepResult, run_sweep
from .tracenet import build_stochastic_trace_net

__version__ = "0.1.0"

__all__ = [
    "Alignment",
    "AlignmentMove",
    "CapacityError",
    "CostProfile",
    "GAP",
    "LogAlignmentResult",
    "Marking",
    "MoveKind",
    "NoAlignmentError",
    "NotEnabledError",
    "ParseError",
    "PerturbConfig",
    "PerturbMode",
    "ProductTransition",
    "ProfileKind",
    "StochasticEvent",
    "StochasticLog",
    "StochasticTrace",
    "StoconError",
    "SweepResult",
    "SweepSpec",
    "SyncProductNet",
    "SystemNet",
    "TAU",
    "TraceAlignment",
    "Transition",
    "ValidationError",
    "add_parallel_transitions",
    "admissible_heuristic",
    "align_log",
    "align_trace",
    "brute_force_alignment",
    "build_stochastic_trace_net",
    "build_sync_product",
    "deterministic_trace",
    "duplicate_events",
    "enabled_transitions",
    "enumerate_realizations",
    "eq1_cost",
    "fire",
    "generate_experiment_log",
    "generate_experiment_log_detailed",
    "import_pnml",
    "import_xes",
    "move_cost",
    "optimal_alignment",
    "parse_log",
    "parse_net",
    "realization_count",
    "relabel_events",
    "run_sweep",
    "serialize_log",
    "serialize_net",
    "serialize_product",
    "swap_events",
    "trace_rng",
    "validate_net",
]
