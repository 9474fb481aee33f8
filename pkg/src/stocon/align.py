"""Optimal alignments over the synchronous product's reachability graph.

The reachability graph is never materialized: Dijkstra (optionally A*
with an admissible per-position heuristic) expands markings on demand
from the initial marking of the product until the final marking is
finalized. Edge costs come from a cost profile: synchronous moves cost
``1 - e^(1 - 1/w)`` of their firing probability ``w`` under the
stochastic profile (0 under the deterministic and lower-bound profiles),
log moves and visible model moves cost 1, and silent model moves cost 0
by default.

``brute_force_alignment`` is the independent oracle: it enumerates every
realization of the stochastic trace and aligns each one against an
explicitly built model reachability graph using Floyd-Warshall closures
and a per-position dynamic program, sharing no code with the search.
"""

from __future__ import annotations

import enum
import heapq
import itertools
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, NoAlignmentError, StoconError, ValidationError
from .logs import StochasticLog, StochasticTrace, enumerate_realizations, realization_count
from .petri import Marking, SystemNet
from .product import GAP, MoveKind, ProductTransition, SyncProductNet, build_sync_product
from .tracenet import build_stochastic_trace_net

DEFAULT_NODE_CAP = 1_000_000


def eq1_cost(w: float) -> float:
    """Cost of a synchronous move with firing probability ``w``.

    Strictly decreasing on (0,1], exactly 0 at w=1, and approaching 1 as
    w approaches 0: certain events align for free, unlikely ones cost
    almost as much as not aligning at all.
    """
    if not (0.0 < w <= 1.0):
        raise ValueError(f"firing probability must lie in (0,1], got {w}")
    return 1.0 - math.exp(1.0 - 1.0 / w)


class ProfileKind(enum.Enum):
    STOCHASTIC = "stochastic"
    DETERMINISTIC = "deterministic"
    LOWER_BOUND = "lower-bound"


@dataclass(frozen=True)
class CostProfile:
    """Edge-cost assignment for the alignment search.

    ``STOCHASTIC`` prices synchronous moves by their firing probability;
    ``DETERMINISTIC`` is classic alignment (sync is free) and coincides
    with STOCHASTIC on probability-1.0 traces; ``LOWER_BOUND`` also zeroes
    sync costs on uncertain traces, yielding the cheapest-realization
    bound that ignores probabilities.
    """

    kind: ProfileKind
    tau_model_move_cost: float = 0.0
    nonsync_cost: float = 1.0

    def sync_cost(self, weight: float) -> float:
        if self.kind is ProfileKind.STOCHASTIC:
            return eq1_cost(weight)
        return 0.0

    @classmethod
    def stochastic(cls, **kw) -> "CostProfile":
        return cls(ProfileKind.STOCHASTIC, **kw)

    @classmethod
    def deterministic(cls, **kw) -> "CostProfile":
        return cls(ProfileKind.DETERMINISTIC, **kw)

    @classmethod
    def lower_bound(cls, **kw) -> "CostProfile":
        return cls(ProfileKind.LOWER_BOUND, **kw)


def move_cost(t: ProductTransition, profile: CostProfile) -> float:
    if t.kind is MoveKind.SYNC:
        if t.weight is None:
            raise ValidationError(f"sync move {t.id} lacks a firing probability")
        return profile.sync_cost(t.weight)
    if t.kind is MoveKind.LOG:
        return profile.nonsync_cost
    if t.model_label is None:
        return profile.tau_model_move_cost
    return profile.nonsync_cost


@dataclass(frozen=True)
class AlignmentMove:
    """One step of an alignment; labels are GAP on the side that stands still
    and None for silent model transitions."""

    transition_id: str
    kind: MoveKind
    model_label: str | None
    trace_label: str | None
    weight: float | None
    cost: float


@dataclass(frozen=True)
class Alignment:
    moves: tuple[AlignmentMove, ...]
    total_cost: float
    explored_nodes: int = 0

    @property
    def n_sync(self) -> int:
        return sum(m.kind is MoveKind.SYNC for m in self.moves)

    @property
    def n_log_moves(self) -> int:
        return sum(m.kind is MoveKind.LOG for m in self.moves)

    @property
    def n_model_moves(self) -> int:
        return sum(m.kind is MoveKind.MODEL for m in self.moves)

    def dump(self) -> str:
        """One move per line: kind, model label, trace label, weight, cost."""
        lines = []
        for m in self.moves:
            left = GAP if m.model_label == GAP else ("tau" if m.model_label is None else m.model_label)
            right = GAP if m.trace_label == GAP else m.trace_label
            weight = "" if m.weight is None else format(m.weight, ".10g")
            lines.append(f"{m.kind.value}\t{left}\t{right}\t{weight}\t{format(m.cost, '.10g')}")
        return "\n".join(lines)


# --------------------------------------------------------------------------
# Heuristic

def _position_suffix_costs(product: SyncProductNet, profile: CostProfile) -> list[float]:
    """suffix[k] = admissible lower bound on the cost of crossing trace
    positions k+1..n: each remaining position needs one log or sync move."""
    per_position = []
    for weights in product.sync_weights_by_position:
        best_sync = min((profile.sync_cost(w) for w in weights), default=math.inf)
        per_position.append(min(profile.nonsync_cost, best_sync))
    suffix = [0.0] * (len(per_position) + 1)
    for i in range(len(per_position) - 1, -1, -1):
        suffix[i] = per_position[i] + suffix[i + 1]
    return suffix


def _heuristic_table(product: SyncProductNet, profile: CostProfile) -> list[float]:
    table = product._heuristic_cache.get(profile)
    if table is None:
        table = _position_suffix_costs(product, profile)
        product._heuristic_cache[profile] = table
    return table


def admissible_heuristic(
    marking: Marking, product: SyncProductNet, profile: CostProfile
) -> float:
    """Lower bound on the remaining cost from ``marking`` to the final
    marking; consistent, so A* with it matches Dijkstra exactly."""
    suffix = _heuristic_table(product, profile)
    index = product.trace_place_index
    for place in marking.places():
        k = index.get(place)
        if k is not None:
            return suffix[k]
    return 0.0


# --------------------------------------------------------------------------
# Search

class _Node:
    __slots__ = ("g", "marking", "parent", "via")

    def __init__(self, g, marking, parent, via):
        self.g = g
        self.marking = marking
        self.parent = parent
        self.via = via


def optimal_alignment(
    product: SyncProductNet,
    profile: CostProfile,
    *,
    heuristic: bool = True,
    node_cap: int = DEFAULT_NODE_CAP,
) -> Alignment:
    """Cheapest firing sequence from the initial to the final marking.

    Plain Dijkstra when ``heuristic`` is off. Ties in the priority queue
    break on (cost, fewer moves, transition id, insertion order), which
    makes the reported alignment deterministic across runs; the cost is
    unique regardless. Markings are finalized at first extraction, which
    is exact because all profile costs are nonnegative.
    """
    net = product.net
    target = net.final_marking
    cost_of = {t.id: move_cost(product.moves[t.id], profile) for t in net.transitions}
    if heuristic:
        suffix = _heuristic_table(product, profile)
        index = product.trace_place_index

        def h(marking: Marking) -> float:
            for place in marking.places():
                k = index.get(place)
                if k is not None:
                    return suffix[k]
            return 0.0

    else:
        def h(marking: Marking) -> float:
            return 0.0

    start = _Node(0.0, net.initial_marking, None, None)
    heap: list = [(h(start.marking), 0, "", 0, start)]
    best_g: dict[Marking, float] = {start.marking: 0.0}
    closed: set[Marking] = set()
    tick = itertools.count(1)
    explored = 0

    while heap:
        _, depth, _, _, node = heapq.heappop(heap)
        marking = node.marking
        if marking in closed:
            continue
        closed.add(marking)
        explored += 1
        if explored > node_cap:
            raise CapacityError(
                f"alignment search exceeded the node cap of {node_cap} "
                f"(frontier size {len(heap)})"
            )
        if marking == target:
            return _reconstruct(node, product, cost_of, explored)
        for tid in net.enabled_ids(marking):
            succ = net.fire_id(marking, tid)
            if succ in closed:
                continue
            g2 = node.g + cost_of[tid]
            known = best_g.get(succ)
            if known is not None and g2 > known:
                continue
            if known is None or g2 < known:
                best_g[succ] = g2
            heapq.heappush(
                heap, (g2 + h(succ), depth + 1, tid, next(tick), _Node(g2, succ, node, tid))
            )
    raise NoAlignmentError("final marking is unreachable from the initial marking")


def _reconstruct(
    node: _Node, product: SyncProductNet, cost_of: dict[str, float], explored: int
) -> Alignment:
    moves: list[AlignmentMove] = []
    total = node.g
    while node.parent is not None:
        annotation = product.moves[node.via]
        left, right = annotation.label_pair
        moves.append(
            AlignmentMove(
                node.via, annotation.kind, left, right, annotation.weight, cost_of[node.via]
            )
        )
        node = node.parent
    moves.reverse()
    return Alignment(tuple(moves), total, explored)


def align_trace(
    model: SystemNet,
    trace: StochasticTrace,
    profile: CostProfile,
    *,
    heuristic: bool = True,
    node_cap: int = DEFAULT_NODE_CAP,
) -> Alignment:
    """Convenience wrapper: trace net + synchronous product + search."""
    product = build_sync_product(model, build_stochastic_trace_net(trace))
    return optimal_alignment(product, profile, heuristic=heuristic, node_cap=node_cap)


# --------------------------------------------------------------------------
# Batch alignment

@dataclass
class TraceAlignment:
    case_id: str
    alignment: Alignment | None
    error: str | None
    wall_time_ms: float


@dataclass
class LogAlignmentResult:
    results: list[TraceAlignment]

    @property
    def failures(self) -> list[tuple[str, str]]:
        return [(r.case_id, r.error) for r in self.results if r.error is not None]

    @property
    def costs(self) -> list[float]:
        return [r.alignment.total_cost for r in self.results if r.alignment is not None]

    @property
    def mean_cost(self) -> float:
        costs = self.costs
        return sum(costs) / len(costs) if costs else math.nan


def resolve_threads(threads: int | None = None) -> int:
    """Effective parallelism degree; STOCON_THREADS overrides, 0 = auto."""
    if threads is None:
        raw = os.environ.get("STOCON_THREADS", "1")
        try:
            threads = int(raw)
        except ValueError:
            raise ValueError(f"STOCON_THREADS must be an integer, got {raw!r}")
    if threads == 0:
        threads = os.cpu_count() or 1
    if threads < 0:
        raise ValueError(f"thread count must be >= 0, got {threads}")
    return threads


def align_log(
    model: SystemNet,
    log: StochasticLog,
    profile: CostProfile,
    *,
    heuristic: bool = True,
    node_cap: int = DEFAULT_NODE_CAP,
    threads: int | None = None,
) -> LogAlignmentResult:
    """Align every trace; per-trace errors are collected, never raised.

    Results are ordered by the input trace order whatever the parallelism
    degree, so output files are byte-identical across thread counts.
    """
    threads = resolve_threads(threads)

    def worker(trace: StochasticTrace) -> TraceAlignment:
        started = time.perf_counter()
        try:
            alignment = align_trace(
                model, trace, profile, heuristic=heuristic, node_cap=node_cap
            )
            error = None
        except StoconError as e:
            alignment, error = None, f"{type(e).__name__}: {e}"
        elapsed = (time.perf_counter() - started) * 1000.0
        return TraceAlignment(trace.case_id, alignment, error, elapsed)

    if threads <= 1 or len(log.traces) <= 1:
        results = [worker(t) for t in log.traces]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(worker, log.traces))
    return LogAlignmentResult(results)


# --------------------------------------------------------------------------
# Brute-force oracle

_MODEL_STATE_CAP = 50_000


def _model_reachability(model: SystemNet, cap: int = _MODEL_STATE_CAP):
    """Explicit reachability graph of the model net (BFS over markings)."""
    markings: list[Marking] = [model.initial_marking]
    index: dict[Marking, int] = {model.initial_marking: 0}
    edges: list[tuple[int, int, str, str | None]] = []
    frontier = [model.initial_marking]
    while frontier:
        nxt = []
        for m in frontier:
            src = index[m]
            for tid in model.enabled_ids(m):
                succ = model.fire_id(m, tid)
                dst = index.get(succ)
                if dst is None:
                    if len(markings) >= cap:
                        raise CapacityError(
                            f"model reachability exceeds {cap} markings; oracle unusable"
                        )
                    dst = len(markings)
                    index[succ] = dst
                    markings.append(succ)
                    nxt.append(succ)
                edges.append((src, dst, tid, model.transition_by_id[tid].label))
        frontier = nxt
    return markings, index, edges


def _model_move_closure(n: int, edges, profile: CostProfile):
    """All-pairs cheapest model-move paths (Floyd-Warshall) with first-step
    pointers for path reconstruction."""
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0.0)
    first: list[list[tuple[str, int] | None]] = [[None] * n for _ in range(n)]
    for src, dst, tid, label in edges:
        cost = profile.tau_model_move_cost if label is None else profile.nonsync_cost
        if cost < dist[src, dst]:
            dist[src, dst] = cost
            first[src][dst] = (tid, dst)
    for k in range(n):
        for i in range(n):
            dik = dist[i, k]
            if not np.isfinite(dik):
                continue
            row = dist[i]
            krow = dist[k]
            for j in range(n):
                via = dik + krow[j]
                if via < row[j]:
                    row[j] = via
                    first[i][j] = first[i][k]
    return dist, first


def _closure_path(first, i: int, j: int) -> list[str]:
    path = []
    guard = 0
    while i != j:
        step = first[i][j]
        if step is None:
            raise StoconError("internal: broken closure path")
        tid, i = step
        path.append(tid)
        guard += 1
        if guard > len(first) * len(first):
            raise StoconError("internal: closure path does not terminate")
    return path


def brute_force_alignment(
    model: SystemNet,
    trace: StochasticTrace,
    profile: CostProfile,
    cap: int = 256,
) -> Alignment:
    """Oracle: minimum alignment cost over every realization of the trace.

    Each realization is aligned by a per-position dynamic program over the
    explicit model reachability graph: between consuming two trace events
    the model may take any cheapest model-move path (precomputed by
    Floyd-Warshall), and each event is consumed either by a log move or by
    a synchronous move on a model transition carrying the realized label,
    priced at that realization's probability. Must agree with
    ``optimal_alignment`` to 1e-9 on every instance.
    """
    n_real = realization_count(trace)
    if n_real > cap:
        raise CapacityError(
            f"trace {trace.case_id} has {n_real} realizations, above the cap of {cap}"
        )
    markings, index, edges = _model_reachability(model)
    final_idx = index.get(model.final_marking)
    if final_idx is None:
        raise NoAlignmentError("final marking is unreachable from the initial marking")
    n = len(markings)
    closure, first = _model_move_closure(n, edges, profile)
    label_of = {t.id: t.label for t in model.transitions}

    edges_by_label: dict[str, list[tuple[int, int, str]]] = {}
    for src, dst, tid, label in edges:
        if label is not None:
            edges_by_label.setdefault(label, []).append((src, dst, tid))

    best: tuple[float, list[AlignmentMove]] | None = None
    for labels, probs in _realization_pairs(trace, cap):
        cost, moves = _align_realization(
            labels, probs, profile, closure, first, edges_by_label, final_idx, n, label_of
        )
        if best is None or cost < best[0]:
            best = (cost, moves)
    assert best is not None  # n_real >= 1 always (empty product has one element)
    return Alignment(tuple(best[1]), best[0])


def _realization_pairs(trace: StochasticTrace, cap: int):
    for labels, _ in enumerate_realizations(trace, cap):
        probs = tuple(
            event.distribution[label] for event, label in zip(trace.events, labels)
        )
        yield labels, probs


def _align_realization(
    labels, probs, profile, closure, first, edges_by_label, final_idx, n, label_of
):
    inf = np.inf
    dist = np.full(n, inf)
    dist[0] = 0.0

    closure_src: list[np.ndarray] = []
    choices: list[list[tuple | None]] = []

    def close(d: np.ndarray) -> np.ndarray:
        stacked = d[:, None] + closure
        closure_src.append(stacked.argmin(axis=0))
        return stacked.min(axis=0)

    d = close(dist)
    for label, prob in zip(labels, probs):
        sync_cost = profile.sync_cost(prob)
        new = d + profile.nonsync_cost  # log move leaves the model in place
        choice: list[tuple | None] = [("log", j) if np.isfinite(new[j]) else None for j in range(n)]
        for src, dst, tid in edges_by_label.get(label, ()):
            via = d[src] + sync_cost
            if via < new[dst]:
                new[dst] = via
                choice[dst] = ("sync", src, tid)
        choices.append(choice)
        d = close(new)

    total = d[final_idx]
    if not np.isfinite(total):
        raise NoAlignmentError("final marking is unreachable from the initial marking")

    # Walk the decisions backwards, emitting moves in reverse.
    moves_rev: list[AlignmentMove] = []

    def model_move(tid: str) -> AlignmentMove:
        label = label_of[tid]
        cost = profile.tau_model_move_cost if label is None else profile.nonsync_cost
        return AlignmentMove(f"bf:({tid},>>)", MoveKind.MODEL, label, GAP, None, cost)

    j = final_idx
    for pos in range(len(labels) - 1, -1, -1):
        i = int(closure_src[pos + 1][j])
        for tid in reversed(_closure_path(first, i, j)):
            moves_rev.append(model_move(tid))
        step = choices[pos][i]
        assert step is not None
        if step[0] == "log":
            moves_rev.append(
                AlignmentMove(
                    f"bf:(>>,{pos + 1})", MoveKind.LOG, GAP, labels[pos], None,
                    profile.nonsync_cost,
                )
            )
            j = step[1]
        else:
            _, src, tid = step
            moves_rev.append(
                AlignmentMove(
                    f"bf:({tid},{pos + 1})", MoveKind.SYNC, labels[pos], labels[pos],
                    probs[pos], profile.sync_cost(probs[pos]),
                )
            )
            j = src
    i = int(closure_src[0][j])
    for tid in reversed(_closure_path(first, i, j)):
        moves_rev.append(model_move(tid))

    moves_rev.reverse()
    return float(total), moves_rev
