"""Synchronous product of a process model and a stochastic trace net.

Every model transition becomes a model move (trace side stays put), every
trace-net transition a log move (model side stays put), and every
label-matching pair a synchronous move that advances both sides at once.
Synchronous moves inherit the firing probability of their trace-side
transition; that weight is what the stochastic cost profile turns into an
edge cost. Silent (tau) model transitions can never label-match a trace
activity, so they participate as model moves only.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

from .petri import Marking, SystemNet, Transition, net_to_document
from .tracenet import trace_chain

GAP = ">>"  # printed marker for the side that does not move

MODEL_NS = "m:"
TRACE_NS = "l:"


class MoveKind(enum.Enum):
    SYNC = "sync"
    LOG = "log"
    MODEL = "model"


@dataclass(frozen=True)
class ProductTransition:
    """Annotation of one product transition with its move semantics."""

    id: str
    kind: MoveKind
    model_transition: str | None  # id in the model net, None for log moves
    trace_transition: str | None  # id in the trace net, None for model moves
    model_label: str | None = None  # None is tau; meaningless for log moves
    trace_label: str | None = None  # meaningless for model moves
    weight: float | None = None  # trace-side firing probability, sync only

    @property
    def label_pair(self) -> tuple[str | None, str | None]:
        left = GAP if self.model_transition is None else self.model_label
        right = GAP if self.trace_transition is None else self.trace_label
        return (left, right)


class SyncProductNet:
    """A SystemNet over the disjoint place union plus move annotations.

    ``trace_places`` lists the (namespaced) trace-chain places in order and
    ``sync_weights_by_position`` the available synchronous weights per
    trace position; the alignment heuristic reads both.
    """

    def __init__(
        self,
        net: SystemNet,
        moves: dict[str, ProductTransition],
        trace_places: tuple[str, ...],
        sync_weights_by_position: tuple[tuple[float, ...], ...],
    ):
        self.net = net
        self.moves = moves
        self.trace_places = trace_places
        self.trace_place_index = {p: i for i, p in enumerate(trace_places)}
        self.sync_weights_by_position = sync_weights_by_position
        self._heuristic_cache: dict = {}

    @property
    def initial_marking(self) -> Marking:
        return self.net.initial_marking

    @property
    def final_marking(self) -> Marking:
        return self.net.final_marking

    def __repr__(self) -> str:
        kinds = [m.kind for m in self.moves.values()]
        return (
            f"SyncProductNet(sync={sum(k is MoveKind.SYNC for k in kinds)}, "
            f"log={sum(k is MoveKind.LOG for k in kinds)}, "
            f"model={sum(k is MoveKind.MODEL for k in kinds)})"
        )


def sync_transition_id(model_tid: str, trace_tid: str) -> str:
    return f"s:({model_tid},{trace_tid})"


def build_sync_product(model: SystemNet, tracenet: SystemNet) -> SyncProductNet:
    """Construct the synchronous product; see the module docstring.

    ``tracenet`` must satisfy the trace-net shape (sequential chain of
    weighted labeled transitions); the model may be any system net.
    """
    chain_places, chain_groups = trace_chain(tracenet)
    position_of_trace_tid = {
        tid: pos for pos, group in enumerate(chain_groups, start=1) for tid in group
    }

    places = [MODEL_NS + p for p in model.places] + [TRACE_NS + p for p in tracenet.places]
    if len(set(places)) != len(places):
        raise ValueError("place-id collision after namespacing")

    transitions: list[Transition] = []
    arcs: list[tuple[str, str]] = []
    moves: dict[str, ProductTransition] = {}

    def add(tid, label, weight, move, model_side=None, trace_side=None):
        transitions.append(Transition(tid, label, weight))
        moves[tid] = move
        if model_side is not None:
            for p in model.inputs(model_side):
                arcs.append((MODEL_NS + p, tid))
            for p in model.outputs(model_side):
                arcs.append((tid, MODEL_NS + p))
        if trace_side is not None:
            for p in tracenet.inputs(trace_side):
                arcs.append((TRACE_NS + p, tid))
            for p in tracenet.outputs(trace_side):
                arcs.append((tid, TRACE_NS + p))

    for t in model.transitions:
        tid = MODEL_NS + t.id
        add(
            tid,
            t.label,
            None,
            ProductTransition(tid, MoveKind.MODEL, t.id, None, model_label=t.label),
            model_side=t.id,
        )
    for t in tracenet.transitions:
        tid = TRACE_NS + t.id
        add(
            tid,
            t.label,
            None,
            ProductTransition(tid, MoveKind.LOG, None, t.id, trace_label=t.label),
            trace_side=t.id,
        )
    for mt in model.transitions:
        if mt.label is None:
            continue  # tau never label-matches a recorded activity
        for tt in tracenet.transitions:
            if mt.label != tt.label:
                continue
            tid = sync_transition_id(mt.id, tt.id)
            add(
                tid,
                mt.label,
                tt.weight,
                ProductTransition(
                    tid,
                    MoveKind.SYNC,
                    mt.id,
                    tt.id,
                    model_label=mt.label,
                    trace_label=tt.label,
                    weight=tt.weight,
                ),
                model_side=mt.id,
                trace_side=tt.id,
            )

    initial = _namespace_marking(model.initial_marking, MODEL_NS) + _namespace_marking(
        tracenet.initial_marking, TRACE_NS
    )
    final = _namespace_marking(model.final_marking, MODEL_NS) + _namespace_marking(
        tracenet.final_marking, TRACE_NS
    )
    net = SystemNet(places, transitions, arcs, initial, final)

    n_positions = len(chain_groups)
    weights: list[list[float]] = [[] for _ in range(n_positions + 1)]
    for move in moves.values():
        if move.kind is MoveKind.SYNC:
            weights[position_of_trace_tid[move.trace_transition]].append(move.weight)
    return SyncProductNet(
        net,
        moves,
        tuple(TRACE_NS + p for p in chain_places),
        tuple(tuple(w) for w in weights[1:]),
    )


def _namespace_marking(marking: Marking, prefix: str) -> Marking:
    return Marking({prefix + p: c for p, c in marking.items()})


def serialize_product(product: SyncProductNet) -> bytes:
    """Net JSON document plus a "moves" side table, for debugging.

    The document still parses as a plain net because parse_net ignores the
    extra key.
    """
    doc = net_to_document(product.net)
    doc["moves"] = [
        {
            "id": move.id,
            "kind": move.kind.value,
            "model_transition": move.model_transition,
            "trace_transition": move.trace_transition,
            "label_pair": list(move.label_pair),
            "weight": move.weight,
        }
        for move in (product.moves[t.id] for t in product.net.transitions)
    ]
    return (json.dumps(doc, indent=2, ensure_ascii=False) + "\n").encode("utf-8")
