"""Build the weighted sequential net that encodes a stochastic trace.

A trace of n events becomes a chain of n+1 places; event i contributes
one transition per candidate activity, all between place i-1 and place i,
labeled with the activity and weighted with its probability. A fully
deterministic trace degenerates to the classic linear trace net with all
weights 1.0.
"""

from __future__ import annotations

from .logs import StochasticTrace
from .petri import Marking, SystemNet, Transition


def place_id(i: int) -> str:
    return f"p_{i}"


def transition_id(i: int, j: int) -> str:
    # position i (1-based), alternative j (1-based); underscores keep the
    # scheme unambiguous once i or j reaches 10
    return f"t_{i}_{j}"


def build_stochastic_trace_net(trace: StochasticTrace) -> SystemNet:
    places = [place_id(i) for i in range(len(trace.events) + 1)]
    transitions: list[Transition] = []
    arcs: list[tuple[str, str]] = []
    for i, event in enumerate(trace.events, start=1):
        for j, (label, prob) in enumerate(event.distribution.items(), start=1):
            tid = transition_id(i, j)
            transitions.append(Transition(tid, label, prob))
            arcs.append((place_id(i - 1), tid))
            arcs.append((tid, place_id(i)))
    return SystemNet(
        places,
        transitions,
        arcs,
        initial_marking=Marking({places[0]: 1}),
        final_marking=Marking({places[-1]: 1}),
    )


def trace_chain(net: SystemNet) -> tuple[list[str], list[list[str]]]:
    """Recover (ordered places, transitions grouped by position) from a
    trace net; raises ValueError when ``net`` is not a valid trace net.

    Used by the synchronous product to anchor positions without trusting
    id naming conventions.
    """
    if net.initial_marking.total() != 1 or net.final_marking.total() != 1:
        raise ValueError("trace net must have single-token initial and final markings")
    start = next(iter(net.initial_marking.places()))
    end = next(iter(net.final_marking.places()))

    successors: dict[str, list[str]] = {p: [] for p in net.places}
    for t in net.transitions:
        ins, outs = net.inputs(t.id), net.outputs(t.id)
        if len(ins) != 1 or len(outs) != 1:
            raise ValueError(f"trace-net transition {t.id} must have one input and one output")
        if t.label is None:
            raise ValueError(f"trace-net transition {t.id} must carry an activity label")
        if t.weight is None:
            raise ValueError(f"trace-net transition {t.id} must carry a firing probability")
        successors[ins[0]].append(t.id)

    order = [start]
    groups: list[list[str]] = []
    current = start
    visited = {start}
    while current != end:
        group = successors[current]
        if not group:
            raise ValueError(f"trace net dead-ends at place {current}")
        nexts = {net.outputs(tid)[0] for tid in group}
        if len(nexts) != 1:
            raise ValueError(f"parallel transitions after {current} disagree on target place")
        current = next(iter(nexts))
        if current in visited:
            raise ValueError("trace net contains a cycle")
        visited.add(current)
        order.append(current)
        groups.append(group)
    if len(order) != len(net.places):
        raise ValueError("trace net has places outside the chain")
    return order, groups
