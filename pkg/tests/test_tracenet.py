import math
import random

import pytest

from stocon import (
    Marking,
    StochasticTrace,
    build_stochastic_trace_net,
    deterministic_trace,
    enabled_transitions,
    fire,
    validate_net,
)
from stocon.tracenet import trace_chain

from _generators import ALPHABET, random_stochastic_trace, table2_trace


def test_table2_trace_net_structure():
    net = build_stochastic_trace_net(table2_trace())
    assert len(net.places) == 5
    assert len(net.transitions) == 8
    by_id = net.transition_by_id
    assert (by_id["t_1_1"].label, by_id["t_1_1"].weight) == ("A", 1.0)
    assert (by_id["t_2_1"].label, by_id["t_2_1"].weight) == ("B", 0.2)
    assert (by_id["t_2_2"].label, by_id["t_2_2"].weight) == ("C", 0.8)
    assert [by_id[f"t_3_{j}"].label for j in range(1, 5)] == ["D", "E", "F", "G"]
    assert [by_id[f"t_3_{j}"].weight for j in range(1, 5)] == [0.6, 0.2, 0.1, 0.1]
    assert (by_id["t_4_1"].label, by_id["t_4_1"].weight) == ("F", 1.0)
    assert net.initial_marking == Marking({"p_0": 1})
    assert net.final_marking == Marking({"p_4": 1})
    assert validate_net(net) == []


def test_empty_trace_net():
    net = build_stochastic_trace_net(StochasticTrace("empty", ()))
    assert len(net.places) == 1
    assert len(net.transitions) == 0
    assert net.initial_marking == net.final_marking == Marking({"p_0": 1})


def test_deterministic_trace_is_classic_trace_net():
    net = build_stochastic_trace_net(deterministic_trace("d", ["A", "B"]))
    assert len(net.places) == 3
    assert len(net.transitions) == 2
    assert all(t.weight == 1.0 for t in net.transitions)


def test_structural_invariants_random_traces():
    rng = random.Random(13)
    for _ in range(30):
        trace = random_stochastic_trace(rng, ALPHABET)
        net = build_stochastic_trace_net(trace)
        assert len(net.places) == len(trace.events) + 1
        assert len(net.transitions) == sum(e.size for e in trace.events)
        for t in net.transitions:
            assert len(net.inputs(t.id)) == 1
            assert len(net.outputs(t.id)) == 1
        # per-position weights sum to 1
        places, groups = trace_chain(net)
        assert places == [f"p_{i}" for i in range(len(trace.events) + 1)]
        for group in groups:
            total = sum(net.transition_by_id[tid].weight for tid in group)
            assert math.isclose(total, 1.0, abs_tol=1e-9)


def test_firing_sequences_pick_one_transition_per_position():
    rng = random.Random(17)
    for _ in range(15):
        trace = random_stochastic_trace(rng, ALPHABET)
        net = build_stochastic_trace_net(trace)
        marking = net.initial_marking
        fired = 0
        while marking != net.final_marking:
            enabled = sorted(enabled_transitions(net, marking))
            # every enabled transition at position i starts with t_{i+1}_
            assert all(t.split("_")[1] == str(fired + 1) for t in enabled)
            marking = fire(net, marking, rng.choice(enabled))
            fired += 1
        assert fired == len(trace.events)
        assert enabled_transitions(net, marking) == set()


def test_trace_chain_rejects_non_trace_nets():
    from _generators import ab_model

    with pytest.raises(ValueError):
        trace_chain(ab_model())  # model transitions carry no weights
