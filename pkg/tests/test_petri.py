import random

import pytest

from stocon import (
    Marking,
    NotEnabledError,
    ParseError,
    SystemNet,
    Transition,
    enabled_transitions,
    fire,
    import_pnml,
    parse_net,
    serialize_net,
    validate_net,
)
from stocon.petri import net_to_document

from _generators import ab_model, random_model, sequence_model, table2_trace
from stocon import build_stochastic_trace_net


def test_marking_canonical_form():
    assert Marking({"p": 0}) == Marking({})
    assert Marking({"p": 1, "q": 2}) == Marking([("q", 2), ("p", 1)])
    assert hash(Marking({"p": 1})) == hash(Marking({"p": 1, "q": 0}))
    assert Marking({"p": 1})["p"] == 1
    assert Marking({"p": 1})["missing"] == 0


def test_marking_rejects_bad_counts():
    with pytest.raises(ValueError):
        Marking({"p": -1})
    with pytest.raises(ValueError):
        Marking({"p": 1.5})


def test_marking_sum():
    total = Marking({"p": 1}) + Marking({"p": 2, "q": 1})
    assert total == Marking({"p": 3, "q": 1})
    assert total.total() == 4


def test_validate_flags_place_place_arc():
    net = SystemNet(
        ["p1", "p2"], [Transition("t1", "A")], [("p1", "p2")], Marking({"p1": 1}), Marking({"p2": 1})
    )
    report = validate_net(net)
    assert report == ["arc connects two places: p1->p2"]


def test_validate_accepts_well_formed_net():
    net = SystemNet(
        ["p1", "p2"],
        [Transition("t1", "A")],
        [("p1", "t1"), ("t1", "p2")],
        Marking({"p1": 1}),
        Marking({"p2": 1}),
    )
    assert validate_net(net) == []


def test_validate_flags_unknown_final_place():
    net = SystemNet(
        ["p1", "p2"],
        [Transition("t1", "A")],
        [("p1", "t1"), ("t1", "p2")],
        Marking({"p1": 1}),
        Marking({"q9": 1}),
    )
    assert any("q9" in line for line in validate_net(net))


def test_enabled_sequence_net():
    net = ab_model()
    assert enabled_transitions(net, net.initial_marking) == {"mt1"}
    assert enabled_transitions(net, Marking({})) == set()


def test_enabled_unknown_place_is_error():
    net = ab_model()
    with pytest.raises(ValueError):
        enabled_transitions(net, Marking({"nope": 1}))


def test_enabled_table2_trace_net_at_p1():
    net = build_stochastic_trace_net(table2_trace())
    assert enabled_transitions(net, Marking({"p_1": 1})) == {"t_2_1", "t_2_2"}


def test_fire_sequence_and_trace_net():
    net = ab_model()
    after = fire(net, net.initial_marking, "mt1")
    assert after == Marking({"mp1": 1})

    tnet = build_stochastic_trace_net(table2_trace())
    assert fire(tnet, Marking({"p_1": 1}), "t_2_2") == Marking({"p_2": 1})


def test_fire_disabled_names_transition():
    net = ab_model()
    with pytest.raises(NotEnabledError, match="mt2 not enabled"):
        fire(net, net.initial_marking, "mt2")
    with pytest.raises(ValueError):
        fire(net, net.initial_marking, "ghost")


def test_enabled_fire_coherence_random_nets():
    rng = random.Random(7)
    for _ in range(25):
        net = random_model(rng)
        marking = net.initial_marking
        for _ in range(6):
            enabled = enabled_transitions(net, marking)
            for t in net.transitions:
                if t.id in enabled:
                    fire(net, marking, t.id)
                else:
                    with pytest.raises(NotEnabledError):
                        fire(net, marking, t.id)
            if not enabled:
                break
            marking = fire(net, marking, sorted(enabled)[0])


def test_fire_conservation():
    rng = random.Random(21)
    for _ in range(25):
        net = random_model(rng)
        marking = net.initial_marking
        for _ in range(8):
            enabled = sorted(enabled_transitions(net, marking))
            if not enabled:
                break
            tid = rng.choice(enabled)
            after = fire(net, marking, tid)
            delta = len(net.outputs(tid)) - len(net.inputs(tid))
            assert after.total() - marking.total() == delta
            marking = after


MINIMAL_NET = """
{
  "places": ["p0", "p1"],
  "transitions": [{"id": "t1", "label": "A"}],
  "arcs": [["p0", "t1"], ["t1", "p1"]],
  "initial_marking": {"p0": 1},
  "final_marking": {"p1": 1}
}
"""


def test_parse_minimal_net():
    net = parse_net(MINIMAL_NET)
    assert len(net.places) == 2
    assert len(net.transitions) == 1
    assert net.transitions[0].label == "A"


def test_parse_absent_label_means_tau():
    net = parse_net(MINIMAL_NET.replace(', "label": "A"', ""))
    assert net.transitions[0].label is None
    net = parse_net(MINIMAL_NET.replace('"A"', "null"))
    assert net.transitions[0].label is None


def test_parse_rejects_duplicate_transition_id():
    doc = MINIMAL_NET.replace(
        '[{"id": "t1", "label": "A"}]',
        '[{"id": "t1", "label": "A"}, {"id": "t1", "label": "B"}]',
    )
    with pytest.raises(ParseError, match="duplicate transition id"):
        parse_net(doc)


def test_parse_rejects_multi_arc_and_bad_arc():
    doc = MINIMAL_NET.replace('[["p0", "t1"], ["t1", "p1"]]', '[["p0", "t1"], ["p0", "t1"]]')
    with pytest.raises(ParseError, match="multi-arcs"):
        parse_net(doc)
    doc = MINIMAL_NET.replace('["t1", "p1"]', '["p0", "p1"]')
    with pytest.raises(ParseError, match="place<->transition"):
        parse_net(doc)


def test_parse_rejects_bad_weight():
    doc = MINIMAL_NET.replace('"label": "A"', '"label": "A", "weight": 1.2')
    with pytest.raises(ParseError, match="weight"):
        parse_net(doc)


def test_roundtrip_random_nets():
    rng = random.Random(3)
    for _ in range(30):
        net = random_model(rng)
        assert parse_net(serialize_net(net)) == net


def test_roundtrip_preserves_weights():
    net = build_stochastic_trace_net(table2_trace())
    again = parse_net(serialize_net(net))
    assert again == net
    assert again.transition_by_id["t_2_1"].weight == 0.2


def test_product_document_parses_as_plain_net():
    # extra keys (e.g. a "moves" side table) are ignored by the parser
    doc = net_to_document(ab_model())
    doc["moves"] = [{"id": "x"}]
    import json

    assert parse_net(json.dumps(doc)) == ab_model()


PNML = """<?xml version="1.0" encoding="UTF-8"?>
<pnml xmlns="http://www.pnml.org/version-2009/grammar/pnml">
  <net id="n1" type="http://www.pnml.org/version-2009/grammar/ptnet">
    <page id="pg1">
      <place id="s0"><initialMarking><text>1</text></initialMarking></place>
      <place id="s1"/>
      <transition id="a"><name><text>A</text></name></transition>
      <transition id="silent"/>
      <arc id="f1" source="s0" target="a"/>
      <arc id="f2" source="a" target="s1"/>
      <arc id="f3" source="s1" target="silent"/>
      <arc id="f4" source="silent" target="s0"/>
    </page>
  </net>
</pnml>
"""


def test_pnml_minimal_import():
    net = import_pnml(PNML, final_marking=Marking({"s1": 1}))
    assert net.places == {"s0", "s1"}
    assert net.transition_by_id["a"].label == "A"
    assert net.transition_by_id["silent"].label is None
    assert net.initial_marking == Marking({"s0": 1})


def test_pnml_final_marking_required():
    with pytest.raises(ParseError, match="final marking"):
        import_pnml(PNML)


def test_pnml_finalmarkings_block():
    doc = PNML.replace(
        "</page>",
        "</page><finalmarkings><marking><place idref=\"s1\"><text>1</text></place></marking></finalmarkings>",
    )
    net = import_pnml(doc)
    assert net.final_marking == Marking({"s1": 1})


def test_pnml_unsupported_features():
    doc = PNML.replace(
        '<arc id="f2" source="a" target="s1"/>',
        '<arc id="f2" source="a" target="s1"><inscription><text>2</text></inscription></arc>',
    )
    with pytest.raises(ParseError, match="unsupported"):
        import_pnml(doc, final_marking=Marking({"s1": 1}))
    doc = PNML.replace("<page id=\"pg1\">", "<page id=\"pg1\"><referencePlace id=\"r\"/>")
    with pytest.raises(ParseError, match="unsupported"):
        import_pnml(doc, final_marking=Marking({"s1": 1}))


def test_sequence_model_builder_sanity():
    net = sequence_model(["A", "B", "C"])
    assert validate_net(net) == []
    m = net.initial_marking
    for tid in ("mt1", "mt2", "mt3"):
        m = fire(net, m, tid)
    assert m == net.final_marking
