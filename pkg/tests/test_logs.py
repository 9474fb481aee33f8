import math
import random
from pathlib import Path

import pytest

from stocon import (
    CapacityError,
    ParseError,
    StochasticEvent,
    StochasticLog,
    StochasticTrace,
    ValidationError,
    deterministic_trace,
    enumerate_realizations,
    import_xes,
    parse_log,
    realization_count,
    serialize_log,
)
from stocon.logs import validate_trace_order

from _generators import random_stochastic_trace, table2_trace, ALPHABET

DATA = Path(__file__).parent / "data"


def test_parse_table2_golden_file():
    log = parse_log((DATA / "table2_trace.json").read_bytes())
    assert len(log.traces) == 1
    trace = log.traces[0]
    assert len(trace.events) == 4
    assert [e.size for e in trace.events] == [1, 2, 4, 1]
    assert trace.events[1].distribution == {"B": 0.2, "C": 0.8}
    assert trace.events[2].distribution["D"] == 0.6
    assert trace == table2_trace()


def test_distribution_must_sum_to_one():
    with pytest.raises(ValidationError, match="sums to 0.9"):
        StochasticEvent("e1", {"A": 0.5, "B": 0.4})
    doc = '{"cases": [{"case_id": "1", "events": [{"event_id": "e1", "activities": {"A": 0.5, "B": 0.4}}]}]}'
    with pytest.raises(ParseError, match="sums to 0.9"):
        parse_log(doc)


def test_probability_range_checks():
    with pytest.raises(ValidationError):
        StochasticEvent("e1", {"A": 0.0, "B": 1.0})
    with pytest.raises(ValidationError):
        StochasticEvent("e1", {"A": 1.2})
    StochasticEvent("e1", {"A": 1.0})  # deterministic event is fine


def test_duplicate_activity_keys_rejected():
    doc = '{"cases": [{"case_id": "1", "events": [{"activities": {"A": 0.5, "A": 0.5}}]}]}'
    with pytest.raises(ParseError, match="duplicate key"):
        parse_log(doc)


def test_duplicate_case_ids_rejected():
    doc = '{"cases": [{"case_id": "1", "events": []}, {"case_id": "1", "events": []}]}'
    with pytest.raises(ParseError, match="duplicate case_id"):
        parse_log(doc)


def test_roundtrip_table2():
    log = parse_log((DATA / "table2_trace.json").read_bytes())
    assert parse_log(serialize_log(log)) == log


def test_roundtrip_random_logs():
    rng = random.Random(11)
    for i in range(20):
        traces = tuple(
            random_stochastic_trace(rng, ALPHABET, case_id=f"c{j}") for j in range(rng.randint(0, 4))
        )
        log = StochasticLog(traces)
        assert parse_log(serialize_log(log)) == log


def test_alphabet_is_derived():
    log = StochasticLog((table2_trace(),))
    assert log.alphabet == frozenset("ABCDEFG")


def test_timestamp_disorder_is_warning_not_error():
    events = (
        StochasticEvent("e1", {"A": 1.0}, "2020-08-14T12:00:00"),
        StochasticEvent("e2", {"B": 1.0}, "2020-08-13T12:00:00"),
    )
    trace = StochasticTrace("1", events)
    warnings = validate_trace_order(trace)
    assert len(warnings) == 1 and "e2" in warnings[0]


def test_realization_count():
    assert realization_count(table2_trace()) == 8
    assert realization_count(deterministic_trace("d", "ABCDE")) == 1
    assert realization_count(StochasticTrace("empty", ())) == 1


def test_enumerate_two_event_product():
    trace = StochasticTrace(
        "x", (StochasticEvent("e1", {"A": 1.0}), StochasticEvent("e2", {"B": 0.2, "C": 0.8}))
    )
    got = enumerate_realizations(trace)
    assert got == [(("A", "B"), 0.2), (("A", "C"), 0.8)]


def test_enumeration_order_is_document_order():
    got = enumerate_realizations(table2_trace())
    assert [labels for labels, _ in got[:4]] == [
        ("A", "B", "D", "F"),
        ("A", "B", "E", "F"),
        ("A", "B", "F", "F"),
        ("A", "B", "G", "F"),
    ]


def test_realization_probabilities_sum_to_one():
    rng = random.Random(5)
    for _ in range(30):
        trace = random_stochastic_trace(rng, ALPHABET)
        total = sum(p for _, p in enumerate_realizations(trace))
        assert math.isclose(total, 1.0, abs_tol=1e-9)


def test_enumeration_cap():
    trace = StochasticTrace(
        "big", tuple(StochasticEvent(f"e{i}", {"A": 0.5, "B": 0.5}) for i in range(10))
    )
    with pytest.raises(CapacityError):
        enumerate_realizations(trace, cap=256)


XES = """<?xml version="1.0" encoding="UTF-8"?>
<log xmlns="http://www.xes-standard.org/">
  <trace>
    <string key="concept:name" value="case-1"/>
    <event>
      <string key="concept:name" value="A"/>
      <string key="lifecycle:transition" value="complete"/>
      <date key="time:timestamp" value="2020-01-01T10:00:00"/>
    </event>
    <event>
      <string key="concept:name" value="B"/>
    </event>
    <event>
      <string key="org:resource" value="nobody"/>
    </event>
  </trace>
</log>
"""


def test_import_xes_single_case():
    log = import_xes(XES)
    assert len(log.traces) == 1
    trace = log.traces[0]
    assert trace.case_id == "case-1"
    # the event without concept:name is skipped, lifecycle attrs ignored
    assert [e.distribution for e in trace.events] == [{"A": 1.0}, {"B": 1.0}]
    assert trace.events[0].timestamp == "2020-01-01T10:00:00"


def test_import_xes_empty_log():
    log = import_xes('<log xmlns="http://www.xes-standard.org/"></log>')
    assert len(log.traces) == 0


def test_import_xes_malformed():
    with pytest.raises(ParseError):
        import_xes("<log><trace>")


def test_import_xes_then_serialize_is_probability_one():
    log = import_xes(XES)
    again = parse_log(serialize_log(log))
    for trace in again.traces:
        for event in trace.events:
            assert event.distribution == {next(iter(event.distribution)): 1.0}
