"""Stochastically known event logs.

Each event carries a probability distribution over possible activity
labels; the classical certain log is the degenerate case where every
distribution has a single label at probability 1.0. This module holds the
data model, JSON (de)serialization, XES import, and realization
enumeration for the brute-force oracle.
"""

from __future__ import annotations

import itertools
import json
import logging
import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from datetime import datetime

from .errors import CapacityError, ParseError, ValidationError

logger = logging.getLogger(__name__)

PROB_SUM_TOL = 1e-9


@dataclass(frozen=True, eq=True)
class StochasticEvent:
    """One recorded event with a distribution over candidate activities.

    ``distribution`` maps activity label to probability; insertion order is
    the document order and is preserved through serialization because it
    fixes the enumeration order of realizations.
    """

    event_id: str
    distribution: dict[str, float]
    timestamp: str | None = None

    def __post_init__(self):
        if not self.distribution:
            raise ValidationError(f"event {self.event_id}: empty distribution")
        total = 0.0
        for label, prob in self.distribution.items():
            if not label:
                raise ValidationError(f"event {self.event_id}: empty activity label")
            if not (0.0 < prob <= 1.0):
                raise ValidationError(
                    f"event {self.event_id}: probability of {label!r} outside (0,1]: {prob}"
                )
            total += prob
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise ValidationError(
                f"event {self.event_id}: distribution sums to {total:.10g}"
            )

    @property
    def size(self) -> int:
        """Number of candidate activities (the event's branching factor)."""
        return len(self.distribution)

    @property
    def is_deterministic(self) -> bool:
        return len(self.distribution) == 1

    def labels(self) -> tuple[str, ...]:
        return tuple(self.distribution)


@dataclass(frozen=True, eq=True)
class StochasticTrace:
    case_id: str
    events: tuple[StochasticEvent, ...]

    def __len__(self) -> int:
        return len(self.events)

    @property
    def is_deterministic(self) -> bool:
        return all(e.is_deterministic for e in self.events)


@dataclass(frozen=True, eq=True)
class StochasticLog:
    traces: tuple[StochasticTrace, ...]

    def __post_init__(self):
        seen = set()
        for trace in self.traces:
            if trace.case_id in seen:
                raise ValidationError(f"duplicate case_id: {trace.case_id!r}")
            seen.add(trace.case_id)

    @property
    def alphabet(self) -> frozenset[str]:
        """All activity labels appearing in any event of any trace."""
        labels: set[str] = set()
        for trace in self.traces:
            for event in trace.events:
                labels.update(event.distribution)
        return frozenset(labels)

    def __len__(self) -> int:
        return len(self.traces)

    @property
    def is_deterministic(self) -> bool:
        return all(t.is_deterministic for t in self.traces)


def make_trace(case_id: str, events) -> StochasticTrace:
    return StochasticTrace(case_id, tuple(events))


def deterministic_trace(case_id: str, labels, event_ids=None) -> StochasticTrace:
    """Lift a plain label sequence into a probability-1.0 trace."""
    labels = list(labels)
    if event_ids is None:
        event_ids = [f"e{i + 1}" for i in range(len(labels))]
    events = [StochasticEvent(eid, {label: 1.0}) for eid, label in zip(event_ids, labels)]
    return StochasticTrace(case_id, tuple(events))


def validate_trace_order(trace: StochasticTrace) -> list[str]:
    """Warnings for timestamps that disagree with record order.

    Event order is always the record order; out-of-order timestamps are
    reported but never rejected. Unparseable timestamps are skipped.
    """
    warnings = []
    previous: datetime | None = None
    for event in trace.events:
        if event.timestamp is None:
            continue
        try:
            current = datetime.fromisoformat(event.timestamp)
        except ValueError:
            continue
        if previous is not None and current < previous:
            warnings.append(
                f"trace {trace.case_id}: timestamp of {event.event_id} precedes its predecessor"
            )
        previous = current
    return warnings


# --------------------------------------------------------------------------
# JSON log format


def _loads_no_dup(data: bytes | str):
    def hook(pairs):
        d = {}
        for key, value in pairs:
            if key in d:
                raise ParseError(f"duplicate key in object: {key!r}")
            d[key] = value
        return d

    text = data.decode("utf-8") if isinstance(data, bytes) else data
    try:
        return json.loads(text, object_pairs_hook=hook)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON at line {e.lineno} column {e.colno}: {e.msg}") from e


def parse_log(data: bytes | str) -> StochasticLog:
    """Parse the stochastic log format; distributions are validated here.

    Duplicate activity keys within one event are rejected by the JSON
    layer itself, so "labels within one event are distinct" holds by
    construction.
    """
    doc = _loads_no_dup(data)
    if not isinstance(doc, dict) or "cases" not in doc:
        raise ParseError("top level: expected an object with a 'cases' array")
    traces = []
    for ci, case in enumerate(doc["cases"]):
        if not isinstance(case, dict) or "case_id" not in case or "events" not in case:
            raise ParseError(f"cases[{ci}]: expected an object with 'case_id' and 'events'")
        case_id = str(case["case_id"])
        events = []
        for ei, entry in enumerate(case["events"]):
            where = f"cases[{ci}].events[{ei}]"
            if not isinstance(entry, dict) or "activities" not in entry:
                raise ParseError(f"{where}: expected an object with 'activities'")
            activities = entry["activities"]
            if not isinstance(activities, dict):
                raise ParseError(f"{where}: 'activities' must be an object")
            event_id = str(entry.get("event_id", f"e{ei + 1}"))
            dist = {}
            for label, prob in activities.items():
                if isinstance(prob, int) and not isinstance(prob, bool):
                    prob = float(prob)
                if not isinstance(prob, float):
                    raise ParseError(f"{where}: probability of {label!r} must be a number")
                dist[label] = prob
            timestamp = entry.get("timestamp")
            if timestamp is not None and not isinstance(timestamp, str):
                raise ParseError(f"{where}: timestamp must be a string")
            try:
                events.append(StochasticEvent(event_id, dist, timestamp))
            except ValidationError as e:
                raise ParseError(str(e)) from e
        trace = StochasticTrace(case_id, tuple(events))
        for warning in validate_trace_order(trace):
            logger.warning(warning)
        traces.append(trace)
    try:
        return StochasticLog(tuple(traces))
    except ValidationError as e:
        raise ParseError(str(e)) from e


def serialize_log(log: StochasticLog) -> bytes:
    doc = {
        "cases": [
            {
                "case_id": trace.case_id,
                "events": [
                    {
                        "event_id": event.event_id,
                        **({"timestamp": event.timestamp} if event.timestamp else {}),
                        "activities": dict(event.distribution),
                    }
                    for event in trace.events
                ],
            }
            for trace in log.traces
        ]
    }
    return (json.dumps(doc, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


# --------------------------------------------------------------------------
# XES import

def _xes_attr(event_elem: ET.Element, key: str) -> str | None:
    for child in event_elem:
        if child.get("key") == key:
            return child.get("value")
    return None


def import_xes(data: bytes | str) -> StochasticLog:
    """Import a standard XES document as a degenerate stochastic log.

    Only trace boundaries and per-event concept:name are read; every event
    becomes a single-activity distribution at probability 1.0. Events
    without concept:name are skipped (one summary warning with the count).
    """
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    try:
        root = ET.fromstring(text)
    except ET.ParseError as e:
        raise ParseError(f"invalid XES XML: {e}") from e

    def tag(elem):
        return elem.tag.rsplit("}", 1)[-1]

    traces = []
    skipped = 0
    auto_case = itertools.count(1)
    for trace_elem in root:
        if tag(trace_elem) != "trace":
            continue
        case_id = _xes_attr(trace_elem, "concept:name") or f"case{next(auto_case)}"
        events = []
        for event_elem in trace_elem:
            if tag(event_elem) != "event":
                continue
            activity = _xes_attr(event_elem, "concept:name")
            if activity is None or activity == "":
                skipped += 1
                continue
            timestamp = _xes_attr(event_elem, "time:timestamp")
            events.append(
                StochasticEvent(f"e{len(events) + 1}", {activity: 1.0}, timestamp)
            )
        traces.append(StochasticTrace(case_id, tuple(events)))
    if skipped:
        logger.warning("XES import skipped %d event(s) without concept:name", skipped)
    return StochasticLog(tuple(traces))


# --------------------------------------------------------------------------
# Realizations


def realization_count(trace: StochasticTrace) -> int:
    """Number of deterministic label sequences the trace can stand for."""
    return math.prod(event.size for event in trace.events)


def enumerate_realizations(
    trace: StochasticTrace, cap: int = 4096
) -> list[tuple[tuple[str, ...], float]]:
    """Every realization with its joint probability.

    Order is lexicographic in the per-event document order, so output is
    stable for golden tests. Joint probabilities over all realizations sum
    to 1 (up to float rounding). Guarded by ``cap`` because the count is
    exponential in the number of uncertain events.
    """
    count = realization_count(trace)
    if count > cap:
        raise CapacityError(
            f"trace {trace.case_id} has {count} realizations, above the cap of {cap}"
        )
    pools = [tuple(event.distribution.items()) for event in trace.events]
    out = []
    for combo in itertools.product(*pools):
        labels = tuple(label for label, _ in combo)
        prob = 1.0
        for _, p in combo:
            prob *= p
        out.append((labels, prob))
    return out
