"""Labeled Petri nets with initial/final markings.

This is the substrate shared by process models, trace nets, and their
synchronous product: places, weighted labeled transitions, multiset
markings, the firing rule, and net file I/O (JSON format plus a minimal
PNML importer). All types are immutable after construction and safe to
share across threads.
"""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from .errors import NotEnabledError, ParseError

# Silent transitions carry no activity label. Serialized as JSON null so a
# real activity literally named "tau" can never collide with it.
TAU = None


@dataclass(frozen=True)
class Transition:
    """A net transition; ``label`` is None for silent (tau) transitions.

    ``weight`` is the firing probability in (0, 1] and is only present on
    trace-net transitions and synchronous-product moves derived from them.
    """

    id: str
    label: str | None = TAU
    weight: float | None = None


class Marking:
    """Immutable multiset of tokens over place ids.

    Zero counts are never stored, so two markings with the same tokens are
    equal and hash equally regardless of how they were built. This is what
    lets markings key the closed set and frontier of the alignment search.
    """

    __slots__ = ("_counts", "_hash")

    def __init__(self, counts: Mapping[str, int] | Iterable[tuple[str, int]] = ()):
        items = counts.items() if isinstance(counts, Mapping) else counts
        clean: dict[str, int] = {}
        for place, count in items:
            if not isinstance(count, int) or isinstance(count, bool):
                raise ValueError(f"token count for {place!r} must be an integer, got {count!r}")
            if count < 0:
                raise ValueError(f"negative token count for {place!r}: {count}")
            if count:
                clean[place] = clean.get(place, 0) + count
        object.__setattr__(self, "_counts", clean)
        object.__setattr__(self, "_hash", hash(frozenset(clean.items())))

    @classmethod
    def _from_clean(cls, counts: dict[str, int]) -> "Marking":
        # Fast path for fire(): counts must already be canonical.
        m = object.__new__(cls)
        object.__setattr__(m, "_counts", counts)
        object.__setattr__(m, "_hash", hash(frozenset(counts.items())))
        return m

    def __getitem__(self, place: str) -> int:
        return self._counts.get(place, 0)

    def __contains__(self, place: str) -> bool:
        return place in self._counts

    def __len__(self) -> int:
        return len(self._counts)

    def __iter__(self) -> Iterator[str]:
        return iter(self._counts)

    def items(self):
        return self._counts.items()

    def places(self):
        return self._counts.keys()

    def total(self) -> int:
        return sum(self._counts.values())

    def __add__(self, other: "Marking") -> "Marking":
        merged = dict(self._counts)
        for place, count in other._counts.items():
            merged[place] = merged.get(place, 0) + count
        return Marking._from_clean(merged)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Marking):
            return NotImplemented
        return self._counts == other._counts

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        inner = ", ".join(f"{p}:{c}" for p, c in sorted(self._counts.items()))
        return f"[{inner}]"

    def to_dict(self) -> dict[str, int]:
        return dict(sorted(self._counts.items()))


class SystemNet:
    """An immutable labeled Petri net with initial and final markings.

    The constructor tolerates structural violations (bad arcs, unknown
    marking places) so that :func:`validate_net` can report them as data;
    only duplicate ids are rejected outright because they would corrupt
    the id-indexed lookup tables.
    """

    def __init__(
        self,
        places: Iterable[str],
        transitions: Iterable[Transition],
        arcs: Iterable[tuple[str, str]],
        initial_marking: Marking,
        final_marking: Marking,
    ):
        self.places = frozenset(places)
        self.transitions = tuple(transitions)
        self.arcs = frozenset((src, tgt) for src, tgt in arcs)
        self.initial_marking = initial_marking
        self.final_marking = final_marking

        self.transition_by_id: dict[str, Transition] = {}
        for t in self.transitions:
            if t.id in self.transition_by_id:
                raise ValueError(f"duplicate transition id: {t.id!r}")
            self.transition_by_id[t.id] = t
        self._order = {t.id: i for i, t in enumerate(self.transitions)}

        inputs: dict[str, list[str]] = {t.id: [] for t in self.transitions}
        outputs: dict[str, list[str]] = {t.id: [] for t in self.transitions}
        for src, tgt in self.arcs:
            if src in self.places and tgt in inputs:
                inputs[tgt].append(src)
            elif src in inputs and tgt in self.places:
                outputs[src].append(tgt)
            # anything else is left for validate_net to report
        self._inputs = {tid: tuple(sorted(ps)) for tid, ps in inputs.items()}
        self._outputs = {tid: tuple(sorted(ps)) for tid, ps in outputs.items()}

        consumers: dict[str, list[str]] = {}
        self._sources: list[str] = []  # transitions with no input places
        for t in self.transitions:
            ins = self._inputs[t.id]
            if not ins:
                self._sources.append(t.id)
            for p in ins:
                consumers.setdefault(p, []).append(t.id)
        self._consumers = {p: tuple(ts) for p, ts in consumers.items()}

    def inputs(self, tid: str) -> tuple[str, ...]:
        return self._inputs[tid]

    def outputs(self, tid: str) -> tuple[str, ...]:
        return self._outputs[tid]

    def enabled_ids(self, marking: Marking) -> list[str]:
        """Ids of transitions enabled at ``marking``, in definition order.

        No validation of the marking; the public wrapper is
        :func:`enabled_transitions`.
        """
        counts = marking._counts
        found: set[str] = set(self._sources)
        for place in counts:
            for tid in self._consumers.get(place, ()):
                if tid in found:
                    continue
                ins = self._inputs[tid]
                for p in ins:
                    if counts.get(p, 0) < 1:
                        break
                else:
                    found.add(tid)
        order = self._order
        return sorted(found, key=order.__getitem__)

    def fire_id(self, marking: Marking, tid: str) -> Marking:
        """Fire ``tid`` at ``marking``; raises NotEnabledError when disabled."""
        counts = dict(marking._counts)
        for p in self._inputs[tid]:
            have = counts.get(p, 0)
            if have < 1:
                raise NotEnabledError(f"{tid} not enabled: place {p} has no token")
            if have == 1:
                del counts[p]
            else:
                counts[p] = have - 1
        for p in self._outputs[tid]:
            counts[p] = counts.get(p, 0) + 1
        return Marking._from_clean(counts)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SystemNet):
            return NotImplemented
        return (
            self.places == other.places
            and self.transitions == other.transitions
            and self.arcs == other.arcs
            and self.initial_marking == other.initial_marking
            and self.final_marking == other.final_marking
        )

    def __repr__(self) -> str:
        return (
            f"SystemNet(|P|={len(self.places)}, |T|={len(self.transitions)}, "
            f"|F|={len(self.arcs)})"
        )


def validate_net(net: SystemNet) -> list[str]:
    """Check all structural invariants; returns one message per violation.

    An empty report means the net is well formed. Violations are data, not
    exceptions, so callers can collect every problem at once.
    """
    report: list[str] = []
    tids = set(net.transition_by_id)
    overlap = net.places & tids
    for name in sorted(overlap):
        report.append(f"id used for both a place and a transition: {name}")
    for src, tgt in sorted(net.arcs):
        s_place, t_place = src in net.places, tgt in net.places
        s_trans, t_trans = src in tids, tgt in tids
        if s_place and t_place:
            report.append(f"arc connects two places: {src}->{tgt}")
        elif s_trans and t_trans:
            report.append(f"arc connects two transitions: {src}->{tgt}")
        elif not (s_place or s_trans):
            report.append(f"arc source is not a net element: {src}->{tgt}")
        elif not (t_place or t_trans):
            report.append(f"arc target is not a net element: {src}->{tgt}")
    for name, marking in (("initial", net.initial_marking), ("final", net.final_marking)):
        for place in sorted(marking.places()):
            if place not in net.places:
                report.append(f"{name} marking names unknown place: {place}")
    for t in net.transitions:
        if t.label is not None and t.label == "":
            report.append(f"transition {t.id} has an empty label")
        if t.weight is not None and not (0.0 < t.weight <= 1.0):
            report.append(f"transition {t.id} has weight outside (0,1]: {t.weight}")
    return report


def enabled_transitions(net: SystemNet, marking: Marking) -> set[str]:
    """Set of transition ids enabled at ``marking``.

    A transition is enabled iff every input place holds at least one token
    (arc multiplicities are fixed at 1).
    """
    unknown = [p for p in marking.places() if p not in net.places]
    if unknown:
        raise ValueError(f"marking names unknown places: {sorted(unknown)}")
    return set(net.enabled_ids(marking))


def fire(net: SystemNet, marking: Marking, tid: str) -> Marking:
    """Fire transition ``tid`` at ``marking`` and return the new marking."""
    if tid not in net.transition_by_id:
        raise ValueError(f"unknown transition: {tid}")
    return net.fire_id(marking, tid)


# --------------------------------------------------------------------------
# JSON net format


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


def _parse_marking(obj, places: set[str], where: str) -> Marking:
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected an object mapping place to count")
    counts = {}
    for place, count in obj.items():
        if place not in places:
            raise ParseError(f"{where}: unknown place {place!r}")
        if not isinstance(count, int) or isinstance(count, bool) or count < 1:
            raise ParseError(f"{where}: count for {place!r} must be a positive integer")
        counts[place] = count
    return Marking(counts)


def parse_net(data: bytes | str) -> SystemNet:
    """Parse the JSON net format (see serialize_net for the layout).

    Rejects duplicate ids, non-bipartite arcs, multi-arcs, and malformed
    markings with a message naming the offending element. Unknown
    top-level keys are ignored so annotated documents (e.g. synchronous
    products with a "moves" table) still parse as plain nets.
    """
    doc = _loads_no_dup(data)
    if not isinstance(doc, dict):
        raise ParseError("top level: expected an object")
    for key in ("places", "transitions", "arcs", "initial_marking", "final_marking"):
        if key not in doc:
            raise ParseError(f"top level: missing key {key!r}")

    places: list[str] = []
    seen_places: set[str] = set()
    for i, p in enumerate(doc["places"]):
        if not isinstance(p, str) or not p:
            raise ParseError(f"places[{i}]: expected a nonempty string")
        if p in seen_places:
            raise ParseError(f"places[{i}]: duplicate place id {p!r}")
        seen_places.add(p)
        places.append(p)

    transitions: list[Transition] = []
    seen_tids: set[str] = set()
    for i, entry in enumerate(doc["transitions"]):
        if not isinstance(entry, dict) or "id" not in entry:
            raise ParseError(f"transitions[{i}]: expected an object with an 'id'")
        tid = entry["id"]
        if not isinstance(tid, str) or not tid:
            raise ParseError(f"transitions[{i}]: id must be a nonempty string")
        if tid in seen_tids:
            raise ParseError(f"transitions[{i}]: duplicate transition id {tid!r}")
        seen_tids.add(tid)
        label = entry.get("label", TAU)
        if label is not None and (not isinstance(label, str) or not label):
            raise ParseError(f"transitions[{i}]: label must be a nonempty string or null")
        weight = entry.get("weight")
        if weight is not None:
            if isinstance(weight, int) and not isinstance(weight, bool):
                weight = float(weight)
            if not isinstance(weight, float) or not (0.0 < weight <= 1.0):
                raise ParseError(f"transitions[{i}]: weight must be a number in (0,1]")
        transitions.append(Transition(tid, label, weight))
        if tid in seen_places:
            raise ParseError(f"transitions[{i}]: id {tid!r} already names a place")

    arcs: list[tuple[str, str]] = []
    seen_arcs: set[tuple[str, str]] = set()
    for i, pair in enumerate(doc["arcs"]):
        if not (isinstance(pair, list) and len(pair) == 2):
            raise ParseError(f"arcs[{i}]: expected a [source, target] pair")
        src, tgt = pair
        if (src in seen_places) == (tgt in seen_places):
            raise ParseError(f"arcs[{i}]: not place<->transition: {src}->{tgt}")
        if src not in seen_places and src not in seen_tids:
            raise ParseError(f"arcs[{i}]: unknown source {src!r}")
        if tgt not in seen_places and tgt not in seen_tids:
            raise ParseError(f"arcs[{i}]: unknown target {tgt!r}")
        if (src, tgt) in seen_arcs:
            raise ParseError(f"arcs[{i}]: duplicate arc {src}->{tgt} (multi-arcs unsupported)")
        seen_arcs.add((src, tgt))
        arcs.append((src, tgt))

    initial = _parse_marking(doc["initial_marking"], seen_places, "initial_marking")
    final = _parse_marking(doc["final_marking"], seen_places, "final_marking")
    return SystemNet(places, transitions, arcs, initial, final)


def serialize_net(net: SystemNet) -> bytes:
    """Serialize to the canonical JSON net format (round-trip stable).

    Places and arcs are sorted; transition order is preserved because it
    is meaningful for trace nets.
    """
    doc = net_to_document(net)
    return (json.dumps(doc, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def net_to_document(net: SystemNet) -> dict:
    transitions = []
    for t in net.transitions:
        entry: dict = {"id": t.id, "label": t.label}
        if t.weight is not None:
            entry["weight"] = t.weight
        transitions.append(entry)
    return {
        "places": sorted(net.places),
        "transitions": transitions,
        "arcs": [list(a) for a in sorted(net.arcs)],
        "initial_marking": net.initial_marking.to_dict(),
        "final_marking": net.final_marking.to_dict(),
    }


# --------------------------------------------------------------------------
# Minimal PNML importer

_PNML_IGNORED = {"graphics", "toolspecific"}
_PNML_STRUCTURAL = {"place", "transition", "arc", "page", "name", "finalmarkings"}


def _strip_ns(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _pnml_text(elem: ET.Element, child: str) -> str | None:
    for node in elem:
        if _strip_ns(node.tag) == child:
            for sub in node:
                if _strip_ns(sub.tag) == "text":
                    return sub.text or ""
            return node.text or ""
    return None


def import_pnml(data: bytes | str, final_marking: Marking | None = None) -> SystemNet:
    """Import the supported PNML subset: places, labeled transitions,
    plain arcs, initial marking, and (when present) a final-markings block.

    Graphics and tool-specific decoration are skipped; any other feature
    (arc inscriptions != 1, non-default arc types, reference nodes,
    multiple nets) raises ParseError as unsupported. When the document has
    no final marking one must be supplied by the caller.
    """
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    try:
        root = ET.fromstring(text)
    except ET.ParseError as e:
        raise ParseError(f"invalid PNML XML: {e}") from e

    nets = [n for n in root.iter() if _strip_ns(n.tag) == "net"]
    if len(nets) != 1:
        raise ParseError(f"unsupported PNML feature: expected exactly 1 net, found {len(nets)}")
    net_elem = nets[0]

    places: list[str] = []
    transitions: list[Transition] = []
    arcs: list[tuple[str, str]] = []
    initial_counts: dict[str, int] = {}
    final_counts: dict[str, int] = {}

    def walk(container: ET.Element) -> None:
        for elem in container:
            tag = _strip_ns(elem.tag)
            if tag in _PNML_IGNORED or tag == "name":
                continue
            if tag not in _PNML_STRUCTURAL:
                raise ParseError(f"unsupported PNML feature: <{tag}>")
            if tag == "page":
                walk(elem)
            elif tag == "place":
                pid = elem.get("id")
                if not pid:
                    raise ParseError("PNML place without id")
                places.append(pid)
                tokens = _pnml_text(elem, "initialMarking")
                if tokens is not None and tokens.strip():
                    count = int(tokens.strip())
                    if count > 0:
                        initial_counts[pid] = count
            elif tag == "transition":
                tid = elem.get("id")
                if not tid:
                    raise ParseError("PNML transition without id")
                label = _pnml_text(elem, "name")
                if label is not None:
                    label = label.strip() or None
                transitions.append(Transition(tid, label))
            elif tag == "arc":
                src, tgt = elem.get("source"), elem.get("target")
                if not src or not tgt:
                    raise ParseError("PNML arc without source/target")
                inscription = _pnml_text(elem, "inscription")
                if inscription is not None and inscription.strip() not in ("", "1"):
                    raise ParseError(
                        f"unsupported PNML feature: arc inscription {inscription.strip()!r}"
                    )
                for node in elem:
                    if _strip_ns(node.tag) in ("arctype", "type"):
                        kind = (node.text or "").strip() or _pnml_text(elem, _strip_ns(node.tag))
                        raise ParseError(f"unsupported PNML feature: arc type {kind!r}")
                arcs.append((src, tgt))
            elif tag == "finalmarkings":
                for marking_elem in elem:
                    for place_elem in marking_elem:
                        if _strip_ns(place_elem.tag) != "place":
                            continue
                        pid = place_elem.get("idref")
                        tokens = None
                        for sub in place_elem:
                            if _strip_ns(sub.tag) == "text":
                                tokens = sub.text
                        if pid and tokens and int(tokens.strip()) > 0:
                            final_counts[pid] = int(tokens.strip())

    walk(net_elem)

    if final_marking is None:
        if not final_counts:
            raise ParseError(
                "PNML document has no final marking; supply one explicitly"
            )
        final_marking = Marking(final_counts)

    net = SystemNet(places, transitions, arcs, Marking(initial_counts), final_marking)
    problems = validate_net(net)
    if problems:
        raise ParseError("invalid PNML net: " + "; ".join(problems))
    return net
