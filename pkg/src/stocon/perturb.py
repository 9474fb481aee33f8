"""Seeded noise injection for benchmark logs.

Turns a deterministic log into a stochastic experiment log in two stages:
an optional pre-modification of the plain traces (relabel / swap /
duplicate / all three), then injection of parallel candidate activities
into a chosen fraction of events. Every random draw comes from a stream
derived from (seed, case index), so output is bit-identical across runs
and independent of batch order or parallelism.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .logs import StochasticEvent, StochasticLog, StochasticTrace


class PerturbMode(enum.Enum):
    NONE = "none"
    RELABEL = "relabel"
    SWAP = "swap"
    DUPLICATE = "duplicate"
    ALL = "all"


@dataclass(frozen=True)
class PerturbConfig:
    """Noise-injection parameters.

    ``n_parallel`` is the distribution size given to uncertain events,
    ``original_prob`` the probability kept by the recorded activity,
    ``uncertain_portion`` the fraction of events made uncertain, and
    ``mode``/``mode_fraction`` the pre-modification applied first.
    ``equal_split`` switches the leftover-probability split from random
    simplex sampling to an even split (ablation knob).
    """

    n_parallel: int
    original_prob: float
    uncertain_portion: float
    mode: PerturbMode = PerturbMode.NONE
    mode_fraction: float = 0.3
    seed: int = 0
    equal_split: bool = False

    def __post_init__(self):
        if self.n_parallel < 2:
            raise ValidationError(f"n_parallel must be >= 2, got {self.n_parallel}")
        if not (0.0 < self.original_prob <= 1.0):
            raise ValidationError(f"original_prob must lie in (0,1], got {self.original_prob}")
        if not (0.0 <= self.uncertain_portion <= 1.0):
            raise ValidationError(
                f"uncertain_portion must lie in [0,1], got {self.uncertain_portion}"
            )
        if not (0.0 <= self.mode_fraction <= 1.0):
            raise ValidationError(f"mode_fraction must lie in [0,1], got {self.mode_fraction}")
        if not (0 <= self.seed < 2**64):
            raise ValidationError("seed must fit in an unsigned 64-bit integer")


def trace_rng(seed: int, case_index: int) -> np.random.Generator:
    """Deterministic per-trace stream: same (seed, case index), same draws."""
    return np.random.default_rng([seed, case_index])


def _require_deterministic(trace: StochasticTrace, op: str) -> None:
    if not trace.is_deterministic:
        raise ValidationError(f"{op} requires a deterministic trace (case {trace.case_id})")


def _the_label(event: StochasticEvent) -> str:
    return next(iter(event.distribution))


def _pick_positions(rng: np.random.Generator, length: int, fraction: float) -> list[int]:
    count = math.floor(fraction * length)
    chosen = rng.choice(length, size=count, replace=False)
    return sorted(int(i) for i in chosen)


# --------------------------------------------------------------------------
# Pre-modifications (all operate on deterministic traces)


def _relabel(trace, fraction, rng, alphabet):
    _require_deterministic(trace, "relabel_events")
    alphabet = sorted(set(alphabet))
    if len(alphabet) < 2:
        raise ValidationError("relabel needs an alphabet of at least 2 activities")
    positions = _pick_positions(rng, len(trace), fraction)
    events = list(trace.events)
    for pos in positions:
        event = events[pos]
        options = [a for a in alphabet if a != _the_label(event)]
        new_label = options[int(rng.integers(len(options)))]
        events[pos] = StochasticEvent(event.event_id, {new_label: 1.0}, event.timestamp)
    return StochasticTrace(trace.case_id, tuple(events)), positions


def relabel_events(trace, fraction, rng, alphabet) -> StochasticTrace:
    """Give floor(fraction*len) distinct events a different label drawn
    uniformly from the alphabet minus the current one."""
    return _relabel(trace, fraction, rng, alphabet)[0]


def _swap(trace, fraction, rng):
    _require_deterministic(trace, "swap_events")
    n = len(trace)
    if n < 2:
        raise ValidationError(f"swap needs a trace of length >= 2 (case {trace.case_id})")
    positions = _pick_positions(rng, n, fraction)
    events = list(trace.events)
    pairs = []
    for pos in positions:  # ascending order, applied sequentially
        if pos == 0:
            other = 1
        elif pos == n - 1:
            other = n - 2
        else:
            other = pos + 1 if int(rng.integers(2)) == 1 else pos - 1
        events[pos], events[other] = events[other], events[pos]
        pairs.append((pos, other))
    return StochasticTrace(trace.case_id, tuple(events)), pairs


def swap_events(trace, fraction, rng) -> StochasticTrace:
    """Swap floor(fraction*len) chosen events with a uniformly chosen
    neighbor; the first and last event only have one neighbor to take."""
    return _swap(trace, fraction, rng)[0]


def _duplicate(trace, fraction, rng):
    _require_deterministic(trace, "duplicate_events")
    positions = set(_pick_positions(rng, len(trace), fraction))
    events = []
    for i, event in enumerate(trace.events):
        events.append(event)
        if i in positions:
            events.append(
                StochasticEvent(event.event_id + "_dup", dict(event.distribution), event.timestamp)
            )
    return StochasticTrace(trace.case_id, tuple(events)), sorted(positions)


def duplicate_events(trace, fraction, rng) -> StochasticTrace:
    """Duplicate floor(fraction*len) chosen events immediately after
    themselves; output length grows by the number of chosen events."""
    return _duplicate(trace, fraction, rng)[0]


# --------------------------------------------------------------------------
# Parallel-activity injection


def _add_parallel(trace, config: PerturbConfig, rng, alphabet):
    _require_deterministic(trace, "add_parallel_transitions")
    alphabet = sorted(set(alphabet))
    n = len(trace)
    # One permutation drawn up front; prefixes of it give the uncertain
    # event sets, so the set at portion x nests inside the set at x+eps
    # for the same stream.
    perm = [int(i) for i in rng.permutation(n)]
    count = math.floor(config.uncertain_portion * n)
    chosen = perm[:count]

    events = list(trace.events)
    for pos in chosen:  # permutation order: draws per event survive portion changes
        event = events[pos]
        original = _the_label(event)
        options = [a for a in alphabet if a != original]
        extra_count = config.n_parallel - 1
        if len(options) < extra_count:
            raise ValidationError(
                f"alphabet too small: need {extra_count} activities besides "
                f"{original!r}, have {len(options)}"
            )
        picked = rng.choice(len(options), size=extra_count, replace=False)
        extras = [options[int(i)] for i in picked]
        leftover = 1.0 - config.original_prob
        if config.equal_split or extra_count == 1:
            parts = [leftover / extra_count] * extra_count
        else:
            cuts = np.sort(rng.random(extra_count - 1))
            edges = np.concatenate(([0.0], cuts, [1.0]))
            parts = [float(d) * leftover for d in np.diff(edges)]
        distribution = {original: config.original_prob}
        for label, part in zip(extras, parts):
            if part > 0.0:  # zero-probability candidates are dropped
                distribution[label] = part
        events[pos] = StochasticEvent(event.event_id, distribution, event.timestamp)
    return StochasticTrace(trace.case_id, tuple(events)), sorted(chosen)


def add_parallel_transitions(trace, config: PerturbConfig, rng, alphabet) -> StochasticTrace:
    """Make floor(uncertain_portion*len) events uncertain: the recorded
    activity keeps ``original_prob`` and n_parallel-1 distinct other
    activities share the leftover probability."""
    return _add_parallel(trace, config, rng, alphabet)[0]


# --------------------------------------------------------------------------
# Whole-log generation


def generate_experiment_log_detailed(
    log: StochasticLog, config: PerturbConfig
) -> tuple[StochasticLog, list[dict]]:
    """Like generate_experiment_log but also returns per-trace provenance
    records (which positions were relabeled/swapped/duplicated/made
    uncertain) for the sidecar file."""
    alphabet = sorted(log.alphabet)
    traces = []
    provenance = []
    for case_index, trace in enumerate(log.traces):
        rng = trace_rng(config.seed, case_index)
        record = {
            "case_id": trace.case_id,
            "relabeled": [],
            "swapped": [],
            "duplicated": [],
            "uncertain": [],
        }
        current = trace
        if config.mode in (PerturbMode.RELABEL, PerturbMode.ALL):
            current, positions = _relabel(current, config.mode_fraction, rng, alphabet)
            record["relabeled"] = positions
        if config.mode in (PerturbMode.SWAP, PerturbMode.ALL):
            current, pairs = _swap(current, config.mode_fraction, rng)
            record["swapped"] = [list(p) for p in pairs]
        if config.mode in (PerturbMode.DUPLICATE, PerturbMode.ALL):
            current, positions = _duplicate(current, config.mode_fraction, rng)
            record["duplicated"] = positions
        current, uncertain = _add_parallel(current, config, rng, alphabet)
        record["uncertain"] = uncertain
        traces.append(current)
        provenance.append(record)
    return StochasticLog(tuple(traces)), provenance


def generate_experiment_log(log: StochasticLog, config: PerturbConfig) -> StochasticLog:
    """Apply the configured pre-modification and parallel-activity
    injection to every trace of a deterministic log."""
    return generate_experiment_log_detailed(log, config)[0]
