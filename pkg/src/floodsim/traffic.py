"""Arrival-stream generation: periodic benign sources, Poisson flood bursts,
stream merging, and the trace CSV format.

Conventions: the flood source gets source_id 0 by default and benign sources
number upward from 1, so equal-timestamp ties resolve flood-first, then by
ascending benign source. Within one source, ties keep generation order.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import ConfigError, PacketClass, RngStream, Trace, to_ns

_CLASS_LETTER = {int(PacketClass.BENIGN): "B", int(PacketClass.ATTACK): "A"}
_LETTER_CLASS = {"B": int(PacketClass.BENIGN), "A": int(PacketClass.ATTACK)}


@dataclass
class BenignSpec:
    """Background traffic: each source emits one packet per period, jittered
    uniformly within jitter_fraction of the period."""

    period_s: float
    jitter_fraction: float = 0.0
    num_sources: int = 1

    def __post_init__(self):
        if self.period_s <= 0:
            raise ConfigError("benign period must be positive")
        if not 0.0 <= self.jitter_fraction < 1.0:
            raise ConfigError("jitter_fraction must lie in [0, 1)")
        if self.num_sources < 1:
            raise ConfigError("num_sources must be >= 1")

    @property
    def rate_pps(self) -> float:
        return self.num_sources / self.period_s


@dataclass
class FloodSpec:
    """A flood burst: Poisson arrivals at rate_pps over [start, start+duration)."""

    start_s: float
    duration_s: float
    rate_pps: float

    def __post_init__(self):
        if self.start_s < 0:
            raise ConfigError("flood start must be >= 0")
        if self.duration_s <= 0:
            raise ConfigError("flood duration must be positive")
        if self.rate_pps <= 0:
            raise ConfigError("flood rate must be positive")

    @property
    def end_s(self) -> float:
        return self.start_s + self.duration_s


def gen_benign(
    spec: BenignSpec, horizon_s: float, rng: RngStream, first_source_id: int = 1
) -> Trace:
    """Generate benign traffic on [0, horizon). Arrival k of a source sits at
    k*period + U[0, jitter_fraction*period)."""
    if horizon_s < 0:
        raise ValueError("horizon must be >= 0")
    n_per = math.ceil(horizon_s / spec.period_s)
    if n_per == 0:
        return Trace.empty()
    g = rng.generator
    base = np.arange(n_per, dtype=np.float64) * spec.period_s
    parts = []
    for s in range(spec.num_sources):
        jitter = g.random(n_per) * (spec.jitter_fraction * spec.period_s)
        t = to_ns(base + jitter)
        parts.append(
            Trace(
                t,
                np.full(n_per, int(PacketClass.BENIGN), np.uint8),
                np.full(n_per, first_source_id + s, np.int32),
            )
        )
    return merge(parts)


def gen_flood(spec: FloodSpec, rng: RngStream, source_id: int = 0) -> Trace:
    """Generate one flood burst. The realized packet count is Poisson with
    mean rate*duration; arrival instants are iid uniform over the window."""
    g = rng.generator
    n = int(g.poisson(spec.rate_pps * spec.duration_s))
    if n == 0:
        return Trace.empty()
    offsets = np.sort(g.random(n)) * spec.duration_s
    t = to_ns(spec.start_s + offsets)
    return Trace(
        t,
        np.full(n, int(PacketClass.ATTACK), np.uint8),
        np.full(n, source_id, np.int32),
    )


def merge(traces: Sequence[Trace]) -> Trace:
    """Merge already-sorted traces into one stream with dense seq numbers.

    Ties break by (source_id, position within the input trace), so the merge
    is fully deterministic. Unsorted input is a precondition error.
    """
    for t in traces:
        if len(t) and np.any(np.diff(t.arrival_ns) < 0):
            raise ValueError("merge inputs must be sorted by arrival time")
    if not traces or all(len(t) == 0 for t in traces):
        return Trace.empty()
    arrival = np.concatenate([t.arrival_ns for t in traces])
    klass = np.concatenate([t.klass for t in traces])
    source = np.concatenate([t.source_id for t in traces])
    orig = np.concatenate([np.arange(len(t), dtype=np.int64) for t in traces])
    order = np.lexsort((orig, source, arrival))
    return Trace(arrival[order], klass[order], source[order])


def write_trace_csv(path, trace: Trace) -> None:
    """Columns: seq,arrival_time_s,class,source_id with class in {B,A}."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["seq", "arrival_time_s", "class", "source_id"])
        arr_s = trace.arrival_ns / 1e9
        for k in range(len(trace)):
            w.writerow(
                [
                    k,
                    f"{arr_s[k]:.9f}",
                    _CLASS_LETTER[int(trace.klass[k])],
                    int(trace.source_id[k]),
                ]
            )


def read_trace_csv(path) -> Trace:
    """Inverse of write_trace_csv; validates ordering and dense seq."""
    arrivals, klasses, sources = [], [], []
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        if header != ["seq", "arrival_time_s", "class", "source_id"]:
            raise ValueError(f"unexpected trace header: {header}")
        for k, row in enumerate(r):
            if int(row[0]) != k:
                raise ValueError(f"non-dense seq at row {k}: {row[0]}")
            if row[2] not in _LETTER_CLASS:
                raise ValueError(f"unknown class letter {row[2]!r} at row {k}")
            arrivals.append(to_ns(float(row[1])))
            klasses.append(_LETTER_CLASS[row[2]])
            sources.append(int(row[3]))
    trace = Trace(
        np.array(arrivals, np.int64),
        np.array(klasses, np.uint8),
        np.array(sources, np.int32),
    )
    trace.validate()
    return trace
