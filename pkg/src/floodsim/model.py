"""Core types shared across the simulator.

Time is kept as integer nanoseconds everywhere inside the library so the
queueing recursions are exact and comparisons like "did the wait hit zero"
are meaningful; float seconds appear only at the I/O boundary (config files,
CSV output, reports). 9 fractional digits in a CSV is exactly nanosecond
resolution, so round-tripping through files is lossless.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterator, NamedTuple

import numpy as np

NS_PER_S = 1_000_000_000


class ConfigError(ValueError):
    """Invalid model or scenario parameters."""


class InvariantViolation(RuntimeError):
    """A declared simulation invariant was broken (bug or bad scenario)."""


def to_ns(seconds):
    """Convert seconds (scalar or array-like) to integer nanoseconds."""
    arr = np.asarray(seconds, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError("time values must be finite")
    ns = np.rint(arr * NS_PER_S).astype(np.int64)
    if arr.ndim == 0:
        return int(ns)
    return ns


def to_seconds(ns):
    """Convert integer nanoseconds (scalar or array) back to float seconds."""
    arr = np.asarray(ns)
    if arr.ndim == 0:
        return int(arr) / NS_PER_S
    return arr.astype(np.float64) / NS_PER_S


class PacketClass(IntEnum):
    BENIGN = 0
    ATTACK = 1


class Regime(IntEnum):
    """Server load regime governing the processing-time distribution."""

    NORMAL = 0
    ATTACK = 1


class PacketRecord(NamedTuple):
    """One packet of the merged input stream."""

    seq: int            # dense 0-based index within the stream
    arrival_ns: int
    klass: PacketClass
    source_id: int

    @property
    def arrival_s(self) -> float:
        return self.arrival_ns / NS_PER_S


@dataclass
class Trace:
    """A packet stream in arrival order, stored as parallel numpy arrays.

    ``seq`` is implicit: packet k of the trace has seq k. Indexing returns a
    PacketRecord view for convenience; bulk work should use the arrays.
    """

    arrival_ns: np.ndarray   # int64, nondecreasing, >= 0
    klass: np.ndarray        # uint8 of PacketClass values
    source_id: np.ndarray    # int32

    def __post_init__(self):
        self.arrival_ns = np.asarray(self.arrival_ns, dtype=np.int64)
        self.klass = np.asarray(self.klass, dtype=np.uint8)
        self.source_id = np.asarray(self.source_id, dtype=np.int32)
        if not (len(self.arrival_ns) == len(self.klass) == len(self.source_id)):
            raise ValueError("trace arrays must have equal length")

    @classmethod
    def empty(cls) -> "Trace":
        return cls(np.empty(0, np.int64), np.empty(0, np.uint8), np.empty(0, np.int32))

    @classmethod
    def from_records(cls, records) -> "Trace":
        records = list(records)
        return cls(
            np.array([r.arrival_ns for r in records], dtype=np.int64),
            np.array([int(r.klass) for r in records], dtype=np.uint8),
            np.array([r.source_id for r in records], dtype=np.int32),
        )

    def __len__(self) -> int:
        return len(self.arrival_ns)

    def __getitem__(self, k: int) -> PacketRecord:
        seq = k if k >= 0 else len(self) + k
        return PacketRecord(
            seq,
            int(self.arrival_ns[k]),
            PacketClass(int(self.klass[k])),
            int(self.source_id[k]),
        )

    def __iter__(self) -> Iterator[PacketRecord]:
        for k in range(len(self)):
            yield self[k]

    @property
    def arrival_s(self) -> np.ndarray:
        return to_seconds(self.arrival_ns)

    def attack_count(self) -> int:
        return int(np.count_nonzero(self.klass == PacketClass.ATTACK))

    def validate(self) -> None:
        if len(self) == 0:
            return
        if self.arrival_ns[0] < 0:
            raise ValueError("arrival times must be >= 0")
        if np.any(np.diff(self.arrival_ns) < 0):
            raise ValueError("trace must be sorted by arrival time")
        bad = ~np.isin(self.klass, (int(PacketClass.BENIGN), int(PacketClass.ATTACK)))
        if np.any(bad):
            raise ValueError("unknown packet class values present")


@dataclass
class ServiceTimeModel:
    """Per-packet processing-time distribution of the protected server.

    Truncated Gaussian per regime with a hard floor at mean/100 (so sampled
    times are always positive, for any parameter choice). In the Attack
    regime an independent Bernoulli(outlier_prob) event multiplies the draw
    by outlier_scale, modeling rare very slow lookups. ``ceiling_s``
    optionally clips from above *after* outlier scaling, i.e. it bounds the
    support outright; scenarios use it when a hard bound on processing times
    is part of the setup.

    Variances are plain seconds^2 here; the scenario layer accepts ms^2.
    """

    mean_normal_s: float = 2.98e-3
    var_normal_s2: float = 0.0055e-6
    mean_attack_s: float = 4.82e-3
    var_attack_s2: float = 0.51e-6
    outlier_prob: float = 1e-3
    outlier_scale: float = 1e3
    ceiling_s: float | None = None

    def __post_init__(self):
        if self.mean_normal_s <= 0 or self.mean_attack_s <= 0:
            raise ConfigError("service means must be positive")
        if self.var_normal_s2 < 0 or self.var_attack_s2 < 0:
            raise ConfigError("service variances must be nonnegative")
        if not 0.0 <= self.outlier_prob <= 1.0:
            raise ConfigError("outlier_prob must lie in [0, 1]")
        if self.outlier_scale <= 0:
            raise ConfigError("outlier_scale must be positive")
        if self.ceiling_s is not None and self.ceiling_s <= 0:
            raise ConfigError("ceiling_s must be positive when given")

    def mean_s(self, regime: Regime) -> float:
        return self.mean_attack_s if regime == Regime.ATTACK else self.mean_normal_s

    def std_s(self, regime: Regime) -> float:
        var = self.var_attack_s2 if regime == Regime.ATTACK else self.var_normal_s2
        return float(np.sqrt(var))

    def floor_s(self, regime: Regime) -> float:
        return self.mean_s(regime) / 100.0


@dataclass(eq=False)
class RngStream:
    """A deterministic random stream identified by (seed, stream_id).

    The same pair always yields the identical sample sequence (PCG64 seeded
    through SeedSequence, which is stable across platforms). A stream is
    single-owner: share the ids, not the object. Subsystems get distinct
    stream_ids; see pipeline.py for the registry.
    """

    seed: int
    stream_id: int = 0
    _gen: np.random.Generator | None = field(default=None, repr=False)

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            ss = np.random.SeedSequence((int(self.seed), int(self.stream_id)))
            self._gen = np.random.Generator(np.random.PCG64(ss))
        return self._gen


def substream(stream: RngStream, key: int) -> RngStream:
    """Derive a related but independent stream. Composition is arithmetic
    (documented in pipeline.py), so derived ids stay reproducible."""
    return RngStream(stream.seed, stream.stream_id * 1009 + key)


def sample_service_times_ns(
    model: ServiceTimeModel, regime: Regime, n: int, rng: RngStream
) -> np.ndarray:
    """Draw n service times under the given regime, as int64 nanoseconds."""
    g = rng.generator
    mean = model.mean_s(regime)
    sd = model.std_s(regime)
    draws = g.normal(mean, sd, size=n) if sd > 0 else np.full(n, mean)
    if regime == Regime.ATTACK and model.outlier_prob > 0:
        hit = g.random(n) < model.outlier_prob
        draws = np.where(hit, draws * model.outlier_scale, draws)
    np.maximum(draws, model.floor_s(regime), out=draws)
    if model.ceiling_s is not None:
        np.minimum(draws, model.ceiling_s, out=draws)
    return to_ns(draws)


def sample_service_time(model: ServiceTimeModel, regime: Regime, rng: RngStream) -> float:
    """Single draw, in seconds. Vector work should use sample_service_times_ns."""
    return to_seconds(int(sample_service_times_ns(model, regime, 1, rng)[0]))
