"""The paced forwarder: spaces an arrival stream so consecutive departures
are at least one gap apart, plus queue-length timelines for any FIFO stage.

Forwarding recursion: t_0 = a_0, t_{n+1} = max(t_n + gap, a_{n+1}). The
shaping delay q_n = t_n - a_n obeys its own reflected recursion
q_{n+1} = max(0, q_n + gap - (a_{n+1} - a_n)); both are implemented as
independent closed forms over int64 nanoseconds and cross-checked in tests.

Queue-occupancy convention used throughout the library: a packet occupies a
stage during the closed interval [entry, exit], i.e. a sample taken exactly
at the exit instant still counts the departing packet. A packet forwarded at
its own arrival instant therefore contributes one sample-visible unit only
when a sample lands exactly on it.
"""
from __future__ import annotations

import numpy as np

from .model import to_ns


def _as_times(x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.int64)
    if arr.ndim != 1:
        raise ValueError("expected a 1-d array of nanosecond times")
    return arr


def forward_times(arrival_ns, gap_ns: int) -> np.ndarray:
    """Departure instants of the paced forwarder (int64 ns).

    Closed form: t_n = n*gap + max_{k<=n}(a_k - k*gap), exact in integers.
    """
    a = _as_times(arrival_ns)
    gap = int(gap_ns)
    if gap <= 0:
        raise ValueError("pacing gap must be positive")
    if len(a) == 0:
        return a.copy()
    if np.any(np.diff(a) < 0):
        raise ValueError("arrivals must be sorted")
    k = np.arange(len(a), dtype=np.int64)
    shifted = a - k * gap
    return k * gap + np.maximum.accumulate(shifted)


def pacing_delays(arrival_ns, gap_ns: int) -> np.ndarray:
    """Per-packet shaping delay q_n (int64 ns), via the reflected recursion.

    Implemented independently of forward_times: with u_n = gap - (a_{n+1}-a_n)
    and partial sums s, the reflection gives q_n = s_n - min_{k<=n} s_k.
    """
    a = _as_times(arrival_ns)
    gap = int(gap_ns)
    if gap <= 0:
        raise ValueError("pacing gap must be positive")
    if len(a) == 0:
        return a.copy()
    if np.any(np.diff(a) < 0):
        raise ValueError("arrivals must be sorted")
    u = gap - np.diff(a)
    s = np.concatenate(([np.int64(0)], np.cumsum(u)))
    return s - np.minimum.accumulate(s)


def queue_timeline(entry_ns, exit_ns, sample_dt_ns: int, t_start_ns: int = 0, t_end_ns=None):
    """Sampled occupancy of a FIFO stage: count(entry <= t) - count(exit < t).

    entry/exit need not pair up one-to-one (drops remove packets through a
    different exit array); both must be sorted. The grid runs from t_start to
    at least one step past the last exit, so a drained stage ends at zero.
    Returns (times_ns, counts) as int64 arrays.
    """
    entry = _as_times(entry_ns)
    exits = _as_times(exit_ns)
    dt = int(sample_dt_ns)
    if dt <= 0:
        raise ValueError("sample_dt must be positive")
    last = int(t_start_ns)
    if len(entry):
        last = max(last, int(entry[-1]))
    if len(exits):
        last = max(last, int(exits[-1]))
    if t_end_ns is not None:
        last = max(last, int(t_end_ns))
    n_steps = (last - int(t_start_ns)) // dt + 2
    grid = int(t_start_ns) + dt * np.arange(n_steps, dtype=np.int64)
    n_in = np.searchsorted(entry, grid, side="right")
    n_out = np.searchsorted(exits, grid, side="left")
    return grid, (n_in - n_out).astype(np.int64)


def shaping_queue_timeline(arrival_ns, forward_ns, sample_dt_ns: int = to_ns(0.1)):
    """Queue length at the forwarder entrance, sampled every sample_dt.

    arrival and forward arrays must pair elementwise (same packets), so
    mismatched lengths are a precondition error.
    """
    a = _as_times(arrival_ns)
    t = _as_times(forward_ns)
    if len(a) != len(t):
        raise ValueError("arrival and forward arrays must have equal length")
    if np.any(t < a):
        raise ValueError("forwarding may not precede arrival")
    # counting only needs the multisets; held packets make t non-monotonic
    return queue_timeline(np.sort(a), np.sort(t), sample_dt_ns)


def peak_occupancy(entry_ns, exit_ns) -> int:
    """Exact maximum occupancy under the [entry, exit] closed convention
    (no sampling grid involved)."""
    entry = np.sort(_as_times(entry_ns))
    exits = np.sort(_as_times(exit_ns))
    if len(entry) == 0:
        return 0
    # +1 events sort before -1 events at equal times: the departing packet
    # still counts at its exit instant.
    times = np.concatenate([entry, exits])
    deltas = np.concatenate([np.ones(len(entry), np.int64), -np.ones(len(exits), np.int64)])
    order = np.lexsort((-deltas, times))
    running = np.cumsum(deltas[order])
    return int(running.max())
