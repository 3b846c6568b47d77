"""FCFS server queueing via the Lindley recursion, exact in nanoseconds.

The waiting time obeys L_0 = 0, L_{n+1} = max(0, L_n + T_n - A_{n+1}) with
A_{n+1} the interarrival gap. A direct consequence worth naming: if the
arrival stream is paced at gap D and every service time satisfies T_n < D,
the wait never leaves zero -- the shaping gap provisions the server.

simulate_server draws service times from a regime-dependent model where the
regime is a function of wall-clock time (the load a real server sees while a
flood is in progress). The regime of packet n is decided by its service
*start* instant, which itself depends on earlier waits, so the simulation
walks the stream in regime-constant chunks, each chunk fully vectorized.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import Regime, RngStream, ServiceTimeModel, to_ns
from .pacing import queue_timeline


def lindley_waits(arrival_ns, service_ns) -> np.ndarray:
    """Waiting times of an FCFS queue (int64 ns), one per packet.

    Uses the reflection identity L_n = s_n - min_{k<=n} s_k over partial sums
    of u_n = T_n - A_{n+1}; exact integer arithmetic, no drift.
    """
    a = np.asarray(arrival_ns, dtype=np.int64)
    t = np.asarray(service_ns, dtype=np.int64)
    if a.shape != t.shape:
        raise ValueError("arrivals and services must have equal length")
    if len(a) == 0:
        return a.copy()
    if np.any(np.diff(a) < 0):
        raise ValueError("arrivals must be sorted")
    if np.any(t < 0):
        raise ValueError("service times must be nonnegative")
    u = t[:-1] - np.diff(a)
    s = np.concatenate(([np.int64(0)], np.cumsum(u)))
    return s - np.minimum.accumulate(s)


def _lindley_from(a: np.ndarray, t: np.ndarray, initial_wait: int) -> np.ndarray:
    """Lindley waits over a stream fragment whose first packet already waits
    initial_wait. Used by the chunked simulation."""
    n = len(a)
    out = np.empty(n, np.int64)
    out[0] = initial_wait
    if n == 1:
        return out
    u = t[:-1] - np.diff(a)
    s = np.cumsum(u)
    run_min = np.minimum.accumulate(s)
    np.maximum(s + initial_wait, s - run_min, out=out[1:])
    return out


@dataclass
class RegimeSchedule:
    """Piecewise regime over time: Attack inside any [start, end) window,
    Normal elsewhere. Windows are merged and sorted on construction."""

    attack_windows_ns: list

    def __post_init__(self):
        wins = sorted((int(s), int(e)) for s, e in self.attack_windows_ns)
        merged: list[tuple[int, int]] = []
        for s, e in wins:
            if e <= s:
                raise ValueError("attack window must have positive length")
            if merged and s <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(merged[-1][1], e))
            else:
                merged.append((s, e))
        self.attack_windows_ns = merged
        self._bounds = np.array([b for w in merged for b in w], dtype=np.int64)

    def regime_at(self, t_ns: int) -> Regime:
        k = int(np.searchsorted(self._bounds, t_ns, side="right"))
        return Regime.ATTACK if k % 2 == 1 else Regime.NORMAL

    def next_boundary(self, t_ns: int):
        """Smallest window boundary strictly after t, or None."""
        k = int(np.searchsorted(self._bounds, t_ns, side="right"))
        if k >= len(self._bounds):
            return None
        return int(self._bounds[k])

    def __call__(self, t_ns: int) -> Regime:
        return self.regime_at(t_ns)


NORMAL_ALWAYS = RegimeSchedule([])


@dataclass
class ServerTrace:
    """Per-packet result of a server run, in service (arrival) order."""

    seq: np.ndarray         # original stream seq of each served packet
    arrival_ns: np.ndarray  # arrival at the server
    wait_ns: np.ndarray
    service_ns: np.ndarray

    def __len__(self) -> int:
        return len(self.arrival_ns)

    @property
    def departure_ns(self) -> np.ndarray:
        return self.arrival_ns + self.wait_ns + self.service_ns

    def queue_timeline(self, sample_dt_ns: int = to_ns(0.1), t_start_ns: int = 0, t_end_ns=None):
        """Sampled queue length, counting waiting plus in-service packets."""
        return queue_timeline(self.arrival_ns, self.departure_ns, sample_dt_ns, t_start_ns, t_end_ns)


def simulate_server(
    arrival_ns,
    model: ServiceTimeModel,
    schedule: RegimeSchedule,
    rng: RngStream,
    service_scale=None,
    seq=None,
) -> ServerTrace:
    """Serve a stream FCFS, sampling each service time under the regime in
    force at that packet's service start.

    service_scale, if given, is a per-packet multiplier applied to the
    sampled times (>= 1 ns enforced); it must be indexed like the arrivals.
    One standard normal and one uniform are pre-drawn per packet, so the
    consumed randomness does not depend on where regime boundaries fall.
    """
    a = np.asarray(arrival_ns, dtype=np.int64)
    n = len(a)
    if seq is None:
        seq = np.arange(n, dtype=np.int64)
    else:
        seq = np.asarray(seq, dtype=np.int64)
    if n and np.any(np.diff(a) < 0):
        raise ValueError("arrivals must be sorted")
    if service_scale is not None:
        service_scale = np.asarray(service_scale, dtype=np.float64)
        if service_scale.shape != a.shape:
            raise ValueError("service_scale must align with arrivals")
    waits = np.empty(n, np.int64)
    services = np.empty(n, np.int64)
    if n == 0:
        return ServerTrace(seq, a, waits, services)

    g = rng.generator
    z = g.standard_normal(n)
    u = g.random(n)

    def transform(lo: int, regime: Regime) -> np.ndarray:
        draws = model.mean_s(regime) + model.std_s(regime) * z[lo:]
        if regime == Regime.ATTACK and model.outlier_prob > 0:
            hit = u[lo:] < model.outlier_prob
            draws = np.where(hit, draws * model.outlier_scale, draws)
        np.maximum(draws, model.floor_s(regime), out=draws)
        if model.ceiling_s is not None:
            np.minimum(draws, model.ceiling_s, out=draws)
        ns = to_ns(draws)
        if service_scale is not None:
            ns = np.maximum(np.rint(ns * service_scale[lo:]).astype(np.int64), 1)
        return ns

    idx = 0
    wait = 0
    while idx < n:
        start0 = int(a[idx]) + wait
        regime = schedule.regime_at(start0)
        bound = schedule.next_boundary(start0)
        t_cand = transform(idx, regime)
        w_cand = _lindley_from(a[idx:], t_cand, wait)
        if bound is None:
            take = n - idx
        else:
            starts = a[idx:] + w_cand
            take = int(np.searchsorted(starts, bound, side="left"))
            # the first packet's start defines the regime, so it always fits
            assert take >= 1
        waits[idx : idx + take] = w_cand[:take]
        services[idx : idx + take] = t_cand[:take]
        if idx + take < n:
            wait = int(w_cand[take])
        idx += take
    return ServerTrace(seq, a, waits, services)


def write_server_trace_csv(path, trace: ServerTrace) -> None:
    """Columns: seq,arrival_s,wait_s,service_s,departure_s (9-digit seconds)."""
    dep = trace.departure_ns
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["seq", "arrival_s", "wait_s", "service_s", "departure_s"])
        for k in range(len(trace)):
            w.writerow(
                [
                    int(trace.seq[k]),
                    f"{trace.arrival_ns[k] / 1e9:.9f}",
                    f"{trace.wait_ns[k] / 1e9:.9f}",
                    f"{trace.service_ns[k] / 1e9:.9f}",
                    f"{dep[k] / 1e9:.9f}",
                ]
            )


def write_timeline_csv(path, times_ns, counts) -> None:
    """Columns: time_s,queue_len."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time_s", "queue_len"])
        for t, q in zip(np.asarray(times_ns), np.asarray(counts)):
            w.writerow([f"{int(t) / 1e9:.9f}", int(q)])
