"""End-to-end scenario runs: traffic -> mitigation -> shaper -> server.

Stages are wired in stream order. With mitigation on, each packet first
gets an outcome (dropped at a verdict, or released at some instant); the
released stream is then paced onto the link and served FCFS on the far
side. Without the shaper the arrivals hit the server raw, and the service
distribution switches to its attack regime inside flood windows.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
import csv

import numpy as np

from .mitigation import (
    AdaptiveSkip,
    FixedSkip,
    MitigationResult,
    run_mitigation,
    write_events_csv,
)
from .model import InvariantViolation, RngStream, Trace, substream, to_ns
from .pacing import forward_times, peak_occupancy, shaping_queue_timeline
from .scenario import Scenario, build_trace
from .server import (
    NORMAL_ALWAYS,
    RegimeSchedule,
    ServerTrace,
    simulate_server,
    write_server_trace_csv,
    write_timeline_csv,
)
from .traffic import write_trace_csv

# rng substream keys, offset by the run key (see scenario.build_trace)
STREAM_BENIGN = 1
STREAM_SERVICE = 2
STREAM_DETECTOR = 3
STREAM_FLOOD_BASE = 10


@dataclass
class SimulationResult:
    scenario: Scenario
    trace: Trace
    mitigation: MitigationResult | None
    emit_ns: np.ndarray        # instant each packet left for the server, -1 if dropped
    server: ServerTrace
    sqf_timeline: tuple | None  # (times_ns, counts) at the shaper entrance
    server_timeline: tuple      # (times_ns, counts) at the server
    summary: dict


def _empty_timeline():
    return np.zeros(1, np.int64), np.zeros(1, np.int64)


def _flood_mask(flood_sched: RegimeSchedule, times_ns: np.ndarray) -> np.ndarray:
    pos = np.searchsorted(flood_sched._bounds, times_ns, side="right")
    return (pos % 2) == 1


def run_simulation(scenario: Scenario, run_key: int = 0) -> SimulationResult:
    scenario.validate()
    base = RngStream(scenario.seed, 0)
    trace = build_trace(scenario, base, run_key)
    n = len(trace)
    gap_ns = to_ns(scenario.pacing_gap_s)
    latency_ns = to_ns(scenario.link_latency_s)
    sample_dt_ns = to_ns(scenario.sample_dt_s)

    mit = None
    if scenario.aam_enabled and n:
        if scenario.skip_mode == "fixed":
            policy = FixedSkip(scenario.fixed_skip)
        else:
            policy = AdaptiveSkip(scenario.beta / scenario.alpha)
        mit = run_mitigation(
            trace,
            scenario.detector,
            scenario.detector.window,
            policy,
            substream(base, run_key + STREAM_DETECTOR),
            test_pacing_ns=gap_ns,
        )
        released = ~mit.dropped_mask()
        release_ns = mit.release_ns
    else:
        released = np.ones(n, bool)
        release_ns = trace.arrival_ns

    # pace the released stream in (release instant, seq) order
    rel_idx = np.flatnonzero(released)
    order = np.argsort(release_ns[rel_idx], kind="stable")
    rel_idx = rel_idx[order]
    rel_times = release_ns[rel_idx]
    if scenario.sqf_enabled:
        emitted = forward_times(rel_times, gap_ns)
    else:
        emitted = rel_times
    emit_ns = np.full(n, -1, np.int64)
    emit_ns[rel_idx] = emitted

    flood_sched = RegimeSchedule(
        [(to_ns(f.start_s), to_ns(f.end_s)) for f in scenario.floods]
    )
    serve_sched = NORMAL_ALWAYS if scenario.sqf_enabled else flood_sched

    scale = None
    if scenario.drain_slowdown > 1 and scenario.floods:
        in_flood = _flood_mask(flood_sched, trace.arrival_ns[rel_idx])
        scale = np.where(in_flood, scenario.drain_slowdown, 1.0)

    server = simulate_server(
        emitted + latency_ns,
        scenario.service,
        serve_sched,
        substream(base, run_key + STREAM_SERVICE),
        service_scale=scale,
        seq=rel_idx,
    )

    if len(server) != len(rel_idx):
        raise InvariantViolation("served packet count diverged from forwarded count")
    dropped = int(mit.state.packets_dropped) if mit is not None else 0
    forwarded = int(mit.state.packets_forwarded) if mit is not None else n
    if dropped + forwarded != n or forwarded != len(rel_idx):
        raise InvariantViolation(
            f"packet conservation broken: {dropped} dropped + {forwarded} forwarded != {n}"
        )

    sqf_timeline = None
    if scenario.sqf_enabled and n:
        exit_ns = np.empty(n, np.int64)
        exit_ns[rel_idx] = emitted
        if mit is not None:
            dm = mit.dropped_mask()
            exit_ns[dm] = mit.drop_time_ns[dm]
        sqf_timeline = shaping_queue_timeline(trace.arrival_ns, exit_ns, sample_dt_ns)
        sqf_peak = peak_occupancy(trace.arrival_ns, exit_ns)
        sqf_max_delay_ns = int((emitted - trace.arrival_ns[rel_idx]).max()) if len(rel_idx) else 0
    elif scenario.sqf_enabled:
        sqf_timeline = _empty_timeline()
        sqf_peak = 0
        sqf_max_delay_ns = 0

    if n and len(server):
        server_timeline = server.queue_timeline(sample_dt_ns)
        server_peak = peak_occupancy(server.arrival_ns, server.departure_ns)
        max_wait_ns = int(server.wait_ns.max())
        mean_wait_ns = float(server.wait_ns.mean())
        makespan_ns = int(server.departure_ns.max())
    else:
        server_timeline = _empty_timeline()
        server_peak = 0
        max_wait_ns = 0
        mean_wait_ns = 0.0
        makespan_ns = 0

    summary = {
        "packets_total": n,
        "packets_attack": trace.attack_count(),
        "packets_benign": n - trace.attack_count(),
        "sqf_enabled": int(scenario.sqf_enabled),
        "aam_enabled": int(scenario.aam_enabled),
        "packets_forwarded": forwarded,
        "packets_dropped": dropped,
        "server_peak_queue": server_peak,
        "server_max_wait_s": max_wait_ns / 1e9,
        "server_mean_wait_s": mean_wait_ns / 1e9,
        "makespan_s": makespan_ns / 1e9,
    }
    if scenario.sqf_enabled:
        summary["sqf_peak_queue"] = sqf_peak
        summary["sqf_max_delay_s"] = sqf_max_delay_ns / 1e9
    if mit is not None:
        st = mit.state
        summary.update(
            benign_dropped=st.benign_dropped,
            attack_dropped=st.attack_dropped,
            windows_tested=st.windows_tested,
            mitigation_windows=st.mitigation_windows,
            attack_episodes=st.episodes,
            final_skip=st.skip,
        )

    return SimulationResult(
        scenario=scenario,
        trace=trace,
        mitigation=mit,
        emit_ns=emit_ns,
        server=server,
        sqf_timeline=sqf_timeline,
        server_timeline=server_timeline,
        summary=summary,
    )


def write_summary_csv(path, summary: dict) -> None:
    """Columns: key,value. Floats carry 9 fractional digits."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["key", "value"])
        for key, val in summary.items():
            if isinstance(val, float):
                w.writerow([key, f"{val:.9f}"])
            else:
                w.writerow([key, int(val)])


_GNUPLOT = """\
set datafile separator ','
set terminal pngcairo size 1100,700
set output 'queues.png'
set key outside
set xlabel 'time (s)'
set ylabel 'queue length'
plot {series}
"""


def write_outputs(result: SimulationResult, out_dir, gnuplot: bool = False) -> list:
    """Write the run's CSV files into out_dir and return their paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def emit(name, writer, *args):
        path = out / name
        writer(path, *args)
        written.append(path)

    emit("trace.csv", write_trace_csv, result.trace)
    emit("server_trace.csv", write_server_trace_csv, result.server)
    emit("server_timeline.csv", write_timeline_csv, *result.server_timeline)
    if result.sqf_timeline is not None:
        emit("sqf_timeline.csv", write_timeline_csv, *result.sqf_timeline)
    if result.mitigation is not None:
        emit("aam_events.csv", write_events_csv, result.mitigation.events)
    emit("summary.csv", write_summary_csv, result.summary)

    if gnuplot:
        series = ["'server_timeline.csv' skip 1 using 1:2 with steps title 'server queue'"]
        if result.sqf_timeline is not None:
            series.insert(
                0, "'sqf_timeline.csv' skip 1 using 1:2 with steps title 'shaper input queue'"
            )
        path = out / "plots.gp"
        path.write_text(_GNUPLOT.format(series=", \\\n     ".join(series)))
        written.append(path)
    return written
