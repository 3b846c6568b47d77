"""Cost model of the mitigation: closed forms, sweeps, and Monte-Carlo
validation against the actual simulator.

Counting conventions. For a burst of X packets handled with window W and
skip m, the machine needs N = ceil((X - W)/(m + W)) windows beyond the one
that raised the alarm; with X random, E[N] ~ (E[X] - W)/(m + W) + 1/2.
Detector overhead is one window's worth of test time per such window,
Omega = N*tau*W. Total discards run delta = N*(m + W), overshooting X by
(m - W)/2 on average. The benign share of the discards must be reprocessed:
K ~ tau*W*[(1-f)*E[X]/W - 1/2 + m/(2W)], floor-clamped at zero. The total
C = alpha*K + beta*Omega trades the two against each other; see
mitigation.optimal_skip for the minimizer.
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .detector import DetectorModel, classify_stream
from .mitigation import FixedSkip, optimal_skip, run_mitigation
from .model import ConfigError, RngStream, substream, to_ns


@dataclass
class CostParams:
    """Inputs of the closed-form cost model."""

    alpha: float             # weight of reprocessing time (benign casualties)
    beta: float              # weight of detector overhead time
    attack_fraction: float   # f: attack share of arrivals during the burst
    test_time_s: float       # tau: detector time per packet
    window: int              # W
    expected_packets: float  # E[X]: total arrivals during the burst

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0:
            raise ConfigError("alpha and beta must be positive")
        if not 0.0 <= self.attack_fraction <= 1.0:
            raise ConfigError("attack_fraction must lie in [0, 1]")
        if self.test_time_s <= 0:
            raise ConfigError("test_time_s must be positive")
        if self.window < 1:
            raise ConfigError("window must be >= 1")
        if self.expected_packets < 0:
            raise ConfigError("expected_packets must be >= 0")

    @property
    def beta_over_alpha(self) -> float:
        return self.beta / self.alpha


@dataclass
class CostReport:
    expected_windows: float
    overhead_s: float
    dropped: float
    reprocessing_s: float
    total: float
    optimal: int


def exact_window_count(packets, window: int, skip):
    """Windows needed beyond the alarm window for a known burst of X packets:
    ceil((X - W)/(m + W)), zero when the burst fits one window."""
    x = np.asarray(packets, dtype=np.float64)
    m = np.asarray(skip, dtype=np.float64)
    n = np.ceil((x - window) / (m + window))
    n = np.where(x <= window, 0.0, n)
    if n.ndim == 0:
        return int(n)
    return n


def expected_window_count(expected_packets, window: int, skip):
    """First-order expectation of exact_window_count under random X."""
    ex = np.asarray(expected_packets, dtype=np.float64)
    m = np.asarray(skip, dtype=np.float64)
    if np.any(ex <= window):
        warnings.warn(
            "expected volume within one window; window count clamped at 0",
            stacklevel=2,
        )
    n = (ex - window) / (m + window) + 0.5
    n = np.maximum(n, 0.0)
    return float(n) if n.ndim == 0 else n


def expected_overhead_s(params: CostParams, skip):
    """E[Omega]: detector time spent on mitigation windows."""
    return params.test_time_s * params.window * expected_window_count(
        params.expected_packets, params.window, skip
    )


def exact_drop_count(n_windows, window: int, skip):
    """delta = N*(m + W): total packets discarded over N mitigation windows."""
    return np.asarray(n_windows, dtype=np.float64) * (np.asarray(skip, dtype=np.float64) + window)


def expected_drop_count(expected_packets, window: int, skip):
    """E[delta] ~ E[X] + (m - W)/2, clamped at zero."""
    d = np.asarray(expected_packets, dtype=np.float64) + (
        np.asarray(skip, dtype=np.float64) - window
    ) / 2.0
    d = np.maximum(d, 0.0)
    return float(d) if d.ndim == 0 else d


def expected_reprocessing_s(params: CostParams, skip):
    """E[K]: time to re-serve the benign packets caught in the drops.

    tau*W * [(1-f)*E[X]/W - 1/2 + m/(2W)], floor-clamped at zero (the
    bracket can go negative for tiny benign shares and small skips).
    """
    m = np.asarray(skip, dtype=np.float64)
    w = params.window
    bracket = (
        (1.0 - params.attack_fraction) * params.expected_packets / w
        - 0.5
        + m / (2.0 * w)
    )
    k = params.test_time_s * w * np.maximum(bracket, 0.0)
    return float(k) if k.ndim == 0 else k


def total_cost(params: CostParams, skip):
    """C = alpha*E[K] + beta*E[Omega]."""
    c = params.alpha * expected_reprocessing_s(params, skip) + params.beta * expected_overhead_s(
        params, skip
    )
    return float(c) if np.asarray(c).ndim == 0 else c


def cost_report(params: CostParams, skip: int) -> CostReport:
    return CostReport(
        expected_windows=expected_window_count(params.expected_packets, params.window, skip),
        overhead_s=expected_overhead_s(params, skip),
        dropped=expected_drop_count(params.expected_packets, params.window, skip),
        reprocessing_s=expected_reprocessing_s(params, skip),
        total=total_cost(params, skip),
        optimal=optimal_skip(params.window, params.beta_over_alpha, params.expected_packets)
        if params.expected_packets > params.window
        else 1,
    )


def brute_force_optimal(params: CostParams, max_skip: int = 4096) -> int:
    """Integer argmin of total_cost over 1..max_skip, by enumeration."""
    skips = np.arange(1, max_skip + 1, dtype=np.float64)
    costs = total_cost(params, skips)
    return int(skips[np.argmin(costs)])


def sweep_skip(params: CostParams, skips) -> list[CostReport]:
    """Closed-form cost table over a list of skip values."""
    skips = [int(m) for m in skips]
    if not skips:
        raise ValueError("skip sweep needs at least one value")
    return [cost_report(params, m) for m in skips]


def write_sweep_csv(path, skips, reports) -> None:
    """Columns: m,EN,EOmega_s,Edelta,EK_s,total_cost."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["m", "EN", "EOmega_s", "Edelta", "EK_s", "total_cost"])
        for m, r in zip(skips, reports):
            w.writerow(
                [
                    int(m),
                    f"{r.expected_windows:.6f}",
                    f"{r.overhead_s:.9f}",
                    f"{r.dropped:.6f}",
                    f"{r.reprocessing_s:.9f}",
                    f"{r.total:.9f}",
                ]
            )


@dataclass
class CostTrial:
    run: int
    stream_key: int
    realized_cost: float
    benign_dropped: int
    mitigation_windows: int


@dataclass
class McCost:
    skip: int
    trials: list
    mean_cost: float
    std_cost: float
    ci95_halfwidth: float


def monte_carlo_cost(scenario, skip: int, runs: int, rng: RngStream) -> McCost:
    """Realized mitigation cost over seeded runs of a one-flood scenario.

    Each run generates fresh traffic from run-indexed substreams (common
    random numbers across skip values, so sweep points are comparable) and
    runs the index machine with a fixed skip. The run is then priced with
    the cost function at its realized quantities: X = arrivals during the
    flood interval, B = benign packets actually dropped, and N = windows
    tested in mitigation mode. Reprocessing charges B plus the commitment
    overhang delta - X, where delta = ceil((X-W)/(m+W)) * (m+W) prices the
    skipped spans at full length; the machine itself hands the last span
    back on the closing clear verdict, so counting only realized drops
    would hide the cost of over-skipping entirely. Rounded up to whole
    windows:

        cost = alpha * tau*W * ceil((B + max(0, delta - X)) / W)
             + beta * N * tau*W

    Aggregation uses math.fsum, so results do not depend on summation order.
    """
    from .scenario import build_trace  # late import; scenario builds on this module's types

    if runs < 1:
        raise ValueError("runs must be >= 1")
    if len(scenario.floods) != 1:
        raise ConfigError("the cost experiment needs a scenario with exactly one flood")
    flood = scenario.floods[0]
    lo, hi = to_ns(flood.start_s), to_ns(flood.end_s)
    w = scenario.detector.window
    tau = scenario.tau_s
    trials: list[CostTrial] = []
    for r in range(runs):
        run_key = (r + 1) * 1000
        trace = build_trace(scenario, rng, run_key)
        det_rng = substream(rng, run_key + 3)
        labels = classify_stream(trace.klass, scenario.detector, det_rng)
        res = run_mitigation(
            trace, scenario.detector, w, FixedSkip(int(skip)), labels=labels
        )
        b = res.state.benign_dropped
        mwin = res.state.mitigation_windows
        x_flood = int(np.searchsorted(trace.arrival_ns, hi, side="left")
                      - np.searchsorted(trace.arrival_ns, lo, side="left"))
        n_cover = exact_window_count(x_flood, w, int(skip))
        overhang = max(0, exact_drop_count(n_cover, w, int(skip)) - x_flood)
        cost = (scenario.alpha * tau * w * math.ceil((b + overhang) / w)
                + scenario.beta * mwin * tau * w)
        trials.append(CostTrial(r, run_key, cost, b, mwin))
    costs = [t.realized_cost for t in trials]
    mean = math.fsum(costs) / runs
    if runs > 1:
        var = math.fsum((c - mean) ** 2 for c in costs) / (runs - 1)
        std = math.sqrt(var)
        ci = float(stats.t.ppf(0.975, runs - 1)) * std / math.sqrt(runs)
    else:
        std = 0.0
        ci = float("inf")
    return McCost(int(skip), trials, mean, std, ci)


def write_monte_carlo_csv(path, results) -> None:
    """Columns: m,run,seed,realized_cost,benign_dropped,windows_tested.

    The seed column holds the run's stream key (combined with the scenario
    seed it pins the run's randomness); windows_tested counts the windows
    that bear overhead cost, i.e. those tested in mitigation mode.
    """
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["m", "run", "seed", "realized_cost", "benign_dropped", "windows_tested"])
        for res in results:
            for t in res.trials:
                w.writerow(
                    [
                        res.skip,
                        t.run,
                        t.stream_key,
                        f"{t.realized_cost:.9f}",
                        t.benign_dropped,
                        t.mitigation_windows,
                    ]
                )
