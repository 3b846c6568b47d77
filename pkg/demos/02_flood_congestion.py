# Run the congestion scenario twice, with and without the shaper, and
# compare where the flood's backlog ends up.
#
# Without shaping every flood packet lands on the server at once and the
# server queue explodes. With shaping the same packets sit at the source
# and trickle out one per gap, so the server never sees more than a
# handful, and after the flood stops the backlog drains at exactly one
# packet per gap.

import dataclasses
from pathlib import Path

import numpy as np

from floodsim import load_scenario, run_simulation, to_seconds

scn = load_scenario(Path(__file__).resolve().parent.parent / "scenarios" / "congestion.cfg")

shaped = run_simulation(scn)
raw = run_simulation(dataclasses.replace(scn, sqf_enabled=False))

n = len(shaped.trace.arrival_ns)
print(f"packets generated:            {n}")
print(f"flood window:                 {scn.floods[0].start_s:.0f} s to {scn.floods[0].end_s:.0f} s")
print()
print(f"server peak queue, raw:       {raw.summary['server_peak_queue']}")
print(f"server peak queue, shaped:    {shaped.summary['server_peak_queue']}")
print(f"shaper peak backlog:          {shaped.summary['sqf_peak_queue']}")
print(f"max server wait, raw:         {to_seconds(int(raw.server.wait_ns.max())):.3f} s")
print(f"max server wait, shaped:      {to_seconds(int(shaped.server.wait_ns.max())):.3f} s")
print()

# drain rate after the flood ends: slope of the shaper backlog, packets/s
times_ns, counts = shaped.sqf_timeline
ts = times_ns / 1e9
sel = (ts >= 90.0) & (ts <= 390.0)
slope = np.polyfit(ts[sel], counts[sel].astype(float), 1)[0]
print(f"shaper drain rate:            {-slope:.2f} packets/s")
print(f"1 / pacing gap:               {1.0 / scn.pacing_gap_s:.2f} packets/s")
after_peak = np.argmax(counts) + np.argmax(counts[np.argmax(counts):] == 0)
print(f"backlog gone by:              {to_seconds(int(times_ns[after_peak])):.1f} s")
