# Running the bundled scenarios
#
# Four courses ship with the package: a straight line, a curve, an angular
# polyline with sensor noise and obstacles, and a deliberately extreme course
# the vehicle is expected to fail. Each run gives a trajectory; the summary
# metrics are collected into the results table.

from agvsim.scenario import BUNDLED, compute_metrics, format_table, load_scenario, run_simulation

rows = []
for name in BUNDLED:
    s = load_scenario(name)
    tr = run_simulation(s)
    m = compute_metrics(tr, s)
    rows.append((name, m))
    print(f"{name:22s} ended by {tr.termination:14s} after {m.duration:6.2f} s, "
          f"max |cross-track| {m.max_cross_track:.3f} m, "
          f"line_cross {m.line_cross}, collision {m.collision}, track_lost {m.track_lost}")

print()
print(format_table(rows))

# Halving the time step barely moves the end point of the curved course.

import math

s = load_scenario("case2_curved")
a = run_simulation(s)
b = run_simulation(s.with_overrides(dt=s.dt / 2))
print("\nend point shift after halving dt (m):",
      math.hypot(a["x"][-1] - b["x"][-1], a["y"][-1] - b["y"][-1]))
