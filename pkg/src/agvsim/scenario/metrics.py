"""Summary metrics and the results-table layout.

Definitions used here:

starting_time
    First time any sonar zone reads below the controller's FAR threshold (the
    range where the FAR term reaches full membership); 0 when no obstacle is
    ever sensed, the path itself then being the disturbance.
settling_time
    Time from ``starting_time`` until the heading error (relative to the
    local path tangent) enters the +-2 degree band for good. ``nan`` marks a
    run that ends outside the band.
settling_angle
    Largest |heading error| in degrees between ``starting_time`` and the
    settling instant. A run that never leaves the band reports 0 for both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .simulate import COLLISION, LINE_CROSS, TRACK_LOST, TrajectoryRecord

SETTLING_BAND_DEG = 2.0


@dataclass(frozen=True)
class Metrics:
    starting_time: float
    settling_angle: float
    settling_time: float  # nan when not settled
    max_cross_track: float
    line_cross: int = 0
    collision: int = 0
    track_lost: int = 0
    duration: float = 0.0

    @property
    def settled(self) -> bool:
        return not math.isnan(self.settling_time)

    @property
    def failed(self) -> bool:
        return bool(self.line_cross or self.collision)

    def table_row(self) -> tuple[float, float, float]:
        return self.starting_time, self.settling_angle, self.settling_time


def far_threshold(controller, default: float) -> float:
    """Range below which an obstacle counts as sensed."""
    for name in ("sonar_left", "sonar_center", "sonar_right"):
        try:
            var = controller.variable(name)
        except KeyError:
            continue
        if "FAR" in var.terms:
            return var.terms["FAR"].corners[1]
    return default


def compute_metrics(tr: TrajectoryRecord, scenario=None, far: float | None = None,
                    band_deg: float = SETTLING_BAND_DEG) -> Metrics:
    if len(tr) == 0:
        raise ValueError("empty trajectory")
    if far is None:
        far = (far_threshold(scenario.controller, scenario.sonar.max_range)
               if scenario is not None else math.inf)
    t = tr["t"]
    zones = np.column_stack([tr["sonar_left"], tr["sonar_center"], tr["sonar_right"]])
    sensed = np.flatnonzero((zones < far).any(axis=1))
    onset_idx = int(sensed[0]) if sensed.size else 0
    starting_time = float(t[onset_idx]) if sensed.size else 0.0

    err = np.degrees(np.abs(tr["heading_error"][onset_idx:]))
    outside = np.flatnonzero(err >= band_deg)
    if outside.size == 0:
        settling_angle, settling_time = 0.0, 0.0
    elif outside[-1] == err.size - 1:
        settling_angle, settling_time = float(err.max()), math.nan
    else:
        settle = outside[-1] + 1
        settling_angle = float(err[:settle].max())
        settling_time = float(t[onset_idx + settle] - t[onset_idx])

    ev = tr["events"].astype(int)
    return Metrics(starting_time, settling_angle, settling_time,
                   float(np.max(np.abs(tr["cross_track"]))),
                   int(np.count_nonzero(ev & LINE_CROSS)),
                   int(np.count_nonzero(ev & COLLISION)),
                   int(np.count_nonzero(ev & TRACK_LOST)),
                   float(t[-1]))


def _fmt(v: float) -> str:
    if isinstance(v, float) and math.isnan(v):
        return "not settled"
    return f"{v:.4g}"


def format_table(rows: list[tuple[str, Metrics]]) -> str:
    """Human-readable block: one line per run, 4 significant figures."""
    head = ("Direction of Vehicle", "Starting Time sec.", "Settling angle deg",
            "Settling time sec.")
    width = max([len(head[0])] + [len(n) for n, _ in rows]) + 2
    lines = [head[0].ljust(width) + "".join(h.ljust(20) for h in head[1:])]
    for name, m in rows:
        cells = [_fmt(m.starting_time), _fmt(m.settling_angle), _fmt(m.settling_time)]
        lines.append(name.ljust(width) + "".join(c.ljust(20) for c in cells))
    return "\n".join(line.rstrip() for line in lines)
