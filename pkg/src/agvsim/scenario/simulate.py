"""Fixed-step closed-loop simulation."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from ..fuzzy import infer
from ..sensors import sonar_scan, vision_sample
from ..vehicle import MotorState, VehicleState, mix_commands, vehicle_step
from .model import Scenario

LINE_CROSS = 1
COLLISION = 2
TRACK_LOST = 4
EVENT_NAMES = {LINE_CROSS: "line_cross", COLLISION: "collision", TRACK_LOST: "track_lost"}

COLUMNS = ("t", "x", "y", "heading", "left_speed", "right_speed", "left_cmd", "right_cmd",
           "derived_offset", "derived_angle", "vision_valid", "sonar_left", "sonar_center",
           "sonar_right", "cross_track", "heading_error", "events")
_INT_COLUMNS = {"vision_valid", "events"}


class TrajectoryRecord:
    """Per-tick samples, one array per column (see ``COLUMNS``)."""

    def __init__(self, columns: dict[str, np.ndarray], termination: str = "duration",
                 name: str = ""):
        missing = [c for c in COLUMNS if c not in columns]
        if missing:
            raise ValueError(f"trajectory lacks columns {missing}")
        self.columns = {c: np.asarray(columns[c]) for c in COLUMNS}
        self.termination = termination
        self.name = name

    def __len__(self) -> int:
        return len(self.columns["t"])

    def __getitem__(self, col: str) -> np.ndarray:
        return self.columns[col]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(COLUMNS) + "\n")
        cols = [self.columns[c] for c in COLUMNS]
        for i in range(len(self)):
            cells = []
            for name, col in zip(COLUMNS, cols):
                v = col[i]
                cells.append(str(int(v)) if name in _INT_COLUMNS else repr(float(v)))
            buf.write(",".join(cells) + "\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, name: str = "") -> TrajectoryRecord:
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty trajectory file")
        header = lines[0].split(",")
        data = {h: [] for h in header}
        for lineno, ln in enumerate(lines[1:], start=2):
            cells = ln.split(",")
            if len(cells) != len(header):
                raise ValueError(f"line {lineno}: expected {len(header)} fields, got {len(cells)}")
            try:
                for h, c in zip(header, cells):
                    data[h].append(float(c))
            except ValueError:
                raise ValueError(f"line {lineno}: non-numeric field") from None
        cols = {h: np.array(v, dtype=int if h in _INT_COLUMNS else float) for h, v in data.items()}
        return cls(cols, name=name)

    def event_log(self) -> list[tuple[float, str, float, float]]:
        out = []
        for i in np.flatnonzero(self.columns["events"]):
            mask = int(self.columns["events"][i])
            for bit, label in EVENT_NAMES.items():
                if mask & bit:
                    out.append((float(self.columns["t"][i]), label,
                                float(self.columns["x"][i]), float(self.columns["y"][i])))
        return out


class EventDetector:
    """Tracks line crossings, collisions and loss of the line, tick by tick.

    A line crossing is counted when the vehicle, having been fully on one side
    of the line (|cross-track| > half-width), is next seen fully on the other
    side. Loss of track fires once when ``lost_after`` consecutive vision
    samples have been invalid.
    """

    def __init__(self, half_width: float, body_radius: float, lost_after: int = 10):
        self.half_width = half_width
        self.body_radius = body_radius
        self.lost_after = lost_after
        self.side = 0
        self.invalid_run = 0

    def update(self, cross_track: float, x: float, y: float, obstacles, t: float,
               vision_valid: bool | None = None) -> int:
        """Event bitmask for this tick. ``vision_valid`` is None between samples."""
        mask = 0
        if cross_track > self.half_width:
            side = 1
        elif cross_track < -self.half_width:
            side = -1
        else:
            side = 0
        if side and self.side and side != self.side:
            mask |= LINE_CROSS
        if side:
            self.side = side
        for ob in obstacles:
            if ob.is_active(t) and math.hypot(x - ob.x, y - ob.y) < ob.radius + self.body_radius:
                mask |= COLLISION
                break
        if vision_valid is not None:
            self.invalid_run = 0 if vision_valid else self.invalid_run + 1
            if self.invalid_run == self.lost_after:
                mask |= TRACK_LOST
        return mask

    @property
    def track_lost(self) -> bool:
        return self.invalid_run >= self.lost_after


def _due(k: int, dt: float, rate: float) -> bool:
    if k == 0:
        return True
    return math.floor(k * dt * rate + 1e-9) > math.floor((k - 1) * dt * rate + 1e-9)


def run_simulation(s: Scenario) -> TrajectoryRecord:
    """Run the closed loop from ``s.start`` and record every tick.

    Sensors and controller run at their own rates with zero-order hold. The
    last valid line measurement is held through vision dropouts; after
    ``track_lost_after`` consecutive invalid samples both wheels are sent to
    a slow straight fallback until the line is seen again. The run stops at
    ``duration``, on reaching the end of the path, or on collision.
    """
    seeds = np.random.SeedSequence(s.seed).spawn(2)
    rng_vision, rng_sonar = (np.random.default_rng(q) for q in seeds)
    params = s.vehicle
    state = VehicleState(*s.start, left=MotorState(), right=MotorState())
    detector = EventDetector(params.body_radius, params.body_radius, s.track_lost_after)
    n_steps = int(math.floor(s.duration / s.dt + 1e-9))
    fallback = s.fallback_speed_fraction * params.max_wheel_speed

    held_offset, held_angle, valid = 0.0, 0.0, False
    zones = (s.sonar.max_range,) * 3
    rows = {c: [] for c in COLUMNS}
    termination = "duration"
    for k in range(n_steps + 1):
        t = k * s.dt
        active = [ob for ob in s.obstacles if ob.is_active(t)]
        sampled = None
        if _due(k, s.dt, s.vision.rate):
            vs = vision_sample(s.vision, s.path, state, rng_vision)
            valid = sampled = vs.valid
            if vs.valid:
                held_offset, held_angle = vs.derived_offset, vs.derived_angle
        if _due(k, s.dt, s.sonar.rate):
            zones = sonar_scan(s.sonar, active, state, rng_sonar).zones

        proj = s.path.project(state.x, state.y)
        events = detector.update(proj.cross_track, state.x, state.y, active, t, sampled)

        if _due(k, s.dt, s.control_rate):
            if detector.track_lost:
                targets = (fallback, fallback)
            else:
                res = infer(s.controller, {"line_offset": held_offset, "line_angle": held_angle,
                                           "sonar_left": zones[0], "sonar_center": zones[1],
                                           "sonar_right": zones[2], "speed_ref": s.speed_ref})
                out = res.as_dict()
                targets = mix_commands(out["steer_bias"], out["left_speed"],
                                       out["right_speed"], params)
            state = state.with_targets(*targets)

        heading_error = math.remainder(state.heading - proj.tangent, 2 * math.pi)
        for col, v in zip(COLUMNS, (t, state.x, state.y, state.heading, state.left.speed,
                                    state.right.speed, state.left.target, state.right.target,
                                    held_offset, held_angle, int(valid), zones[0], zones[1],
                                    zones[2], proj.cross_track, heading_error, events)):
            rows[col].append(v)

        if events & COLLISION:
            termination = "collision"
            break
        if proj.s >= s.path.length - 1e-9:
            termination = "path_complete"
            break
        if k < n_steps:
            state = vehicle_step(state, params, s.dt)

    cols = {c: np.array(v, dtype=int if c in _INT_COLUMNS else float) for c, v in rows.items()}
    return TrajectoryRecord(cols, termination, s.name)
