"""Scenario definition and scenario-file loading.

Scenario files are TOML. Angles are written in degrees (keys ending in
``_deg``) and converted to radians here; everything inside the package works
in radians. See ``agvsim/data/scenarios/*.toml`` for complete examples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path as FsPath
from typing import NamedTuple

from .._toml import TOMLDecodeError, error_line, loads
from ..camera import CameraModel, calibrate, read_correspondences
from ..errors import ConfigError, RuleBaseError, ScenarioInvalid
from ..fuzzy import FuzzyController, load_rulebase
from ..sensors import SonarConfig, VisionConfig
from ..vehicle import MAX_DT, VehicleParams
from .path import Path

REQUIRED_INPUTS = ("line_offset", "line_angle", "sonar_left", "sonar_center",
                   "sonar_right", "speed_ref")
REQUIRED_OUTPUTS = ("steer_bias", "left_speed", "right_speed")
BUNDLED = ("case1_straight", "case2_curved", "case3_angular_noise", "case4_extreme")


class Obstacle(NamedTuple):
    x: float
    y: float
    radius: float
    active: tuple[float, float] | None = None

    def is_active(self, t: float) -> bool:
        return self.active is None or self.active[0] <= t <= self.active[1]


@dataclass(frozen=True, eq=False)
class Scenario:
    path: Path
    controller: FuzzyController
    name: str = "scenario"
    obstacles: tuple[Obstacle, ...] = ()
    vehicle: VehicleParams = field(default_factory=VehicleParams)
    start: tuple[float, float, float] = (0.0, 0.0, 0.0)
    speed_ref: float = 0.5
    vision: VisionConfig = field(default_factory=VisionConfig)
    sonar: SonarConfig = field(default_factory=SonarConfig)
    controller_ref: str = "default"
    dt: float = 0.01
    duration: float = 30.0
    seed: int = 0
    control_rate: float = 10.0
    track_lost_after: int = 10
    fallback_speed_fraction: float = 0.2

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise ScenarioInvalid("; ".join(problems))

    def problems(self) -> list[str]:
        out = []
        if not 0 < self.dt <= MAX_DT:
            out.append(f"dt must lie in (0, {MAX_DT}], got {self.dt}")
        if not (math.isfinite(self.duration) and self.duration >= 0):
            out.append(f"duration must be >= 0, got {self.duration}")
        if not self.control_rate > 0:
            out.append("control_rate must be positive")
        if self.track_lost_after < 1:
            out.append("track_lost_after must be >= 1")
        missing = [n for n in REQUIRED_INPUTS if n not in self.controller.input_names]
        missing += [n for n in REQUIRED_OUTPUTS if n not in self.controller.output_names]
        if missing:
            out.append(f"controller lacks variables {missing}")
        if self.vision.camera.is_singular():
            out.append("camera model is singular")
        return out

    def with_overrides(self, seed=None, dt=None, duration=None) -> Scenario:
        kw = {k: v for k, v in (("seed", seed), ("dt", dt), ("duration", duration))
              if v is not None}
        return replace(self, **kw) if kw else self


# -- file loading -------------------------------------------------------------

def _locator(text: str):
    lines = text.splitlines()

    def find(section: str | None, key: str | None = None) -> int | None:
        start = 0
        if section:
            for i, line in enumerate(lines):
                s = line.strip()
                if s in (f"[{section}]", f"[[{section}]]"):
                    start = i
                    break
        if key is None:
            return start + 1
        for i in range(start, len(lines)):
            s = lines[i].strip()
            if s.startswith(key) and s[len(key):].lstrip().startswith("="):
                return i + 1
        return None

    return find


class _Section:
    """Dict wrapper that tracks used keys and reports errors with line numbers."""

    def __init__(self, data: dict, name: str | None, src, find):
        self.data, self.name, self.src, self.find = data, name, src, find
        self.used: set[str] = set()

    def fail(self, key: str | None, message: str):
        label = f"{self.name}.{key}" if self.name and key else (key or self.name or "")
        raise ScenarioInvalid(f"{label}: {message}" if label else message,
                              self.src, self.find(self.name, key))

    def get(self, key: str, default=None, kind=float):
        self.used.add(key)
        if key not in self.data:
            return default
        value = self.data[key]
        try:
            if kind is float:
                if isinstance(value, bool):
                    raise TypeError
                value = float(value)
                if not math.isfinite(value):
                    raise ValueError
            elif kind is int:
                if isinstance(value, bool) or not isinstance(value, int):
                    raise TypeError
            elif kind is not None:
                value = kind(value)
        except (TypeError, ValueError):
            self.fail(key, f"invalid value {value!r}")
        return value

    def sub(self, key: str) -> _Section:
        self.used.add(key)
        value = self.data.get(key, {})
        if not isinstance(value, dict):
            self.fail(key, "expected a table")
        name = f"{self.name}.{key}" if self.name else key
        return _Section(value, name, self.src, self.find)

    def finish(self):
        extra = sorted(set(self.data) - self.used)
        if extra:
            self.fail(extra[0], "unknown key")


def _floats(section: _Section, key: str, n: int | None, default=None):
    raw = section.get(key, default, kind=None)
    if raw is None:
        return None
    try:
        vals = tuple(float(v) for v in raw)
    except (TypeError, ValueError):
        section.fail(key, f"expected a list of numbers, got {raw!r}")
    if n is not None and len(vals) != n:
        section.fail(key, f"expected {n} numbers, got {len(vals)}")
    if not all(math.isfinite(v) for v in vals):
        section.fail(key, "values must be finite")
    return vals


def _pose(section: _Section, key: str, default=(0.0, 0.0, 0.0)):
    x, y, hdeg = _floats(section, key, 3, default)
    return x, y, math.radians(hdeg)


def _resolve(base: FsPath | None, ref: str) -> FsPath:
    p = FsPath(ref)
    if not p.is_absolute() and base is not None:
        p = base / p
    return p


def parse_scenario(text: str, src=None, base_dir: FsPath | None = None) -> Scenario:
    try:
        doc = loads(text)
    except TOMLDecodeError as exc:
        raise ScenarioInvalid(str(exc), src, error_line(exc)) from None
    find = _locator(text)
    top = _Section(doc, None, src, find)

    # path
    ps = top.sub("path")
    segments = []
    raw_segments = ps.get("segments", [], kind=None)
    if not isinstance(raw_segments, list) or not raw_segments:
        ps.fail("segments", "need a non-empty list of segments")
    for i, seg in enumerate(raw_segments):
        if not isinstance(seg, dict):
            ps.fail("segments", f"segment {i} is not a table")
        seg = dict(seg)
        if "sweep_deg" in seg:
            seg["sweep"] = math.radians(float(seg.pop("sweep_deg")))
        allowed = {"type", "length", "radius", "sweep", "points"}
        if set(seg) - allowed:
            ps.fail("segments", f"segment {i}: unknown keys {sorted(set(seg) - allowed)}")
        segments.append(seg)
    path_start = _pose(ps, "start")
    ps.finish()
    try:
        path = Path(path_start, segments)
    except (ValueError, KeyError, TypeError) as exc:
        ps.fail("segments", str(exc))

    # vehicle
    vs = top.sub("vehicle")
    start = _pose(vs, "start", (path_start[0], path_start[1], math.degrees(path_start[2])))
    vkw = {}
    for key in ("wheel_base", "body_radius", "max_wheel_speed", "motor_zeta", "motor_omega_n"):
        v = vs.get(key)
        if v is not None:
            vkw[key] = v
    vs.finish()
    try:
        vehicle = VehicleParams(**vkw)
    except ValueError as exc:
        vs.fail(None, str(exc))

    # vision
    vi = top.sub("vision")
    cam_s = vi.sub("camera")
    zg = cam_s.get("zg_fixed", -0.3)
    coeffs = cam_s.get("coefficients", kind=None)
    calib = cam_s.get("calibration", kind=str)
    cam_s.finish()
    if coeffs is not None and calib is not None:
        cam_s.fail("calibration", "give either coefficients or calibration, not both")
    if coeffs is not None:
        try:
            rows = [[float(v) for v in r] for r in coeffs]
            if len(rows) != 2 or any(len(r) != 4 for r in rows):
                raise ValueError
        except (TypeError, ValueError):
            cam_s.fail("coefficients", "expected two rows of four numbers")
        camera = CameraModel.from_rows(rows[0], rows[1], zg)
    elif calib is not None:
        try:
            camera = calibrate(read_correspondences(_resolve(base_dir, calib)), zg)
        except ConfigError:
            raise
        except Exception as exc:  # DegenerateCalibration, InsufficientPoints
            cam_s.fail("calibration", str(exc))
    else:
        from ..camera import default_camera
        camera = default_camera(zg)
    vkw = dict(camera=camera)
    for key, name, kind in (("near_row", "window_near_row", int), ("far_row", "window_far_row", int),
                            ("sensor_width", "sensor_width", int),
                            ("sensor_height", "sensor_height", int),
                            ("pixel_noise_sigma", "pixel_noise_sigma", float),
                            ("dropout_probability", "dropout_probability", float),
                            ("rate", "rate", float)):
        v = vi.get(key, kind=kind)
        if v is not None:
            vkw[name] = v
    vi.finish()
    try:
        vision = VisionConfig(**vkw)
    except ValueError as exc:
        vi.fail(None, str(exc))

    # sonar
    so = top.sub("sonar")
    skw = {}
    bearings = _floats(so, "bearings_deg", 6)
    if bearings is not None:
        skw["bearings"] = tuple(math.radians(b) for b in bearings)
    cone = so.get("cone_half_angle_deg")
    if cone is not None:
        skw["cone_half_angle"] = math.radians(cone)
    for key in ("min_range", "max_range", "rate", "noise_sigma"):
        v = so.get(key)
        if v is not None:
            skw[key] = v
    so.finish()
    try:
        sonar = SonarConfig(**skw)
    except ValueError as exc:
        so.fail(None, str(exc))

    # obstacles
    obstacles = []
    raw_obs = top.get("obstacles", [], kind=None)
    if not isinstance(raw_obs, list):
        top.fail("obstacles", "expected an array of tables")
    for i, ob in enumerate(raw_obs):
        os_ = _Section(ob, "obstacles", src, find)
        cx, cy = _floats(os_, "center", 2)
        radius = os_.get("radius")
        active = _floats(os_, "active", 2)
        os_.finish()
        if radius is None or radius <= 0:
            os_.fail("radius", f"obstacle {i}: radius must be positive")
        obstacles.append(Obstacle(cx, cy, radius, active))

    controller_ref = top.get("controller", "default", kind=str)
    try:
        controller = load_rulebase(None if controller_ref == "default"
                                   else _resolve(base_dir, controller_ref))
    except RuleBaseError as exc:
        raise ScenarioInvalid(f"controller: {exc}", src, find(None, "controller")) from None

    kw = dict(
        name=top.get("name", FsPath(str(src)).stem if src else "scenario", kind=str),
        dt=top.get("dt", 0.01),
        duration=top.get("duration", 30.0),
        seed=top.get("seed", 0, kind=int),
        control_rate=top.get("control_rate", 10.0),
        speed_ref=top.get("speed_ref", 0.5),
        track_lost_after=top.get("track_lost_after", 10, kind=int),
        fallback_speed_fraction=top.get("fallback_speed_fraction", 0.2),
    )
    top.get("description", kind=str)
    top.finish()
    if kw["duration"] <= 0:
        raise ScenarioInvalid(f"duration must be > 0, got {kw['duration']}", src,
                              find(None, "duration"))
    try:
        return Scenario(path=path, controller=controller, obstacles=tuple(obstacles),
                        vehicle=vehicle, start=start, vision=vision, sonar=sonar,
                        controller_ref=controller_ref, **kw)
    except ScenarioInvalid as exc:
        raise ScenarioInvalid(exc.reason, src) from None


def load_scenario(ref) -> Scenario:
    """Load a scenario file, or a bundled scenario by name (``case1_straight``...)."""
    name = str(ref).removesuffix(".toml")
    if name in BUNDLED and not FsPath(ref).exists():
        text = resources.files("agvsim.data.scenarios").joinpath(f"{name}.toml").read_text()
        return parse_scenario(text, f"{name}.toml")
    p = FsPath(ref)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ScenarioInvalid(f"cannot read scenario ({exc.strerror})", p) from None
    return parse_scenario(text, p, p.parent)


def validate_duration(s: Scenario) -> Scenario:
    """Reject zero-length runs (allowed programmatically, not from files or the CLI)."""
    if s.duration <= 0:
        raise ScenarioInvalid(f"duration must be > 0, got {s.duration}")
    return s
