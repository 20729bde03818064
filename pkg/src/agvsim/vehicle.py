"""Differential-drive kinematics and the wheel-speed servo response.

The motion board's PID loop is represented by its closed-loop behaviour: a
unit-gain underdamped second-order system whose damping ratio and natural
frequency are fitted to the measured step response (final value 0.5, peak
0.7 at 2.4 s).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from .geom2d import wrap_angle

STEP_FINAL = 0.5
STEP_PEAK = 0.7
STEP_PEAK_TIME = 2.4
MAX_DT = 0.05


def second_order_from_step(final: float, peak: float, peak_time: float) -> tuple[float, float]:
    """Damping ratio and natural frequency reproducing a step response peak.

    Uses the textbook relations ``Mp = exp(-zeta*pi/sqrt(1-zeta^2))`` and
    ``t_p = pi / (omega_n*sqrt(1-zeta^2))``.
    """
    overshoot = (peak - final) / final
    if not 0.0 < overshoot < 1.0:
        raise ValueError("peak must exceed the final value by less than 100%")
    log_mp = math.log(overshoot)
    zeta = -log_mp / math.sqrt(math.pi ** 2 + log_mp ** 2)
    omega_n = math.pi / (peak_time * math.sqrt(1.0 - zeta ** 2))
    return zeta, omega_n


DEFAULT_ZETA, DEFAULT_OMEGA_N = second_order_from_step(STEP_FINAL, STEP_PEAK, STEP_PEAK_TIME)


def step_overshoot(zeta: float) -> float:
    return math.exp(-zeta * math.pi / math.sqrt(1.0 - zeta * zeta))


@dataclass(frozen=True)
class VehicleParams:
    wheel_base: float = 0.5
    body_radius: float = 0.35
    max_wheel_speed: float = 1.0
    motor_zeta: float = DEFAULT_ZETA
    motor_omega_n: float = DEFAULT_OMEGA_N

    def __post_init__(self):
        if not self.wheel_base > 0:
            raise ValueError("wheel_base must be positive")
        if not self.max_wheel_speed > 0:
            raise ValueError("max_wheel_speed must be positive")
        if not 0 < self.motor_zeta < 1:
            raise ValueError("motor_zeta must lie in (0, 1)")
        if not self.motor_omega_n > 0:
            raise ValueError("motor_omega_n must be positive")
        if self.body_radius < 0:
            raise ValueError("body_radius must be non-negative")


@dataclass(frozen=True)
class MotorState:
    speed: float = 0.0
    speed_rate: float = 0.0
    target: float = 0.0


@dataclass(frozen=True)
class VehicleState:
    x: float = 0.0
    y: float = 0.0
    heading: float = 0.0
    left: MotorState = field(default_factory=MotorState)
    right: MotorState = field(default_factory=MotorState)

    def with_targets(self, left: float, right: float) -> VehicleState:
        return replace(self, left=replace(self.left, target=left),
                       right=replace(self.right, target=right))


def _check_dt(dt: float) -> None:
    if not 0.0 < dt <= MAX_DT:
        raise ValueError(f"dt must lie in (0, {MAX_DT}], got {dt}")


@lru_cache(maxsize=64)
def _transition(zeta: float, omega_n: float, dt: float) -> np.ndarray:
    # state (speed, rate, target, integral of speed); target held over the step
    a = np.zeros((4, 4))
    a[0, 1] = 1.0
    a[1, :3] = (-omega_n ** 2, -2.0 * zeta * omega_n, omega_n ** 2)
    a[3, 0] = 1.0
    phi = expm(a * dt)
    phi.setflags(write=False)
    return phi


def motor_advance(m: MotorState, params: VehicleParams, dt: float) -> tuple[MotorState, float]:
    """Advance one wheel servo by ``dt``; also return the mean speed over the step.

    The servo ``y'' + 2*zeta*wn*y' + wn^2*y = wn^2*target`` is linear and the
    target is held constant between control updates, so the step is taken
    exactly with the matrix exponential.
    """
    _check_dt(dt)
    phi = _transition(params.motor_zeta, params.motor_omega_n, dt)
    x = phi @ np.array([m.speed, m.speed_rate, m.target, 0.0])
    limit = 1.5 * params.max_wheel_speed
    speed = min(max(float(x[0]), -limit), limit)
    mean = min(max(float(x[3]) / dt, -limit), limit)
    return MotorState(speed, float(x[1]), m.target), mean


def motor_step(m: MotorState, params: VehicleParams, dt: float) -> MotorState:
    """Advance one wheel servo by ``dt`` (exact for a held target)."""
    return motor_advance(m, params, dt)[0]


def kinematics_step(s: VehicleState, params: VehicleParams, dt: float,
                    left_speed: float | None = None,
                    right_speed: float | None = None) -> VehicleState:
    """Move the pose for ``dt`` with constant wheel speeds (exact arc).

    Wheel speeds default to the current motor speeds; the simulator passes the
    mean over the step instead.
    """
    _check_dt(dt)
    vl = s.left.speed if left_speed is None else left_speed
    vr = s.right.speed if right_speed is None else right_speed
    v = 0.5 * (vl + vr)
    w = (vr - vl) / params.wheel_base
    th = s.heading
    if abs(w) < 1e-9:
        x = s.x + v * dt * math.cos(th)
        y = s.y + v * dt * math.sin(th)
        heading = th
    else:
        th2 = th + w * dt
        r = v / w
        x = s.x + r * (math.sin(th2) - math.sin(th))
        y = s.y - r * (math.cos(th2) - math.cos(th))
        heading = wrap_angle(th2)
    return replace(s, x=x, y=y, heading=heading)


def vehicle_step(s: VehicleState, params: VehicleParams, dt: float) -> VehicleState:
    """Motors then pose, using the step-averaged wheel speeds for the pose."""
    left, vl = motor_advance(s.left, params, dt)
    right, vr = motor_advance(s.right, params, dt)
    moved = kinematics_step(s, params, dt, vl, vr)
    return replace(moved, left=left, right=right)


def mix_commands(steer_bias: float, left_cmd: float, right_cmd: float,
                 params: VehicleParams) -> tuple[float, float]:
    """Reduce the controller's three outputs to two wheel-speed targets.

    The two speed outputs set the common speed; ``steer_bias`` (+ = turn left)
    sets the wheel difference, full scale being the top wheel speed.
    """
    base = 0.5 * (left_cmd + right_cmd)
    diff = steer_bias * params.max_wheel_speed * 0.5
    lim = params.max_wheel_speed
    return (min(max(base - diff, -lim), lim), min(max(base + diff, -lim), lim))


def step_response(params: VehicleParams, amplitude: float, duration: float,
                  dt: float = 0.01) -> tuple[list[float], list[float]]:
    """Sampled response of one motor to a step in target from rest."""
    m = MotorState(target=amplitude)
    n = int(round(duration / dt))
    t, y = [0.0], [0.0]
    for k in range(1, n + 1):
        m = motor_step(m, params, dt)
        t.append(k * dt)
        y.append(m.speed)
    return t, y
