"""Kinematic bicycle dead reckoning and pure-pursuit path tracking."""

from __future__ import annotations

import math
from dataclasses import dataclass

from conedrive.geometry import Pose2D, global_to_local, wrap_angle
from conedrive.planner import PlannedPath


@dataclass(frozen=True)
class VehicleState:
    pose: Pose2D
    speed: float = 0.0


@dataclass(frozen=True)
class EncoderReading:
    """Wheel-speed and steering-angle encoder sample over one interval."""

    wheel_speed: float
    steering_angle: float
    dt: float

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")


@dataclass(frozen=True)
class PursuitConfig:
    wheelbase: float = 2.0
    lookahead: float = 3.0
    target_speed: float = 2.0
    goal_radius: float = 0.5
    max_steer: float = 0.5

    def __post_init__(self):
        if self.wheelbase <= 0 or self.lookahead <= 0:
            raise ValueError("wheelbase and lookahead must be positive")


GOAL_REACHED = "goal_reached"


def bicycle_step(pose: Pose2D, speed: float, steer: float, wheelbase: float, dt: float) -> Pose2D:
    """One RK4 step of x' = v cos(theta), y' = v sin(theta), theta' = v tan(steer)/L."""
    omega = speed * math.tan(steer) / wheelbase

    def deriv(theta: float) -> tuple[float, float, float]:
        return (speed * math.cos(theta), speed * math.sin(theta), omega)

    k1 = deriv(pose.theta)
    k2 = deriv(pose.theta + 0.5 * dt * k1[2])
    k3 = deriv(pose.theta + 0.5 * dt * k2[2])
    k4 = deriv(pose.theta + dt * k3[2])
    x = pose.x + dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    y = pose.y + dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    theta = wrap_angle(pose.theta + dt * omega)
    return Pose2D(x, y, theta)


def dead_reckon(state: VehicleState, reading: EncoderReading, wheelbase: float) -> VehicleState:
    """Integrate encoder readings through the bicycle model."""
    pose = bicycle_step(state.pose, reading.wheel_speed, reading.steering_angle, wheelbase, reading.dt)
    return VehicleState(pose=pose, speed=reading.wheel_speed)


def pursue(
    path: PlannedPath, state: VehicleState, cfg: PursuitConfig
) -> tuple[float, float] | str:
    """Pure-pursuit steering toward a lookahead point on the path.

    Returns (steering, speed_cmd), or GOAL_REACHED within goal_radius of the
    final path point.
    """
    points = path.points
    if len(points) == 0:
        raise ValueError("empty path")
    px, py = state.pose.x, state.pose.y

    gx, gy = points[-1]
    if math.hypot(gx - px, gy - py) <= cfg.goal_radius:
        return GOAL_REACHED

    d2 = [(p[0] - px) ** 2 + (p[1] - py) ** 2 for p in points]
    nearest = min(range(len(points)), key=lambda i: d2[i])
    target = points[-1]
    for i in range(nearest, len(points)):
        if d2[i] >= cfg.lookahead * cfg.lookahead:
            target = points[i]
            break

    x_l, y_l = global_to_local(state.pose, target)
    curvature = 2.0 * y_l / (cfg.lookahead * cfg.lookahead)
    steering = math.atan(curvature * cfg.wheelbase)
    steering = max(-cfg.max_steer, min(cfg.max_steer, steering))
    return (steering, cfg.target_speed)
