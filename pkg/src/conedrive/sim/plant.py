"""Vehicle plant: the same kinematic bicycle the estimator integrates."""

from __future__ import annotations

import numpy as np

from conedrive.control import VehicleState, bicycle_step
from conedrive.scenario import VehicleConfig


def step_plant(
    state: VehicleState,
    steer: float,
    speed: float,
    dt: float,
    vehicle: VehicleConfig,
    actuator_noise: float = 0.0,
    rng: np.random.Generator | None = None,
) -> VehicleState:
    """Advance the true vehicle state by one control interval.

    Optional zero-mean multiplicative actuator noise perturbs the applied
    steer and speed; the estimator never sees the perturbation.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if abs(steer) > vehicle.max_steer + 1e-12:
        raise ValueError(f"steer {steer} exceeds max_steer {vehicle.max_steer}")
    if actuator_noise > 0.0:
        if rng is None:
            raise ValueError("actuator noise requires an RNG")
        steer = steer * (1.0 + actuator_noise * rng.standard_normal())
        speed = speed * (1.0 + actuator_noise * rng.standard_normal())
        steer = float(np.clip(steer, -vehicle.max_steer, vehicle.max_steer))
    pose = bicycle_step(state.pose, speed, steer, vehicle.wheelbase, dt)
    return VehicleState(pose=pose, speed=speed)
