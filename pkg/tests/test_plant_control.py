import math

import numpy as np
import pytest

from conedrive.control import (
    GOAL_REACHED,
    EncoderReading,
    PursuitConfig,
    VehicleState,
    dead_reckon,
    pursue,
)
from conedrive.geometry import Pose2D
from conedrive.planner import PlannedPath
from conedrive.scenario import VehicleConfig, substream
from conedrive.sim.plant import step_plant

VEHICLE = VehicleConfig(wheelbase=2.0, max_steer=0.5, start=Pose2D(0, 0, 0))


class TestPlant:
    def test_straight_advance(self):
        s = step_plant(VehicleState(Pose2D(0, 0, 0)), 0.0, 1.0, 1.0, VEHICLE)
        assert s.pose.x == pytest.approx(1.0)
        assert s.pose.y == pytest.approx(0.0)
        assert s.pose.theta == 0.0

    def test_zero_speed_unchanged(self):
        start = VehicleState(Pose2D(2, 3, 0.4))
        s = step_plant(start, 0.3, 0.0, 0.5, VEHICLE)
        assert s.pose == start.pose

    def test_rejects_bad_dt_and_steer(self):
        with pytest.raises(ValueError):
            step_plant(VehicleState(Pose2D(0, 0, 0)), 0.0, 1.0, 0.0, VEHICLE)
        with pytest.raises(ValueError):
            step_plant(VehicleState(Pose2D(0, 0, 0)), 0.9, 1.0, 0.1, VEHICLE)

    def test_constant_steer_circle_radius(self):
        delta = 0.2
        radius = VEHICLE.wheelbase / math.tan(delta)
        state = VehicleState(Pose2D(0, 0, 0), 1.0)
        dt = 0.02
        positions = []
        t_loop = 2 * math.pi * radius / 1.0
        for _ in range(int(t_loop / dt) + 1):
            state = step_plant(state, delta, 1.0, dt, VEHICLE)
            positions.append((state.pose.x, state.pose.y))
        # turning center is at (0, radius); all points stay on the circle
        errs = [abs(math.hypot(x - 0.0, y - radius) - radius) for x, y in positions]
        assert max(errs) / radius < 1e-3

    def test_actuator_noise_seeded(self):
        rng1 = substream(1, "plant")
        rng2 = substream(1, "plant")
        a = step_plant(VehicleState(Pose2D(0, 0, 0)), 0.1, 1.0, 0.1, VEHICLE, actuator_noise=0.05, rng=rng1)
        b = step_plant(VehicleState(Pose2D(0, 0, 0)), 0.1, 1.0, 0.1, VEHICLE, actuator_noise=0.05, rng=rng2)
        assert a.pose == b.pose


class TestDeadReckon:
    def test_straight(self):
        s = dead_reckon(VehicleState(Pose2D(0, 0, 0)), EncoderReading(2.0, 0.0, 0.5), 2.0)
        assert s.pose.x == pytest.approx(1.0)
        assert s.pose.theta == 0.0

    def test_zero_speed_any_steer(self):
        s = dead_reckon(VehicleState(Pose2D(1, 1, 0.3)), EncoderReading(0.0, 0.4, 0.5), 2.0)
        assert s.pose == Pose2D(1, 1, 0.3)

    def test_turning_radius_analytic(self):
        delta, wheelbase = 0.2, 2.0
        radius = wheelbase / math.tan(delta)
        assert radius == pytest.approx(9.866, abs=0.01)
        state = VehicleState(Pose2D(0, 0, 0))
        dt = 0.02
        for _ in range(int(2 * math.pi * radius / dt) + 1):
            state = dead_reckon(state, EncoderReading(1.0, delta, dt), wheelbase)
            err = abs(math.hypot(state.pose.x, state.pose.y - radius) - radius)
            assert err / radius < 1e-3

    def test_rejects_bad_dt(self):
        with pytest.raises(ValueError):
            EncoderReading(1.0, 0.0, 0.0)

    def test_matches_plant_exactly_with_same_inputs(self, rng):
        """Estimator and plant share the integrator, so noise-free dead
        reckoning reproduces the true trajectory to machine precision."""
        plant = VehicleState(Pose2D(0, 0, 0))
        est = VehicleState(Pose2D(0, 0, 0))
        for _ in range(500):
            steer = float(rng.uniform(-0.4, 0.4))
            speed = float(rng.uniform(0.0, 3.0))
            plant = step_plant(plant, steer, speed, 0.1, VEHICLE)
            est = dead_reckon(est, EncoderReading(speed, steer, 0.1), VEHICLE.wheelbase)
        assert math.hypot(plant.pose.x - est.pose.x, plant.pose.y - est.pose.y) < 1e-6


def straight_path(length=60.0, spacing=0.25):
    pts = tuple((float(x), 0.0) for x in np.arange(0.0, length, spacing))
    return PlannedPath(points=pts, version=0)


class TestPursue:
    CFG = PursuitConfig(wheelbase=2.0, lookahead=3.0, target_speed=2.0, goal_radius=0.5, max_steer=0.5)

    def test_straight_ahead_zero_steer(self):
        steer, speed = pursue(straight_path(), VehicleState(Pose2D(0, 0, 0)), self.CFG)
        assert steer == pytest.approx(0.0, abs=1e-9)
        assert speed == 2.0

    def test_point_at_90_degrees(self):
        # path point exactly lookahead to the left
        path = PlannedPath(points=((0.0, 0.0), (0.0, 3.0), (0.0, 6.0)), version=0)
        steer, _ = pursue(path, VehicleState(Pose2D(0, 0, 0)), self.CFG)
        expected = math.atan(2.0 * 2.0 / 3.0)
        assert steer == pytest.approx(min(expected, self.CFG.max_steer))

    def test_goal_reached(self):
        path = straight_path(length=10.0)
        result = pursue(path, VehicleState(Pose2D(9.9, 0.3, 0)), self.CFG)
        assert result == GOAL_REACHED

    def test_empty_path_rejected(self):
        with pytest.raises(ValueError):
            pursue(PlannedPath(points=(), version=0), VehicleState(Pose2D(0, 0, 0)), self.CFG)

    def test_mirror_symmetry(self, rng):
        """Reflecting the path across the heading axis negates the steering."""
        for _ in range(25):
            pts = []
            x = 0.0
            y = 0.0
            for _ in range(60):
                x += 0.3
                y += float(rng.uniform(-0.2, 0.2))
                pts.append((x, y))
            state = VehicleState(Pose2D(0, 0, 0), 1.0)
            up = pursue(PlannedPath(points=tuple(pts), version=0), state, self.CFG)
            down = pursue(
                PlannedPath(points=tuple((px, -py) for px, py in pts), version=0), state, self.CFG
            )
            assert up[0] == pytest.approx(-down[0], abs=1e-12)

    def test_closed_loop_converges_from_offset(self):
        """1 m lateral offset on a straight path: strictly decreasing error
        after the first lookahead distance, below 0.1 m within 20 m."""
        path = straight_path()
        state = VehicleState(Pose2D(0.0, 1.0, 0.0), 2.0)
        dt = 0.05
        travelled = 0.0
        errors = []
        while travelled < 25.0:
            cmd = pursue(path, state, self.CFG)
            if cmd == GOAL_REACHED:
                break
            steer, speed = cmd
            state = step_plant(state, steer, speed, dt, VEHICLE)
            travelled += speed * dt
            errors.append((travelled, abs(state.pose.y)))
        in_band = [i for i, (t, e) in enumerate(errors) if e < 0.1]
        assert in_band and errors[in_band[0]][0] <= 20.0
        # strictly decreasing from the first lookahead distance until the
        # error enters the 0.1 m band, and it never leaves the band again
        shrink = [e for (t, e), i in zip(errors, range(len(errors))) if t >= self.CFG.lookahead and i <= in_band[0]]
        assert all(a > b for a, b in zip(shrink, shrink[1:]))
        assert all(errors[i][1] < 0.1 for i in range(in_band[0], len(errors)))
