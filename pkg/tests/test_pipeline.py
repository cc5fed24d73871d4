import dataclasses

import numpy as np
import pytest

from conedrive.mission.pipeline import MODE_AUTONOMOUS, MODE_MANUAL, Mission
from conedrive.scenario import (
    MissionConfig,
    REFERENCE_LIDAR,
    Scenario,
    make_cone,
    make_reflector,
)


def scenario_with(objects, **mission_kwargs):
    return Scenario(
        objects=tuple(objects),
        lidar=REFERENCE_LIDAR,
        mission=MissionConfig(**mission_kwargs) if mission_kwargs else MissionConfig(),
    )


def run_ticks(mission, seconds, dt=0.1):
    frames = []
    for _ in range(int(seconds / dt)):
        frames.append(mission.tick(dt))
        if mission.completed:
            break
    return frames


class TestEmptyScenario:
    def test_drives_straight_length_and_stops(self):
        mission = Mission(scenario_with([]))
        mission.mode = MODE_AUTONOMOUS
        run_ticks(mission, 30.0)
        assert mission.completed
        assert mission.mode == MODE_MANUAL  # goal_reached drops to manual
        sc = mission.scenario
        assert mission.truth.pose.x == pytest.approx(sc.planner.straight_length, abs=sc.pursuit.goal_radius + 0.1)
        assert abs(mission.truth.pose.y) < 0.05


class TestSingleCone:
    def test_cone_mapped_within_5s(self, quick_weights):
        mission = Mission(scenario_with([make_cone(12.0, 0.0)]), weights=quick_weights)
        mission.mode = MODE_MANUAL  # stationary; perception only
        run_ticks(mission, 5.0)
        assert len(mission.cone_map) == 1
        cone = mission.cone_map.cones[0]
        assert np.hypot(cone.x - 12.0, cone.y - 0.0) <= 0.3

    def test_distractors_only_map_stays_empty(self, quick_weights):
        mission = Mission(
            scenario_with([make_reflector(10.0, 1.5), make_reflector(14.0, -2.0, striped=True)]),
            weights=quick_weights,
        )
        mission.mode = MODE_MANUAL
        run_ticks(mission, 5.0)
        assert mission.classifier_calls > 0  # candidates were produced and judged
        assert len(mission.cone_map) == 0


class TestModeSafety:
    def test_manual_mode_never_consults_pursuit(self, quick_weights):
        mission = Mission(scenario_with([make_cone(10.0, 0.0)]), weights=quick_weights)
        mission.mode = MODE_MANUAL
        run_ticks(mission, 3.0)
        assert mission.pursue_calls == 0

    def test_autonomous_consults_pursuit_every_tick(self):
        mission = Mission(scenario_with([]))
        mission.mode = MODE_AUTONOMOUS
        frames = run_ticks(mission, 2.0)
        assert mission.pursue_calls == len(frames)


class TestTelemetry:
    def test_time_strictly_increasing(self, quick_weights):
        mission = Mission(scenario_with([make_cone(10.0, 0.0)]), weights=quick_weights)
        frames = run_ticks(mission, 2.0)
        ts = [f.t for f in frames]
        assert all(a < b for a, b in zip(ts, ts[1:]))

    def test_frame_schema(self):
        mission = Mission(scenario_with([]))
        frame = mission.tick(0.1).to_json()
        assert frame["type"] == "telemetry"
        for key in ("t", "mode", "pose", "pose_truth", "cones", "planned_path", "driven_path", "candidates"):
            assert key in frame
        assert set(frame["pose"]) == {"x", "y", "theta"}
        assert "version" in frame["planned_path"]


class TestCommands:
    def test_set_mode_ack(self):
        mission = Mission(scenario_with([]))
        reply = mission.handle_command({"name": "set_mode", "mode": "autonomous"})
        assert reply == {"type": "ack", "command": "set_mode", "mode": "autonomous"}
        frame = mission.tick(0.1)
        assert frame.mode == MODE_AUTONOMOUS

    def test_unknown_command_error(self):
        mission = Mission(scenario_with([]))
        reply = mission.handle_command({"name": "warp_drive"})
        assert reply["type"] == "error"
        reply = mission.handle_command({"name": "set_mode", "mode": "hyper"})
        assert reply["type"] == "error"

    def test_manual_drive_clamped(self):
        mission = Mission(scenario_with([]))
        reply = mission.handle_command({"name": "manual_drive", "steer": 5.0, "speed": 1.0})
        assert reply["type"] == "ack"
        assert abs(reply["steer"]) <= mission.scenario.vehicle.max_steer

    def test_place_cone_enters_map_and_bumps_path_version(self, quick_weights):
        mission = Mission(scenario_with([]), weights=quick_weights)
        v0 = mission.path.version
        reply = mission.handle_command({"name": "place_cone", "x": 10.0, "y": 0.5})
        assert reply["type"] == "ack"
        run_ticks(mission, 3.0)
        assert len(mission.cone_map) == 1
        assert mission.path.version > v0

    def test_reset_map(self, quick_weights):
        mission = Mission(scenario_with([make_cone(10.0, 0.0)]), weights=quick_weights)
        run_ticks(mission, 2.0)
        assert len(mission.cone_map) == 1
        mission.handle_command({"name": "reset_map"})
        assert len(mission.cone_map) == 0

    def test_bad_arguments_error(self):
        mission = Mission(scenario_with([]))
        reply = mission.handle_command({"name": "place_cone", "x": "wide"})
        assert reply["type"] == "error"


class TestEfficiency:
    def test_classifier_calls_bounded_by_candidates(self, quick_weights):
        mission = Mission(scenario_with([make_cone(10.0, 0.0), make_reflector(14.0, 5.0)]), weights=quick_weights)
        run_ticks(mission, 5.0)
        assert 0 < mission.classifier_calls <= mission.candidates_seen

    def test_candidate_count_far_below_sliding_window(self, quick_weights):
        """Candidate classification works out to well under 5% of what a
        32 px-stride sliding window over every frame would evaluate."""
        mission = Mission(scenario_with([make_cone(10.0, 0.0), make_cone(18.0, 0.0)]), weights=quick_weights)
        frames = run_ticks(mission, 5.0)
        k = mission.scenario.camera
        windows_per_frame = ((k.width - 32) // 32 + 1) * ((k.height - 32) // 32 + 1)
        budget = 0.05 * windows_per_frame * len(frames)
        assert mission.classifier_calls < budget


class TestDeadReckonMode:
    def test_estimate_tracks_truth_without_noise(self):
        sc = dataclasses.replace(
            scenario_with([]), mission=MissionConfig(pose_source="dead_reckon", encoder_noise=0.0)
        )
        mission = Mission(sc)
        mission.mode = MODE_AUTONOMOUS
        run_ticks(mission, 10.0)
        err = np.hypot(
            mission.truth.pose.x - mission.estimate.pose.x,
            mission.truth.pose.y - mission.estimate.pose.y,
        )
        assert err < 1e-6

    def test_noise_drives_estimate_off_truth(self):
        sc = dataclasses.replace(
            scenario_with([]), mission=MissionConfig(pose_source="dead_reckon", encoder_noise=0.05)
        )
        mission = Mission(sc)
        mission.handle_command({"name": "manual_drive", "steer": 0.1, "speed": 2.0})
        run_ticks(mission, 10.0)
        err = np.hypot(
            mission.truth.pose.x - mission.estimate.pose.x,
            mission.truth.pose.y - mission.estimate.pose.y,
        )
        assert err > 1e-3
