"""The per-tick perception/planning/control pipeline.

Each tick: scan, extract candidates, project them into the camera, crop and
classify, integrate positives into the cone map, replan on map changes, and
drive the plant (pure pursuit in autonomous mode, operator commands in
manual mode). The pipeline owns all mutable mission state and is meant to be
ticked from a single thread.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from conedrive.control import (
    GOAL_REACHED,
    EncoderReading,
    VehicleState,
    dead_reckon,
    pursue,
)
from conedrive.detect import extract_candidates
from conedrive.geometry import Point3, crop_box_for, lidar_to_camera
from conedrive.mapping import ConeMap, ConeObservation
from conedrive.planner import plan
from conedrive.scenario import Scenario, make_cone, make_reflector, substream
from conedrive.sim.camera import extract_crop, render
from conedrive.sim.lidar import scan
from conedrive.sim.plant import step_plant
from conedrive.vision.baselines import colour_score, triangle_score
from conedrive.vision.cnn import ModelWeights, cnn_forward
from conedrive.vision.colorspace import rgb_to_lab

MODE_MANUAL = "manual"
MODE_AUTONOMOUS = "autonomous"


@dataclass
class TelemetryFrame:
    t: float
    mode: str
    pose: dict
    pose_truth: dict
    cones: list
    planned_path: dict
    driven_path: list
    candidates: list
    completed: bool
    error: str | None = None

    def to_json(self) -> dict:
        return {
            "type": "telemetry",
            "t": self.t,
            "mode": self.mode,
            "pose": self.pose,
            "pose_truth": self.pose_truth,
            "cones": self.cones,
            "planned_path": self.planned_path,
            "driven_path": self.driven_path,
            "candidates": self.candidates,
            "completed": self.completed,
            "error": self.error,
        }


def _pose_dict(state: VehicleState) -> dict:
    return {"x": state.pose.x, "y": state.pose.y, "theta": state.pose.theta}


class Mission:
    """Mutable mission state plus the tick pipeline over one scenario."""

    DRIVEN_TAIL = 400

    def __init__(self, scenario: Scenario, weights: ModelWeights | None = None):
        self.scenario = scenario
        self.weights = weights
        start = scenario.vehicle.start
        self.truth = VehicleState(pose=start, speed=0.0)
        self.estimate = VehicleState(pose=start, speed=0.0)
        self.mode = MODE_MANUAL
        self.cone_map = ConeMap(dedup_radius=1.0)
        self.path = plan([], start, scenario.planner, version=0)
        self.t = 0.0
        self.completed = False
        self.error: str | None = None
        self.manual_steer = 0.0
        self.manual_speed = 0.0
        self.driven: list[tuple[float, float]] = []
        self.classifier_calls = 0
        self.pursue_calls = 0
        self.candidates_seen = 0
        self.detection_events: list[dict] = []  # cone_id, range, t
        self._encoder_rng = substream(scenario.rng_seed, "encoders")
        self._actuator_rng = substream(scenario.rng_seed, "actuators")
        self._last_steer = 0.0
        self._last_speed = 0.0

    # -- classification ----------------------------------------------------

    def _classify(self, crop_rgb: np.ndarray) -> float:
        self.classifier_calls += 1
        if self.weights is not None:
            return cnn_forward(self.weights, rgb_to_lab(crop_rgb))
        # no trained model configured: colour/triangle gate as a weak fallback
        if colour_score(crop_rgb) >= 0.10 or triangle_score(crop_rgb).match:
            return 1.0
        return 0.0

    # -- pipeline ----------------------------------------------------------

    def nav_state(self) -> VehicleState:
        if self.scenario.mission.pose_source == "truth":
            return self.truth
        return self.estimate

    def tick(self, dt: float) -> TelemetryFrame:
        if dt <= 0:
            raise ValueError("dt must be positive")
        scenario = self.scenario
        self.t += dt
        nav = self.nav_state()

        frame_img = None
        map_changed = False
        candidates_out = []
        try:
            cloud = scan(scenario, self.truth.pose, stamp=self.t)
            candidates = extract_candidates(cloud, scenario.detector)
            self.candidates_seen += len(candidates)
            cone_h, cone_w = scenario.cone_dimensions()
            for cand in candidates:
                p_cam = lidar_to_camera(
                    Point3(*cand.centroid_local), scenario.mount, scenario.lidar.mount_height
                )
                box = crop_box_for(
                    p_cam, scenario.camera, cone_h, cone_w, scenario.classifier.crop_margin
                )
                if box is None:
                    continue
                if frame_img is None:
                    frame_img = render(scenario, self.truth.pose)
                crop = extract_crop(frame_img, box, scenario.classifier.input_size)
                score = self._classify(crop)
                candidates_out.append(
                    {
                        "x": cand.centroid_local[0],
                        "y": cand.centroid_local[1],
                        "score": score,
                        "points": cand.point_count,
                    }
                )
                if score >= scenario.classifier.threshold:
                    obs = ConeObservation(
                        local_position=(cand.centroid_local[0], cand.centroid_local[1]),
                        vehicle_pose=nav.pose,
                        stamp=self.t,
                    )
                    result = self.cone_map.integrate(obs)
                    if result.added:
                        map_changed = True
                        self.detection_events.append(
                            {
                                "cone_id": result.cone_id,
                                "t": self.t,
                                "range": math.hypot(*cand.centroid_local[:2]),
                            }
                        )
            if map_changed:
                self.path = plan(
                    self.cone_map.positions(),
                    scenario.vehicle.start,
                    scenario.planner,
                    version=self.path.version + 1,
                )
        except Exception as exc:  # surface pipeline faults, drop to manual
            self.error = f"pipeline: {exc}"
            self.mode = MODE_MANUAL

        steer, speed = self.manual_steer, self.manual_speed
        if self.mode == MODE_AUTONOMOUS:
            try:
                self.pursue_calls += 1
                cmd = pursue(self.path, self.nav_state(), scenario.pursuit)
                if cmd == GOAL_REACHED:
                    self.completed = True
                    self.mode = MODE_MANUAL
                    steer, speed = 0.0, 0.0
                    self.manual_steer, self.manual_speed = 0.0, 0.0
                else:
                    steer, speed = cmd
            except Exception as exc:
                self.error = f"planner: {exc}"
                self.mode = MODE_MANUAL
                steer, speed = 0.0, 0.0

        steer = float(np.clip(steer, -scenario.vehicle.max_steer, scenario.vehicle.max_steer))
        self.truth = step_plant(self.truth, steer, speed, dt, scenario.vehicle, rng=self._actuator_rng)

        noise = scenario.mission.encoder_noise
        v_read, d_read = speed, steer
        if noise > 0.0:
            v_read = speed * (1.0 + noise * self._encoder_rng.standard_normal())
            d_read = steer * (1.0 + noise * self._encoder_rng.standard_normal())
        self.estimate = dead_reckon(
            self.estimate,
            EncoderReading(wheel_speed=v_read, steering_angle=d_read, dt=dt),
            scenario.vehicle.wheelbase,
        )

        self.driven.append((self.truth.pose.x, self.truth.pose.y))
        self._last_steer, self._last_speed = steer, speed

        return TelemetryFrame(
            t=self.t,
            mode=self.mode,
            pose=_pose_dict(self.nav_state()),
            pose_truth=_pose_dict(self.truth),
            cones=self.cone_map.to_json(),
            planned_path=self.path.to_json(),
            driven_path=[[x, y] for x, y in self.driven[-self.DRIVEN_TAIL :]],
            candidates=candidates_out,
            completed=self.completed,
            error=self.error,
        )

    # -- operator commands ---------------------------------------------------

    def handle_command(self, cmd: dict) -> dict:
        """Apply one operator command, returning an ack or error reply."""
        name = cmd.get("name")
        try:
            if name == "set_mode":
                mode = cmd["mode"]
                if mode not in (MODE_MANUAL, MODE_AUTONOMOUS):
                    return {"type": "error", "message": f"unknown mode {mode!r}"}
                self.mode = mode
                return {"type": "ack", "command": name, "mode": self.mode}
            if name == "manual_drive":
                self.manual_steer = float(
                    np.clip(cmd.get("steer", 0.0), -self.scenario.vehicle.max_steer, self.scenario.vehicle.max_steer)
                )
                self.manual_speed = float(cmd.get("speed", 0.0))
                return {"type": "ack", "command": name, "steer": self.manual_steer, "speed": self.manual_speed}
            if name == "place_cone":
                obj = make_cone(float(cmd["x"]), float(cmd["y"]))
                self.scenario = self.scenario.with_objects(list(self.scenario.objects) + [obj])
                return {"type": "ack", "command": name, "x": obj.position[0], "y": obj.position[1]}
            if name == "place_distractor":
                obj = make_reflector(float(cmd["x"]), float(cmd["y"]), striped=True)
                self.scenario = self.scenario.with_objects(list(self.scenario.objects) + [obj])
                return {"type": "ack", "command": name, "x": obj.position[0], "y": obj.position[1]}
            if name == "reset_map":
                self.cone_map.reset()
                self.path = plan([], self.scenario.vehicle.start, self.scenario.planner, version=self.path.version + 1)
                return {"type": "ack", "command": name}
        except (KeyError, TypeError, ValueError) as exc:
            return {"type": "error", "message": f"bad command arguments: {exc}"}
        return {"type": "error", "message": f"unknown command {name!r}"}
