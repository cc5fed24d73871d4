"""World description, JSON scenario files and seeded randomness.

Scenario files store angles in degrees and lengths in meters; everything is
converted to radians on load. All randomness in a run flows from the single
scenario seed through named substreams, so identical (scenario, seed) pairs
reproduce bit-identical outputs.
"""

from __future__ import annotations

import json
import math
import zlib
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from conedrive.control import PursuitConfig
from conedrive.detect import DetectionConstraints
from conedrive.geometry import CameraIntrinsics, MountTransform, Point3, Pose2D
from conedrive.planner import PlannerConfig


class ScenarioError(ValueError):
    """Raised for malformed or inconsistent scenario files."""


def substream(seed: int, name: str) -> np.random.Generator:
    """Deterministic named RNG substream derived from the scenario seed."""
    key = zlib.crc32(name.encode("utf-8"))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, key])))


@dataclass(frozen=True)
class LidarConfig:
    channels: int = 16
    vertical_fov: float = math.radians(30.0)  # total span
    vertical_step: float = math.radians(2.0)
    horizontal_step: float = math.radians(0.4)
    scan_rate: float = 10.0
    max_range: float = 60.0
    mount_height: float = 0.4

    def __post_init__(self):
        expected = round(self.vertical_fov / self.vertical_step) + 1
        if self.channels != expected:
            raise ScenarioError(
                f"channels ({self.channels}) must equal vertical span / step + 1 ({expected})"
            )
        n = round(2.0 * math.pi / self.horizontal_step)
        if abs(n * self.horizontal_step - 2.0 * math.pi) > self.horizontal_step:
            raise ScenarioError("horizontal_step must divide 2*pi to within one step")
        if not 5.0 <= self.scan_rate <= 20.0:
            raise ScenarioError("scan_rate must be in 5-20 Hz")

    def ring_elevations(self) -> np.ndarray:
        half = 0.5 * self.vertical_fov
        return np.linspace(-half, half, self.channels)

    def azimuths(self) -> np.ndarray:
        n = round(2.0 * math.pi / self.horizontal_step)
        return np.arange(n) * self.horizontal_step


@dataclass(frozen=True)
class SceneObject:
    kind: str  # cone | reflector | block
    position: tuple[float, float]
    height: float = 0.5
    base_width: float = 0.3
    reflectivity_body: float = 120.0
    reflectivity_stripe: float = 250.0
    stripe_band: tuple[float, float] = (0.4, 0.7)
    color_body: tuple[int, int, int] = (230, 90, 20)
    color_stripe: tuple[int, int, int] = (245, 245, 245)

    def __post_init__(self):
        if self.kind not in ("cone", "reflector", "block"):
            raise ScenarioError(f"unknown object kind {self.kind!r}")
        if self.height <= 0 or self.base_width <= 0:
            raise ScenarioError("object dimensions must be positive")
        if self.kind == "cone" and self.reflectivity_stripe < self.reflectivity_body:
            raise ScenarioError("cone stripe must be at least as reflective as the body")


@dataclass(frozen=True)
class VehicleConfig:
    wheelbase: float = 2.0
    max_steer: float = 0.5
    start: Pose2D = field(default_factory=lambda: Pose2D(0.0, 0.0, 0.0))


@dataclass(frozen=True)
class ClassifierSettings:
    input_size: int = 32
    crop_margin: float = 0.4
    threshold: float = 0.5
    weights_path: str | None = None


@dataclass(frozen=True)
class MissionConfig:
    tick_rate: float = 10.0
    timeout: float = 60.0
    pose_source: str = "truth"  # truth | dead_reckon
    encoder_noise: float = 0.0  # multiplicative std-dev on encoder readings

    def __post_init__(self):
        if self.pose_source not in ("truth", "dead_reckon"):
            raise ScenarioError("pose_source must be 'truth' or 'dead_reckon'")


@dataclass(frozen=True)
class Scenario:
    objects: tuple[SceneObject, ...] = ()
    lidar: LidarConfig = field(default_factory=LidarConfig)
    camera: CameraIntrinsics = field(
        default_factory=lambda: CameraIntrinsics(fx=500.0, fy=500.0, cx=320.0, cy=240.0, width=640, height=480)
    )
    mount: MountTransform = field(default_factory=lambda: MountTransform(translation=Point3(0.0, -0.1, 0.0)))
    vehicle: VehicleConfig = field(default_factory=VehicleConfig)
    ground_reflectivity: float = 30.0
    rng_seed: int = 0
    sky_color: tuple[int, int, int] = (90, 140, 200)
    ground_color: tuple[int, int, int] = (95, 95, 100)
    light_level: float = 1.0
    render_noise: float = 0.0
    intensity_falloff_gamma: float = 0.0
    intensity_falloff_d0: float = 10.0
    detector: DetectionConstraints = field(default_factory=DetectionConstraints)
    planner: PlannerConfig = field(default_factory=PlannerConfig)
    pursuit: PursuitConfig = field(default_factory=PursuitConfig)
    classifier: ClassifierSettings = field(default_factory=ClassifierSettings)
    mission: MissionConfig = field(default_factory=MissionConfig)

    def with_objects(self, objects) -> "Scenario":
        return replace(self, objects=tuple(objects))

    def cone_dimensions(self) -> tuple[float, float]:
        """(height, base_width) used to size candidate crops."""
        for obj in self.objects:
            if obj.kind == "cone":
                return (obj.height, obj.base_width)
        return (0.5, 0.3)


def _obj_from_dict(d: dict) -> SceneObject:
    return SceneObject(
        kind=d["kind"],
        position=(float(d["position"][0]), float(d["position"][1])),
        height=float(d.get("height", 0.5)),
        base_width=float(d.get("base_width", 0.3)),
        reflectivity_body=float(d.get("reflectivity_body", 120.0)),
        reflectivity_stripe=float(d.get("reflectivity_stripe", 250.0)),
        stripe_band=tuple(d.get("stripe_band", (0.4, 0.7))),
        color_body=tuple(d.get("color_body", (230, 90, 20))),
        color_stripe=tuple(d.get("color_stripe", (245, 245, 245))),
    )


def _obj_to_dict(o: SceneObject) -> dict:
    return {
        "kind": o.kind,
        "position": list(o.position),
        "height": o.height,
        "base_width": o.base_width,
        "reflectivity_body": o.reflectivity_body,
        "reflectivity_stripe": o.reflectivity_stripe,
        "stripe_band": list(o.stripe_band),
        "color_body": list(o.color_body),
        "color_stripe": list(o.color_stripe),
    }


def scenario_from_dict(d: dict) -> Scenario:
    try:
        lidar_d = d.get("lidar", {})
        lidar = LidarConfig(
            channels=int(lidar_d.get("channels", 16)),
            vertical_fov=math.radians(float(lidar_d.get("vertical_fov_deg", 30.0))),
            vertical_step=math.radians(float(lidar_d.get("vertical_step_deg", 2.0))),
            horizontal_step=math.radians(float(lidar_d.get("horizontal_step_deg", 0.4))),
            scan_rate=float(lidar_d.get("scan_rate_hz", 10.0)),
            max_range=float(lidar_d.get("max_range_m", 60.0)),
            mount_height=float(lidar_d.get("mount_height_m", 0.4)),
        )
        cam_d = d.get("camera", {})
        camera = CameraIntrinsics(
            fx=float(cam_d.get("fx", 500.0)),
            fy=float(cam_d.get("fy", 500.0)),
            cx=float(cam_d.get("cx", 320.0)),
            cy=float(cam_d.get("cy", 240.0)),
            width=int(cam_d.get("width", 640)),
            height=int(cam_d.get("height", 480)),
        )
        tr = cam_d.get("translation", [0.0, -0.1, 0.0])
        rot = np.asarray(cam_d.get("rotation", np.eye(3).tolist()), dtype=float)
        mount = MountTransform(translation=Point3(*[float(v) for v in tr]), rotation=rot)
        veh_d = d.get("vehicle", {})
        start = veh_d.get("start", [0.0, 0.0, 0.0])
        vehicle = VehicleConfig(
            wheelbase=float(veh_d.get("wheelbase_m", 2.0)),
            max_steer=math.radians(float(veh_d.get("max_steer_deg", 28.65))),
            start=Pose2D(float(start[0]), float(start[1]), math.radians(float(start[2]))),
        )
        det_d = d.get("detector", {})
        detector = DetectionConstraints(
            intensity_min=float(det_d.get("intensity_min", 75.0)),
            z_min=float(det_d.get("z_min", 0.02)),
            z_max=float(det_d.get("z_max", 1.0)),
            forward_min=float(det_d.get("forward_min", 0.5)),
            forward_max=float(det_d.get("forward_max", 38.0)),
            lateral_halfwidth=float(det_d.get("lateral_halfwidth", 8.0)),
            cluster_radius=float(det_d.get("cluster_radius", 0.4)),
            min_points=int(det_d.get("min_points", 1)),
        )
        plan_d = d.get("planner", {})
        planner = PlannerConfig(
            amplitude=float(plan_d.get("amplitude", 1.5)),
            spacing=float(plan_d.get("spacing", 0.25)),
            filler_offset=float(plan_d.get("filler_offset", plan_d.get("amplitude", 1.5))),
            straight_length=float(plan_d.get("straight_length", 10.0)),
            first_side=str(plan_d.get("first_side", "left")),
        )
        pur_d = d.get("pursuit", {})
        pursuit = PursuitConfig(
            wheelbase=vehicle.wheelbase,
            lookahead=float(pur_d.get("lookahead", 3.0)),
            target_speed=float(pur_d.get("target_speed", 2.0)),
            goal_radius=float(pur_d.get("goal_radius", 0.5)),
            max_steer=vehicle.max_steer,
        )
        cls_d = d.get("classifier", {})
        classifier = ClassifierSettings(
            input_size=int(cls_d.get("input_size", 32)),
            crop_margin=float(cls_d.get("crop_margin", 0.4)),
            threshold=float(cls_d.get("threshold", 0.5)),
            weights_path=cls_d.get("weights"),
        )
        mis_d = d.get("mission", {})
        mission = MissionConfig(
            tick_rate=float(mis_d.get("tick_rate_hz", 10.0)),
            timeout=float(mis_d.get("timeout_s", 60.0)),
            pose_source=str(mis_d.get("pose_source", "truth")),
            encoder_noise=float(mis_d.get("encoder_noise", 0.0)),
        )
        return Scenario(
            objects=tuple(_obj_from_dict(o) for o in d.get("objects", [])),
            lidar=lidar,
            camera=camera,
            mount=mount,
            vehicle=vehicle,
            ground_reflectivity=float(d.get("ground_reflectivity", 30.0)),
            rng_seed=int(d.get("seed", 0)),
            sky_color=tuple(d.get("sky_color", (90, 140, 200))),
            ground_color=tuple(d.get("ground_color", (95, 95, 100))),
            light_level=float(d.get("light_level", 1.0)),
            render_noise=float(d.get("render_noise", 0.0)),
            intensity_falloff_gamma=float(d.get("intensity_falloff_gamma", 0.0)),
            intensity_falloff_d0=float(d.get("intensity_falloff_d0", 10.0)),
            detector=detector,
            planner=planner,
            pursuit=pursuit,
            classifier=classifier,
            mission=mission,
        )
    except ScenarioError:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ScenarioError(f"invalid scenario: {exc}") from exc


def scenario_to_dict(s: Scenario) -> dict:
    return {
        "seed": s.rng_seed,
        "lidar": {
            "channels": s.lidar.channels,
            "vertical_fov_deg": math.degrees(s.lidar.vertical_fov),
            "vertical_step_deg": math.degrees(s.lidar.vertical_step),
            "horizontal_step_deg": math.degrees(s.lidar.horizontal_step),
            "scan_rate_hz": s.lidar.scan_rate,
            "max_range_m": s.lidar.max_range,
            "mount_height_m": s.lidar.mount_height,
        },
        "camera": {
            "fx": s.camera.fx,
            "fy": s.camera.fy,
            "cx": s.camera.cx,
            "cy": s.camera.cy,
            "width": s.camera.width,
            "height": s.camera.height,
            "translation": [s.mount.translation.x, s.mount.translation.y, s.mount.translation.z],
            "rotation": np.asarray(s.mount.rotation).tolist(),
        },
        "vehicle": {
            "wheelbase_m": s.vehicle.wheelbase,
            "max_steer_deg": math.degrees(s.vehicle.max_steer),
            "start": [s.vehicle.start.x, s.vehicle.start.y, math.degrees(s.vehicle.start.theta)],
        },
        "ground_reflectivity": s.ground_reflectivity,
        "sky_color": list(s.sky_color),
        "ground_color": list(s.ground_color),
        "light_level": s.light_level,
        "render_noise": s.render_noise,
        "intensity_falloff_gamma": s.intensity_falloff_gamma,
        "intensity_falloff_d0": s.intensity_falloff_d0,
        "objects": [_obj_to_dict(o) for o in s.objects],
        "detector": {
            "intensity_min": s.detector.intensity_min,
            "z_min": s.detector.z_min,
            "z_max": s.detector.z_max,
            "forward_min": s.detector.forward_min,
            "forward_max": s.detector.forward_max,
            "lateral_halfwidth": s.detector.lateral_halfwidth,
            "cluster_radius": s.detector.cluster_radius,
            "min_points": s.detector.min_points,
        },
        "planner": {
            "amplitude": s.planner.amplitude,
            "spacing": s.planner.spacing,
            "filler_offset": s.planner.filler_offset,
            "straight_length": s.planner.straight_length,
            "first_side": s.planner.first_side,
        },
        "pursuit": {
            "lookahead": s.pursuit.lookahead,
            "target_speed": s.pursuit.target_speed,
            "goal_radius": s.pursuit.goal_radius,
        },
        "classifier": {
            "input_size": s.classifier.input_size,
            "crop_margin": s.classifier.crop_margin,
            "threshold": s.classifier.threshold,
            "weights": s.classifier.weights_path,
        },
        "mission": {
            "tick_rate_hz": s.mission.tick_rate,
            "timeout_s": s.mission.timeout,
            "pose_source": s.mission.pose_source,
            "encoder_noise": s.mission.encoder_noise,
        },
    }


def load_scenario(path: str | Path) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ScenarioError("scenario file must hold a JSON object")
    return scenario_from_dict(data)


def save_scenario(s: Scenario, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scenario_to_dict(s), fh, indent=2)
        fh.write("\n")


def make_cone(x: float, y: float, **kwargs) -> SceneObject:
    return SceneObject(kind="cone", position=(x, y), **kwargs)


def make_reflector(x: float, y: float, striped: bool = False) -> SceneObject:
    """A small, highly reflective distractor: plate-like, optionally with
    backlight-style red/white stripes."""
    return SceneObject(
        kind="reflector",
        position=(x, y),
        height=0.55,
        base_width=0.45,
        reflectivity_body=230.0,
        reflectivity_stripe=230.0,
        stripe_band=(0.45, 0.75) if striped else (0.0, 0.0),
        color_body=(185, 30, 30) if striped else (205, 205, 210),
        color_stripe=(240, 240, 240),
    )


# Reference lidar: includes a horizontal ring so a cone dead ahead keeps at
# least one return out to the detector's forward range limit.
REFERENCE_LIDAR = LidarConfig(
    channels=17,
    vertical_fov=math.radians(32.0),
    vertical_step=math.radians(2.0),
    horizontal_step=math.radians(0.4),
    scan_rate=10.0,
    max_range=60.0,
    mount_height=0.4,
)


def reference_slalom(seed: int = 42, n_cones: int = 6, spacing: float = 8.0) -> Scenario:
    """The reference scenario: collinear slalom cones plus two reflector
    distractors off the course."""
    objects = [make_cone(10.0 + spacing * i, 0.0) for i in range(n_cones)]
    objects.append(make_reflector(14.0, 5.0, striped=False))
    objects.append(make_reflector(30.0, -5.5, striped=True))
    return Scenario(
        objects=tuple(objects),
        lidar=REFERENCE_LIDAR,
        rng_seed=seed,
        mission=MissionConfig(tick_rate=10.0, timeout=60.0, pose_source="truth"),
    )
