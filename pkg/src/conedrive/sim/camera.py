"""Synthetic camera: painter's-algorithm renderer and crop extraction.

Deliberately primitive flat-shaded billboards: the classifier is trained and
evaluated on this same renderer, so visual realism buys nothing for
closed-loop validity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import cv2
import numpy as np

from conedrive.geometry import (
    CameraIntrinsics,
    PixelBox,
    Point3,
    Pose2D,
    camera_center_in_vehicle,
    global_to_local,
    lidar_to_camera,
)
from conedrive.scenario import Scenario, SceneObject, substream


@dataclass
class SyntheticImage:
    width: int
    height: int
    pixels: np.ndarray  # (height, width, 3) uint8, sRGB

    def __post_init__(self):
        self.pixels = np.ascontiguousarray(self.pixels, dtype=np.uint8)
        if self.pixels.shape != (self.height, self.width, 3):
            raise ValueError("pixel buffer shape mismatch")

    def tobytes(self) -> bytes:
        return self.pixels.tobytes()


def _shade(color: tuple[int, int, int], light: float) -> tuple[int, int, int]:
    return tuple(int(np.clip(round(c * light), 0, 255)) for c in color)


def _object_quads(obj: SceneObject, cam_xy: np.ndarray) -> list[tuple[np.ndarray, str]]:
    """Camera-facing billboard polygons in global coordinates (N,3 vertices).

    Returns (polygon, which) pairs, which in {body, stripe}, body first.
    """
    gx, gy = obj.position
    view = np.array([gx - cam_xy[0], gy - cam_xy[1]])
    norm = float(np.linalg.norm(view))
    if norm < 1e-9:
        return []
    lateral = np.array([-view[1], view[0]]) / norm
    half = 0.5 * obj.base_width
    lo, hi = obj.stripe_band

    def at(side: float, z: float) -> np.ndarray:
        return np.array([gx + side * half * lateral[0], gy + side * half * lateral[1], z])

    polys = []
    if obj.kind == "cone":
        apex = np.array([gx, gy, obj.height])
        polys.append((np.stack([at(-1, 0.0), at(1, 0.0), apex]), "body"))
        if hi > lo:
            polys.append(
                (
                    np.stack(
                        [
                            _edge_point(at(-1, 0.0), apex, lo),
                            _edge_point(at(1, 0.0), apex, lo),
                            _edge_point(at(1, 0.0), apex, hi),
                            _edge_point(at(-1, 0.0), apex, hi),
                        ]
                    ),
                    "stripe",
                )
            )
    else:
        polys.append((np.stack([at(-1, 0.0), at(1, 0.0), at(1, obj.height), at(-1, obj.height)]), "body"))
        if hi > lo:
            polys.append(
                (
                    np.stack(
                        [at(-1, lo * obj.height), at(1, lo * obj.height), at(1, hi * obj.height), at(-1, hi * obj.height)]
                    ),
                    "stripe",
                )
            )
    return polys


def _edge_point(base: np.ndarray, apex: np.ndarray, frac: float) -> np.ndarray:
    return base + (apex - base) * frac


def render(scenario: Scenario, vehicle_pose: Pose2D, k: CameraIntrinsics | None = None) -> SyntheticImage:
    """Flat-shaded frame from the vehicle camera at the given pose."""
    k = k or scenario.camera
    light = scenario.light_level
    img = np.empty((k.height, k.width, 3), dtype=np.uint8)

    cam_center = camera_center_in_vehicle(scenario.mount, scenario.lidar.mount_height)
    # horizon: image row of a far-ahead point at camera height
    far = Point3(1e7, 0.0, float(cam_center[2]))
    far_cam = lidar_to_camera(far, scenario.mount, scenario.lidar.mount_height)
    horizon = k.cy + k.fy * far_cam.y / far_cam.z if far_cam.z > 0 else k.cy
    hrow = int(np.clip(round(horizon), 0, k.height))
    img[:hrow] = _shade(scenario.sky_color, light)
    img[hrow:] = _shade(scenario.ground_color, light)

    cam_xy_global = np.array(
        [
            vehicle_pose.x + math.cos(vehicle_pose.theta) * cam_center[0] - math.sin(vehicle_pose.theta) * cam_center[1],
            vehicle_pose.y + math.sin(vehicle_pose.theta) * cam_center[0] + math.cos(vehicle_pose.theta) * cam_center[1],
        ]
    )

    def depth(obj: SceneObject) -> float:
        return float(np.hypot(obj.position[0] - cam_xy_global[0], obj.position[1] - cam_xy_global[1]))

    for obj in sorted(scenario.objects, key=depth, reverse=True):
        for poly_global, which in _object_quads(obj, cam_xy_global):
            pts2d = []
            ok = True
            for vx, vy, vz in poly_global:
                lx, ly = global_to_local(vehicle_pose, (vx, vy))
                cam = lidar_to_camera(Point3(lx, ly, vz), scenario.mount, scenario.lidar.mount_height)
                if cam.z <= 0.05:
                    ok = False
                    break
                pts2d.append([k.cx + k.fx * cam.x / cam.z, k.cy + k.fy * cam.y / cam.z])
            if not ok:
                continue
            color = obj.color_stripe if which == "stripe" else obj.color_body
            cv2.fillPoly(img, [np.round(pts2d).astype(np.int32)], _shade(color, light))

    if scenario.render_noise > 0.0:
        rng = substream(scenario.rng_seed, "render")
        noise = rng.normal(0.0, scenario.render_noise, img.shape)
        img = np.clip(img.astype(np.float64) + noise, 0, 255).astype(np.uint8)

    return SyntheticImage(width=k.width, height=k.height, pixels=img)


def extract_crop(frame: SyntheticImage, box: PixelBox, out_size: int) -> np.ndarray:
    """Cut a pixel box out of the frame and resize it square."""
    v0, v1 = int(math.floor(box.v0)), int(math.ceil(box.v1))
    u0, u1 = int(math.floor(box.u0)), int(math.ceil(box.u1))
    v0, u0 = max(0, v0), max(0, u0)
    v1 = min(frame.height, max(v1, v0 + 1))
    u1 = min(frame.width, max(u1, u0 + 1))
    patch = frame.pixels[v0:v1, u0:u1]
    if patch.shape[0] >= out_size and patch.shape[1] >= out_size:
        interp = cv2.INTER_AREA
    else:
        interp = cv2.INTER_LINEAR
    return cv2.resize(patch, (out_size, out_size), interpolation=interp)
