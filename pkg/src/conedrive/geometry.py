"""Frames, rigid transforms and the pinhole camera model.

Conventions used throughout the package:

* Vehicle frame: +x forward, +y left, +z up, origin on the ground directly
  below the LiDAR. Poses live in a global frame whose origin is the vehicle
  start pose.
* Camera (optical) frame: +z along the optical axis, +x right, +y down.
  Image coordinates: +u right, +v down, origin at the top-left pixel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Basis change from vehicle axes (x fwd, y left, z up) to optical axes
# (x right, y down, z fwd). Applied before the mount rotation, so a mount
# with identity rotation is a camera looking straight ahead.
_VEHICLE_TO_OPTICAL = np.array(
    [
        [0.0, -1.0, 0.0],
        [0.0, 0.0, -1.0],
        [1.0, 0.0, 0.0],
    ]
)


def wrap_angle(theta: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    wrapped = math.fmod(theta + math.pi, 2.0 * math.pi)
    if wrapped <= 0.0:
        wrapped += 2.0 * math.pi
    return wrapped - math.pi


@dataclass(frozen=True)
class Pose2D:
    """Planar vehicle pose: position in meters, heading CCW from global +x."""

    x: float
    y: float
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", wrap_angle(self.theta))


@dataclass(frozen=True)
class Point3:
    """A 3D point in a named metric frame."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)):
            raise ValueError(f"non-finite point ({self.x}, {self.y}, {self.z})")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics in pixels."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError("principal point must lie inside the image")


def _identity_rotation() -> np.ndarray:
    return np.eye(3)


@dataclass(frozen=True)
class MountTransform:
    """Rigid transform from the LiDAR frame into the camera frame.

    ``translation`` is the position of the LiDAR origin expressed in camera
    (optical) axes; ``rotation`` perturbs the camera away from the straight
    forward-looking orientation and is the identity for a camera mounted
    directly below the LiDAR looking along vehicle +x.
    """

    translation: Point3 = Point3(0.0, 0.0, 0.0)
    rotation: np.ndarray = field(default_factory=_identity_rotation)

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=float)
        if r.shape != (3, 3):
            raise ValueError("rotation must be 3x3")
        if not np.allclose(r.T @ r, np.eye(3), atol=1e-9):
            raise ValueError("rotation must be orthonormal")
        if not math.isclose(float(np.linalg.det(r)), 1.0, abs_tol=1e-9):
            raise ValueError("rotation must be proper (det=+1)")
        object.__setattr__(self, "rotation", r)


@dataclass(frozen=True)
class PixelBox:
    """Axis-aligned pixel rectangle, u0 < u1 and v0 < v1, inside the image."""

    u0: float
    v0: float
    u1: float
    v1: float

    def __post_init__(self):
        if not (self.u0 < self.u1 and self.v0 < self.v1):
            raise ValueError("degenerate pixel box")

    @property
    def width(self) -> float:
        return self.u1 - self.u0

    @property
    def height(self) -> float:
        return self.v1 - self.v0


def project_to_image(p: Point3, k: CameraIntrinsics) -> tuple[float, float] | None:
    """Project a camera-frame point to pixel coordinates.

    Returns None for points at or behind the camera plane and for points
    that project outside the image.
    """
    if p.z <= 0.0:
        return None
    u = k.cx + k.fx * p.x / p.z
    v = k.cy + k.fy * p.y / p.z
    if 0.0 <= u < k.width and 0.0 <= v < k.height:
        return (u, v)
    return None


def local_to_global(pose: Pose2D, local: tuple[float, float]) -> tuple[float, float]:
    """Map a vehicle-frame planar point to global coordinates."""
    c, s = math.cos(pose.theta), math.sin(pose.theta)
    lx, ly = local
    return (pose.x + c * lx - s * ly, pose.y + s * lx + c * ly)


def global_to_local(pose: Pose2D, point: tuple[float, float]) -> tuple[float, float]:
    """Inverse of local_to_global."""
    c, s = math.cos(pose.theta), math.sin(pose.theta)
    dx, dy = point[0] - pose.x, point[1] - pose.y
    return (c * dx + s * dy, -s * dx + c * dy)


def lidar_to_camera(p_vehicle: Point3, mount: MountTransform, mount_height: float) -> Point3:
    """Transform a vehicle-frame point into the camera optical frame.

    ``mount_height`` is the LiDAR height above ground (the vehicle-frame
    origin sits on the ground below the sensor).
    """
    rel = p_vehicle.as_array() - np.array([0.0, 0.0, mount_height])
    cam = mount.rotation @ (_VEHICLE_TO_OPTICAL @ rel) + mount.translation.as_array()
    return Point3(float(cam[0]), float(cam[1]), float(cam[2]))


def camera_center_in_vehicle(mount: MountTransform, mount_height: float) -> np.ndarray:
    """Camera optical center expressed in the vehicle frame."""
    rb = mount.rotation @ _VEHICLE_TO_OPTICAL
    center = -(rb.T @ mount.translation.as_array()) + np.array([0.0, 0.0, mount_height])
    return center


def crop_box_for(
    candidate_cam: Point3,
    k: CameraIntrinsics,
    cone_height: float,
    cone_base: float,
    margin: float = 0.4,
) -> PixelBox | None:
    """Pixel box around a projected candidate, sized for a cone at its depth.

    The box spans ``cone_base*(1+margin)`` by ``cone_height*(1+margin)``
    meters at the candidate depth, clamped to the frame. None when the
    candidate center does not project into the image.
    """
    center = project_to_image(candidate_cam, k)
    if center is None:
        return None
    u, v = center
    z = candidate_cam.z
    half_w = 0.5 * k.fx * cone_base * (1.0 + margin) / z
    half_h = 0.5 * k.fy * cone_height * (1.0 + margin) / z
    u0 = max(0.0, u - half_w)
    v0 = max(0.0, v - half_h)
    u1 = min(float(k.width), u + half_w)
    v1 = min(float(k.height), v + half_h)
    if u0 >= u1 or v0 >= v1:
        return None
    return PixelBox(u0, v0, u1, v1)
