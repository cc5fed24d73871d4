"""Desk-scale cone detection and slalom driving simulator.

The package simulates a vehicle carrying a spinning multi-ring LiDAR and a
forward colour camera, extracts cone candidates from the point cloud by
intensity and geometry, classifies candidate image crops with a small
convolutional network, maintains a global cone map, plans a cosine slalom
path and tracks it with a pure-pursuit controller.
"""

from conedrive.geometry import (
    CameraIntrinsics,
    MountTransform,
    PixelBox,
    Point3,
    Pose2D,
    crop_box_for,
    lidar_to_camera,
    local_to_global,
    project_to_image,
)

__all__ = [
    "CameraIntrinsics",
    "MountTransform",
    "PixelBox",
    "Point3",
    "Pose2D",
    "crop_box_for",
    "lidar_to_camera",
    "local_to_global",
    "project_to_image",
]
