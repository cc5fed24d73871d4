"""Ring-structured LiDAR point cloud container."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class PointCloud:
    """One LiDAR sweep in the vehicle frame (x fwd, y left, z above ground).

    ``xyz`` is (N, 3) float64, ``intensity`` (N,) in 0-255 units and ``ring``
    (N,) the elevation channel index of each return.
    """

    xyz: np.ndarray
    intensity: np.ndarray
    ring: np.ndarray
    stamp: float = 0.0
    hit_object: np.ndarray = field(default=None, repr=False)  # ground-truth object index, -1 = ground

    def __post_init__(self):
        self.xyz = np.asarray(self.xyz, dtype=float).reshape(-1, 3)
        self.intensity = np.asarray(self.intensity, dtype=float).reshape(-1)
        self.ring = np.asarray(self.ring, dtype=int).reshape(-1)
        n = len(self.xyz)
        if len(self.intensity) != n or len(self.ring) != n:
            raise ValueError("point cloud arrays must have equal length")
        if self.hit_object is None:
            self.hit_object = np.full(n, -1, dtype=int)
        else:
            self.hit_object = np.asarray(self.hit_object, dtype=int).reshape(-1)

    def __len__(self) -> int:
        return len(self.xyz)

    @staticmethod
    def empty(stamp: float = 0.0) -> "PointCloud":
        return PointCloud(
            xyz=np.zeros((0, 3)),
            intensity=np.zeros(0),
            ring=np.zeros(0, dtype=int),
            stamp=stamp,
        )
