"""Cone candidate preselection from LiDAR point clouds.

Points are kept when their intensity clears a threshold and they fall inside
a box of plausible cone locations (height band above ground, forward range,
lateral corridor). Kept points are merged into candidates by single-linkage
clustering. Recall matters more than precision here: one surviving return is
enough to propose a candidate, and the image classifier does the rejecting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from conedrive.pointcloud import PointCloud


@dataclass(frozen=True)
class DetectionConstraints:
    intensity_min: float = 75.0
    z_min: float = 0.02
    z_max: float = 1.0
    forward_min: float = 0.5
    forward_max: float = 38.0
    lateral_halfwidth: float = 8.0
    cluster_radius: float = 0.4
    min_points: int = 1

    def __post_init__(self):
        if not self.z_min < self.z_max:
            raise ValueError("z band must be non-empty")
        if not self.forward_min < self.forward_max:
            raise ValueError("forward range must be non-empty")
        if self.cluster_radius <= 0:
            raise ValueError("cluster radius must be positive")
        if self.min_points < 1:
            raise ValueError("min_points must be at least 1")


@dataclass(frozen=True)
class ConeCandidate:
    """A cluster of high-intensity in-box returns, centroid in vehicle frame."""

    centroid_local: tuple[float, float, float]
    point_count: int
    peak_intensity: float
    stamp: float

    @property
    def forward(self) -> float:
        return self.centroid_local[0]


def _cluster_labels(points: np.ndarray, radius: float) -> np.ndarray:
    """Single-linkage connected components over a pairwise distance graph."""
    n = len(points)
    parent = np.arange(n)

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    d2 = np.sum((points[:, None, :] - points[None, :, :]) ** 2, axis=-1)
    close = d2 <= radius * radius
    for i in range(n):
        for j in np.nonzero(close[i, i + 1 :])[0]:
            ri, rj = find(i), find(int(j) + i + 1)
            if ri != rj:
                parent[rj] = ri
    return np.array([find(i) for i in range(n)])


def extract_candidates(cloud: PointCloud, c: DetectionConstraints) -> list[ConeCandidate]:
    """Filter, cluster and emit candidates ordered by ascending forward distance."""
    if len(cloud) == 0:
        return []
    xyz = cloud.xyz
    keep = (
        (cloud.intensity >= c.intensity_min)
        & (xyz[:, 0] >= c.forward_min)
        & (xyz[:, 0] <= c.forward_max)
        & (np.abs(xyz[:, 1]) <= c.lateral_halfwidth)
        & (xyz[:, 2] >= c.z_min)
        & (xyz[:, 2] <= c.z_max)
    )
    pts = xyz[keep]
    if len(pts) == 0:
        return []
    intens = cloud.intensity[keep]

    labels = _cluster_labels(pts, c.cluster_radius)
    candidates = []
    for label in np.unique(labels):
        members = labels == label
        if int(members.sum()) < c.min_points:
            continue
        centroid = pts[members].mean(axis=0)
        candidates.append(
            ConeCandidate(
                centroid_local=(float(centroid[0]), float(centroid[1]), float(centroid[2])),
                point_count=int(members.sum()),
                peak_intensity=float(intens[members].max()),
                stamp=cloud.stamp,
            )
        )
    candidates.sort(key=lambda cand: cand.forward)
    return candidates
