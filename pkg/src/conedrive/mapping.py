"""Global 2D cone map with a first-detection-wins policy.

Repeated observations of a cone are dropped once a position is stored:
the LiDAR position estimate is precise enough that statistical fusion of
later measurements is not worth the bookkeeping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from conedrive.geometry import Pose2D, local_to_global


@dataclass(frozen=True)
class ConeObservation:
    local_position: tuple[float, float]
    vehicle_pose: Pose2D
    stamp: float


@dataclass(frozen=True)
class MappedCone:
    id: int
    x: float
    y: float
    first_stamp: float


@dataclass
class IntegrateResult:
    added: bool
    cone_id: int


@dataclass
class ConeMap:
    dedup_radius: float = 1.0
    cones: list[MappedCone] = field(default_factory=list)
    _next_id: int = 0

    def integrate(self, obs: ConeObservation) -> IntegrateResult:
        """Insert an observation unless it duplicates a stored cone."""
        gx, gy = local_to_global(obs.vehicle_pose, obs.local_position)
        for cone in self.cones:
            if math.hypot(cone.x - gx, cone.y - gy) < self.dedup_radius:
                return IntegrateResult(added=False, cone_id=cone.id)
        cone = MappedCone(id=self._next_id, x=gx, y=gy, first_stamp=obs.stamp)
        self._next_id += 1
        self.cones.append(cone)
        return IntegrateResult(added=True, cone_id=cone.id)

    def positions(self) -> list[tuple[float, float]]:
        return [(c.x, c.y) for c in self.cones]

    def reset(self) -> None:
        self.cones.clear()

    def __len__(self) -> int:
        return len(self.cones)

    def to_json(self) -> list[dict]:
        return [{"id": c.id, "x": c.x, "y": c.y} for c in self.cones]
