"""Ground-truth world simulation: LiDAR, camera and vehicle plant."""

from conedrive.sim.lidar import expected_hits, scan
from conedrive.sim.camera import render
from conedrive.sim.plant import step_plant

__all__ = ["expected_hits", "scan", "render", "step_plant"]
