"""Global slalom path construction from the cone map.

The path is assembled from cosine-offset segments: a half-period cosine
between each consecutive cone pair (passing them on alternating sides), a
smooth ramp from the start pose to the first cone, circular-arc filler
points where consecutive segments leave a gap, and trimming where they
overlap. Planning is stateless: any map change rebuilds the whole path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from conedrive.geometry import Pose2D


@dataclass(frozen=True)
class PlannerConfig:
    amplitude: float = 1.5
    spacing: float = 0.25
    filler_offset: float = 1.5
    straight_length: float = 10.0
    first_side: str = "left"

    def __post_init__(self):
        if self.amplitude <= 0 or self.spacing <= 0:
            raise ValueError("amplitude and spacing must be positive")
        if self.first_side not in ("left", "right"):
            raise ValueError("first_side must be 'left' or 'right'")

    @property
    def first_side_sign(self) -> int:
        return 1 if self.first_side == "left" else -1


@dataclass(frozen=True)
class PlannedPath:
    points: tuple[tuple[float, float], ...]
    version: int = 0

    def to_json(self) -> dict:
        return {"version": self.version, "points": [[x, y] for x, y in self.points]}


def order_and_sides(
    cones: Sequence[tuple[float, float]], start: Pose2D, cfg: PlannerConfig
) -> list[tuple[tuple[float, float], int]]:
    """Order cones by arc progression from the start and assign alternating sides.

    Ordering is geometric, not detection order: starting at the start pose
    and heading, repeatedly take the nearest remaining cone that lies ahead
    of the running direction, then continue along the direction into it.
    Cones behind the start pose are dropped.
    """
    heading = np.array([math.cos(start.theta), math.sin(start.theta)])
    origin = np.array([start.x, start.y])
    remaining = [np.array(c, dtype=float) for c in cones]
    remaining = [c for c in remaining if float(np.dot(c - origin, heading)) > 1e-9]

    ordered: list[np.ndarray] = []
    current, direction = origin, heading
    while remaining:
        ahead = [c for c in remaining if float(np.dot(c - current, direction)) > 1e-9]
        if not ahead:
            break
        nxt = min(ahead, key=lambda c: float(np.linalg.norm(c - current)))
        ordered.append(nxt)
        chord = nxt - current
        norm = float(np.linalg.norm(chord))
        if norm > 1e-9:
            direction = chord / norm
        current = nxt
        remaining = [c for c in remaining if c is not nxt]

    sign = cfg.first_side_sign
    out = []
    for i, cone in enumerate(ordered):
        out.append(((float(cone[0]), float(cone[1])), sign * (1 if i % 2 == 0 else -1)))
    return out


def _left_normal(direction: np.ndarray) -> np.ndarray:
    return np.array([-direction[1], direction[0]])


def _resample(fine: np.ndarray, spacing: float) -> np.ndarray:
    """Resample a polyline at fixed arc-length steps, keeping both endpoints."""
    deltas = np.linalg.norm(np.diff(fine, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(deltas)])
    total = float(cum[-1])
    if total <= 1e-12:
        return fine[:1]
    targets = np.arange(0.0, total, spacing)
    if total - targets[-1] > 1e-9:
        targets = np.concatenate([targets, [total]])
    else:
        targets[-1] = total
    idx = np.searchsorted(cum, targets, side="right") - 1
    idx = np.clip(idx, 0, len(fine) - 2)
    seg_len = np.maximum(cum[idx + 1] - cum[idx], 1e-12)
    frac = (targets - cum[idx]) / seg_len
    return fine[idx] + (fine[idx + 1] - fine[idx]) * frac[:, None]


def _offset_segment(p0: np.ndarray, p1: np.ndarray, offset_fn, spacing: float) -> np.ndarray:
    """Sample chord + lateral offset profile, resampled at path spacing."""
    chord = p1 - p0
    length = float(np.linalg.norm(chord))
    if length < 1e-9:
        return p0[None, :]
    direction = chord / length
    normal = _left_normal(direction)
    n_fine = max(64, int(math.ceil(10.0 * length / spacing)))
    t = np.linspace(0.0, 1.0, n_fine)
    fine = p0[None, :] + t[:, None] * chord[None, :] + offset_fn(t)[:, None] * normal[None, :]
    return _resample(fine, spacing)


def _arc_points(center: np.ndarray, a: np.ndarray, b: np.ndarray, radius: float, spacing: float) -> np.ndarray:
    """Interior points of the shorter arc around center from a to b at radius."""
    ang_a = math.atan2(a[1] - center[1], a[0] - center[0])
    ang_b = math.atan2(b[1] - center[1], b[0] - center[0])
    sweep = math.remainder(ang_b - ang_a, 2.0 * math.pi)
    n = int(math.ceil(abs(sweep) * radius / spacing))
    if n < 2:
        return np.zeros((0, 2))
    angles = ang_a + sweep * np.linspace(0.0, 1.0, n + 1)[1:-1]
    return center[None, :] + radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)


def _join(points: list[np.ndarray], segment: np.ndarray, pivot: np.ndarray, cfg: PlannerConfig) -> None:
    """Append a segment, inserting arc fillers in gaps and trimming overlaps."""
    if not points:
        points.extend(segment)
        return
    end = points[-1]
    seg = list(segment)
    if len(seg) >= 2:
        chord_dir = seg[-1] - seg[0]
        chord_dir = chord_dir / max(float(np.linalg.norm(chord_dir)), 1e-12)
        end_proj = float(np.dot(end - pivot, chord_dir))
        # overlap: the new segment starts behind the assembled path's end
        while seg and float(np.dot(seg[0] - pivot, chord_dir)) <= end_proj:
            seg.pop(0)
    if not seg:
        return
    gap = float(np.linalg.norm(seg[0] - end))
    if gap <= 1e-9:
        seg.pop(0)
    elif gap > 2.0 * cfg.spacing:
        arc = _arc_points(pivot, end, seg[0], cfg.filler_offset, cfg.spacing)
        for p in arc:
            points.append(p)
        gap = float(np.linalg.norm(seg[0] - points[-1]))
        if gap > 2.0 * cfg.spacing:  # sharp joins: bridge linearly
            n = int(math.ceil(gap / (1.5 * cfg.spacing)))
            for k in range(1, n):
                points.append(points[-1] + (seg[0] - points[-1]) * (1.0 / (n - k + 1)))
    points.extend(seg)


def plan(
    cones: Sequence[tuple[float, float]], start: Pose2D, cfg: PlannerConfig, version: int = 0
) -> PlannedPath:
    """Build the full discrete path for the current cone map."""
    ordered = order_and_sides(cones, start, cfg)
    origin = np.array([start.x, start.y])

    if not ordered:
        heading = np.array([math.cos(start.theta), math.sin(start.theta)])
        goal = origin + cfg.straight_length * heading
        pts = _resample(np.stack([origin, goal]), cfg.spacing)
        return PlannedPath(points=tuple((float(x), float(y)) for x, y in pts), version=version)

    amplitude = cfg.amplitude
    points: list[np.ndarray] = []

    first_cone = np.array(ordered[0][0])
    first_side = ordered[0][1]
    ramp = _offset_segment(
        origin,
        first_cone,
        lambda t: first_side * amplitude * np.sin(0.5 * math.pi * t),
        cfg.spacing,
    )
    _join(points, ramp, first_cone, cfg)

    for i in range(len(ordered) - 1):
        (c0, side), (c1, _) = ordered[i], ordered[i + 1]
        seg = _offset_segment(
            np.array(c0),
            np.array(c1),
            lambda t, s=side: s * amplitude * np.cos(math.pi * t),
            cfg.spacing,
        )
        _join(points, seg, np.array(c0), cfg)

    return PlannedPath(points=tuple((float(x), float(y)) for x, y in points), version=version)
