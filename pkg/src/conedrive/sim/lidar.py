"""Ray-cast LiDAR simulation over the scenario's ground plane and objects.

``scan`` casts one ray per (ring, azimuth) cell and keeps the nearest
intersection; ``expected_hits`` predicts a lone cone's return count through
an independent derivation (a quadratic in height along each ray instead of
the ray-parameter quadratic used by the scene caster), so the two can
cross-check each other.
"""

from __future__ import annotations

import math

import numpy as np

from conedrive.geometry import Pose2D
from conedrive.pointcloud import PointCloud
from conedrive.scenario import LidarConfig, Scenario, SceneObject

_EPS = 1e-9


def _ray_directions(lidar: LidarConfig) -> tuple[np.ndarray, np.ndarray]:
    """Unit directions (N,3) in the vehicle frame plus each ray's ring index."""
    elev = lidar.ring_elevations()
    azim = lidar.azimuths()
    ce, se = np.cos(elev), np.sin(elev)
    ca, sa = np.cos(azim), np.sin(azim)
    dirs = np.empty((len(elev), len(azim), 3))
    dirs[:, :, 0] = ce[:, None] * ca[None, :]
    dirs[:, :, 1] = ce[:, None] * sa[None, :]
    dirs[:, :, 2] = se[:, None] * np.ones_like(ca)[None, :]
    rings = np.repeat(np.arange(len(elev)), len(azim))
    return dirs.reshape(-1, 3), rings


def _ray_cone_t(origin: np.ndarray, dirs: np.ndarray, obj: SceneObject) -> np.ndarray:
    """Smallest positive ray parameter hitting an upright cone, inf on miss."""
    cx, cy = obj.position
    h = obj.height
    k = (0.5 * obj.base_width) / h
    px, py, pz = origin[0] - cx, origin[1] - cy, origin[2]
    dx, dy, dz = dirs[:, 0], dirs[:, 1], dirs[:, 2]

    a = dx * dx + dy * dy - (k * k) * dz * dz
    b = 2.0 * (px * dx + py * dy + (k * k) * dz * (h - pz))
    c = px * px + py * py - (k * k) * (h - pz) ** 2

    t = np.full(len(dirs), np.inf)
    disc = b * b - 4.0 * a * c

    quad = np.abs(a) > _EPS
    ok = quad & (disc >= 0.0)
    sq = np.sqrt(np.where(ok, disc, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = np.where(ok, (-b - sq) / (2.0 * a), np.inf)
        t2 = np.where(ok, (-b + sq) / (2.0 * a), np.inf)
        tl = np.where(~quad & (np.abs(b) > _EPS), -c / b, np.inf)

    for cand in (t1, t2, tl):
        finite = np.isfinite(cand)
        z = pz + np.where(finite, cand, 0.0) * dz
        valid = finite & (cand > _EPS) & (z >= -_EPS) & (z <= h + _EPS) & (cand < t)
        t = np.where(valid, cand, t)
    return t


def _ray_box_t(origin: np.ndarray, dirs: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Slab-test intersection with an axis-aligned box, inf on miss."""
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / dirs
    t0 = (lo[None, :] - origin[None, :]) * inv
    t1 = (hi[None, :] - origin[None, :]) * inv
    tmin = np.nanmax(np.minimum(t0, t1), axis=1)
    tmax = np.nanmin(np.maximum(t0, t1), axis=1)
    hit = (tmax >= np.maximum(tmin, _EPS)) & (tmax > _EPS)
    tenter = np.where(tmin > _EPS, tmin, tmax)
    return np.where(hit, tenter, np.inf)


def _box_bounds(obj: SceneObject) -> tuple[np.ndarray, np.ndarray]:
    cx, cy = obj.position
    if obj.kind == "reflector":
        half_x, half_y = 0.03, 0.5 * obj.base_width
    else:
        half_x = half_y = 0.5 * obj.base_width
    lo = np.array([cx - half_x, cy - half_y, 0.0])
    hi = np.array([cx + half_x, cy + half_y, obj.height])
    return lo, hi


def _object_intensity(obj: SceneObject, z: np.ndarray) -> np.ndarray:
    frac = np.clip(z / obj.height, 0.0, 1.0)
    lo, hi = obj.stripe_band
    striped = (frac >= lo) & (frac <= hi)
    return np.where(striped, obj.reflectivity_stripe, obj.reflectivity_body)


def scan(scenario: Scenario, vehicle_pose: Pose2D, stamp: float = 0.0) -> PointCloud:
    """One full sweep from the given pose; points in the vehicle frame."""
    if not (math.isfinite(vehicle_pose.x) and math.isfinite(vehicle_pose.y)):
        raise ValueError("vehicle pose must be finite")
    lidar = scenario.lidar
    dirs_local, rings = _ray_directions(lidar)

    ct, st = math.cos(vehicle_pose.theta), math.sin(vehicle_pose.theta)
    dirs = dirs_local.copy()
    dirs[:, 0] = ct * dirs_local[:, 0] - st * dirs_local[:, 1]
    dirs[:, 1] = st * dirs_local[:, 0] + ct * dirs_local[:, 1]
    origin = np.array([vehicle_pose.x, vehicle_pose.y, lidar.mount_height])

    n = len(dirs)
    t_best = np.full(n, np.inf)
    hit_idx = np.full(n, -2, dtype=int)  # -2 none, -1 ground, >=0 object

    dz = dirs[:, 2]
    with np.errstate(divide="ignore"):
        t_ground = np.where(dz < -_EPS, -origin[2] / dz, np.inf)
    ground_ok = t_ground > _EPS
    t_best = np.where(ground_ok, t_ground, t_best)
    hit_idx = np.where(ground_ok, -1, hit_idx)

    for i, obj in enumerate(scenario.objects):
        if obj.kind == "cone":
            t_obj = _ray_cone_t(origin, dirs, obj)
        else:
            lo, hi = _box_bounds(obj)
            t_obj = _ray_box_t(origin, dirs, lo, hi)
        closer = t_obj <= t_best  # objects win range ties against the ground
        t_best = np.where(closer, t_obj, t_best)
        hit_idx = np.where(closer, i, hit_idx)

    keep = np.isfinite(t_best) & (t_best <= lidar.max_range)
    t = t_best[keep]
    pts_global = origin[None, :] + t[:, None] * dirs[keep]
    hit = hit_idx[keep]
    rings_kept = rings[keep]

    intensity = np.full(len(t), scenario.ground_reflectivity)
    for i, obj in enumerate(scenario.objects):
        members = hit == i
        if members.any():
            intensity[members] = _object_intensity(obj, pts_global[members, 2])
    gamma = scenario.intensity_falloff_gamma
    if gamma > 0.0:
        factor = np.minimum(1.0, (scenario.intensity_falloff_d0 / t) ** gamma)
        intensity = intensity * factor

    rel = pts_global - np.array([vehicle_pose.x, vehicle_pose.y, 0.0])[None, :]
    xyz = np.empty_like(rel)
    xyz[:, 0] = ct * rel[:, 0] + st * rel[:, 1]
    xyz[:, 1] = -st * rel[:, 0] + ct * rel[:, 1]
    xyz[:, 2] = rel[:, 2]

    return PointCloud(xyz=xyz, intensity=intensity, ring=rings_kept, stamp=stamp, hit_object=hit)


def expected_hits(cone: SceneObject, distance: float, lidar: LidarConfig) -> int:
    """Analytic return count for a lone cone ``distance`` meters dead ahead.

    Works in height coordinates: along each grid ray the squared horizontal
    clearance to the cone axis minus the cone's local radius is a quadratic
    in z, so the ray hits iff that quadratic dips to zero inside the cone's
    height band reachable with a non-negative ray parameter.
    """
    if distance <= 0:
        raise ValueError("distance must be positive")
    if cone.kind != "cone":
        raise ValueError("expected_hits is defined for cones")

    h, r = cone.height, 0.5 * cone.base_width
    sensor_h = lidar.mount_height
    max_range = lidar.max_range
    dirs, _ = _ray_directions(lidar)
    count = 0
    for dx, dy, dz in dirs:
        if abs(dz) < _EPS:
            if not (0.0 <= sensor_h <= h):
                continue
            rho = r * (1.0 - sensor_h / h)
            # 2D: |(t*dx - distance, t*dy)| <= rho for some t >= 0
            tc = distance * dx
            min_d2 = distance * distance - tc * tc if tc > 0 else distance * distance
            if min_d2 > rho * rho:
                continue
            t_hit = tc - math.sqrt(max(tc * tc - distance * distance + rho * rho, 0.0))
            if 0.0 <= t_hit <= max_range:
                count += 1
            continue

        alpha, beta = dx / dz, dy / dz
        c1 = -alpha * sensor_h - distance
        c2 = -beta * sensor_h
        kk = -r / h
        c3 = r
        a = alpha * alpha + beta * beta - kk * kk
        b = 2.0 * (alpha * c1 + beta * c2 - kk * c3)
        c = c1 * c1 + c2 * c2 - c3 * c3

        z_lo, z_hi = 0.0, h
        if dz < 0:
            z_hi = min(z_hi, sensor_h)  # t >= 0 reaches only below the sensor
        else:
            z_lo = max(z_lo, sensor_h)
        if z_lo > z_hi:
            continue

        def g(z: float) -> float:
            return (a * z + b) * z + c

        pieces: list[tuple[float, float]] = []
        if abs(a) > _EPS:
            disc = b * b - 4.0 * a * c
            if disc < 0.0:
                if a > 0:
                    continue
                pieces = [(z_lo, z_hi)]  # concave and never positive-rooted: all below
            else:
                sq = math.sqrt(disc)
                r1, r2 = (-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)
                r1, r2 = min(r1, r2), max(r1, r2)
                if a > 0:
                    lo, hi = max(z_lo, r1), min(z_hi, r2)
                    if lo <= hi:
                        pieces = [(lo, hi)]
                else:
                    if z_lo <= min(z_hi, r1):
                        pieces.append((z_lo, min(z_hi, r1)))
                    if max(z_lo, r2) <= z_hi:
                        pieces.append((max(z_lo, r2), z_hi))
        else:
            if abs(b) > _EPS:
                zr = -c / b
                if b > 0:
                    lo, hi = z_lo, min(z_hi, zr)
                else:
                    lo, hi = max(z_lo, zr), z_hi
                if lo <= hi:
                    pieces = [(lo, hi)]
            elif c <= 0.0:
                pieces = [(z_lo, z_hi)]

        if not pieces:
            continue
        t_first = min((z - sensor_h) / dz for lo_hi in pieces for z in lo_hi)
        if 0.0 <= t_first <= max_range:
            count += 1
    return count
