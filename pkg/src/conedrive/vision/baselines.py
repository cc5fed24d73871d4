"""Colour and triangle-shape baseline classifiers.

Both are the classic fast checks a cone invites: the body is orange, and
the silhouette is a triangle with a characteristic apex angle. They are kept
as comparison baselines and as the cheap gate in front of the CNN.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import cv2
import numpy as np


@dataclass(frozen=True)
class ColourConfig:
    hue_lo: float = 10.0  # degrees, 0-360
    hue_hi: float = 35.0
    sat_min: float = 0.5
    val_min: float = 0.4
    threshold: float = 0.10  # orange pixel fraction for a positive


@dataclass(frozen=True)
class TriangleConfig:
    canny_lo: int = 60
    canny_hi: int = 160
    hough_votes: int = 10
    apex_lo: float = 15.0  # enclosed angle band, degrees
    apex_hi: float = 80.0
    max_lines: int = 8


@dataclass(frozen=True)
class TriangleResult:
    match: bool
    pairs: list  # (enclosed angle degrees, apex (u, v)) per candidate pair


def _require_rgb(image) -> np.ndarray:
    arr = image.pixels if hasattr(image, "pixels") else np.asarray(image)
    if arr.ndim != 3 or arr.shape[2] != 3 or arr.dtype != np.uint8:
        raise ValueError("expected uint8 (H, W, 3) RGB image")
    return arr


def colour_score(image, cfg: ColourConfig = ColourConfig()) -> float:
    """Fraction of pixels inside the orange hue/saturation/value band."""
    rgb = _require_rgb(image)
    hsv = cv2.cvtColor(rgb, cv2.COLOR_RGB2HSV)
    lo = np.array([cfg.hue_lo / 2.0, cfg.sat_min * 255.0, cfg.val_min * 255.0], dtype=np.float32)
    hi = np.array([cfg.hue_hi / 2.0, 255.0, 255.0], dtype=np.float32)
    mask = cv2.inRange(hsv, lo, hi)
    return float(cv2.countNonZero(mask)) / (rgb.shape[0] * rgb.shape[1])


def triangle_score(image, cfg: TriangleConfig = TriangleConfig()) -> TriangleResult:
    """Canny edges -> Hough lines -> look for a cone-like enclosed angle.

    A match requires some line pair whose enclosed angle falls in the apex
    band with the intersection point in the upper image half.
    """
    rgb = _require_rgb(image)
    gray = cv2.cvtColor(rgb, cv2.COLOR_RGB2GRAY)
    edges = cv2.Canny(gray, cfg.canny_lo, cfg.canny_hi)
    lines = cv2.HoughLines(edges, 1, math.pi / 180.0, cfg.hough_votes)
    if lines is None:
        return TriangleResult(match=False, pairs=[])
    lines = lines[: cfg.max_lines, 0, :]  # strongest first: (rho, theta)

    height, width = gray.shape
    pairs = []
    match = False
    for i in range(len(lines)):
        for j in range(i + 1, len(lines)):
            r1, th1 = float(lines[i][0]), float(lines[i][1])
            r2, th2 = float(lines[j][0]), float(lines[j][1])
            delta = abs(th1 - th2)
            enclosed = math.degrees(min(delta, math.pi - delta))
            det = math.cos(th1) * math.sin(th2) - math.sin(th1) * math.cos(th2)
            if abs(det) < 1e-9:
                continue
            u = (r1 * math.sin(th2) - r2 * math.sin(th1)) / det
            v = (r2 * math.cos(th1) - r1 * math.cos(th2)) / det
            pairs.append((enclosed, (u, v)))
            if cfg.apex_lo <= enclosed <= cfg.apex_hi and -height <= v < height / 2.0 and -width <= u <= 2 * width:
                match = True
    return TriangleResult(match=match, pairs=pairs)
