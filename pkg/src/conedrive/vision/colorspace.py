"""sRGB <-> CIE L*a*b* conversion under the D65 white point.

The classifier consumes LAB so that colour information is separated from
brightness and crops keep their class appearance across light levels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_RGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
_XYZ_TO_RGB = np.linalg.inv(_RGB_TO_XYZ)
_WHITE_D65 = np.array([0.95047, 1.0, 1.08883])
_DELTA = 6.0 / 29.0


@dataclass
class LabImage:
    width: int
    height: int
    data: np.ndarray  # (height, width, 3) float64: L 0-100, a/b around 0

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.shape != (self.height, self.width, 3):
            raise ValueError("LAB buffer shape mismatch")


def _pixels(image) -> np.ndarray:
    arr = image.pixels if hasattr(image, "pixels") else image
    arr = np.asarray(arr)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError("expected (H, W, 3) RGB image")
    return arr


def _srgb_to_linear(c: np.ndarray) -> np.ndarray:
    return np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)


def _lab_f(t: np.ndarray) -> np.ndarray:
    return np.where(t > _DELTA**3, np.cbrt(t), t / (3.0 * _DELTA**2) + 4.0 / 29.0)


def _lab_f_inv(t: np.ndarray) -> np.ndarray:
    return np.where(t > _DELTA, t**3, 3.0 * _DELTA**2 * (t - 4.0 / 29.0))


def rgb_to_lab(image) -> LabImage:
    """Convert an sRGB image (uint8 or 0-1 float) to CIE LAB."""
    arr = _pixels(image)
    rgb = arr.astype(np.float64) / 255.0 if arr.dtype == np.uint8 else arr.astype(np.float64)
    xyz = _srgb_to_linear(rgb) @ _RGB_TO_XYZ.T
    f = _lab_f(xyz / _WHITE_D65)
    lab = np.empty_like(xyz)
    lab[..., 0] = 116.0 * f[..., 1] - 16.0
    lab[..., 1] = 500.0 * (f[..., 0] - f[..., 1])
    lab[..., 2] = 200.0 * (f[..., 1] - f[..., 2])
    h, w = lab.shape[:2]
    return LabImage(width=w, height=h, data=lab)


def lab_to_rgb(lab: LabImage) -> np.ndarray:
    """Inverse conversion back to uint8 sRGB (gamut-clipped)."""
    data = lab.data
    fy = (data[..., 0] + 16.0) / 116.0
    fx = fy + data[..., 1] / 500.0
    fz = fy - data[..., 2] / 200.0
    xyz = np.stack([_lab_f_inv(fx), _lab_f_inv(fy), _lab_f_inv(fz)], axis=-1) * _WHITE_D65
    linear = xyz @ _XYZ_TO_RGB.T
    srgb = np.where(
        np.clip(linear, 0.0, 1.0) <= 0.0031308,
        12.92 * np.clip(linear, 0.0, 1.0),
        1.055 * np.clip(linear, 0.0, 1.0) ** (1.0 / 2.4) - 0.055,
    )
    return np.clip(np.round(srgb * 255.0), 0, 255).astype(np.uint8)
