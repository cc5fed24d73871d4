"""Synthetic crop corpus generation through the real crop pipeline.

Positive crops are cones rendered at varied distance, offset, colour jitter
and light level; negatives are reflector plates (plain and backlight-striped),
blocks and empty background windows. Each crop is cut from a full frame with
the same projection/crop code the live pipeline uses, so corpus statistics
match what the classifier will see online.
"""

from __future__ import annotations

import csv
from dataclasses import replace
from pathlib import Path

import numpy as np

from conedrive.detect import extract_candidates
from conedrive.geometry import Point3, crop_box_for, lidar_to_camera
from conedrive.ppm import read_ppm, write_ppm
from conedrive.scenario import REFERENCE_LIDAR, Scenario, SceneObject, substream
from conedrive.sim.camera import extract_crop, render
from conedrive.sim.lidar import scan
from conedrive.vision.cnn import LABEL_CONE, LABEL_NOT_CONE, CropSample

_NEGATIVE_KINDS = ("reflector_plain", "reflector_striped", "block", "background")


def _jittered_cone(rng: np.random.Generator, x: float, y: float) -> SceneObject:
    body = np.clip(np.array([230, 90, 20]) + rng.normal(0, 12, 3), 0, 255).astype(int)
    stripe = np.clip(np.array([245, 245, 245]) + rng.normal(0, 8, 3), 0, 255).astype(int)
    return SceneObject(
        kind="cone",
        position=(x, y),
        height=float(rng.uniform(0.45, 0.55)),
        base_width=float(rng.uniform(0.26, 0.34)),
        color_body=tuple(int(v) for v in body),
        color_stripe=tuple(int(v) for v in stripe),
    )


def _negative_object(
    rng: np.random.Generator, kind: str, x: float, y: float, hard: bool = False
) -> SceneObject | None:
    if kind == "background":
        return None
    if kind == "block":
        if hard and rng.random() < 0.6:
            # cone-coloured box: only the silhouette separates it from a cone
            tint = np.clip(np.array([230, 90, 20]) + rng.normal(0, 20, 3), 0, 255).astype(int)
        else:
            gray = int(rng.uniform(60, 200))
            tint = np.clip(gray + rng.normal(0, 25, 3), 0, 255).astype(int)
        return SceneObject(
            kind="block",
            position=(x, y),
            height=float(rng.uniform(0.3, 0.9)),
            base_width=float(rng.uniform(0.3, 0.8)),
            color_body=tuple(int(v) for v in tint),
            stripe_band=(0.0, 0.0),
        )
    striped = kind == "reflector_striped"
    if striped and hard and rng.random() < 0.5:
        body = tuple(int(v) for v in np.clip(np.array([225, 100, 30]) + rng.normal(0, 20, 3), 0, 255))
    elif striped:
        body = (int(rng.uniform(150, 220)), int(rng.uniform(20, 60)), int(rng.uniform(20, 60)))
    else:
        body = (int(rng.uniform(180, 225)),) * 3
    return SceneObject(
        kind="reflector",
        position=(x, y),
        height=float(rng.uniform(0.45, 0.65)),
        base_width=float(rng.uniform(0.35, 0.55)),
        reflectivity_body=230.0,
        reflectivity_stripe=230.0,
        stripe_band=(0.45, 0.75) if striped else (0.0, 0.0),
        color_body=body,
        color_stripe=(240, 240, 240),
    )


def _render_crop(
    scenario: Scenario,
    rng: np.random.Generator,
    obj: SceneObject | None,
    light: float,
    noise: float,
) -> np.ndarray | None:
    """Place one object (or nothing), run the live scan/extract/crop chain
    and return the classifier-sized crop, so corpus statistics match what
    the pipeline sees online."""
    sc = replace(
        scenario,
        objects=(obj,) if obj is not None else (),
        light_level=light,
    )
    if obj is not None:
        cloud = scan(sc, sc.vehicle.start)
        cands = extract_candidates(cloud, sc.detector)
        if not cands:
            return None  # object not visible to the LiDAR at this placement
        x, y = obj.position
        best = min(cands, key=lambda c: (c.centroid_local[0] - x) ** 2 + (c.centroid_local[1] - y) ** 2)
        cx, cy, cz = best.centroid_local
    else:
        cx = float(rng.uniform(4.0, 25.0))
        cy = float(rng.uniform(-0.3, 0.3)) * cx
        cz = 0.2

    candidate = Point3(
        cx + float(rng.normal(0, 0.04)),
        cy + float(rng.normal(0, 0.04)),
        cz + float(rng.normal(0, 0.03)),
    )
    # the pipeline sizes every candidate box for a cone, whatever the object
    cone_h, cone_w = sc.cone_dimensions()
    p_cam = lidar_to_camera(candidate, sc.mount, sc.lidar.mount_height)
    box = crop_box_for(p_cam, sc.camera, cone_h, cone_w, sc.classifier.crop_margin)
    if box is None:
        return None
    frame = render(sc, sc.vehicle.start)
    crop = extract_crop(frame, box, sc.classifier.input_size)
    if noise > 0.0:
        crop = np.clip(crop.astype(np.float64) + rng.normal(0.0, noise, crop.shape), 0, 255).astype(np.uint8)
    return crop


def make_corpus(
    out_dir: str | Path,
    n_per_class: int,
    seed: int,
    base_scenario: Scenario | None = None,
    light_range: tuple[float, float] = (0.6, 1.25),
    noise: float = 8.0,
    hard: bool = False,
    label_noise: float = 0.0,
    distance_range: tuple[float, float] = (3.0, 36.0),
) -> Path:
    """Write ``n_per_class`` positive and negative PPM crops plus labels.csv.

    ``hard`` biases negatives toward cone-coloured shapes so the class
    boundary hinges on silhouette rather than colour alone. ``label_noise``
    flips that fraction of labels (seeded), mimicking hand-labelling errors
    in real corpora; useful for regularization studies.
    """
    if n_per_class <= 0:
        raise ValueError("n_per_class must be positive")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    scenario = base_scenario or Scenario(lidar=REFERENCE_LIDAR)
    rng = substream(seed, "corpus")

    rows = []
    count = 0
    attempts = 0
    while count < n_per_class:  # positives
        attempts += 1
        if attempts > 50 * n_per_class:
            raise RuntimeError("corpus generation stalled; objects not visible")
        d = float(rng.uniform(*distance_range))
        lat = float(rng.uniform(-0.25, 0.25)) * d
        cone = _jittered_cone(rng, d, lat)
        crop = _render_crop(scenario, rng, cone, float(rng.uniform(*light_range)), noise)
        if crop is None:
            continue
        name = f"pos_{count:05d}.ppm"
        write_ppm(crop, out / name)
        rows.append((name, LABEL_CONE))
        count += 1

    count = 0
    attempts = 0
    while count < n_per_class:  # negatives
        attempts += 1
        if attempts > 50 * n_per_class:
            raise RuntimeError("corpus generation stalled; objects not visible")
        # striped reflectors are the classic backlight confusion and hardest
        # at long range, so they get extra corpus share out there
        kind = _NEGATIVE_KINDS[int(rng.choice(len(_NEGATIVE_KINDS), p=[0.2, 0.35, 0.25, 0.2]))]
        d = float(rng.uniform(*distance_range))
        if kind == "reflector_striped" and rng.random() < 0.5:
            d = float(rng.uniform(0.6 * distance_range[1], distance_range[1]))
        lat = float(rng.uniform(-0.25, 0.25)) * d
        obj = _negative_object(rng, kind, d, lat, hard=hard)
        crop = _render_crop(scenario, rng, obj, float(rng.uniform(*light_range)), noise)
        if crop is None:
            continue
        name = f"neg_{count:05d}.ppm"
        write_ppm(crop, out / name)
        rows.append((name, LABEL_NOT_CONE))
        count += 1

    if label_noise > 0.0:
        flip = rng.random(len(rows)) < label_noise
        rows = [
            (name, (LABEL_NOT_CONE if lab == LABEL_CONE else LABEL_CONE) if f else lab)
            for (name, lab), f in zip(rows, flip)
        ]

    with open(out / "labels.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["filename", "label"])
        writer.writerows(rows)
    return out


def load_corpus(corpus_dir: str | Path) -> list[CropSample]:
    corpus_dir = Path(corpus_dir)
    samples = []
    with open(corpus_dir / "labels.csv", "r", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            image = read_ppm(corpus_dir / row["filename"])
            samples.append(CropSample(image=image, label=row["label"], source_id=row["filename"]))
    if not samples:
        raise ValueError(f"empty corpus in {corpus_dir}")
    return samples
