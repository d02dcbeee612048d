"""Synthetic chest-phantom dataset: two lateral lung ellipses and a central
heart ellipse whose width ratio is known exactly.

The geometry is constructed so mask extents land on integer pixels: the
measured width ratio of the rendered masks matches the drawn ratio within
1 / thoracic-width, comfortably inside 2 / image-size. Ratios are kept
clear of the 0.5 decision boundary by the same margin so rasterization can
never flip a label.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass

import numpy as np

from . import imageio
from .core import BitMask, GrayImage

RATIO_RANGE = (0.35, 0.70)
LABEL_CUTOFF = 0.5


@dataclass(frozen=True)
class SyntheticCase:
    case_id: str
    ratio: float
    label: str  # "pos" | "neg"
    image_path: str
    heart_mask_path: str
    lung_mask_path: str


def _ellipse(h: int, w: int, cx: float, cy: float, a: float, b: float) -> np.ndarray:
    ys, xs = np.mgrid[0:h, 0:w]
    return ((xs - cx) / a) ** 2 + ((ys - cy) / b) ** 2 <= 1.0


def _render_case(size: int, ratio: float, rng: np.random.Generator):
    cx = size // 2
    cy = round(0.50 * size)
    id_half = round(0.40 * size)
    lung_a = round(0.15 * size)
    lung_b = round(0.28 * size)

    x_left = cx - id_half
    x_right = cx + id_half
    lungs = _ellipse(size, size, x_left + lung_a, cy, lung_a, lung_b)
    lungs |= _ellipse(size, size, x_right - lung_a, cy, lung_a, lung_b)

    heart_a = max(1, round(ratio * id_half))  # half of the heart x-extent
    heart_b = max(1, round(0.16 * size))
    heart_cy = round(0.55 * size)
    heart = _ellipse(size, size, cx, heart_cy, heart_a, heart_b)

    # plausible radiograph-ish intensities: dark lung fields, bright mediastinum
    img = np.full((size, size), 150.0)
    img += rng.normal(0.0, 6.0, size=(size, size))
    ramp = np.linspace(-12.0, 12.0, size)[:, None]
    img += ramp
    img[lungs] -= 95.0
    img[heart] += 55.0
    img = np.clip(np.rint(img), 0, 255).astype(np.uint8)

    return GrayImage(img), BitMask(heart.astype(np.uint8)), BitMask(lungs.astype(np.uint8))


def _draw_ratio(rng: np.random.Generator, size: int) -> float:
    guard = 3.0 / size
    lo, hi = RATIO_RANGE
    while True:
        r = float(rng.uniform(lo, hi))
        if abs(r - LABEL_CUTOFF) > guard:
            return r


def generate_synthetic_dataset(n: int, size: int, seed: int, out_dir) -> list[SyntheticCase]:
    """Write ``n`` cases (image + heart/lung masks), a manifest, and the
    ground-truth ratios to ``out_dir``. Deterministic for a given seed."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if size < 32:
        raise ValueError("size must be >= 32")
    out_dir = os.fspath(out_dir)
    images_dir = os.path.join(out_dir, "images")
    masks_dir = os.path.join(out_dir, "masks")
    os.makedirs(images_dir, exist_ok=True)
    os.makedirs(masks_dir, exist_ok=True)

    rng = np.random.default_rng(seed)
    cases = []
    for i in range(n):
        case_id = f"case{i:04d}"
        ratio = _draw_ratio(rng, size)
        img, heart, lungs = _render_case(size, ratio, rng)
        image_path = os.path.join(images_dir, f"{case_id}.pgm")
        heart_path = os.path.join(masks_dir, f"{case_id}_heart.pgm")
        lung_path = os.path.join(masks_dir, f"{case_id}_lung.pgm")
        imageio.write_image(image_path, img)
        imageio.write_mask(heart_path, heart)
        imageio.write_mask(lung_path, lungs)
        cases.append(
            SyntheticCase(
                case_id=case_id,
                ratio=ratio,
                label="pos" if ratio >= LABEL_CUTOFF else "neg",
                image_path=image_path,
                heart_mask_path=heart_path,
                lung_mask_path=lung_path,
            )
        )

    manifest_path = os.path.join(out_dir, "manifest.csv")
    with open(manifest_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["case_id", "image", "heart_mask", "lung_mask", "label"])
        for c in cases:
            writer.writerow(
                [
                    c.case_id,
                    os.path.relpath(c.image_path, out_dir),
                    os.path.relpath(c.heart_mask_path, out_dir),
                    os.path.relpath(c.lung_mask_path, out_dir),
                    c.label,
                ]
            )

    truth = {c.case_id: {"ratio": c.ratio, "label": c.label} for c in cases}
    with open(os.path.join(out_dir, "truth.json"), "w") as fh:
        json.dump(truth, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return cases
