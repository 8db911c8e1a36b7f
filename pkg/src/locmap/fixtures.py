"""Synthetic dataset generation for desk-scale evaluation.

Each fixture image contains one random rectangle or ellipse object.  The
feature stack is cluster-structured: object pixels share one unit direction
and background pixels another (60 degrees apart), both with Gaussian noise.
The first-stage map only highlights a sub-part of the object via a radial
bump whose tail decays smoothly into the background, emulating the small,
sparse, dim responses that enhancement is meant to fix.  RGB renders give
the object a class color on a gray textured background so edge pipelines
have real contrast to work with.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .box_eval import BBox
from .manifest import ImageRecord, Manifest, save_manifest
from .npyfmt import write_array
from .pngio import write_mask_png, write_rgb_png

FEATURE_NOISE_SIGMA = 0.05
CLUSTER_ANGLE_DEG = 60.0
_PALETTE = (
    (200, 70, 70),
    (70, 180, 70),
    (70, 90, 210),
    (210, 180, 60),
    (170, 70, 200),
    (60, 190, 190),
)


def _object_mask(rng: np.random.Generator, size: int) -> np.ndarray:
    span_h = int(rng.integers(int(0.35 * size), int(0.6 * size) + 1))
    span_w = int(rng.integers(int(0.35 * size), int(0.6 * size) + 1))
    top = int(rng.integers(2, size - span_h - 2))
    left = int(rng.integers(2, size - span_w - 2))
    mask = np.zeros((size, size), dtype=np.uint8)
    if rng.random() < 0.5:
        mask[top : top + span_h, left : left + span_w] = 1
    else:
        cy, cx = top + span_h / 2.0, left + span_w / 2.0
        ry, rx = span_h / 2.0, span_w / 2.0
        rr, cc = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")
        mask[((rr - cy) / ry) ** 2 + ((cc - cx) / rx) ** 2 <= 1.0] = 1
    return mask


def _cluster_directions(rng: np.random.Generator, channels: int):
    basis, _ = np.linalg.qr(rng.standard_normal((channels, 2)))
    angle = np.radians(CLUSTER_ANGLE_DEG)
    u_obj = basis[:, 0]
    u_bg = np.cos(angle) * basis[:, 0] + np.sin(angle) * basis[:, 1]
    return u_obj, u_bg


def _first_stage_map(rng: np.random.Generator, mask: np.ndarray) -> np.ndarray:
    """Radial bump centered inside the object, covering only a sub-part."""
    rows, cols = np.nonzero(mask)
    cy, cx = rows.mean(), cols.mean()
    ext_r = rows.max() - rows.min() + 1
    ext_c = cols.max() - cols.min() + 1
    # nudge the bump off-center so the highlighted part is lopsided, like a
    # classifier latching onto one discriminative region
    cy += rng.uniform(-0.22, 0.22) * ext_r
    cx += rng.uniform(-0.22, 0.22) * ext_c
    sigma = 0.28 * np.sqrt(mask.sum() / np.pi)
    rr, cc = np.meshgrid(np.arange(mask.shape[0]), np.arange(mask.shape[1]), indexing="ij")
    bump = np.exp(-((rr - cy) ** 2 + (cc - cx) ** 2) / (2.0 * sigma**2))
    noise = rng.uniform(0.0, 0.08, size=mask.shape)
    return np.clip(bump + noise, 0.0, 1.0)


def _render_rgb(rng: np.random.Generator, mask: np.ndarray, label: int) -> np.ndarray:
    size = mask.shape[0]
    color = np.array(_PALETTE[label % len(_PALETTE)], dtype=np.float64)
    img = np.empty((size, mask.shape[1], 3), dtype=np.float64)
    img[...] = 70.0
    img[mask.astype(bool)] = color
    img += rng.uniform(-8.0, 8.0, size=img.shape)
    return np.clip(img, 0, 255).astype(np.uint8)


def gen_fixtures(
    seed: int,
    out_dir,
    n_images: int,
    size: int = 64,
    channels: int = 8,
    num_classes: int = 5,
) -> Path:
    """Write n synthetic images plus a manifest; returns the manifest path.

    The same seed always produces byte-identical output directories.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    records = []
    for i in range(n_images):
        rec_id = f"img_{i:03d}"
        mask = _object_mask(rng, size)
        u_obj, u_bg = _cluster_directions(rng, channels)
        features = np.where(mask.astype(bool)[None, :, :], u_obj[:, None, None], u_bg[:, None, None])
        features = features + FEATURE_NOISE_SIGMA * rng.standard_normal((channels, size, size))
        cam = _first_stage_map(rng, mask)
        gt_label = int(rng.integers(0, num_classes))
        pred_label = gt_label if rng.random() < 0.8 else int(rng.integers(0, num_classes))
        rgb = _render_rgb(rng, mask, gt_label)

        write_array(out / f"{rec_id}_cam.npy", cam.astype(np.float32))
        write_array(out / f"{rec_id}_feat.npy", features.astype(np.float32))
        write_mask_png(out / f"{rec_id}_mask.png", mask)
        write_rgb_png(out / f"{rec_id}_rgb.png", rgb)

        rows, cols = np.nonzero(mask)
        box = BBox(int(cols.min()), int(rows.min()), int(cols.max()), int(rows.max()))
        records.append(
            ImageRecord(
                id=rec_id,
                width=size,
                height=size,
                cam=f"{rec_id}_cam.npy",
                gt_mask=f"{rec_id}_mask.png",
                gt_boxes=(box,),
                gt_label=gt_label,
                features=f"{rec_id}_feat.npy",
                pred_label=pred_label,
                rgb=f"{rec_id}_rgb.png",
            )
        )
    manifest = Manifest(num_classes=num_classes, images=tuple(records), root=out)
    return save_manifest(manifest, out / "manifest.json")
