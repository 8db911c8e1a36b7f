"""Legacy indirect metric: largest connected component, box fitting, box IoU,
and Top-1 / Gt-known localization accuracies.

Boxes use inclusive pixel coordinates, 0-indexed, so a box covering a single
pixel has area 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .core import as_binary_mask, as_score_map
from .errors import InvalidInput, MissingPrediction

_STRUCTURE_4 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=np.uint8)
_STRUCTURE_8 = np.ones((3, 3), dtype=np.uint8)


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box with inclusive, 0-indexed pixel corners."""

    x0: int
    y0: int
    x1: int
    y1: int

    def __post_init__(self):
        if self.x0 > self.x1 or self.y0 > self.y1:
            raise InvalidInput(f"degenerate box {self}")

    @property
    def area(self) -> int:
        return (self.x1 - self.x0 + 1) * (self.y1 - self.y0 + 1)


@dataclass(frozen=True)
class ComponentLabeling:
    """Label grid (0 = background) with labels 1..n in row-major first-encounter
    order, plus the pixel count of each component (sizes[k-1] is component k)."""

    labels: np.ndarray
    sizes: tuple[int, ...]

    @property
    def count(self) -> int:
        return len(self.sizes)


def connected_components(mask, connectivity: int = 8) -> ComponentLabeling:
    """Label foreground components under 4- or 8-connectivity."""
    mask = as_binary_mask(mask)
    if connectivity not in (4, 8):
        raise InvalidInput(f"connectivity must be 4 or 8, got {connectivity}")
    structure = _STRUCTURE_8 if connectivity == 8 else _STRUCTURE_4
    raw, n = ndimage.label(mask, structure=structure)
    if n == 0:
        return ComponentLabeling(labels=raw.astype(np.int32), sizes=())

    # scipy labels come out in raster order already, but renumber by first
    # row-major occurrence so the ordering contract never depends on its internals
    flat = raw.ravel()
    first = np.full(n + 1, flat.size, dtype=np.int64)
    np.minimum.at(first, flat, np.arange(flat.size, dtype=np.int64))
    rank = np.empty(n + 1, dtype=np.int64)
    rank[0] = 0
    rank[1 + np.argsort(first[1:], kind="stable")] = np.arange(1, n + 1)
    labels = rank[raw].astype(np.int32)
    sizes = np.bincount(labels.ravel(), minlength=n + 1)[1:]
    return ComponentLabeling(labels=labels, sizes=tuple(int(s) for s in sizes))


def infer_box(score_map, box_threshold: float = 0.2, connectivity: int = 8) -> BBox | None:
    """Fit the tight box of the largest component above box_threshold * max.

    Returns None when the map has no positive values.  Size ties go to the
    component whose first pixel comes earliest in row-major order.
    """
    score = as_score_map(score_map)
    if not 0.0 < box_threshold < 1.0:
        raise InvalidInput(f"box_threshold must be in (0, 1), got {box_threshold}")
    peak = float(score.max())
    if peak <= 0.0:
        return None
    fg = (score >= box_threshold * peak).astype(np.uint8)
    labeling = connected_components(fg, connectivity)
    if labeling.count == 0:
        return None
    largest = int(np.argmax(labeling.sizes)) + 1  # first max wins the tie
    rows, cols = np.nonzero(labeling.labels == largest)
    return BBox(int(cols.min()), int(rows.min()), int(cols.max()), int(rows.max()))


def box_iou(a: BBox, b: BBox) -> float:
    iw = min(a.x1, b.x1) - max(a.x0, b.x0) + 1
    ih = min(a.y1, b.y1) - max(a.y0, b.y0) + 1
    inter = max(iw, 0) * max(ih, 0)
    union = a.area + b.area - inter
    return inter / union


@dataclass(frozen=True)
class BoxEvalItem:
    """Per-image inputs for accuracy aggregation."""

    inferred: BBox | None
    gt_boxes: tuple[BBox, ...]
    gt_label: int
    pred_label: int | None = None


def localization_accuracy(items, mode: str, iou_min: float = 0.5) -> float:
    """Fraction of images whose inferred box hits a GT box at IoU >= iou_min.

    mode 'top1' additionally requires pred_label == gt_label; mode 'gtknown'
    ignores labels.  Images with no inferred box count as failures.
    """
    items = list(items)
    if mode not in ("top1", "gtknown"):
        raise InvalidInput(f"mode must be 'top1' or 'gtknown', got {mode!r}")
    if not items:
        raise InvalidInput("no images to score")
    if mode == "top1":
        missing = [i for i, it in enumerate(items) if it.pred_label is None]
        if missing:
            raise MissingPrediction(f"record index {missing[0]} has no pred_label")
    hits = 0
    for it in items:
        if mode == "top1" and it.pred_label != it.gt_label:
            continue
        if it.inferred is None or not it.gt_boxes:
            continue
        if max(box_iou(it.inferred, gt) for gt in it.gt_boxes) >= iou_min:
            hits += 1
    return hits / len(items)
