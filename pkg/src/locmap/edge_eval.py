"""Edge-map benchmarking: orientation-aware thinning, tolerance-based
correspondence, and the ODS / OIS / AP summary.

Correspondences are one-to-one: candidate (pred, gt) pixel pairs within the
match radius are sorted by distance (ties by row-major pred index, then gt
index) and assigned greedily.  The radius is a fraction of the image
diagonal, 0.0075 by default.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter
from scipy.spatial import cKDTree

from .core import as_binary_mask
from .errors import DimensionError, EmptyDataset, InvalidInput

DEFAULT_TOLERANCE = 0.0075
EDGE_THRESHOLDS = np.arange(1, 100, dtype=np.float64) / 100.0
_ORIENT_SIGMA = 1.0


@dataclass(frozen=True)
class MatchCounts:
    matched_pred: int
    total_pred: int
    matched_gt: int
    total_gt: int


@dataclass(frozen=True)
class EdgeBenchResult:
    ods: float
    ois: float
    ap: float
    thresholds: np.ndarray
    precision: np.ndarray
    recall: np.ndarray
    f: np.ndarray


def mask_boundary(mask) -> np.ndarray:
    """Ground-truth boundary extraction: foreground pixels with a background
    4-neighbor (pixels beyond the border count as background)."""
    m = as_binary_mask(mask).astype(bool)
    padded = np.zeros((m.shape[0] + 2, m.shape[1] + 2), dtype=bool)
    padded[1:-1, 1:-1] = m
    interior = (
        padded[:-2, 1:-1] & padded[2:, 1:-1] & padded[1:-1, :-2] & padded[1:-1, 2:]
    )
    return (m & ~interior).astype(np.uint8)


def _sample_bilinear(values: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """Bilinear lookup at fractional positions; outside the grid reads as 0."""
    h, w = values.shape
    padded = np.zeros((h + 2, w + 2))
    padded[1:-1, 1:-1] = values
    r = np.clip(rows + 1.0, 0.0, h)
    c = np.clip(cols + 1.0, 0.0, w)
    r0 = np.floor(r).astype(np.int64)
    c0 = np.floor(c).astype(np.int64)
    fr = r - r0
    fc = c - c0
    return (
        padded[r0, c0] * (1 - fr) * (1 - fc)
        + padded[r0, c0 + 1] * (1 - fr) * fc
        + padded[r0 + 1, c0] * fr * (1 - fc)
        + padded[r0 + 1, c0 + 1] * fr * fc
    )


def nms_thin(edge_map) -> np.ndarray:
    """Thin a [0, 1] edge-probability map to locally maximal responses.

    Orientation comes from the structure tensor of the Gaussian-smoothed map;
    a pixel survives when its smoothed response dominates the bilinearly
    interpolated responses one pixel away on both sides along that
    orientation (strict against one side so tied pairs keep exactly one
    pixel).  Survivors keep their original scores.
    """
    e = np.asarray(edge_map, dtype=np.float64)
    if e.ndim != 2 or e.size == 0:
        raise InvalidInput(f"expected a non-empty 2-D grid, got shape {e.shape}")
    if float(e.min()) < 0.0 or float(e.max()) > 1.0:
        raise InvalidInput("edge map values must lie in [0, 1]")
    if not e.any():
        return e.copy()

    smoothed = gaussian_filter(e, _ORIENT_SIGMA, mode="constant")
    gy, gx = np.gradient(smoothed)
    jxx = gaussian_filter(gx * gx, _ORIENT_SIGMA, mode="constant")
    jyy = gaussian_filter(gy * gy, _ORIENT_SIGMA, mode="constant")
    jxy = gaussian_filter(gx * gy, _ORIENT_SIGMA, mode="constant")
    theta = 0.5 * np.arctan2(2.0 * jxy, jxx - jyy)  # dominant gradient direction

    rr, cc = np.meshgrid(
        np.arange(e.shape[0], dtype=np.float64),
        np.arange(e.shape[1], dtype=np.float64),
        indexing="ij",
    )
    dr = np.sin(theta)
    dc = np.cos(theta)
    plus = _sample_bilinear(smoothed, rr + dr, cc + dc)
    minus = _sample_bilinear(smoothed, rr - dr, cc - dc)
    keep = (smoothed > minus) & (smoothed >= plus) & (e > 0)
    return np.where(keep, e, 0.0)


def match_edges(pred, gt, tol_frac: float = DEFAULT_TOLERANCE) -> MatchCounts:
    """Greedy one-to-one correspondence between two binary edge masks."""
    p = as_binary_mask(pred).astype(bool)
    g = as_binary_mask(gt).astype(bool)
    if p.shape != g.shape:
        raise DimensionError(f"pred {p.shape} vs gt {g.shape}")
    radius = tol_frac * float(np.hypot(*p.shape))
    pred_pts = np.argwhere(p)
    gt_pts = np.argwhere(g)
    if pred_pts.size == 0 or gt_pts.size == 0:
        return MatchCounts(0, len(pred_pts), 0, len(gt_pts))

    tree = cKDTree(gt_pts)
    pairs = []
    for i, point in enumerate(pred_pts):
        for j in tree.query_ball_point(point, radius):
            d = float(np.hypot(*(point - gt_pts[j])))
            pairs.append((d, i, j))
    pairs.sort()
    pred_used = np.zeros(len(pred_pts), dtype=bool)
    gt_used = np.zeros(len(gt_pts), dtype=bool)
    matched = 0
    for _, i, j in pairs:
        if not pred_used[i] and not gt_used[j]:
            pred_used[i] = gt_used[j] = True
            matched += 1
    return MatchCounts(matched, len(pred_pts), matched, len(gt_pts))


def _f_measure(matched_pred, total_pred, matched_gt, total_gt):
    precision = matched_pred / total_pred if total_pred else 0.0
    recall = matched_gt / total_gt if total_gt else 0.0
    f = 2.0 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f


def edge_benchmark(records, tol_frac: float = DEFAULT_TOLERANCE) -> EdgeBenchResult:
    """Benchmark (edge_map, gt_mask) pairs over 99 thresholds in (0, 1).

    Predictions are thinned internally, binarized at score >= t, and matched
    against GT; precision/recall aggregate dataset-wide integer counts.
    ODS is the best dataset F over thresholds, OIS the mean of per-image
    best F, and AP the step-integrated area under the dataset PR sequence.
    """
    records = list(records)
    if not records:
        raise EmptyDataset("no edge maps to benchmark")

    n_thr = EDGE_THRESHOLDS.size
    per_image = []
    for pred_map, gt_mask in records:
        thinned = nms_thin(pred_map)
        gt = as_binary_mask(gt_mask)
        if thinned.shape != gt.shape:
            raise DimensionError(f"pred {thinned.shape} vs gt {gt.shape}")
        counts = []
        cache: dict[int, MatchCounts] = {}
        for t in EDGE_THRESHOLDS:
            mask = thinned >= t
            key = int(mask.sum())  # thresholding a fixed map nests, so size keys the set
            if key not in cache:
                cache[key] = match_edges(mask.astype(np.uint8), gt, tol_frac)
            counts.append(cache[key])
        per_image.append(counts)

    precision = np.zeros(n_thr)
    recall = np.zeros(n_thr)
    f = np.zeros(n_thr)
    for ti in range(n_thr):
        mp = sum(c[ti].matched_pred for c in per_image)
        tp = sum(c[ti].total_pred for c in per_image)
        mg = sum(c[ti].matched_gt for c in per_image)
        tg = sum(c[ti].total_gt for c in per_image)
        precision[ti], recall[ti], f[ti] = _f_measure(mp, tp, mg, tg)

    ods = float(f.max())
    best_per_image = [
        max(_f_measure(c.matched_pred, c.total_pred, c.matched_gt, c.total_gt)[2] for c in counts)
        for counts in per_image
    ]
    ois = float(np.mean(best_per_image))

    r_next = np.concatenate([recall[1:], [0.0]])
    ap = float(np.sum((recall - r_next) * precision))
    return EdgeBenchResult(
        ods=ods,
        ois=ois,
        ap=ap,
        thresholds=EDGE_THRESHOLDS.copy(),
        precision=precision,
        recall=recall,
        f=f,
    )
