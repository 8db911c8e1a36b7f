"""Direct pixel-wise metric: threshold sweep, per-threshold IoU, the
IoU-Threshold curve with its Peak-IoU/Peak-T summary, and Precision-Recall
with Average Precision.

The threshold grid is the 256 integers 0..255, matching quantization; a
pixel is foreground at threshold t iff its quantized value is >= t, so t=0
predicts everything foreground.  Per-threshold IoU is 0 whenever
tp + fp + fn = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import as_binary_mask, as_quantized_map, normalize_map, quantize_map, resize_bilinear
from .errors import DimensionError, EmptyDataset, InvalidInput

THRESHOLDS = np.arange(256, dtype=np.int64)


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int


@dataclass(frozen=True)
class PerImageCurve:
    """Threshold-indexed counts for one image: tp[t]/fp[t] are the pixels at
    quantized value >= t inside/outside the GT mask; n_pos is the GT size."""

    iou: np.ndarray
    tp: np.ndarray
    fp: np.ndarray
    n_pos: int
    n_pixels: int


@dataclass(frozen=True)
class EvalCurve:
    thresholds: np.ndarray
    mean_iou: np.ndarray
    precision: np.ndarray
    recall: np.ndarray
    peak_iou: float
    peak_t: int
    ap: float


def binarize(quantized_map, t: int) -> np.ndarray:
    """Foreground iff quantized value >= t."""
    q = as_quantized_map(quantized_map)
    if not 0 <= t <= 255:
        raise InvalidInput(f"threshold must be in [0, 255], got {t}")
    return (q >= t).astype(np.uint8)


def confusion_counts(pred, gt) -> ConfusionCounts:
    p = as_binary_mask(pred).astype(bool)
    g = as_binary_mask(gt).astype(bool)
    if p.shape != g.shape:
        raise DimensionError(f"pred {p.shape} vs gt {g.shape}")
    tp = int(np.count_nonzero(p & g))
    fp = int(np.count_nonzero(p & ~g))
    fn = int(np.count_nonzero(~p & g))
    tn = int(np.count_nonzero(~p & ~g))
    return ConfusionCounts(tp, fp, fn, tn)


def quantized_curve(quantized_map, gt_mask) -> PerImageCurve:
    """All 256 per-threshold counts of one quantized map against its mask."""
    q = as_quantized_map(quantized_map)
    g = as_binary_mask(gt_mask).astype(bool)
    if q.shape != g.shape:
        raise DimensionError(f"map {q.shape} vs mask {g.shape}")
    vals = q.ravel()
    gflat = g.ravel()
    pos_hist = np.bincount(vals[gflat], minlength=256).astype(np.int64)
    neg_hist = np.bincount(vals[~gflat], minlength=256).astype(np.int64)
    tp = np.cumsum(pos_hist[::-1])[::-1]
    fp = np.cumsum(neg_hist[::-1])[::-1]
    n_pos = int(pos_hist.sum())
    fn = n_pos - tp
    denom = tp + fp + fn
    iou = np.divide(tp, denom, out=np.zeros(256, dtype=np.float64), where=denom > 0)
    return PerImageCurve(iou=iou, tp=tp, fp=fp, n_pos=n_pos, n_pixels=int(vals.size))


def iou_threshold_curve(raw_map, gt_mask) -> PerImageCurve:
    """Per-image curve of a raw map: resize to mask resolution, normalize,
    quantize, then sweep all 256 thresholds."""
    g = as_binary_mask(gt_mask)
    resized = resize_bilinear(np.asarray(raw_map, dtype=np.float64), *g.shape)
    return quantized_curve(quantize_map(normalize_map(resized)), g)


def dataset_curve(per_image, micro: bool = False) -> EvalCurve:
    """Aggregate per-image curves into the dataset-level IoU-Threshold curve.

    mean_iou is the macro (per-image) average by default; micro=True divides
    dataset-summed counts instead.  Precision/recall always come from the
    micro-aggregated integer counts so AP needs no per-image degenerate
    divisions.  Float reductions use math.fsum, making the result invariant
    to image ordering and worker count.
    """
    curves = list(per_image)
    if not curves:
        raise EmptyDataset("no images to aggregate")
    tp = np.sum([c.tp for c in curves], axis=0, dtype=np.int64)
    fp = np.sum([c.fp for c in curves], axis=0, dtype=np.int64)
    n_pos = sum(c.n_pos for c in curves)
    fn = n_pos - tp
    if micro:
        denom = tp + fp + fn
        mean_iou = np.divide(tp, denom, out=np.zeros(256), where=denom > 0)
    else:
        mean_iou = np.array(
            [math.fsum(float(c.iou[t]) for c in curves) / len(curves) for t in range(256)]
        )
    pred = tp + fp
    precision = np.divide(tp, pred, out=np.zeros(256), where=pred > 0)
    recall = (
        tp / float(n_pos) if n_pos > 0 else np.zeros(256, dtype=np.float64)
    )
    peak_t = int(np.argmax(mean_iou))  # smallest threshold attaining the max
    return EvalCurve(
        thresholds=THRESHOLDS.copy(),
        mean_iou=mean_iou,
        precision=precision,
        recall=recall,
        peak_iou=float(mean_iou[peak_t]),
        peak_t=peak_t,
        ap=step_average_precision(precision, recall),
    )


def step_average_precision(precision, recall) -> float:
    """Step integral over descending thresholds: sum_t (R[t] - R[t+1]) * P[t]
    with R past the last threshold defined as 0."""
    precision = np.asarray(precision, dtype=np.float64)
    recall = np.asarray(recall, dtype=np.float64)
    r_next = np.concatenate([recall[1:], [0.0]])
    return float(np.sum((recall - r_next) * precision))


def average_precision(curve: EvalCurve) -> float:
    return step_average_precision(curve.precision, curve.recall)
