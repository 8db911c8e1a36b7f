"""Core grid types, validation, normalization, quantization, and resizing.

All grids are numpy arrays stored row-major with origin top-left and
(row, col) indexing.  Score maps are float64 in [0, 1], quantized maps are
uint8, binary masks are uint8 in {0, 1}, and feature stacks are float64
C x H x W.  Every function here is pure: inputs are never mutated and
results are freshly allocated, so values can be shared across threads.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInput


def as_score_map(values) -> np.ndarray:
    """Validate a 2-D grid of finite scores in [0, 1] and return it as float64."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise InvalidInput(f"score map must be a non-empty 2-D grid, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput("score map contains non-finite values")
    if float(arr.min()) < 0.0 or float(arr.max()) > 1.0:
        raise InvalidInput("score map values must lie in [0, 1]")
    return arr


def as_quantized_map(values) -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim != 2 or arr.size == 0:
        raise InvalidInput(f"quantized map must be a non-empty 2-D grid, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        if not np.issubdtype(arr.dtype, np.integer):
            raise InvalidInput("quantized map must be integer-valued")
        if arr.min() < 0 or arr.max() > 255:
            raise InvalidInput("quantized map values must lie in [0, 255]")
        arr = arr.astype(np.uint8)
    return arr


def as_binary_mask(values) -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim != 2 or arr.size == 0:
        raise InvalidInput(f"binary mask must be a non-empty 2-D grid, got shape {arr.shape}")
    if arr.dtype == np.bool_:
        return arr.astype(np.uint8)
    if not np.issubdtype(arr.dtype, np.integer):
        raise InvalidInput("binary mask must be integer or boolean")
    if not np.isin(arr, (0, 1)).all():
        raise InvalidInput("binary mask values must be 0 or 1")
    return arr.astype(np.uint8)


def as_feature_stack(values) -> np.ndarray:
    """Validate a C x H x W stack of finite features and return it as float64."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 3 or arr.size == 0:
        raise InvalidInput(f"feature stack must be a non-empty C x H x W tensor, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput("feature stack contains non-finite values")
    return arr


def normalize_map(raw) -> np.ndarray:
    """Min-max rescale a raw 2-D grid to [0, 1].

    A constant input maps to all zeros: downstream thresholding then treats
    everything as background, which is the safe degenerate reading.
    """
    arr = np.asarray(raw, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise InvalidInput(f"expected a non-empty 2-D grid, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput("cannot normalize non-finite values")
    lo = float(arr.min())
    hi = float(arr.max())
    if hi == lo:
        return np.zeros_like(arr)
    return (arr - lo) / (hi - lo)


def quantize_map(score_map) -> np.ndarray:
    """Map scores in [0, 1] to integers in [0, 255] with round-half-up."""
    arr = as_score_map(score_map)
    return np.floor(arr * 255.0 + 0.5).astype(np.uint8)


def resize_bilinear(grid, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resampling with half-pixel centers and edge clamping.

    Source coordinates follow src = (dst + 0.5) * (in / out) - 0.5 per axis;
    samples outside the grid clamp to the nearest edge pixel.  Output values
    are clipped to the input range so bounds are preserved exactly.
    """
    src = np.asarray(grid, dtype=np.float64)
    if src.ndim != 2 or src.size == 0:
        raise InvalidInput(f"expected a non-empty 2-D grid, got shape {src.shape}")
    if out_h < 1 or out_w < 1:
        raise InvalidInput(f"target size must be >= 1, got {out_h} x {out_w}")
    in_h, in_w = src.shape
    if (out_h, out_w) == (in_h, in_w):
        return src.copy()

    rows = (np.arange(out_h, dtype=np.float64) + 0.5) * (in_h / out_h) - 0.5
    cols = (np.arange(out_w, dtype=np.float64) + 0.5) * (in_w / out_w) - 0.5
    r0f = np.floor(rows)
    c0f = np.floor(cols)
    fr = rows - r0f
    fc = cols - c0f
    r0 = np.clip(r0f.astype(np.int64), 0, in_h - 1)
    r1 = np.clip(r0f.astype(np.int64) + 1, 0, in_h - 1)
    c0 = np.clip(c0f.astype(np.int64), 0, in_w - 1)
    c1 = np.clip(c0f.astype(np.int64) + 1, 0, in_w - 1)

    w00 = np.outer(1.0 - fr, 1.0 - fc)
    w01 = np.outer(1.0 - fr, fc)
    w10 = np.outer(fr, 1.0 - fc)
    w11 = np.outer(fr, fc)
    out = (
        src[np.ix_(r0, c0)] * w00
        + src[np.ix_(r0, c1)] * w01
        + src[np.ix_(r1, c0)] * w10
        + src[np.ix_(r1, c1)] * w11
    )
    return np.clip(out, src.min(), src.max())
