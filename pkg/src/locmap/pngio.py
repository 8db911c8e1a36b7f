"""PNG input/output for ground-truth masks, pseudo-boundaries, and RGB renders.

Masks are 8-bit grayscale PNGs holding strictly {0, 255}: 0 is background,
255 is foreground.  Anything else (partial labels, palettes, 16-bit depth,
color masks) is rejected rather than guessed.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .errors import InvalidInput, InvalidMask, MissingFile, UnsupportedFormat


def read_mask_png(path) -> np.ndarray:
    """Load a strict {0, 255} grayscale PNG as a {0, 1} uint8 mask."""
    path = Path(path)
    if not path.is_file():
        raise MissingFile(str(path))
    with Image.open(path) as im:
        if im.format != "PNG":
            raise UnsupportedFormat(f"{path}: format {im.format}, expected PNG")
        if im.mode != "L":
            raise UnsupportedFormat(f"{path}: mode {im.mode}, expected 8-bit grayscale 'L'")
        arr = np.asarray(im, dtype=np.uint8)
    bad = (arr != 0) & (arr != 255)
    if bad.any():
        r, c = np.argwhere(bad)[0]
        raise InvalidMask(f"{path}: pixel ({r}, {c}) has value {arr[r, c]}, expected 0 or 255")
    return (arr == 255).astype(np.uint8)


def write_mask_png(path, mask) -> None:
    arr = np.asarray(mask)
    if arr.ndim != 2 or not np.isin(arr, (0, 1)).all():
        raise InvalidInput("mask must be a 2-D grid of {0, 1}")
    Image.fromarray((arr.astype(np.uint8)) * 255, mode="L").save(path, format="PNG")


def read_rgb_png(path) -> np.ndarray:
    """Load an 8-bit 3-channel PNG as an H x W x 3 uint8 array."""
    path = Path(path)
    if not path.is_file():
        raise MissingFile(str(path))
    with Image.open(path) as im:
        if im.format != "PNG":
            raise UnsupportedFormat(f"{path}: format {im.format}, expected PNG")
        if im.mode != "RGB":
            raise UnsupportedFormat(f"{path}: mode {im.mode}, expected 8-bit 'RGB'")
        return np.asarray(im, dtype=np.uint8)


def write_rgb_png(path, rgb) -> None:
    arr = np.asarray(rgb)
    if arr.ndim != 3 or arr.shape[2] != 3 or arr.dtype != np.uint8:
        raise InvalidInput(f"rgb image must be H x W x 3 uint8, got {arr.shape} {arr.dtype}")
    Image.fromarray(arr, mode="RGB").save(path, format="PNG")
