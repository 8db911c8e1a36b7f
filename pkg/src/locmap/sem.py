"""Self-enhancement transform for localization maps.

Two stages: pick the K highest-scoring seed pixels from a first-stage map,
compute the cosine similarity between each seed's feature vector and every
pixel's feature vector, take the pointwise maximum over the K similarity
maps, and min-max renormalize per map.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import as_feature_stack, as_score_map, normalize_map
from .errors import DimensionError, InvalidInput, InvalidK

DEFAULT_K = 60


@dataclass(frozen=True)
class SeedSet:
    """Seed pixels at feature resolution, scores sorted non-increasing."""

    positions: tuple[tuple[int, int], ...]
    scores: tuple[float, ...]

    @property
    def k(self) -> int:
        return len(self.positions)


def select_seeds(score_map, k: int) -> SeedSet:
    """Top-k pixels of a score map; ties break by row-major position order."""
    score = as_score_map(score_map)
    h, w = score.shape
    if not 1 <= k <= h * w:
        raise InvalidK(f"k={k} outside [1, {h * w}]")
    flat = score.ravel()
    order = np.argsort(-flat, kind="stable")[:k]
    positions = tuple((int(i) // w, int(i) % w) for i in order)
    return SeedSet(positions=positions, scores=tuple(float(flat[i]) for i in order))


def similarity_maps(features, seeds: SeedSet) -> np.ndarray:
    """K stacked cosine-similarity maps, one per seed, values in [-1, 1].

    A zero-norm vector (seed or pixel) yields similarity 0: such pixels are
    treated as unlike everything rather than poisoning the map with NaN.
    """
    stack = as_feature_stack(features)
    c, h, w = stack.shape
    for r, col in seeds.positions:
        if not (0 <= r < h and 0 <= col < w):
            raise DimensionError(f"seed ({r}, {col}) outside {h} x {w} feature grid")
    flat = stack.reshape(c, h * w)
    norms = np.linalg.norm(flat, axis=0)
    seed_idx = np.array([r * w + col for r, col in seeds.positions], dtype=np.int64)
    dots = flat[:, seed_idx].T @ flat  # k x (h*w)
    denom = np.outer(norms[seed_idx], norms)
    sims = np.divide(dots, denom, out=np.zeros_like(dots), where=denom > 0)
    return np.clip(sims, -1.0, 1.0).reshape(seeds.k, h, w)


def aggregate_max(stack) -> np.ndarray:
    """Pointwise maximum over a K x H x W similarity stack (pre-normalization)."""
    arr = np.asarray(stack, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[0] == 0 or arr.size == 0:
        raise InvalidInput(f"expected a non-empty K x H x W stack, got shape {arr.shape}")
    return arr.max(axis=0)


def sem_enhance(features, first_stage, k: int = DEFAULT_K) -> np.ndarray:
    """Full enhancement: seeds -> similarity stack -> max -> renormalize."""
    stack = as_feature_stack(features)
    first = as_score_map(first_stage)
    if stack.shape[1:] != first.shape:
        raise DimensionError(
            f"features {stack.shape[1:]} and first-stage map {first.shape} differ in size"
        )
    seeds = select_seeds(first, k)
    return normalize_map(aggregate_max(similarity_maps(stack, seeds)))
