"""Record-level plumbing: loading manifest entries with lazy dimension
checks, computing per-record maps and metrics, and the deterministic
per-image worker pool.

Work is distributed per image; results are collected by index and reduced
in manifest order, so numeric output never depends on the worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import boundary, box_eval, direct_eval, edge_eval, hns, sem
from .core import normalize_map, resize_bilinear
from .errors import DimensionError, EmptyDataset, InvalidArgument, InvalidInput
from .manifest import ImageRecord, Manifest
from .npyfmt import read_array, write_array
from .pngio import read_mask_png, read_rgb_png, write_mask_png

SOURCES = ("cam", "sem")


def run_parallel(fn, items, jobs: int = 1) -> list:
    """Apply fn to each item, preserving input order in the result list."""
    items = list(items)
    if jobs < 1:
        raise InvalidArgument(f"jobs must be >= 1, got {jobs}")
    if jobs == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def load_cam(manifest: Manifest, record: ImageRecord) -> np.ndarray:
    arr = read_array(manifest.resolve(record.cam))
    if arr.ndim != 2:
        raise DimensionError(f"{record.id}: cam array must be 2-D, got {arr.ndim}-D")
    return np.asarray(arr, dtype=np.float64)


def load_features(manifest: Manifest, record: ImageRecord) -> np.ndarray:
    if record.features is None:
        raise InvalidInput(f"{record.id}: record has no feature stack")
    arr = read_array(manifest.resolve(record.features))
    if arr.ndim != 3:
        raise DimensionError(f"{record.id}: feature array must be C x H x W, got {arr.ndim}-D")
    return np.asarray(arr, dtype=np.float64)


def load_gt_mask(manifest: Manifest, record: ImageRecord) -> np.ndarray:
    mask = read_mask_png(manifest.resolve(record.gt_mask))
    if mask.shape != (record.height, record.width):
        raise DimensionError(
            f"{record.id}: mask is {mask.shape}, manifest says {(record.height, record.width)}"
        )
    return mask


def load_rgb(manifest: Manifest, record: ImageRecord) -> np.ndarray:
    if record.rgb is None:
        raise InvalidInput(f"{record.id}: record has no rgb image")
    img = read_rgb_png(manifest.resolve(record.rgb))
    if img.shape[:2] != (record.height, record.width):
        raise DimensionError(
            f"{record.id}: rgb is {img.shape[:2]}, manifest says {(record.height, record.width)}"
        )
    return img


def source_map(manifest: Manifest, record: ImageRecord, source: str, k: int) -> np.ndarray:
    """The record's raw localization map at feature/map resolution.

    source 'cam' is the stored first-stage map; 'sem' enhances it against the
    record's features (the stored map is resized to feature resolution first
    when the two differ).
    """
    if source not in SOURCES:
        raise InvalidArgument(f"source must be one of {SOURCES}, got {source!r}")
    raw = load_cam(manifest, record)
    if source == "cam":
        return raw
    features = load_features(manifest, record)
    first = normalize_map(resize_bilinear(raw, features.shape[1], features.shape[2]))
    return sem.sem_enhance(features, first, k)


def record_curve(
    manifest: Manifest, record: ImageRecord, source: str, k: int
) -> direct_eval.PerImageCurve:
    raw = source_map(manifest, record, source, k)
    return direct_eval.iou_threshold_curve(raw, load_gt_mask(manifest, record))


def evaluate_maps(
    manifest: Manifest, source: str, k: int, jobs: int = 1, micro: bool = False
) -> direct_eval.EvalCurve:
    if not manifest.images:
        raise EmptyDataset("manifest has no images")
    curves = run_parallel(lambda r: record_curve(manifest, r, source, k), manifest.images, jobs)
    return direct_eval.dataset_curve(curves, micro=micro)


def record_box_item(
    manifest: Manifest,
    record: ImageRecord,
    source: str,
    k: int,
    box_threshold: float,
    connectivity: int = 8,
) -> box_eval.BoxEvalItem:
    raw = source_map(manifest, record, source, k)
    full = normalize_map(resize_bilinear(raw, record.height, record.width))
    inferred = box_eval.infer_box(full, box_threshold, connectivity)
    return box_eval.BoxEvalItem(
        inferred=inferred,
        gt_boxes=record.gt_boxes,
        gt_label=record.gt_label,
        pred_label=record.pred_label,
    )


def evaluate_boxes(
    manifest: Manifest,
    source: str,
    k: int,
    box_threshold: float = 0.2,
    connectivity: int = 8,
    jobs: int = 1,
) -> dict:
    """Gt-known accuracy, plus Top-1 when every record carries a pred_label."""
    if not manifest.images:
        raise EmptyDataset("manifest has no images")
    items = run_parallel(
        lambda r: record_box_item(manifest, r, source, k, box_threshold, connectivity),
        manifest.images,
        jobs,
    )
    out = {"gtknown_acc": box_eval.localization_accuracy(items, "gtknown")}
    if all(r.pred_label is not None for r in manifest.images):
        out["top1_acc"] = box_eval.localization_accuracy(items, "top1")
    return out


def k_sweep(
    manifest: Manifest,
    k_values,
    box_threshold: float = 0.2,
    jobs: int = 1,
) -> list[dict]:
    """One row per K: enhanced-map Gt-known accuracy and Peak-IoU."""
    k_values = list(k_values)
    if not k_values:
        raise InvalidArgument("k_values must not be empty")
    rows = []
    for k in k_values:
        curve = evaluate_maps(manifest, "sem", k, jobs=jobs)
        boxes = evaluate_boxes(manifest, "sem", k, box_threshold, jobs=jobs)
        rows.append({"k": k, "gtknown_acc": boxes["gtknown_acc"], "peak_iou": curve.peak_iou})
    return rows


def enhance_dataset(manifest: Manifest, k: int, out_dir, jobs: int = 1) -> Path:
    """Write one enhanced map per record plus a derived manifest whose cam
    entries point at the enhanced files."""
    if not manifest.images:
        raise EmptyDataset("manifest has no images")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    def one(record: ImageRecord) -> ImageRecord:
        enhanced = source_map(manifest, record, "sem", k)
        name = f"{record.id}_sem.npy"
        write_array(out / name, enhanced.astype(np.float32))
        _copy_sidecars(manifest, record, out)
        return _relocated(record, cam=name)

    records = run_parallel(one, manifest.images, jobs)
    from .manifest import save_manifest

    return save_manifest(
        Manifest(num_classes=manifest.num_classes, images=tuple(records), root=out),
        out / "manifest.json",
    )


def _copy_sidecars(manifest: Manifest, record: ImageRecord, out: Path) -> None:
    for field in ("gt_mask", "features", "rgb"):
        rel = getattr(record, field)
        if rel is None:
            continue
        src = manifest.resolve(rel)
        dst = out / Path(rel).name
        if src.resolve() != dst.resolve():
            dst.write_bytes(src.read_bytes())


def _relocated(record: ImageRecord, **overrides) -> ImageRecord:
    fields = {
        "id": record.id,
        "width": record.width,
        "height": record.height,
        "cam": Path(record.cam).name,
        "gt_mask": Path(record.gt_mask).name,
        "gt_boxes": record.gt_boxes,
        "gt_label": record.gt_label,
        "features": Path(record.features).name if record.features else None,
        "pred_label": record.pred_label,
        "rgb": Path(record.rgb).name if record.rgb else None,
    }
    fields.update(overrides)
    return ImageRecord(**fields)


def gen_edges(
    manifest: Manifest,
    k: int,
    out_dir,
    crf: boundary.CrfParams = boundary.CrfParams(),
    canny_sigma: float = 1.4,
    canny_low: float = 0.1,
    canny_high: float = 0.3,
    jobs: int = 1,
) -> Path:
    """Write one pseudo-boundary PNG per record plus a derived manifest whose
    gt_mask entries point at the pseudo-boundaries (features are kept so the
    output feeds the boundary fitter directly)."""
    if not manifest.images:
        raise EmptyDataset("manifest has no images")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    def one(record: ImageRecord) -> ImageRecord:
        raw = source_map(manifest, record, "sem", k)
        sem_full = normalize_map(resize_bilinear(raw, record.height, record.width))
        rgb = load_rgb(manifest, record)
        pseudo = boundary.make_pseudo_boundary(sem_full, rgb, crf, canny_sigma, canny_low, canny_high)
        name = f"{record.id}_edges.png"
        write_mask_png(out / name, pseudo)
        _copy_sidecars(manifest, record, out)
        return _relocated(record, gt_mask=name, cam=Path(record.cam).name)

    records = run_parallel(one, manifest.images, jobs)
    for record in manifest.images:  # pseudo-edge manifests still need the cam files
        src = manifest.resolve(record.cam)
        dst = out / Path(record.cam).name
        if src.resolve() != dst.resolve():
            dst.write_bytes(src.read_bytes())
    from .manifest import save_manifest

    return save_manifest(
        Manifest(num_classes=manifest.num_classes, images=tuple(records), root=out),
        out / "manifest.json",
    )


def fit_edges(
    manifest: Manifest,
    mode: str,
    lam: float = 1.0,
    steps: int = 500,
    lr: float = 0.5,
) -> hns.FitResult:
    """Fit one shared linear-logistic edge predictor over every record's
    pixels; gt_mask entries are read as the (pseudo-)edge supervision."""
    if not manifest.images:
        raise EmptyDataset("manifest has no images")
    stacks = []
    masks = []
    for record in manifest.images:
        features = load_features(manifest, record)
        mask = load_gt_mask(manifest, record)
        if features.shape[1:] != mask.shape:
            raise DimensionError(
                f"{record.id}: features {features.shape[1:]} vs edges {mask.shape}"
            )
        stacks.append(features.reshape(features.shape[0], -1))
        masks.append(mask.reshape(1, -1))
    pixels = np.concatenate(stacks, axis=1)[:, None, :]  # C x 1 x (sum HW)
    edges = np.concatenate(masks, axis=1)
    return hns.toy_fit(pixels, edges, steps=steps, lr=lr, lam=lam, mode=mode)


def eval_edges(pred_dir, gt_dir, tol_frac: float = edge_eval.DEFAULT_TOLERANCE):
    """Benchmark <stem>.npy edge maps in pred_dir against <stem>.png GT masks
    in gt_dir, paired by stem and ordered by stem."""
    pred_dir = Path(pred_dir)
    gt_dir = Path(gt_dir)
    preds = sorted(pred_dir.glob("*.npy"))
    if not preds:
        raise EmptyDataset(f"no .npy edge maps under {pred_dir}")
    records = []
    for pred_path in preds:
        gt_path = gt_dir / (pred_path.stem + ".png")
        records.append((read_array(pred_path), read_mask_png(gt_path)))
    return edge_eval.edge_benchmark(records, tol_frac)


def derive_gt_boundaries(manifest: Manifest, out_dir, jobs: int = 1) -> Path:
    """Extract GT boundary masks (foreground pixels with a background
    4-neighbor) from every record's mask, for edge benchmarking."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    def one(record: ImageRecord):
        write_mask_png(out / f"{record.id}.png", edge_eval.mask_boundary(load_gt_mask(manifest, record)))

    run_parallel(one, manifest.images, jobs)
    return out
