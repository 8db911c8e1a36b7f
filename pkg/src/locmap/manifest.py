"""Dataset manifest: the version-1 JSON schema, loading, and validation.

Schema:
    {"version": 1, "num_classes": Y, "images": [
        {"id", "width", "height", "cam", "features"?, "gt_mask",
         "gt_boxes": [[x0, y0, x1, y1], ...], "gt_label", "pred_label"?, "rgb"?}
    ]}

Boxes are inclusive pixel coordinates, 0-indexed.  All file paths are
resolved relative to the manifest's directory.  Schema violations raise
errors carrying a JSON pointer to the offending field; referenced files are
checked for existence eagerly, while array/mask dimensions are cross-checked
lazily on first use (see pipeline).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .box_eval import BBox
from .errors import DuplicateId, MissingFile, SchemaError


@dataclass(frozen=True)
class ImageRecord:
    id: str
    width: int
    height: int
    cam: str
    gt_mask: str
    gt_boxes: tuple[BBox, ...]
    gt_label: int
    features: str | None = None
    pred_label: int | None = None
    rgb: str | None = None


@dataclass(frozen=True)
class Manifest:
    num_classes: int
    images: tuple[ImageRecord, ...]
    root: Path
    version: int = 1

    def resolve(self, relpath: str) -> Path:
        return self.root / relpath


def _require(obj: dict, field: str, pointer: str):
    if field not in obj:
        raise SchemaError(f"{pointer}/{field}: missing required field")
    return obj[field]


def _int_field(obj: dict, field: str, pointer: str, minimum: int | None = None) -> int:
    value = _require(obj, field, pointer)
    if not isinstance(value, int) or isinstance(value, bool):
        raise SchemaError(f"{pointer}/{field}: expected integer, got {type(value).__name__}")
    if minimum is not None and value < minimum:
        raise SchemaError(f"{pointer}/{field}: must be >= {minimum}, got {value}")
    return value


def _str_field(obj: dict, field: str, pointer: str) -> str:
    value = _require(obj, field, pointer)
    if not isinstance(value, str) or not value:
        raise SchemaError(f"{pointer}/{field}: expected non-empty string")
    return value


def _parse_box(raw, pointer: str, width: int, height: int) -> BBox:
    if not isinstance(raw, list) or len(raw) != 4 or not all(
        isinstance(v, int) and not isinstance(v, bool) for v in raw
    ):
        raise SchemaError(f"{pointer}: expected [x0, y0, x1, y1] integers, got {raw!r}")
    x0, y0, x1, y1 = raw
    if not (0 <= x0 <= x1 < width and 0 <= y0 <= y1 < height):
        raise SchemaError(f"{pointer}: box {raw} outside {width} x {height} image bounds")
    return BBox(x0, y0, x1, y1)


def _parse_record(raw: dict, idx: int, num_classes: int) -> ImageRecord:
    ptr = f"/images/{idx}"
    if not isinstance(raw, dict):
        raise SchemaError(f"{ptr}: expected object")
    rec_id = _str_field(raw, "id", ptr)
    width = _int_field(raw, "width", ptr, minimum=1)
    height = _int_field(raw, "height", ptr, minimum=1)
    gt_label = _int_field(raw, "gt_label", ptr, minimum=0)
    if gt_label >= num_classes:
        raise SchemaError(f"{ptr}/gt_label: {gt_label} >= num_classes {num_classes}")
    boxes_raw = _require(raw, "gt_boxes", ptr)
    if not isinstance(boxes_raw, list):
        raise SchemaError(f"{ptr}/gt_boxes: expected list")
    boxes = tuple(
        _parse_box(b, f"{ptr}/gt_boxes/{j}", width, height) for j, b in enumerate(boxes_raw)
    )
    pred_label = raw.get("pred_label")
    if pred_label is not None and (not isinstance(pred_label, int) or isinstance(pred_label, bool)):
        raise SchemaError(f"{ptr}/pred_label: expected integer")
    for opt in ("features", "rgb"):
        if opt in raw and (not isinstance(raw[opt], str) or not raw[opt]):
            raise SchemaError(f"{ptr}/{opt}: expected non-empty string")
    return ImageRecord(
        id=rec_id,
        width=width,
        height=height,
        cam=_str_field(raw, "cam", ptr),
        gt_mask=_str_field(raw, "gt_mask", ptr),
        gt_boxes=boxes,
        gt_label=gt_label,
        features=raw.get("features"),
        pred_label=pred_label,
        rgb=raw.get("rgb"),
    )


def load_manifest(path) -> Manifest:
    path = Path(path)
    if not path.is_file():
        raise MissingFile(str(path))
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"/: not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise SchemaError("/: expected top-level object")
    version = _int_field(doc, "version", "")
    if version != 1:
        raise SchemaError(f"/version: unknown version {version}, expected 1")
    num_classes = _int_field(doc, "num_classes", "", minimum=1)
    images_raw = _require(doc, "images", "")
    if not isinstance(images_raw, list):
        raise SchemaError("/images: expected list")

    root = path.parent
    records = []
    seen: set[str] = set()
    for idx, raw in enumerate(images_raw):
        rec = _parse_record(raw, idx, num_classes)
        if rec.id in seen:
            raise DuplicateId(f"/images/{idx}/id: duplicate '{rec.id}'")
        seen.add(rec.id)
        for field in ("cam", "gt_mask", "features", "rgb"):
            rel = getattr(rec, field)
            if rel is not None and not (root / rel).is_file():
                raise MissingFile(f"/images/{idx}/{field}: '{root / rel}'")
        records.append(rec)
    return Manifest(num_classes=num_classes, images=tuple(records), root=root)


def record_to_json(rec: ImageRecord) -> dict:
    out = {
        "id": rec.id,
        "width": rec.width,
        "height": rec.height,
        "cam": rec.cam,
        "gt_mask": rec.gt_mask,
        "gt_boxes": [[b.x0, b.y0, b.x1, b.y1] for b in rec.gt_boxes],
        "gt_label": rec.gt_label,
    }
    if rec.features is not None:
        out["features"] = rec.features
    if rec.pred_label is not None:
        out["pred_label"] = rec.pred_label
    if rec.rgb is not None:
        out["rgb"] = rec.rgb
    return out


def save_manifest(manifest: Manifest, path) -> Path:
    """Write a manifest JSON (deterministic formatting); paths stay relative."""
    doc = {
        "version": manifest.version,
        "num_classes": manifest.num_classes,
        "images": [record_to_json(r) for r in manifest.images],
    }
    path = Path(path)
    path.write_text(json.dumps(doc, indent=2) + "\n")
    return path
