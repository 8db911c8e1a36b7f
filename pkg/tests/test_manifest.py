import json

import numpy as np
import pytest

from locmap.errors import DuplicateId, MissingFile, SchemaError
from locmap.manifest import load_manifest, save_manifest
from locmap.npyfmt import write_array
from locmap.pngio import write_mask_png


def _write_files(root, rec_id="img_0", size=8):
    write_array(root / f"{rec_id}_cam.npy", np.zeros((size, size), np.float32))
    write_mask_png(root / f"{rec_id}_mask.png", np.zeros((size, size), np.uint8))


def _record(rec_id="img_0", size=8, **extra):
    rec = {
        "id": rec_id,
        "width": size,
        "height": size,
        "cam": f"{rec_id}_cam.npy",
        "gt_mask": f"{rec_id}_mask.png",
        "gt_boxes": [[1, 1, 4, 5]],
        "gt_label": 0,
    }
    rec.update(extra)
    return rec


def _write_manifest(root, doc):
    path = root / "manifest.json"
    path.write_text(json.dumps(doc))
    return path


class TestLoad:
    def test_minimal_manifest(self, tmp_path):
        _write_files(tmp_path)
        path = _write_manifest(tmp_path, {"version": 1, "num_classes": 3, "images": [_record()]})
        man = load_manifest(path)
        assert len(man.images) == 1
        rec = man.images[0]
        assert rec.id == "img_0" and rec.gt_boxes[0].x1 == 4 and rec.pred_label is None

    def test_duplicate_id(self, tmp_path):
        _write_files(tmp_path)
        doc = {"version": 1, "num_classes": 3, "images": [_record(), _record()]}
        with pytest.raises(DuplicateId, match="/images/1/id"):
            load_manifest(_write_manifest(tmp_path, doc))

    def test_missing_file(self, tmp_path):
        _write_files(tmp_path)
        doc = {"version": 1, "num_classes": 3, "images": [_record(cam="absent.npy")]}
        with pytest.raises(MissingFile, match="/images/0/cam"):
            load_manifest(_write_manifest(tmp_path, doc))

    def test_unknown_version(self, tmp_path):
        with pytest.raises(SchemaError, match="/version"):
            load_manifest(_write_manifest(tmp_path, {"version": 2, "num_classes": 1, "images": []}))

    def test_missing_field_pointer(self, tmp_path):
        _write_files(tmp_path)
        rec = _record()
        del rec["gt_mask"]
        doc = {"version": 1, "num_classes": 3, "images": [rec]}
        with pytest.raises(SchemaError, match="/images/0/gt_mask"):
            load_manifest(_write_manifest(tmp_path, doc))

    def test_box_out_of_bounds(self, tmp_path):
        _write_files(tmp_path)
        doc = {"version": 1, "num_classes": 3, "images": [_record(gt_boxes=[[0, 0, 8, 3]])]}
        with pytest.raises(SchemaError, match="/images/0/gt_boxes/0"):
            load_manifest(_write_manifest(tmp_path, doc))

    def test_label_out_of_range(self, tmp_path):
        _write_files(tmp_path)
        doc = {"version": 1, "num_classes": 3, "images": [_record(gt_label=3)]}
        with pytest.raises(SchemaError, match="/images/0/gt_label"):
            load_manifest(_write_manifest(tmp_path, doc))

    def test_order_preserved_and_deterministic(self, tmp_path):
        for i in range(3):
            _write_files(tmp_path, f"img_{i}")
        doc = {
            "version": 1,
            "num_classes": 3,
            "images": [_record(f"img_{i}") for i in (2, 0, 1)],
        }
        path = _write_manifest(tmp_path, doc)
        ids = [r.id for r in load_manifest(path).images]
        assert ids == ["img_2", "img_0", "img_1"]
        assert ids == [r.id for r in load_manifest(path).images]


class TestSave:
    def test_roundtrip(self, tmp_path):
        _write_files(tmp_path)
        src = _write_manifest(
            tmp_path,
            {"version": 1, "num_classes": 3, "images": [_record(pred_label=2)]},
        )
        man = load_manifest(src)
        out = save_manifest(man, tmp_path / "copy.json")
        again = load_manifest(out)
        assert again.images == man.images and again.num_classes == man.num_classes
