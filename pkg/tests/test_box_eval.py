import numpy as np
import pytest

from locmap.box_eval import (
    BBox,
    BoxEvalItem,
    box_iou,
    connected_components,
    infer_box,
    localization_accuracy,
)
from locmap.errors import InvalidInput, MissingPrediction

from oracles import box_iou_enum, flood_fill_components, infer_box_loop


class TestConnectedComponents:
    def test_two_disjoint_blobs(self):
        mask = np.zeros((6, 8), np.uint8)
        mask[0:2, 0:2] = 1
        mask[4:6, 5:7] = 1
        lab = connected_components(mask)
        assert lab.count == 2 and lab.sizes == (4, 4)

    def test_diagonal_connectivity(self):
        mask = np.array([[1, 0], [0, 1]], np.uint8)
        assert connected_components(mask, 8).count == 1
        assert connected_components(mask, 4).count == 2

    def test_matches_flood_fill_oracle(self, rng):
        for connectivity in (4, 8):
            for _ in range(10):
                mask = (rng.random((8, 8)) < 0.45).astype(np.uint8)
                got = connected_components(mask, connectivity)
                labels, sizes = flood_fill_components(mask, connectivity)
                assert got.labels.tolist() == labels
                assert got.sizes == tuple(sizes)

    def test_bad_connectivity(self):
        with pytest.raises(InvalidInput):
            connected_components(np.zeros((2, 2), np.uint8), 6)


class TestInferBox:
    def test_tight_rectangle(self):
        m = np.zeros((8, 10))
        m[2:5, 5:8] = 0.9
        assert infer_box(m) == BBox(5, 2, 7, 4)

    def test_all_zero_map(self):
        assert infer_box(np.zeros((4, 4))) is None

    def test_largest_blob_wins(self, rng):
        m = np.zeros((8, 8))
        m[0:2, 0:3] = 0.8  # size 6
        m[5:7, 5:7] = 1.0  # size 4 but brighter
        assert infer_box(m, 0.9) == BBox(5, 5, 6, 6)  # 0.9 * max drops the dim blob
        got = infer_box(m, 0.2)  # both blobs pass; the 6-pixel one wins
        assert got == BBox(0, 0, 2, 1)
        oracle = infer_box_loop(m, 0.2)
        assert (got.x0, got.y0, got.x1, got.y1) == oracle

    def test_matches_exhaustive_oracle(self, rng):
        for _ in range(20):
            m = rng.random((8, 8)) * (rng.random((8, 8)) < 0.5)
            got = infer_box(m)
            oracle = infer_box_loop(m, 0.2)
            if got is None:
                assert oracle is None
            else:
                assert (got.x0, got.y0, got.x1, got.y1) == oracle

    def test_box_contains_component_tightly(self, rng):
        m = rng.random((10, 10))
        box = infer_box(m, 0.3)
        fg = m >= 0.3 * m.max()
        from locmap.box_eval import connected_components as cc

        lab = cc(fg.astype(np.uint8))
        largest = np.argmax(lab.sizes) + 1
        ys, xs = np.nonzero(lab.labels == largest)
        assert box == BBox(xs.min(), ys.min(), xs.max(), ys.max())

    def test_threshold_validation(self):
        with pytest.raises(InvalidInput):
            infer_box(np.ones((2, 2)) * 0.5, 0.0)


class TestBoxIoU:
    def test_identical(self):
        b = BBox(1, 2, 5, 7)
        assert box_iou(b, b) == 1.0

    def test_disjoint(self):
        assert box_iou(BBox(0, 0, 1, 1), BBox(5, 5, 6, 6)) == 0.0

    def test_known_overlap_one_seventh(self):
        a, b = BBox(0, 0, 9, 9), BBox(5, 5, 14, 14)
        assert box_iou(a, b) == pytest.approx(1 / 7, abs=1e-12)
        assert box_iou(a, b) == pytest.approx(box_iou_enum((0, 0, 9, 9), (5, 5, 14, 14)), abs=1e-12)

    def test_symmetry_and_translation(self, rng):
        for _ in range(20):
            vals = rng.integers(0, 12, 8)
            a = BBox(min(vals[0], vals[1]), min(vals[2], vals[3]), max(vals[0], vals[1]), max(vals[2], vals[3]))
            b = BBox(min(vals[4], vals[5]), min(vals[6], vals[7]), max(vals[4], vals[5]), max(vals[6], vals[7]))
            assert box_iou(a, b) == box_iou(b, a)
            assert box_iou(a, b) == pytest.approx(
                box_iou_enum((a.x0, a.y0, a.x1, a.y1), (b.x0, b.y0, b.x1, b.y1)), abs=1e-12
            )
            shift = BBox(a.x0 + 3, a.y0 + 2, a.x1 + 3, a.y1 + 2)
            shifted_b = BBox(b.x0 + 3, b.y0 + 2, b.x1 + 3, b.y1 + 2)
            assert box_iou(shift, shifted_b) == box_iou(a, b)

    def test_identity_iff_equal(self):
        assert box_iou(BBox(0, 0, 3, 3), BBox(0, 0, 3, 2)) < 1.0


def _item(inferred, gt, gt_label=0, pred_label=0):
    return BoxEvalItem(inferred=inferred, gt_boxes=(gt,), gt_label=gt_label, pred_label=pred_label)


class TestAccuracy:
    def test_exact_matches(self):
        items = [_item(BBox(0, 0, 3, 3), BBox(0, 0, 3, 3)), _item(BBox(2, 2, 5, 5), BBox(2, 2, 5, 5))]
        assert localization_accuracy(items, "top1") == 1.0
        assert localization_accuracy(items, "gtknown") == 1.0

    def test_wrong_label_decouples(self):
        items = [
            _item(BBox(0, 0, 3, 3), BBox(0, 0, 3, 3), gt_label=0, pred_label=0),
            _item(BBox(2, 2, 5, 5), BBox(2, 2, 5, 5), gt_label=1, pred_label=0),
        ]
        assert localization_accuracy(items, "top1") == 0.5
        assert localization_accuracy(items, "gtknown") == 1.0

    def test_hand_enumerated_geometry(self):
        items = [
            _item(BBox(0, 0, 9, 9), BBox(0, 0, 9, 9)),          # IoU 1 -> hit
            _item(BBox(0, 0, 9, 9), BBox(5, 5, 14, 14)),        # IoU 1/7 -> miss
            _item(BBox(0, 0, 9, 9), BBox(0, 0, 9, 4)),          # IoU 0.5 -> hit at >= rule
            _item(None, BBox(0, 0, 5, 5)),                      # no box -> miss
            BoxEvalItem(                                        # second GT box saves it
                inferred=BBox(0, 0, 4, 4),
                gt_boxes=(BBox(10, 10, 12, 12), BBox(0, 0, 4, 4)),
                gt_label=0,
                pred_label=0,
            ),
        ]
        assert localization_accuracy(items, "gtknown") == pytest.approx(3 / 5)
        assert localization_accuracy(items, "top1") == pytest.approx(3 / 5)

    def test_gtknown_dominates_top1(self, rng):
        items = []
        for _ in range(30):
            hit = rng.random() < 0.5
            gt = BBox(0, 0, 9, 9)
            inferred = gt if hit else BBox(20, 20, 22, 22)
            items.append(
                BoxEvalItem(
                    inferred=inferred,
                    gt_boxes=(gt,),
                    gt_label=0,
                    pred_label=int(rng.integers(0, 2)),
                )
            )
        top1 = localization_accuracy(items, "top1")
        gtknown = localization_accuracy(items, "gtknown")
        assert gtknown >= top1
        assert localization_accuracy(items[::-1], "gtknown") == gtknown

    def test_missing_prediction(self):
        items = [BoxEvalItem(inferred=None, gt_boxes=(BBox(0, 0, 1, 1),), gt_label=0, pred_label=None)]
        with pytest.raises(MissingPrediction):
            localization_accuracy(items, "top1")
        assert localization_accuracy(items, "gtknown") == 0.0
