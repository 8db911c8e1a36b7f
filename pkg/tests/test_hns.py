import numpy as np
import pytest

from locmap.errors import DimensionError, DivergenceError, InvalidArgument
from locmap.hns import (
    EPS,
    class_balance_weights,
    hns_gradient,
    hns_loss,
    toy_fit,
)


def make_edge_fixture(seed, clutter=False, h=32, w=32, c=4):
    """Linearly separable edge features; optional clutter: 5% of background
    pixels get edge-like features but keep the negative label."""
    gen = np.random.default_rng(seed)
    edges = np.zeros((h, w), np.uint8)
    edges[8, 4:28] = 1
    edges[20, 6:26] = 1
    edges[4:28, 14] = 1
    u_edge = np.array([1.0, 0.8, -0.5, 0.3])
    u_bg = np.array([-0.6, 0.2, 0.9, -0.4])
    feats = np.where(edges.astype(bool)[None], u_edge[:, None, None], u_bg[:, None, None])
    feats = feats + 0.05 * gen.standard_normal((c, h, w))
    clutter_mask = np.zeros((h, w), bool)
    if clutter:
        bg = np.argwhere(~edges.astype(bool))
        pick = bg[gen.choice(len(bg), size=int(0.05 * len(bg)), replace=False)]
        clutter_mask[pick[:, 0], pick[:, 1]] = True
        feats[:, clutter_mask] = u_edge[:, None] + 0.15 * gen.standard_normal(
            (c, int(clutter_mask.sum()))
        )
    return feats, edges, clutter_mask


class TestWeights:
    def test_balanced(self):
        w = class_balance_weights(np.array([[1, 0]], np.uint8))
        assert w.alpha == 0.5 and w.beta == 0.5

    def test_all_negative(self):
        w = class_balance_weights(np.zeros((2, 5), np.uint8))
        assert w.alpha == 0.0 and w.beta == 1.0

    def test_all_positive_degenerate(self):
        w = class_balance_weights(np.ones((3, 3), np.uint8))
        assert w.alpha == 1.0 and w.beta == 0.0

    def test_counts_match_loop(self, rng):
        gt = (rng.random((9, 9)) < 0.3).astype(np.uint8)
        w = class_balance_weights(gt)
        pos = sum(v for row in gt.tolist() for v in row)
        assert w.alpha == pos / 81
        assert w.alpha + w.beta == 1.0


class TestLoss:
    def test_frozen_two_pixel_example(self):
        pred = np.array([[0.8, 0.6]])
        gt = np.array([[1, 0]], np.uint8)
        # -(1/2) * (0.5*ln 0.8 + 0.5*ln 0.4 + 0.5*0.6*ln 0.4)
        assert hns_loss(pred, gt, 1.0, "hns") == pytest.approx(0.4223021805782145, abs=1e-12)
        assert hns_loss(pred, gt, 1.0, "vanilla") == pytest.approx(0.2848585707970912, abs=1e-12)
        hns_part = hns_loss(pred, gt, 1.0, "hns") - hns_loss(pred, gt, 1.0, "vanilla")
        assert hns_part == pytest.approx(0.2748872195622465 / 2, abs=1e-12)

    def test_perfect_fit_near_zero(self):
        gt = np.array([[1, 0], [0, 1]], np.uint8)
        loss = hns_loss(gt.astype(float), gt)
        assert 0.0 <= loss < 1e-6

    def test_non_negative_and_mode_ordering(self, rng):
        for _ in range(25):
            pred = rng.random((6, 6))
            gt = (rng.random((6, 6)) < 0.5).astype(np.uint8)
            lam = float(rng.uniform(0.1, 3.0))
            v = hns_loss(pred, gt, lam, "vanilla")
            h = hns_loss(pred, gt, lam, "hns")
            assert v >= 0.0 and h >= v

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            hns_loss(np.zeros((2, 2)), np.zeros((2, 3), np.uint8))

    def test_bad_mode(self):
        with pytest.raises(InvalidArgument):
            hns_loss(np.zeros((2, 2)), np.zeros((2, 2), np.uint8), mode="other")


class TestGradient:
    def test_saturated_positive_formula(self):
        gt = np.array([[1, 0]], np.uint8)
        pred = np.array([[1.0, 0.5]])
        grad = hns_gradient(pred, gt, 1.0, "hns")
        beta = 0.5
        assert grad[0, 0] == pytest.approx(-beta / (2 * (1 - EPS)), rel=1e-9)
        assert grad[0, 0] < 0

    def test_matches_central_differences(self, rng):
        h = 1e-5
        worst = 0.0
        for _ in range(100):
            rows, cols = int(rng.integers(2, 6)), int(rng.integers(2, 6))
            pred = rng.uniform(0.02, 0.98, (rows, cols))
            gt = (rng.random((rows, cols)) < 0.4).astype(np.uint8)
            lam = float(rng.uniform(0.2, 3.0))
            mode = "hns" if rng.random() < 0.5 else "vanilla"
            grad = hns_gradient(pred, gt, lam, mode)
            r, c = int(rng.integers(0, rows)), int(rng.integers(0, cols))
            plus, minus = pred.copy(), pred.copy()
            plus[r, c] += h
            minus[r, c] -= h
            fd = (hns_loss(plus, gt, lam, mode) - hns_loss(minus, gt, lam, mode)) / (2 * h)
            worst = max(worst, abs(grad[r, c] - fd) / max(abs(fd), 1e-12))
        assert worst < 1e-4

    def test_hard_negative_gradient_increasing(self):
        gt = np.array([[0, 1]], np.uint8)  # one positive so the class weights are non-degenerate
        grads = [
            hns_gradient(np.array([[p, 0.9]]), gt, 1.0, "hns")[0, 0] for p in (0.1, 0.5, 0.9)
        ]
        assert grads[0] < grads[1] < grads[2]

    def test_hns_cost_increasing_in_p(self):
        # the suppression cost -P*log(1-P) itself grows with the score
        ps = np.linspace(0.05, 0.95, 19)
        costs = -ps * np.log1p(-ps)
        assert np.all(np.diff(costs) > 0)


class TestToyFit:
    def test_separable_high_recall_both_modes(self):
        feats, edges, _ = make_edge_fixture(1)
        for mode in ("vanilla", "hns"):
            result = toy_fit(feats, edges, steps=500, lr=0.5, mode=mode)
            assert result.recall >= 0.99

    def test_clutter_suppression_direction(self):
        feats, edges, _ = make_edge_fixture(7, clutter=True)
        vanilla = toy_fit(feats, edges, steps=500, lr=0.5, mode="vanilla")
        hns = toy_fit(feats, edges, steps=500, lr=0.5, mode="hns")
        assert hns.hard_negative_score < vanilla.hard_negative_score

    def test_zero_steps_identity(self):
        feats, edges, _ = make_edge_fixture(2)
        result = toy_fit(feats, edges, steps=0, lr=0.5)
        assert np.all(result.weights == 0.0) and result.bias == 0.0
        assert np.allclose(result.predict(feats), 0.5)

    def test_divergence_reported(self):
        # a negative learning rate climbs the loss; the guard must catch it
        feats, edges, _ = make_edge_fixture(3)
        with pytest.raises(DivergenceError) as exc_info:
            toy_fit(feats, edges, steps=400, lr=-5.0)
        assert exc_info.value.step >= 0

    def test_predict_shape_guard(self):
        feats, edges, _ = make_edge_fixture(4)
        result = toy_fit(feats, edges, steps=5, lr=0.1)
        with pytest.raises(DimensionError):
            result.predict(np.zeros((7, 4, 4)))
