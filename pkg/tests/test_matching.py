import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from shapely.geometry import box as shapely_box

from axle_eval.annotations import BoundingBox, Detection, GroundTruthObject, ImageRecord
from axle_eval.matching import ConfusionCounts, accumulate_counts, iou, match_image
from strategies import images, valid_boxes


def B(cx, cy, w, h):
    return BoundingBox(cx, cy, w, h)


def shapely_iou(a, b):
    pa, pb = shapely_box(*a.corners), shapely_box(*b.corners)
    return pa.intersection(pb).area / pa.union(pb).area


class TestIoU:
    def test_identical(self):
        assert iou(B(0.5, 0.5, 0.2, 0.3), B(0.5, 0.5, 0.2, 0.3)) == 1.0

    def test_disjoint(self):
        assert iou(B(0.2, 0.2, 0.1, 0.1), B(0.8, 0.8, 0.1, 0.1)) == 0.0

    def test_touching_edges(self):
        assert iou(B(0.25, 0.5, 0.5, 0.5), B(0.75, 0.5, 0.5, 0.5)) == 0.0

    def test_half_overlap_is_one_third(self):
        # intersection 0.125, union 0.375
        assert iou(B(0.25, 0.5, 0.5, 0.5), B(0.5, 0.5, 0.5, 0.5)) == pytest.approx(1 / 3)

    def test_degenerate_box_rejected(self):
        class Flat:
            area = 0.0
            corners = (0.5, 0.5, 0.5, 0.6)

        with pytest.raises(ValueError):
            iou(Flat(), B(0.5, 0.5, 0.1, 0.1))


def gt(*boxes):
    return tuple(GroundTruthObject(0, b) for b in boxes)


def dets(*items):
    return tuple(Detection(0, conf, b) for conf, b in items)


class TestMatchImage:
    def test_single_hit(self):
        g = B(0.5, 0.5, 0.2, 0.2)
        d = B(0.5, 0.5, 0.2 * 0.8, 0.2)  # IoU 0.8
        assert iou(g, d) == pytest.approx(0.8)
        result, counts = match_image(ImageRecord("i", gt(g), dets((0.9, d))), 0, 0.5, 0.25)
        assert counts == ConfusionCounts(1, 0, 0)
        assert result.pairs[0][:2] == (0, 0)

    def test_duplicate_detection_is_false_positive(self):
        g = B(0.5, 0.5, 0.2, 0.2)
        d_high = B(0.5, 0.5, 0.16, 0.2)   # IoU 0.8
        d_low = B(0.5, 0.5, 0.15, 0.2)    # IoU 0.75
        rec = ImageRecord("i", gt(g), dets((0.7, d_low), (0.9, d_high)))
        result, counts = match_image(rec, 0, 0.5, 0.25)
        assert counts == ConfusionCounts(1, 1, 0)
        assert result.pairs == ((1, 0, pytest.approx(0.8)),)
        assert result.unmatched_detections == (0,)

    def test_no_detections(self):
        rec = ImageRecord("i", gt(B(0.3, 0.5, 0.1, 0.1), B(0.7, 0.5, 0.1, 0.1)))
        result, counts = match_image(rec, 0)
        assert counts == ConfusionCounts(0, 0, 2)
        assert result.unmatched_ground_truth == (0, 1)

    def test_confidence_threshold_filters(self):
        g = B(0.5, 0.5, 0.2, 0.2)
        rec = ImageRecord("i", gt(g), dets((0.1, g)))
        assert match_image(rec, 0, 0.5, 0.25)[1] == ConfusionCounts(0, 0, 1)
        assert match_image(rec, 0, 0.5, 0.1)[1] == ConfusionCounts(1, 0, 0)

    def test_iou_exactly_at_threshold_matches(self):
        g = B(0.5, 0.5, 0.2, 0.2)
        d = B(0.5, 0.5, 0.1, 0.2)  # IoU 0.5
        assert match_image(ImageRecord("i", gt(g), dets((0.9, d))), 0, 0.5, 0.0)[1].tp == 1

    def test_other_categories_ignored(self):
        g = B(0.5, 0.5, 0.2, 0.2)
        rec = ImageRecord("i", (GroundTruthObject(1, g),), (Detection(1, 0.9, g),))
        assert match_image(rec, 0)[1] == ConfusionCounts(0, 0, 0)
        assert match_image(rec, 1)[1] == ConfusionCounts(1, 0, 0)

    def test_confidence_tie_keeps_file_order(self):
        g = B(0.5, 0.5, 0.2, 0.2)
        rec = ImageRecord("i", gt(g), dets((0.8, B(0.5, 0.5, 0.15, 0.2)), (0.8, g)))
        result, _ = match_image(rec, 0)
        assert result.pairs[0][0] == 0

    def test_iou_tie_takes_lowest_gt_index(self):
        d = B(0.5, 0.5, 0.2, 0.2)
        left, right = B(0.45, 0.5, 0.2, 0.2), B(0.55, 0.5, 0.2, 0.2)
        result, _ = match_image(ImageRecord("i", gt(left, right), dets((0.9, d))), 0)
        assert result.pairs[0][1] == 0

    @pytest.mark.parametrize("kwargs", [{"iou_threshold": 0}, {"iou_threshold": 1.5}, {"confidence_threshold": -0.1}])
    def test_threshold_validation(self, kwargs):
        with pytest.raises(ValueError):
            match_image(ImageRecord("i"), 0, **kwargs)


def test_accumulate():
    assert accumulate_counts([ConfusionCounts(1, 0, 0), ConfusionCounts(2, 1, 1)]) == ConfusionCounts(3, 1, 1)
    assert accumulate_counts([]) == ConfusionCounts(0, 0, 0)


def test_accumulate_fixture_per_image(testing_dataset):
    from axle_eval import data, load_dataset

    ds = load_dataset(data.dataset_manifest("testing", "mixed_yolov8x"))
    per_image = [match_image(rec, 0)[1] for rec in ds.images]
    assert accumulate_counts(per_image) == ConfusionCounts(119, 1, 0)
    assert accumulate_counts(reversed(per_image)) == ConfusionCounts(119, 1, 0)


# ---- randomized properties -------------------------------------------------

@settings(max_examples=200, deadline=None)
@given(valid_boxes(), valid_boxes())
def test_iou_properties(a, b):
    value = iou(a, b)
    assert 0.0 <= value <= 1.0
    assert value == iou(b, a)
    assert iou(a, a) == pytest.approx(1.0)
    assert value == pytest.approx(shapely_iou(a, b), abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(images(), st.floats(0.05, 1.0), st.floats(0.0, 1.0))
def test_matching_conservation(rec, iou_t, conf_t):
    result, counts = match_image(rec, 0, iou_t, conf_t)
    considered = sum(1 for d in rec.detections if d.confidence >= conf_t)
    assert counts.tp + counts.fn == len(rec.ground_truth)
    assert counts.tp + counts.fp == considered
    det_ids = [p[0] for p in result.pairs] + list(result.unmatched_detections)
    gt_ids = [p[1] for p in result.pairs] + list(result.unmatched_ground_truth)
    assert len(det_ids) == len(set(det_ids))
    assert sorted(gt_ids) == list(range(len(rec.ground_truth)))
    assert all(p[2] >= iou_t for p in result.pairs)


@settings(max_examples=300, deadline=None)
@given(images(), st.floats(0.05, 0.95), st.floats(0.0, 0.05), st.floats(0, 0.9), st.floats(0, 0.1))
def test_matching_monotone(rec, iou_t, iou_step, conf_t, conf_step):
    base = match_image(rec, 0, iou_t, conf_t)[1]
    stricter_iou = match_image(rec, 0, min(1.0, iou_t + iou_step), conf_t)[1]
    stricter_conf = match_image(rec, 0, iou_t, min(1.0, conf_t + conf_step))[1]
    assert stricter_iou.tp <= base.tp
    assert stricter_conf.tp + stricter_conf.fp <= base.tp + base.fp


def replay_greedy(rec, iou_t, conf_t):
    """Independent replay: precomputed IoU matrix (shapely), explicit sort."""
    order = sorted(
        (k for k, d in enumerate(rec.detections) if d.confidence >= conf_t),
        key=lambda k: (-rec.detections[k].confidence, k),
    )
    matrix = [[shapely_iou(d.box, g.box) for g in rec.ground_truth] for d in rec.detections]
    taken, pairs, unmatched = set(), [], []
    for k in order:
        options = [(-matrix[k][g], g) for g in range(len(rec.ground_truth))
                   if g not in taken and matrix[k][g] >= iou_t]
        if options:
            _, g = min(options)
            taken.add(g)
            pairs.append((k, g))
        else:
            unmatched.append(k)
    return pairs, unmatched


@settings(max_examples=200, deadline=None)
@given(images(), st.floats(0.1, 0.9), st.floats(0, 0.5))
def test_greedy_trace_replay(rec, iou_t, conf_t):
    # keep away from IoU values within float noise of the threshold
    for d in rec.detections:
        for g in rec.ground_truth:
            if abs(shapely_iou(d.box, g.box) - iou_t) < 1e-9:
                return
    result, _ = match_image(rec, 0, iou_t, conf_t)
    pairs, unmatched = replay_greedy(rec, iou_t, conf_t)
    assert [p[:2] for p in result.pairs] == pairs
    assert list(result.unmatched_detections) == unmatched
