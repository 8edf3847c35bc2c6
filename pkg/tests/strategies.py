"""Hypothesis strategies shared by the unit and acceptance suites."""

from hypothesis import strategies as st

from axle_eval.annotations import BoundingBox, Detection, GroundTruthObject, ImageRecord

coord = st.floats(0.05, 0.95)
size = st.floats(0.02, 0.4)


@st.composite
def valid_boxes(draw):
    return BoundingBox.clipped(draw(coord), draw(coord), draw(size), draw(size))


@st.composite
def images(draw, max_gt=5, max_det=6):
    g = draw(st.lists(valid_boxes(), max_size=max_gt))
    d = draw(st.lists(st.tuples(st.floats(0, 1), valid_boxes()), max_size=max_det))
    return ImageRecord(
        "img",
        tuple(GroundTruthObject(0, b) for b in g),
        tuple(Detection(0, conf, b) for conf, b in d),
    )


@st.composite
def ranked_hits(draw, max_len=10, max_gt=5):
    """(hits, gt_total) with no more hits than ground-truth objects."""
    gt_total = draw(st.integers(1, max_gt))
    hits = draw(st.lists(st.booleans(), max_size=max_len))
    kept, tp = [], 0
    for h in hits:
        if h and tp == gt_total:
            h = False
        tp += h
        kept.append(h)
    return kept, gt_total


finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)
value_lists = st.lists(finite, min_size=1, max_size=12)
