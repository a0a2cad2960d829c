import json
import random

import pytest

from cctvaware.evaluation import (
    BBox,
    Detection,
    EvalConfig,
    GroundTruthBox,
    SchemaError,
    UndefinedMetric,
    average_precision,
    counts_at,
    evaluate,
    f1_score,
    fuse,
    iou,
    load_coco_detections,
    load_coco_ground_truth,
    match_greedy,
    recall_at,
    report_to_dict,
    report_to_text,
    size_bucket,
)
from oracles import (
    oracle_average_precision_101,
    oracle_average_precision_allpoint,
    oracle_counts,
    oracle_iou,
    oracle_recall,
    oracle_report,
    random_detection_instance,
)


def det(img, cat, x, y, w, h, score):
    return Detection(img, cat, BBox(x, y, w, h), score)


def gt(img, cat, x, y, w, h):
    return GroundTruthBox(img, cat, BBox(x, y, w, h))


def rand_instance(rng, **kw):
    return random_detection_instance(rng, det_cls(), gt_cls(), BBox, **kw)


def det_cls():
    return lambda img, cat, box, score: Detection(img, cat, box, score)


def gt_cls():
    return lambda img, cat, box: GroundTruthBox(img, cat, box)


ALL_SIZES = frozenset({"small", "medium", "large"})


# --- iou ----------------------------------------------------------------------

def test_iou_identical():
    b = BBox(3, 4, 10, 12)
    assert iou(b, b) == 1.0


def test_iou_disjoint():
    assert iou(BBox(0, 0, 10, 10), BBox(100, 100, 5, 5)) == 0.0


def test_iou_half_shift():
    v = iou(BBox(0, 0, 10, 10), BBox(5, 0, 10, 10))
    assert abs(v - 50 / 150) < 1e-12


def test_iou_properties_random():
    rng = random.Random(5)
    for _ in range(300):
        a = BBox(rng.uniform(0, 50), rng.uniform(0, 50), rng.uniform(1, 40), rng.uniform(1, 40))
        b = BBox(rng.uniform(0, 50), rng.uniform(0, 50), rng.uniform(1, 40), rng.uniform(1, 40))
        v = iou(a, b)
        assert 0.0 <= v <= 1.0
        assert v == iou(b, a)
        assert v == oracle_iou(a, b)


def test_bbox_requires_positive_sides():
    with pytest.raises(ValueError):
        BBox(0, 0, 0, 10)


# --- size buckets ----------------------------------------------------------------

def test_size_buckets_boundaries():
    assert size_bucket(BBox(0, 0, 31, 31)) == "small"     # 961
    assert size_bucket(BBox(0, 0, 32, 32)) == "medium"    # 1024
    assert size_bucket(BBox(0, 0, 96, 96)) == "medium"    # 9216
    assert size_bucket(BBox(0, 0, 97, 97)) == "large"
    assert size_bucket(BBox(0, 0, 100, 100)) == "large"


# --- greedy matching --------------------------------------------------------------

def test_match_single_tp():
    r = match_greedy([det(1, "round", 0, 0, 40, 40, 0.9)], [gt(1, "round", 1, 1, 40, 40)], 0.5)
    assert (r.tp, r.fp, r.fn) == (1, 0, 0)
    assert r.pairs == ((0, 0),)


def test_match_below_threshold():
    r = match_greedy([det(1, "round", 0, 0, 40, 40, 0.9)], [gt(1, "round", 30, 30, 40, 40)], 0.5)
    assert (r.tp, r.fp, r.fn) == (0, 1, 1)


def test_match_higher_score_wins():
    dets = [
        det(1, "round", 0, 0, 40, 40, 0.9),
        det(1, "round", 2, 2, 40, 40, 0.8),
    ]
    r = match_greedy(dets, [gt(1, "round", 0, 0, 40, 40)], 0.5)
    assert (r.tp, r.fp, r.fn) == (1, 1, 0)
    assert r.pairs == ((0, 0),)
    assert dict(r.det_is_tp) == {0: True, 1: False}


def test_match_is_per_category():
    r = match_greedy(
        [det(1, "directed", 0, 0, 40, 40, 0.9)], [gt(1, "round", 0, 0, 40, 40)], 0.5
    )
    assert (r.tp, r.fp, r.fn) == (0, 1, 1)


def test_match_rejects_multiple_images():
    with pytest.raises(ValueError):
        match_greedy([det(1, "round", 0, 0, 9, 9, 0.5)], [gt(2, "round", 0, 0, 9, 9)])


def test_match_max_dets_truncates():
    dets = [det(1, "round", 100 * i, 0, 40, 40, 0.5) for i in range(5)]
    r = match_greedy(dets, [], max_dets=2)
    assert (r.tp, r.fp, r.fn) == (0, 2, 0)


# --- f1 ---------------------------------------------------------------------------

def test_f1_values_from_counts():
    assert abs(f1_score(33, 0, 6) - 0.917) < 5e-4
    assert abs(f1_score(35, 0, 4) - 0.946) < 5e-4
    assert f1_score(0, 5, 0) == 0.0


def test_f1_undefined():
    with pytest.raises(UndefinedMetric):
        f1_score(0, 0, 0)


def test_f1_strictly_decreasing_in_fp_fn():
    for tp in (1, 7, 33):
        assert f1_score(tp, 1, 0) < f1_score(tp, 0, 0)
        assert f1_score(tp, 0, 1) < f1_score(tp, 0, 0)
        assert f1_score(tp, 3, 2) < f1_score(tp, 2, 2)


# --- average precision -------------------------------------------------------------

def test_ap_single_hit_is_one():
    d = [det(1, "round", 0, 0, 40, 40, 0.9)]
    g = [gt(1, "round", 1, 1, 40, 40)]
    assert average_precision(d, g, 0.5) == 1.0


def test_ap_no_detections_is_zero():
    assert average_precision([], [gt(1, "round", 0, 0, 40, 40)], 0.5) == 0.0


def test_ap_no_ground_truth_is_absent():
    assert average_precision([det(1, "round", 0, 0, 40, 40, 0.9)], [], 0.5) is None


def test_ap_small_gt_filtered_out_is_absent():
    g = [gt(1, "round", 0, 0, 10, 10)]  # small bucket
    assert average_precision([], g, 0.5) is None
    assert average_precision([], g, 0.5, EvalConfig(size_filter=ALL_SIZES)) == 0.0


def test_ap_matches_oracle_randomized():
    rng = random.Random(101)
    cfg = EvalConfig()
    for _ in range(120):
        dets, gts = rand_instance(rng)
        for thr in (0.5, 0.75):
            got = average_precision(dets, gts, thr, cfg)
            want = oracle_average_precision_101(dets, gts, thr, 100, cfg.size_filter)
            if want is None:
                assert got is None
            else:
                assert got == pytest.approx(want, abs=1e-9)
            got_all = average_precision(dets, gts, thr, cfg, method="allpoint")
            want_all = oracle_average_precision_allpoint(dets, gts, thr, 100, cfg.size_filter)
            if want_all is None:
                assert got_all is None
            else:
                assert got_all == pytest.approx(want_all, abs=1e-9)


def test_ap_non_increasing_in_threshold():
    rng = random.Random(103)
    cfg = EvalConfig(size_filter=ALL_SIZES)
    for _ in range(60):
        dets, gts = rand_instance(rng)
        values = [average_precision(dets, gts, t, cfg) for t in cfg.iou_thresholds]
        values = [v for v in values if v is not None]
        for a, b in zip(values, values[1:]):
            assert b <= a + 1e-12


# --- evaluate -----------------------------------------------------------------------

def _perfect_instance():
    gts = [
        gt(1, "directed", 0, 0, 40, 40),     # medium
        gt(1, "round", 200, 200, 120, 120),  # large
        gt(2, "directed", 50, 50, 100, 100), # large
        gt(2, "round", 300, 10, 50, 50),     # medium
        gt(2, "round", 400, 10, 10, 10),     # small, ignored by default filter
    ]
    dets = [Detection(g.image_id, g.category, g.bbox, 1.0) for g in gts]
    return dets, gts


def test_evaluate_perfect_detector():
    report = evaluate(*_perfect_instance())
    for name, value in report_to_dict(report).items():
        if name in ("tp", "fp", "fn"):
            continue
        assert value == pytest.approx(1.0), name
    assert (report.tp, report.fp, report.fn) == (4, 0, 0)


def test_evaluate_empty_detections():
    _, gts = _perfect_instance()
    report = evaluate([], gts)
    assert report.ap50 == 0.0
    assert report.ap50_95 == 0.0
    assert report.ar100 == 0.0
    assert report.f1_at_50 == 0.0
    assert (report.tp, report.fp, report.fn) == (0, 0, 4)


def test_evaluate_matches_oracle_randomized():
    rng = random.Random(107)
    cfg = EvalConfig()
    for _ in range(60):
        dets, gts = rand_instance(rng)
        got = report_to_dict(evaluate(dets, gts, cfg))
        want = oracle_report(dets, gts, cfg.iou_thresholds, 100, cfg.size_filter)
        assert set(got) == set(want)
        for key, expected in want.items():
            if expected is None:
                assert got[key] is None, key
            else:
                assert got[key] == pytest.approx(expected, abs=1e-9), key


def test_detection_matched_to_filtered_gt_is_neither_tp_nor_fp():
    # a detection that lands on a small (filtered-out) ground truth must not
    # count against precision
    gts = [gt(1, "round", 0, 0, 20, 20), gt(1, "round", 100, 100, 50, 50)]
    dets = [
        det(1, "round", 0, 0, 20, 20, 0.95),      # hits the small, ignored GT
        det(1, "round", 100, 100, 50, 50, 0.90),  # hits the medium GT
    ]
    assert average_precision(dets, gts, 0.5) == 1.0
    tp, fp, fn = counts_at(dets, gts, 0.5, EvalConfig())
    assert (tp, fp, fn) == (1, 0, 0)


def test_unmatched_small_detection_is_excluded():
    gts = [gt(1, "round", 100, 100, 50, 50)]
    dets = [
        det(1, "round", 0, 0, 10, 10, 0.99),      # small and unmatched: excluded
        det(1, "round", 100, 100, 50, 50, 0.90),
    ]
    assert average_precision(dets, gts, 0.5) == 1.0
    # with the filter widened the small detection becomes a real FP
    cfg = EvalConfig(size_filter=ALL_SIZES)
    tp, fp, fn = counts_at(dets, gts, 0.5, cfg)
    assert (tp, fp, fn) == (1, 1, 0)


def test_counts_tp_plus_fn_equals_active_gts():
    rng = random.Random(109)
    for _ in range(60):
        dets, gts = rand_instance(rng)
        for filt in (ALL_SIZES, frozenset({"medium", "large"})):
            cfg = EvalConfig(size_filter=filt)
            tp, fp, fn = counts_at(dets, gts, 0.5, cfg)
            n_active = sum(1 for g in gts if size_bucket(g.bbox) in filt)
            assert tp + fn == n_active
            _, _, oracle_fn = oracle_counts(dets, gts, 0.5, 100, filt)
            assert fn == oracle_fn


def test_recall_matches_oracle():
    rng = random.Random(113)
    cfg = EvalConfig()
    for _ in range(60):
        dets, gts = rand_instance(rng)
        got = recall_at(dets, gts, 0.5, cfg)
        want = oracle_recall(dets, gts, 0.5, 100, cfg.size_filter)
        assert got == want or got == pytest.approx(want, abs=1e-12)


# --- fusion -------------------------------------------------------------------------

def test_fuse_idempotent():
    rng = random.Random(127)
    dets, _ = rand_instance(rng)
    assert sorted(fuse(dets, dets), key=str) == sorted(dets, key=str)


def test_fuse_with_empty():
    rng = random.Random(131)
    dets, _ = rand_instance(rng)
    assert sorted(fuse(dets, []), key=str) == sorted(dets, key=str)
    assert fuse([], []) == []


def test_fuse_commutative_up_to_order():
    rng = random.Random(137)
    a, _ = rand_instance(rng)
    b, _ = rand_instance(rng)
    assert sorted(fuse(a, b), key=str) == sorted(fuse(b, a), key=str)


def test_fuse_complementary_detectors():
    # detector A sees only the first camera, B only the second; fusion
    # recovers both
    gts = [gt(1, "round", 0, 0, 40, 40), gt(1, "round", 100, 0, 40, 40)]
    a = [det(1, "round", 0, 0, 40, 40, 0.95)]
    b = [det(1, "round", 100, 0, 40, 40, 0.88)]
    fused = fuse(a, b)
    assert len(fused) == 2
    r = match_greedy(fused, gts, 0.5)
    assert (r.tp, r.fp, r.fn) == (2, 0, 0)


def test_fuse_drops_cross_source_duplicates():
    a = [det(1, "round", 0, 0, 40, 40, 0.95)]
    b = [det(1, "round", 1, 1, 40, 40, 0.90)]  # same object, lower score
    fused = fuse(a, b)
    assert fused == a


# --- file formats ----------------------------------------------------------------------

GT_DOC = {
    "images": [{"id": 1}, {"id": 2}],
    "annotations": [
        {"image_id": 1, "category_id": 1, "bbox": [0, 0, 40, 40]},
        {"image_id": 2, "category_id": 2, "bbox": [10, 10, 50, 50]},
    ],
    "categories": [{"id": 1, "name": "directed"}, {"id": 2, "name": "round"}],
}

DET_DOC = [
    {"image_id": 1, "category_id": 1, "bbox": [0, 0, 40, 40], "score": 0.9},
    {"image_id": 2, "category_id": 2, "bbox": [10, 10, 50, 50], "score": 0.8},
]


def test_load_coco_ground_truth():
    boxes = load_coco_ground_truth(json.dumps(GT_DOC))
    assert len(boxes) == 2
    assert boxes[0].category == "directed"
    assert boxes[1].bbox == BBox(10, 10, 50, 50)


def test_load_coco_detections():
    dets = load_coco_detections(json.dumps(DET_DOC))
    assert len(dets) == 2
    assert dets[0].score == 0.9


def test_coco_schema_errors():
    with pytest.raises(SchemaError, match="category_id"):
        load_coco_ground_truth(json.dumps({
            "annotations": [{"image_id": 1, "category_id": 9, "bbox": [0, 0, 1, 1]}]
        }))
    with pytest.raises(SchemaError, match="score"):
        load_coco_detections(json.dumps([{"image_id": 1, "category_id": 1, "bbox": [0, 0, 1, 1]}]))
    with pytest.raises(SchemaError, match="JSON"):
        load_coco_detections("not json")


def test_report_text_shows_absent():
    report = evaluate([], [gt(1, "round", 0, 0, 40, 40)])
    text = report_to_text(report)
    assert "ap50 0.0000" in text
    assert "ap50_directed absent" in text  # no directed ground truth
    assert "tp 0" in text
