"""Per-frame metrics, aggregation, ranking, and CSV round-trips."""

import math

import numpy as np
import pytest

from ptzbench.errors import EmptyTrace
from ptzbench.geometry import BoundingBox, PlanePoint
from ptzbench.metrics import (
    INVALID,
    RESULT_HEADER,
    SCATTER_HEADER,
    FrameRecord,
    SequenceResult,
    aggregate,
    bor,
    dataset_summary,
    evaluate_frame,
    parse_result_row,
    rank,
    result_row,
    scatter_points,
    scatter_row,
    score,
    tpe,
    tpo,
)


CENTER = PlanePoint(160.0, 120.0)


def result_of(score_value, tf=0.0, bor_value=0.5, pr=1.0):
    return SequenceResult(tpe=None, tpo=None, bor=bor_value, tf=tf, pr=pr,
                          score=score_value, processed=10, total=10)


def test_tpe_is_euclidean_center_distance():
    assert tpe(PlanePoint(100, 100), PlanePoint(103, 104)) == pytest.approx(5.0)
    assert tpe(PlanePoint(0, 0), PlanePoint(0, 7)) == pytest.approx(7.0)


def test_tpo_is_euclidean_distance_to_view_center():
    assert tpo(PlanePoint(400, 300), PlanePoint(430, 340)) == pytest.approx(50.0)
    assert tpo(PlanePoint(0, 0), PlanePoint(0, 12)) == pytest.approx(12.0)


def test_bor_examples():
    a = BoundingBox(0, 0, 10, 10)
    assert bor(a, BoundingBox(0, 0, 10, 10)) == pytest.approx(1.0)
    assert bor(a, BoundingBox(20, 20, 5, 5)) == 0.0
    assert bor(a, BoundingBox(5, 0, 10, 10)) == pytest.approx(1.0 / 3.0)
    assert bor(BoundingBox(0, 0, 0, 0), BoundingBox(0, 0, 0, 0)) == 0.0


def test_bor_matches_rasterized_intersection_over_union():
    rng = np.random.default_rng(17)
    for _ in range(1000):
        x1, y1, x2, y2 = rng.integers(-20, 21, size=4)
        w1, h1, w2, h2 = rng.integers(1, 31, size=4)
        a = BoundingBox(float(x1), float(y1), float(w1), float(h1))
        b = BoundingBox(float(x2), float(y2), float(w2), float(h2))
        grid = np.zeros((120, 120), dtype=np.int8)
        ga = grid.copy()
        ga[y1 + 40:y1 + 40 + h1, x1 + 40:x1 + 40 + w1] = 1
        gb = grid.copy()
        gb[y2 + 40:y2 + 40 + h2, x2 + 40:x2 + 40 + w2] = 1
        inter = int(np.logical_and(ga, gb).sum())
        union = int(np.logical_or(ga, gb).sum())
        assert abs(bor(a, b) - inter / union) <= 1.0 / union


def test_score_examples():
    assert score(0.42, 0.30) == pytest.approx(math.hypot(0.58, 0.30))
    assert round(score(0.42, 0.30), 2) == 0.65
    assert score(1.0, 0.0) == 0.0
    assert round(score(0.04, 0.74), 2) == 1.21
    assert score(0.0, 1.0) == pytest.approx(math.sqrt(2.0))


def test_score_is_strictly_monotone_in_both_arguments():
    rng = np.random.default_rng(3)
    for _ in range(200):
        b, t = rng.uniform(0.0, 1.0, size=2)
        db, dt = rng.uniform(1e-6, 0.2, size=2)
        assert score(min(b + db, 1.0), t) <= score(b, t)
        assert score(b, t + dt) > score(b, t)
        if b + db <= 1.0:
            assert score(b + db, t) < score(b, t)


def test_evaluate_frame_with_both_boxes_is_fully_valid():
    gt = BoundingBox(150, 110, 20, 20)
    pt = BoundingBox(153, 114, 20, 20)
    rec = evaluate_frame(7, CENTER, gt, pt)
    assert rec.frame_index == 7
    assert rec.tpe == pytest.approx(5.0)
    assert rec.bor == pytest.approx(bor(gt, pt))
    assert rec.tpo == pytest.approx(tpo(CENTER, gt.center))
    assert rec.tf == 0


def test_evaluate_frame_without_tracker_box_fails_but_keeps_tpo():
    gt = BoundingBox(150, 110, 20, 20)
    rec = evaluate_frame(0, CENTER, gt, None)
    assert rec.tpe is None
    assert rec.bor is None
    assert rec.tpo is not None
    assert rec.tf == 1


def test_evaluate_frame_without_ground_truth_is_fully_invalid():
    rec = evaluate_frame(0, CENTER, None, BoundingBox(0, 0, 5, 5))
    assert rec.tpe is None and rec.bor is None and rec.tpo is None
    assert rec.tf == 1
    rec2 = evaluate_frame(0, CENTER, None, None)
    assert rec2.tf == 1


def make_record(i, bor_value, tf):
    return FrameRecord(i, 2.0 if bor_value is not None else None, bor_value,
                       3.0, tf, CENTER, CENTER, CENTER if bor_value is not None else None)


def test_aggregate_averages_valid_frames_only():
    records = [make_record(0, 1.0, 0), make_record(1, 0.5, 0), make_record(2, None, 1)]
    result = aggregate(records, total_frames=4)
    assert result.bor == pytest.approx(0.75)
    assert result.tf == pytest.approx(1.0 / 3.0)
    assert result.pr == pytest.approx(0.75)
    assert result.processed == 3
    assert result.total == 4
    assert result.score == pytest.approx(score(0.75, 1.0 / 3.0))


def test_aggregate_with_no_valid_overlap_scores_as_zero_overlap():
    records = [make_record(0, None, 1), make_record(1, None, 1)]
    result = aggregate(records, total_frames=2)
    assert result.bor is None
    assert result.score == pytest.approx(math.sqrt(2.0))


def test_aggregate_rejects_empty_or_inconsistent_input():
    with pytest.raises(EmptyTrace):
        aggregate([], total_frames=5)
    with pytest.raises(ValueError):
        aggregate([make_record(0, 1.0, 0)], total_frames=0)


def test_dataset_summary_averages_sequences_and_sums_frames():
    r1 = aggregate([make_record(0, 1.0, 0)], total_frames=2)
    r2 = aggregate([make_record(0, 0.5, 0), make_record(1, 0.7, 1)], total_frames=2)
    summary = dataset_summary([r1, r2])
    assert summary.bor == pytest.approx((1.0 + 0.6) / 2.0)
    assert summary.processed == 3
    assert summary.total == 4


def test_rank_sorts_by_score_then_failure_rate_then_name():
    rows = [
        ("c", result_of(0.9, tf=0.4)),
        ("a", result_of(0.5, tf=0.2)),
        ("b", result_of(0.5, tf=0.1)),
        ("d", result_of(0.9, tf=0.4)),
    ]
    assert [name for name, _ in rank(rows)] == ["b", "a", "c", "d"]


def test_scatter_points_preserve_rank_order_and_fill_missing_overlap():
    ranked = [("a", result_of(0.5, tf=0.2, bor_value=0.8)), ("b", result_of(0.9, tf=0.4, bor_value=None))]
    pts = scatter_points(ranked)
    assert pts == [("a", 0.8, 0.2), ("b", 0.0, 0.4)]
    assert scatter_points([]) == []


def test_result_rows_round_trip_through_csv():
    full = SequenceResult(tpe=1.25, tpo=2.5, bor=0.75, tf=0.1, pr=0.9, score=0.27,
                          processed=9, total=10)
    row = result_row("ncc", "seq1", full)
    name, seq_name, parsed = parse_result_row(row)
    assert (name, seq_name) == ("ncc", "seq1")
    assert parsed == full

    sparse = SequenceResult(tpe=None, tpo=None, bor=None, tf=1.0, pr=0.5, score=math.sqrt(2.0),
                            processed=5, total=10)
    row2 = result_row("x", "s", sparse)
    assert f",{INVALID!r}," in row2
    _, _, parsed2 = parse_result_row(row2)
    assert parsed2.tpe is None and parsed2.bor is None


def test_headers_name_every_column():
    assert RESULT_HEADER.split(",") == ["tracker", "sequence", "TPE", "TPO", "BOR", "TF", "PR", "Score", "processed", "total"]
    assert SCATTER_HEADER.split(",") == ["tracker", "BOR", "TF"]
    assert scatter_row("a", 0.5, 0.25).startswith("a,")
