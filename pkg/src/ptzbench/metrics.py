"""Per-frame tracking metrics, aggregation, ranking, and CSV row formats.

Four per-frame quantities are recorded for every processed frame:

  tpe  distance between ground-truth and tracker box centers (localization)
  bor  intersection-over-union of the two boxes (overlap)
  tpo  distance between the image center and the ground-truth center
       (camera-control quality)
  tf   target-failure flag: 1 whenever tpe cannot be computed

tpe and bor are invalid (stored as None, serialized as -1) when the
ground-truth center lies outside the rendered view or the tracker reported
the target absent; tpo needs no tracker output and is invalid only in the
out-of-view case. Aggregation averages each metric over its valid frames.

A run is summarized by the pair (BOR, TF) and scored by its Euclidean
distance to the ideal tracker at BOR=1, TF=0: lower scores are better.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import EmptyTrace
from .geometry import BoundingBox, PlanePoint

INVALID = -1.0


def tpe(c_gt: PlanePoint, c_pt: PlanePoint) -> float:
    """Target position error: center-to-center distance in pixels."""
    return math.hypot(c_gt.x - c_pt.x, c_gt.y - c_pt.y)


def bor(a_gt: BoundingBox, a_pt: BoundingBox) -> float:
    """Box overlap ratio: intersection over union of axis-aligned boxes."""
    ix = min(a_gt.x + a_gt.w, a_pt.x + a_pt.w) - max(a_gt.x, a_pt.x)
    iy = min(a_gt.y + a_gt.h, a_pt.y + a_pt.h) - max(a_gt.y, a_pt.y)
    inter = max(0.0, ix) * max(0.0, iy)
    union = a_gt.area + a_pt.area - inter
    if union <= 0.0:
        return 0.0
    return inter / union


def tpo(c_fov: PlanePoint, c_gt: PlanePoint) -> float:
    """Target position offset: how far the camera let the target drift off-center."""
    return math.hypot(c_fov.x - c_gt.x, c_fov.y - c_gt.y)


def score(bor_value: float, tf_value: float) -> float:
    """Distance from (BOR, TF) to the ideal (1, 0); lower is better."""
    return math.hypot(1.0 - bor_value, tf_value)


@dataclass(frozen=True)
class FrameRecord:
    """Metrics for one processed frame, evaluated in its rendering pose."""

    frame_index: int
    tpe: float | None
    bor: float | None
    tpo: float | None
    tf: int
    fov_center: PlanePoint
    gt_center: PlanePoint | None
    pt_center: PlanePoint | None


def evaluate_frame(
    frame_index: int,
    fov_center: PlanePoint,
    gt_box: BoundingBox | None,
    pt_box: BoundingBox | None,
) -> FrameRecord:
    """Build the per-frame record from projected ground truth and tracker output.

    gt_box is the ground-truth box projected into the view the tracker saw
    (None when its center left the view); pt_box is the tracker's box (None
    when it reported the target absent).
    """
    gt_center = gt_box.center if gt_box is not None else None
    pt_center = pt_box.center if pt_box is not None else None
    if gt_center is None or pt_center is None:
        tpe_value = None
        bor_value = None
    else:
        tpe_value = tpe(gt_center, pt_center)
        bor_value = bor(gt_box, pt_box)
    tpo_value = tpo(fov_center, gt_center) if gt_center is not None else None
    return FrameRecord(
        frame_index=frame_index,
        tpe=tpe_value,
        bor=bor_value,
        tpo=tpo_value,
        tf=1 if tpe_value is None else 0,
        fov_center=fov_center,
        gt_center=gt_center,
        pt_center=pt_center,
    )


@dataclass(frozen=True)
class SequenceResult:
    """Aggregated metrics for one (tracker, sequence) run.

    tpe/tpo/bor are means over their valid frames and None when no frame
    was valid; tf is the failure-flag rate over processed frames; pr the
    processed-to-total frame ratio. score always exists (a run with no
    valid overlap scores as if BOR were 0).
    """

    tpe: float | None
    tpo: float | None
    bor: float | None
    tf: float
    pr: float
    score: float
    processed: int
    total: int


def _mean(values: list[float]) -> float | None:
    return sum(values) / len(values) if values else None


def aggregate(records: list[FrameRecord], total_frames: int) -> SequenceResult:
    """Collapse per-frame records into a SequenceResult."""
    if not records:
        raise EmptyTrace("no processed frames to aggregate")
    if total_frames < len(records):
        raise ValueError("total_frames below the processed count")
    mean_tpe = _mean([r.tpe for r in records if r.tpe is not None])
    mean_tpo = _mean([r.tpo for r in records if r.tpo is not None])
    mean_bor = _mean([r.bor for r in records if r.bor is not None])
    tf_rate = sum(r.tf for r in records) / len(records)
    pr = len(records) / total_frames
    return SequenceResult(
        tpe=mean_tpe,
        tpo=mean_tpo,
        bor=mean_bor,
        tf=tf_rate,
        pr=pr,
        score=score(mean_bor if mean_bor is not None else 0.0, tf_rate),
        processed=len(records),
        total=total_frames,
    )


def dataset_summary(results: list[SequenceResult]) -> SequenceResult:
    """Unweighted sequence-mean summary of several runs of one tracker."""
    if not results:
        raise EmptyTrace("no sequence results to summarize")
    mean_tpe = _mean([r.tpe for r in results if r.tpe is not None])
    mean_tpo = _mean([r.tpo for r in results if r.tpo is not None])
    mean_bor = _mean([r.bor for r in results if r.bor is not None])
    tf_rate = sum(r.tf for r in results) / len(results)
    pr = sum(r.pr for r in results) / len(results)
    return SequenceResult(
        tpe=mean_tpe,
        tpo=mean_tpo,
        bor=mean_bor,
        tf=tf_rate,
        pr=pr,
        score=score(mean_bor if mean_bor is not None else 0.0, tf_rate),
        processed=sum(r.processed for r in results),
        total=sum(r.total for r in results),
    )


def rank(results: list[tuple[str, SequenceResult]]) -> list[tuple[str, SequenceResult]]:
    """Ascending by score; ties broken by lower tf, then name."""
    return sorted(results, key=lambda item: (item[1].score, item[1].tf, item[0]))


def scatter_points(results: list[tuple[str, SequenceResult]]) -> list[tuple[str, float, float]]:
    """(name, BOR, TF) per tracker, order-preserving; degenerate BOR plots at 0."""
    return [(name, r.bor if r.bor is not None else 0.0, r.tf) for name, r in results]


RESULT_HEADER = "tracker,sequence,TPE,TPO,BOR,TF,PR,Score,processed,total"
SCATTER_HEADER = "tracker,BOR,TF"


def _csv_float(value: float | None) -> str:
    # repr keeps the shortest round-trip form, so reruns are byte-identical
    return repr(float(INVALID if value is None else value))


def result_row(tracker: str, sequence: str, r: SequenceResult) -> str:
    fields = [
        tracker,
        sequence,
        _csv_float(r.tpe),
        _csv_float(r.tpo),
        _csv_float(r.bor),
        _csv_float(r.tf),
        _csv_float(r.pr),
        _csv_float(r.score),
        str(r.processed),
        str(r.total),
    ]
    return ",".join(fields)


def parse_result_row(line: str) -> tuple[str, str, SequenceResult]:
    parts = line.split(",")
    if len(parts) != 10:
        raise ValueError(f"expected 10 CSV fields, got {len(parts)}")
    tracker, sequence = parts[0], parts[1]
    tpe_v, tpo_v, bor_v, tf_v, pr_v, score_v = (float(v) for v in parts[2:8])
    return (
        tracker,
        sequence,
        SequenceResult(
            tpe=None if tpe_v == INVALID else tpe_v,
            tpo=None if tpo_v == INVALID else tpo_v,
            bor=None if bor_v == INVALID else bor_v,
            tf=tf_v,
            pr=pr_v,
            score=score_v,
            processed=int(parts[8]),
            total=int(parts[9]),
        ),
    )


def scatter_row(name: str, bor_value: float, tf_value: float) -> str:
    return f"{name},{_csv_float(bor_value)},{_csv_float(tf_value)}"
