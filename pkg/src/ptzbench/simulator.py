"""Online simulation loop: delays, frame dropping, and camera control.

The simulated camera looks at an equirectangular video through a pinhole
view. Processing a frame costs time (execution delay, scaled by the
execution ratio), telling the camera to move costs time (communication
delay), and the move itself costs time (motion delay, angular distance
over the camera speed). While that time passes, the video keeps playing:
the next frame the tracker sees is the first one captured strictly after
the camera becomes free, and everything in between is dropped.

Sequence of events per processed frame: render the current view, run the
tracker on it, score the output against ground truth projected into that
same view, steer the camera from the output (optionally via a motion
prediction bridging the processing-plus-slew horizon), then advance the
clock past all charged delays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .dataset import Sequence, ground_truth_in_view
from .errors import InsufficientHistory
from .geometry import (
    CameraPose,
    Frame,
    SphericalPoint,
    angular_distance,
    backproject_image_to_sphere,
    render_view,
    wrap_pan,
)
from .metrics import FrameRecord, SequenceResult, aggregate, evaluate_frame
from .prediction import (
    TrackHistory,
    estimate_motion,
    lookahead_interval,
    predict_displacement,
)
from .trackers import Tracker, TrackerOutput

_TIME_EPS = 1e-9


@dataclass(frozen=True)
class SimConfig:
    """Knobs of one simulated run.

    execution_ratio scales tracker processing cost (0 isolates robustness
    from speed, 1 models real-time operation); fps overrides the sequence
    frame rate when set; prediction_model picks the motion model (None
    disables prediction) and prediction_scale stretches its displacement
    (negative values deliberately mislead the camera, useful for studying
    the delay feedback loop).
    """

    execution_ratio: float = 1.0
    camera_speed: float = 60.0
    communication_delay: float = 0.0
    fps: float | None = None
    prediction_model: int | None = None
    prediction_scale: float = 1.0
    hfov: float = 60.0
    width: int = 800
    height: int = 600

    def __post_init__(self):
        if self.execution_ratio < 0:
            raise ValueError("execution_ratio must be >= 0")
        if self.camera_speed <= 0:
            raise ValueError("camera_speed must be positive")
        if self.communication_delay < 0:
            raise ValueError("communication_delay must be >= 0")
        if self.fps is not None and self.fps <= 0:
            raise ValueError("fps override must be positive")
        if self.prediction_model not in (None, 1, 2, 3):
            raise ValueError("prediction_model must be None, 1, 2 or 3")
        if not (0.0 < self.hfov < 180.0):
            raise ValueError("hfov must lie in (0, 180)")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("image dimensions must be positive")

    def to_dict(self) -> dict:
        return {
            "execution_ratio": self.execution_ratio,
            "camera_speed": self.camera_speed,
            "communication_delay": self.communication_delay,
            "fps": self.fps,
            "prediction_model": self.prediction_model,
            "prediction_scale": self.prediction_scale,
            "hfov": self.hfov,
            "width": self.width,
            "height": self.height,
        }

    @staticmethod
    def from_dict(data: dict) -> "SimConfig":
        return SimConfig(**data)


@dataclass
class DelayLedger:
    """Cumulative charged delays, by category, over one run."""

    execution_delay: float = 0.0
    motion_delay: float = 0.0
    communication_delay: float = 0.0

    @property
    def total(self) -> float:
        return self.execution_delay + self.motion_delay + self.communication_delay


@dataclass
class SimTrace:
    """Everything one run produced: per-frame records plus delay accounting."""

    records: list[FrameRecord] = field(default_factory=list)
    total_frames: int = 0
    delays: DelayLedger = field(default_factory=DelayLedger)
    poses: list[CameraPose] = field(default_factory=list)

    @property
    def processed_frames(self) -> int:
        return len(self.records)

    def result(self) -> SequenceResult:
        return aggregate(self.records, self.total_frames)


def motion_delay(from_pose: CameraPose, to_pose: CameraPose, speed: float) -> float:
    """Seconds the camera spends slewing between two aims at a given speed."""
    if speed <= 0:
        raise ValueError("camera speed must be positive")
    return angular_distance(from_pose.aim, to_pose.aim) / speed


def next_processed_frame(current_time: float, busy_until: float, fps: float, total_frames: int) -> int | None:
    """First frame captured strictly after the camera becomes free.

    Frames exist at fixed timestamps index/fps; everything between the
    current frame and the returned one is dropped. None past the end.
    """
    if busy_until < current_time:
        raise ValueError("busy_until precedes the current time")
    index = math.floor(busy_until * fps + _TIME_EPS) + 1
    if index >= total_frames:
        return None
    return index


def camera_controller(
    output: TrackerOutput,
    pose: CameraPose,
    prediction: tuple[float, float] | None = None,
) -> CameraPose:
    """Aim the camera at the tracker's target, offset by any predicted motion.

    An absent output holds the current pose: moving blind is worse than
    waiting for reacquisition. Zoom is left untouched.
    """
    if output.box is None:
        return pose
    target = backproject_image_to_sphere(output.box.center, pose)
    if prediction is not None:
        dpan, dtilt = prediction
        target = SphericalPoint(
            wrap_pan(target.pan + dpan),
            max(-90.0, min(90.0, target.tilt + dtilt)),
        )
    return CameraPose(aim=target, hfov=pose.hfov, width=pose.width, height=pose.height)


def run_simulation(seq: Sequence, tracker: Tracker, cfg: SimConfig) -> SimTrace:
    """Run one tracker over one sequence under one configuration.

    The tracker is initialized with ground truth projected into the initial
    pose (aimed exactly at the frame-0 target center) and then updated on
    every processed frame, including frame 0. Metrics are evaluated in the
    pose each frame was rendered at. With declared-cost trackers the whole
    run is deterministic.
    """
    fps = cfg.fps if cfg.fps is not None else seq.fps
    total = len(seq)
    first_entry = seq.initial_box

    pose = CameraPose(aim=first_entry.center, hfov=cfg.hfov, width=cfg.width, height=cfg.height)
    init_view = _capture(seq, 0, fps, pose)
    init_box = ground_truth_in_view(first_entry, pose)
    state = tracker.init(init_view, init_box)

    history = TrackHistory()
    history.push(0.0, first_entry.center)

    trace = SimTrace(total_frames=total)
    index: int | None = 0
    while index is not None:
        t = index / fps
        view = _capture(seq, index, fps, pose)
        output = tracker.update(state, view)

        execution = output.processing_cost * cfg.execution_ratio
        trace.delays.execution_delay += execution
        trace.delays.communication_delay += cfg.communication_delay

        entry = seq.ground_truth.get(index)
        gt_box = ground_truth_in_view(entry, pose) if entry is not None and entry.present else None
        trace.records.append(evaluate_frame(index, pose.center, gt_box, output.box))
        trace.poses.append(pose)

        if output.box is not None and index > 0:
            history.push(t, backproject_image_to_sphere(output.box.center, pose))

        new_pose = _steer(output, pose, history, cfg, execution)
        slew = motion_delay(pose, new_pose, cfg.camera_speed)
        trace.delays.motion_delay += slew
        pose = new_pose

        busy_until = t + execution + cfg.communication_delay + slew
        index = next_processed_frame(t, busy_until, fps, total)
    return trace


def _capture(seq: Sequence, index: int, fps: float, pose: CameraPose) -> Frame:
    panorama = seq.frame(index)
    view = render_view(Frame(timestamp=index / fps, pixels=panorama.pixels), pose)
    view.index = index
    return view


def _steer(
    output: TrackerOutput,
    pose: CameraPose,
    history: TrackHistory,
    cfg: SimConfig,
    charged_processing: float,
) -> CameraPose:
    """Pick the next pose, folding in prediction over the pending delays.

    The prediction horizon is the processing charge already incurred plus
    the slew the camera would need without prediction; the estimate comes
    from tracker-reported positions only.
    """
    if output.box is None:
        return pose
    if cfg.prediction_model is None:
        return camera_controller(output, pose)
    estimate = estimate_motion(history)
    provisional = camera_controller(output, pose)
    horizon = lookahead_interval(
        charged_processing + cfg.communication_delay,
        motion_delay(pose, provisional, cfg.camera_speed),
    )
    try:
        dpan, dtilt = predict_displacement(cfg.prediction_model, estimate, horizon)
    except InsufficientHistory:
        return provisional
    displacement = (dpan * cfg.prediction_scale, dtilt * cfg.prediction_scale)
    return camera_controller(output, pose, displacement)
