"""Simulated pan-tilt-zoom tracking benchmark over spherical video.

The package simulates a PTZ camera watching an equirectangular video: a
tracker runs on rendered perspective views, its processing time and the
camera's slewing time cost simulated seconds, slow trackers drop frames,
and every processed frame is scored against spherical ground truth.
"""

__version__ = "0.1.0"

from .dataset import (
    GroundTruthEntry,
    Sequence,
    SyntheticSpec,
    generate_synthetic_sequence,
    ground_truth_in_view,
    load_sequence,
    write_sequence,
)
from .errors import (
    DegenerateBox,
    EmptyTrace,
    InsufficientHistory,
    InvalidSpec,
    MalformedLine,
    MalformedPanorama,
    MalformedSequence,
    MissingGroundTruth,
    NonMonotoneIndex,
    PtzBenchError,
)
from .geometry import (
    BoundingBox,
    CameraPose,
    Frame,
    PlanePoint,
    SphericalPoint,
    angular_distance,
    backproject_image_to_sphere,
    project_sphere_to_image,
    render_view,
    wrap_pan,
)
from .metrics import (
    FrameRecord,
    SequenceResult,
    aggregate,
    bor,
    dataset_summary,
    evaluate_frame,
    rank,
    scatter_points,
    score,
    tpe,
    tpo,
)
from .prediction import (
    MotionEstimate,
    TrackHistory,
    estimate_motion,
    lookahead_interval,
    predict_displacement,
    predicted_point,
)
from .simulator import (
    DelayLedger,
    SimConfig,
    SimTrace,
    camera_controller,
    motion_delay,
    next_processed_frame,
    run_simulation,
)
from .trackers import (
    Tracker,
    TrackerDescriptor,
    TrackerOutput,
    create_tracker,
    meanshift_tracker,
    mosse_tracker,
    ncc_tracker,
)

__all__ = [name for name in dir() if not name.startswith("_")]
