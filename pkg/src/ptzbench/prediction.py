"""Short-horizon prediction of target motion on the sphere.

The camera controller aims where the target WILL be once the pending
processing and slewing delays have elapsed, not where it was last seen.
Three models of increasing order are provided:

  model 1: constant velocity, latest finite difference
  model 2: constant velocity, average of the last two finite differences
  model 3: constant acceleration from the change between those differences

Kinematics are per-axis in (pan, tilt) angle space, with pan differences
taken the shortest way around the +-180 deg seam. History is frozen while
the tracker reports the target absent, so a reacquired target continues
from the last confident positions.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InsufficientHistory
from .geometry import SphericalPoint, wrap_pan

HISTORY_CAPACITY = 3
MODELS = (1, 2, 3)
_MIN_ORDER = {1: 1, 2: 2, 3: 2}

Displacement = tuple[float, float]


@dataclass(frozen=True)
class Observation:
    timestamp: float
    point: SphericalPoint


class TrackHistory:
    """Sliding window of the last confident target positions (capacity 3)."""

    def __init__(self):
        self._obs: list[Observation] = []

    def __len__(self) -> int:
        return len(self._obs)

    @property
    def samples(self) -> tuple[Observation, ...]:
        return tuple(self._obs)

    @property
    def last(self) -> Observation:
        if not self._obs:
            raise InsufficientHistory("no observations recorded")
        return self._obs[-1]

    def push(self, timestamp: float, point: SphericalPoint) -> None:
        if self._obs and timestamp <= self._obs[-1].timestamp:
            raise ValueError("observations must have increasing timestamps")
        self._obs.append(Observation(timestamp, point))
        if len(self._obs) > HISTORY_CAPACITY:
            del self._obs[0]

    def clear(self) -> None:
        self._obs.clear()


@dataclass(frozen=True)
class MotionEstimate:
    """Finite-difference velocities (deg/s) and acceleration (deg/s^2) per axis.

    valid_order counts the velocities actually backed by samples: 0 means
    nothing is known, 1 means only one pair exists (v1 mirrors v0 so
    consumers can always read "the latest velocity"), 2 means both
    velocities and the acceleration are defined.
    """

    v0: Displacement
    v1: Displacement
    a: Displacement
    valid_order: int


def _finite_difference(a: Observation, b: Observation) -> Displacement:
    dt = b.timestamp - a.timestamp
    return (
        wrap_pan(b.point.pan - a.point.pan) / dt,
        (b.point.tilt - a.point.tilt) / dt,
    )


def estimate_motion(history: TrackHistory) -> MotionEstimate:
    """Velocities from consecutive sample pairs; degrades gracefully when short."""
    obs = history.samples
    zero = (0.0, 0.0)
    if len(obs) < 2:
        return MotionEstimate(zero, zero, zero, valid_order=0)
    v0 = _finite_difference(obs[0], obs[1])
    if len(obs) == 2:
        return MotionEstimate(v0, v0, zero, valid_order=1)
    v1 = _finite_difference(obs[1], obs[2])
    span = obs[1].timestamp - obs[0].timestamp
    a = ((v1[0] - v0[0]) / span, (v1[1] - v0[1]) / span)
    return MotionEstimate(v0, v1, a, valid_order=2)


def predict_displacement(model: int, est: MotionEstimate, dt: float) -> Displacement:
    """Angular displacement (pan, tilt) expected over the next dt seconds."""
    if model not in _MIN_ORDER:
        raise ValueError(f"unknown prediction model {model}")
    if est.valid_order < _MIN_ORDER[model]:
        raise InsufficientHistory(
            f"model {model} needs motion order {_MIN_ORDER[model]}, have {est.valid_order}"
        )
    if model == 1:
        return est.v1[0] * dt, est.v1[1] * dt
    if model == 2:
        return (
            (est.v0[0] + est.v1[0]) / 2.0 * dt,
            (est.v0[1] + est.v1[1]) / 2.0 * dt,
        )
    return (
        est.v1[0] * dt + 0.5 * est.a[0] * dt * dt,
        est.v1[1] * dt + 0.5 * est.a[1] * dt * dt,
    )


def lookahead_interval(last_processing_cost: float, camera_move_time: float) -> float:
    """Horizon the predictor must bridge: frame processing plus camera slew."""
    return last_processing_cost + camera_move_time


def predicted_point(history: TrackHistory, model: int, dt: float, scale: float = 1.0) -> SphericalPoint:
    """Predicted target position dt seconds past the newest observation.

    scale stretches the displacement (1 trusts the model; 0 degenerates to
    the last seen position; negative values deliberately mislead, useful
    for exercising the delay feedback loop).
    """
    dpan, dtilt = predict_displacement(model, estimate_motion(history), dt)
    base = history.last.point
    tilt = max(-90.0, min(90.0, base.tilt + scale * dtilt))
    return SphericalPoint(wrap_pan(base.pan + scale * dpan), tilt)
