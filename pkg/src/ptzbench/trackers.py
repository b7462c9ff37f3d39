"""Tracker contract plus reference trackers.

Three self-contained trackers cover the main classical families:

  ncc        fixed grayscale template, normalized cross-correlation
  meanshift  color-histogram mean-shift with three-candidate scale adaptation
  mosse      adaptive frequency-domain correlation filter

plus two harness-validation trackers: `oracle` (replays projected ground
truth) and `stationary` (never moves).

A tracker object is stateless configuration; all per-run mutable state
lives in the TrackerState returned by init, so one tracker instance can
serve concurrent runs. Failure is reported as an Absent output (box None),
never as a garbage box.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace

import numpy as np

from .dataset import Sequence, ground_truth_in_view
from .errors import DegenerateBox
from .geometry import BoundingBox, Frame

ABSENT_CONFIDENCE = 0.1
_EPS = 1e-5


@dataclass(frozen=True)
class TrackerOutput:
    """One update result. box is None when the tracker reports failure."""

    box: BoundingBox | None
    confidence: float | None
    processing_cost: float

    @property
    def absent(self) -> bool:
        return self.box is None


@dataclass(frozen=True)
class TrackerDescriptor:
    """Identity and cost-accounting mode.

    declared mode charges a fixed cost per frame (deterministic runs);
    measured mode charges actual CPU time spent inside update.
    """

    name: str
    timing_mode: str = "measured"
    declared_cost: float = 0.0

    def __post_init__(self):
        if self.timing_mode not in ("measured", "declared"):
            raise ValueError(f"unknown timing mode {self.timing_mode!r}")
        if self.declared_cost < 0 or not math.isfinite(self.declared_cost):
            raise ValueError("declared cost must be finite and >= 0")


class Tracker:
    """init/update contract; subclasses implement _begin and _track."""

    def __init__(self, descriptor: TrackerDescriptor):
        self.descriptor = descriptor

    def init(self, frame: Frame, box: BoundingBox):
        if box.area == 0:
            raise DegenerateBox(f"init box {box} has zero area")
        if box.x + box.w <= 0 or box.y + box.h <= 0 or box.x >= frame.width or box.y >= frame.height:
            raise DegenerateBox(f"init box {box} lies outside a {frame.width}x{frame.height} frame")
        return self._begin(frame, box)

    def update(self, state, frame: Frame) -> TrackerOutput:
        if self.descriptor.timing_mode == "declared":
            box, confidence = self._track(state, frame)
            cost = self.descriptor.declared_cost
        else:
            t0 = time.thread_time()
            box, confidence = self._track(state, frame)
            cost = max(time.thread_time() - t0, 1e-9)
        if box is not None and confidence is not None and confidence < ABSENT_CONFIDENCE:
            box = None
        return TrackerOutput(box=box, confidence=confidence, processing_cost=cost)

    def _begin(self, frame: Frame, box: BoundingBox):
        raise NotImplementedError

    def _track(self, state, frame: Frame) -> tuple[BoundingBox | None, float | None]:
        raise NotImplementedError


def to_gray(pixels: np.ndarray) -> np.ndarray:
    """Luma conversion (0.299 R + 0.587 G + 0.114 B), float64."""
    px = pixels.astype(np.float64)
    return 0.299 * px[..., 0] + 0.587 * px[..., 1] + 0.114 * px[..., 2]


def crop_wrap(img: np.ndarray, x0: int, y0: int, w: int, h: int) -> np.ndarray:
    """Integer crop with toroidal wrap, so windows near borders stay full-size."""
    rows = np.arange(y0, y0 + h) % img.shape[0]
    cols = np.arange(x0, x0 + w) % img.shape[1]
    return img[np.ix_(rows, cols)]


def _int_rect(box: BoundingBox) -> tuple[int, int, int, int]:
    w = max(1, int(round(box.w)))
    h = max(1, int(round(box.h)))
    return int(round(box.x)), int(round(box.y)), w, h


# ---------------------------------------------------------------- ncc


@dataclass
class _NccState:
    template: np.ndarray
    box: BoundingBox
    degenerate: bool


class NccTracker(Tracker):
    """Fixed-template matcher: the init patch is never re-learned.

    Each update scans a search window of twice the box size centered on the
    last position and reports the normalized-cross-correlation argmax; the
    peak value doubles as confidence.
    """

    def _begin(self, frame: Frame, box: BoundingBox) -> _NccState:
        x0, y0, w, h = _int_rect(box)
        template = crop_wrap(to_gray(frame.pixels), x0, y0, w, h)
        return _NccState(template=template, box=box, degenerate=float(template.std()) == 0.0)

    def _track(self, state: _NccState, frame: Frame) -> tuple[BoundingBox | None, float | None]:
        if state.degenerate:
            return None, 0.0
        gray = to_gray(frame.pixels)
        th, tw = state.template.shape
        cx, cy = state.box.center.x, state.box.center.y
        sx = int(round(cx - tw))
        sy = int(round(cy - th))
        search = crop_wrap(gray, sx, sy, 2 * tw, 2 * th)

        score = _ncc_map(search, state.template)
        if score is None:
            return None, 0.0
        peak = float(score.max())
        iy, ix = np.unravel_index(int(score.argmax()), score.shape)
        confidence = min(max(peak, 0.0), 1.0)
        if confidence < ABSENT_CONFIDENCE:
            return None, confidence
        state.box = BoundingBox(sx + ix, sy + iy, state.box.w, state.box.h)
        return state.box, confidence


def _ncc_map(search: np.ndarray, template: np.ndarray) -> np.ndarray | None:
    """Zero-mean normalized cross-correlation of template over search, all offsets."""
    th, tw = template.shape
    if search.shape[0] < th or search.shape[1] < tw:
        return None
    t = template - template.mean()
    tnorm = np.linalg.norm(t)
    if tnorm == 0.0:
        return None
    windows = np.lib.stride_tricks.sliding_window_view(search, (th, tw))
    flat = windows.reshape(windows.shape[0], windows.shape[1], -1)
    means = flat.mean(axis=2, keepdims=True)
    centered = flat - means
    norms = np.linalg.norm(centered, axis=2)
    num = centered @ t.ravel()
    with np.errstate(invalid="ignore", divide="ignore"):
        score = num / (norms * tnorm)
    return np.nan_to_num(score, nan=0.0)


# ---------------------------------------------------------------- meanshift

_BINS = 16
_SHIFT_TOL = 0.5
_MAX_ITER = 20
_SCALES = (1.0, 0.95, 1.05)
_SCALE_MARGIN = 1e-5


@dataclass
class _MeanShiftState:
    model: np.ndarray
    box: BoundingBox


class MeanShiftTracker(Tracker):
    """Color-histogram mean-shift with Bhattacharyya-weighted scale choice.

    The target model is a kernel-weighted 16x16x16 RGB histogram. Updates
    run mean-shift to convergence at three candidate scales (0.95, 1, 1.05
    of the current size) and keep the most similar; similarity is also the
    reported confidence.
    """

    def _begin(self, frame: Frame, box: BoundingBox) -> _MeanShiftState:
        model = _kernel_histogram(frame.pixels, box)
        return _MeanShiftState(model=model, box=box)

    def _track(self, state: _MeanShiftState, frame: Frame) -> tuple[BoundingBox | None, float | None]:
        best = None
        for scale in _SCALES:
            w = state.box.w * scale
            h = state.box.h * scale
            result = _mean_shift_converge(frame.pixels, state.model, state.box.center.x, state.box.center.y, w, h)
            if result is None:
                continue
            cx, cy, similarity = result
            if best is None or similarity > best[0] + _SCALE_MARGIN:
                best = (similarity, cx, cy, w, h)
        if best is None:
            return None, 0.0
        similarity, cx, cy, w, h = best
        confidence = min(max(similarity, 0.0), 1.0)
        if confidence < ABSENT_CONFIDENCE:
            return None, confidence
        state.box = BoundingBox(cx - w / 2.0, cy - h / 2.0, w, h)
        return state.box, confidence


def _bin_indices(pixels: np.ndarray) -> np.ndarray:
    q = (pixels >> 4).astype(np.int64)
    return (q[..., 0] * _BINS + q[..., 1]) * _BINS + q[..., 2]


def _window_grid(cx: float, cy: float, w: float, h: float, shape) -> tuple[np.ndarray, np.ndarray] | None:
    """Integer pixel grid covering the window; toroidal like crop_wrap."""
    x0 = int(round(cx - w / 2.0))
    y0 = int(round(cy - h / 2.0))
    nw = max(1, int(round(w)))
    nh = max(1, int(round(h)))
    rows = np.arange(y0, y0 + nh)
    cols = np.arange(x0, x0 + nw)
    return rows, cols


def _kernel_histogram(pixels: np.ndarray, box: BoundingBox) -> np.ndarray:
    rows, cols = _window_grid(box.center.x, box.center.y, box.w, box.h, pixels.shape)
    hist, _ = _histogram_at(pixels, rows, cols, box.center.x, box.center.y, box.w, box.h)
    return hist


def _histogram_at(pixels, rows, cols, cx, cy, w, h):
    """Epanechnikov-weighted histogram over the window plus per-pixel bins."""
    window = pixels[np.ix_(rows % pixels.shape[0], cols % pixels.shape[1])]
    bins = _bin_indices(window)
    yy, xx = np.meshgrid(rows.astype(np.float64), cols.astype(np.float64), indexing="ij")
    rx = (xx - cx) / max(w / 2.0, 1e-9)
    ry = (yy - cy) / max(h / 2.0, 1e-9)
    weight = np.maximum(0.0, 1.0 - (rx * rx + ry * ry))
    hist = np.bincount(bins.ravel(), weights=weight.ravel(), minlength=_BINS**3)
    total = hist.sum()
    if total > 0:
        hist /= total
    return hist, (bins, xx, yy, weight)


def _mean_shift_converge(pixels, model, cx, cy, w, h):
    """Iterate mean-shift at a fixed scale; (cx, cy, similarity) or None."""
    for _ in range(_MAX_ITER):
        rows, cols = _window_grid(cx, cy, w, h, pixels.shape)
        hist, (bins, xx, yy, kernel) = _histogram_at(pixels, rows, cols, cx, cy, w, h)
        ratio = np.where(hist > 0, np.sqrt(model / np.maximum(hist, 1e-12)), 0.0)
        weights = ratio[bins] * (kernel > 0)
        total = float(weights.sum())
        if total <= 0:
            return None
        nx = float((weights * xx).sum() / total)
        ny = float((weights * yy).sum() / total)
        shift = math.hypot(nx - cx, ny - cy)
        cx, cy = nx, ny
        if shift < _SHIFT_TOL:
            break
    rows, cols = _window_grid(cx, cy, w, h, pixels.shape)
    hist, _ = _histogram_at(pixels, rows, cols, cx, cy, w, h)
    similarity = float(np.sqrt(hist * model).sum())
    return cx, cy, similarity


# ---------------------------------------------------------------- mosse

_LEARNING_RATE = 0.125
_PSR_SCALE = 20.0
# Regularizer for the filter division. Preprocessed patches have unit energy,
# so spectral power averages 1.0 per bin and 0.1 damps only the weak bins.
_RESPONSE_EPS = 0.1


@dataclass
class _MosseState:
    numerator: np.ndarray
    denominator: np.ndarray
    response_fft: np.ndarray
    target: tuple[int, int]
    size: tuple[int, int]
    sigma: float
    box: BoundingBox


class MosseTracker(Tracker):
    """Adaptive correlation filter trained toward a Gaussian response.

    The filter is learned in the Fourier domain over a context window twice
    the box size and blended with every frame at a fixed learning rate. The
    peak search is limited to displacements within half a box, mirroring the
    search radius of the other trackers; confidence is the peak-to-sidelobe
    ratio scaled into [0, 1]. No scale adaptation.
    """

    def _begin(self, frame: Frame, box: BoundingBox) -> _MosseState:
        _, _, bw, bh = _int_rect(box)
        h, w = 2 * bh, 2 * bw
        sigma = math.hypot(bw, bh) / 10.0
        response_fft = np.fft.fft2(_gaussian_response(h, w, sigma))
        state = _MosseState(
            numerator=np.zeros((h, w), dtype=complex),
            denominator=np.zeros((h, w), dtype=complex),
            response_fft=response_fft,
            target=(bh, bw),
            size=(h, w),
            sigma=sigma,
            box=box,
        )
        f = self._window_fft(state, to_gray(frame.pixels))
        state.numerator = response_fft * np.conj(f)
        state.denominator = f * np.conj(f)
        return state

    def _window_fft(self, state: _MosseState, gray: np.ndarray) -> np.ndarray:
        h, w = state.size
        x0 = int(round(state.box.center.x - w / 2.0))
        y0 = int(round(state.box.center.y - h / 2.0))
        return np.fft.fft2(_preprocess(crop_wrap(gray, x0, y0, w, h)))

    def _track(self, state: _MosseState, frame: Frame) -> tuple[BoundingBox | None, float | None]:
        h, w = state.size
        bh, bw = state.target
        gray = to_gray(frame.pixels)
        f = self._window_fft(state, gray)
        response = np.real(
            np.fft.ifft2(f * state.numerator / (state.denominator + _RESPONSE_EPS))
        )
        # An unshifted match peaks at (h//2, w//2); admit at most half a box
        # of displacement so wrap artifacts at the window edge cannot win.
        ry, rx = bh // 2, bw // 2
        sub = response[h // 2 - ry : h // 2 + ry + 1, w // 2 - rx : w // 2 + rx + 1]
        si, sj = np.unravel_index(int(sub.argmax()), sub.shape)
        iy, ix = h // 2 - ry + si, w // 2 - rx + sj
        confidence = min(max(_psr(response, iy, ix, state.sigma) / _PSR_SCALE, 0.0), 1.0)
        if confidence >= ABSENT_CONFIDENCE:
            state.box = replace(state.box, x=state.box.x + (ix - w // 2), y=state.box.y + (iy - h // 2))

        f = self._window_fft(state, gray)
        lr = _LEARNING_RATE
        state.numerator = (1 - lr) * state.numerator + lr * state.response_fft * np.conj(f)
        state.denominator = (1 - lr) * state.denominator + lr * (f * np.conj(f))
        return state.box, confidence


def _gaussian_response(h: int, w: int, sigma: float) -> np.ndarray:
    ys = np.arange(h) - h // 2
    xs = np.arange(w) - w // 2
    yy, xx = np.meshgrid(ys, xs, indexing="ij")
    return np.exp(-(xx * xx + yy * yy) / (2.0 * sigma * sigma))


def _preprocess(patch: np.ndarray) -> np.ndarray:
    f = np.log1p(patch)
    f = f - f.mean()
    norm = np.linalg.norm(f)
    # rounding residue on a constant patch must not be inflated to unit energy
    if norm < 1e-8:
        return np.zeros_like(f)
    return f / norm


def _psr(response: np.ndarray, iy: int, ix: int, sigma: float) -> float:
    """Peak-to-sidelobe ratio; the sidelobe excludes two sigma around the peak."""
    peak = float(response[iy, ix])
    mask = np.ones(response.shape, dtype=bool)
    half = max(5, int(round(2.0 * sigma)))
    y0, y1 = max(0, iy - half), min(response.shape[0], iy + half + 1)
    x0, x1 = max(0, ix - half), min(response.shape[1], ix + half + 1)
    mask[y0:y1, x0:x1] = False
    side = response[mask]
    if side.size == 0:
        return 0.0
    std = float(side.std())
    if std == 0.0:
        return 0.0
    return (peak - float(side.mean())) / std


# ---------------------------------------------------------------- harness validation


class _OracleState:
    pass


class OracleTracker(Tracker):
    """Replays ground truth projected into the frame's rendering pose.

    Validates the harness independently of tracking quality; it never sees
    pixels. Requires frames stamped with their pose and index, which the
    simulation loop provides.
    """

    def __init__(self, descriptor: TrackerDescriptor, sequence: Sequence):
        super().__init__(descriptor)
        self._sequence = sequence

    def _begin(self, frame: Frame, box: BoundingBox) -> _OracleState:
        return _OracleState()

    def _track(self, state: _OracleState, frame: Frame) -> tuple[BoundingBox | None, float | None]:
        if frame.pose is None or frame.index is None:
            return None, 0.0
        entry = self._sequence.ground_truth.get(frame.index)
        if entry is None or not entry.present:
            return None, 0.0
        box = ground_truth_in_view(entry, frame.pose)
        if box is None:
            return None, 0.0
        return box, 1.0


@dataclass
class _StationaryState:
    box: BoundingBox


class StationaryTracker(Tracker):
    """Repeats the init box forever; useful for leaving-target scenarios."""

    def _begin(self, frame: Frame, box: BoundingBox) -> _StationaryState:
        return _StationaryState(box=box)

    def _track(self, state: _StationaryState, frame: Frame) -> tuple[BoundingBox | None, float | None]:
        return state.box, 1.0


# ---------------------------------------------------------------- registry


def ncc_tracker(descriptor: TrackerDescriptor | None = None) -> Tracker:
    return NccTracker(descriptor or TrackerDescriptor("ncc"))


def meanshift_tracker(descriptor: TrackerDescriptor | None = None) -> Tracker:
    return MeanShiftTracker(descriptor or TrackerDescriptor("meanshift"))


def mosse_tracker(descriptor: TrackerDescriptor | None = None) -> Tracker:
    return MosseTracker(descriptor or TrackerDescriptor("mosse"))


TRACKER_NAMES = ("ncc", "meanshift", "mosse", "oracle", "stationary")


def create_tracker(
    name: str,
    sequence: Sequence | None = None,
    declared_cost: float | None = None,
) -> Tracker:
    """Build a registered tracker by name.

    declared_cost switches cost accounting from measured CPU time to the
    given constant; `oracle` additionally needs the sequence whose ground
    truth it replays.
    """
    if name not in TRACKER_NAMES:
        raise ValueError(f"unknown tracker {name!r}; choose from {', '.join(TRACKER_NAMES)}")
    if declared_cost is None:
        descriptor = TrackerDescriptor(name)
    else:
        descriptor = TrackerDescriptor(name, timing_mode="declared", declared_cost=declared_cost)
    if name == "ncc":
        return NccTracker(descriptor)
    if name == "meanshift":
        return MeanShiftTracker(descriptor)
    if name == "mosse":
        return MosseTracker(descriptor)
    if name == "stationary":
        return StationaryTracker(descriptor)
    if sequence is None:
        raise ValueError("oracle tracker needs the sequence it will replay")
    return OracleTracker(descriptor, sequence)
