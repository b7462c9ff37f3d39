"""Sequence loading, on-disk format, viewpoint projection of ground truth, and synthetic sequences.

Ground truth lives in sphere coordinates (pan/tilt center plus angular box
size) so it can be projected into whatever viewpoint the simulated camera
currently has.

On-disk layout of a sequence directory:

    frames/000000.png ...   equirectangular 2:1 RGB frames
    groundtruth.txt         one line per annotated frame:
                            "frame_index pan_deg tilt_deg width_deg height_deg"
                            (all four geometry fields -1 marks target-absent)
    meta.json               {"fps": <number>, "name": <string>}
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import (
    InvalidSpec,
    MalformedLine,
    MalformedSequence,
    MissingGroundTruth,
    NonMonotoneIndex,
)
from .geometry import (
    BoundingBox,
    CameraPose,
    Frame,
    SphericalPoint,
    project_sphere_to_image,
    _project_unbounded,
    wrap_pan,
)

ABSENT_SENTINEL = -1.0


@dataclass(frozen=True)
class GroundTruthEntry:
    """Annotated target state for one frame; absent entries carry no geometry."""

    frame_index: int
    center: SphericalPoint | None
    angular_width: float
    angular_height: float
    present: bool

    @staticmethod
    def absent(frame_index: int) -> "GroundTruthEntry":
        return GroundTruthEntry(frame_index, None, 0.0, 0.0, False)


class Sequence:
    """An ordered spherical video with ground truth.

    Frame sources may be PNG paths (disk-backed) or in-memory arrays
    (synthetic); pixels are materialized per access. A loaded Sequence is
    immutable and can be shared across concurrent simulation runs.
    """

    def __init__(self, name: str, fps: float, sources: list, entries: list[GroundTruthEntry]):
        if fps <= 0:
            raise InvalidSpec("fps must be positive")
        self.name = name
        self.fps = float(fps)
        self._sources = list(sources)
        self.entries = list(entries)
        self.ground_truth = {e.frame_index: e for e in self.entries}

    def __len__(self) -> int:
        return len(self._sources)

    def timestamp(self, index: int) -> float:
        return index / self.fps

    def frame(self, index: int) -> Frame:
        src = self._sources[index]
        if isinstance(src, np.ndarray):
            pixels = src
        else:
            with Image.open(src) as img:
                pixels = np.asarray(img.convert("RGB"))
        return Frame(timestamp=self.timestamp(index), pixels=pixels)

    @property
    def initial_box(self) -> GroundTruthEntry:
        entry = self.ground_truth.get(0)
        if entry is None or not entry.present:
            raise MissingGroundTruth(f"sequence {self.name!r} has no present ground truth for frame 0")
        return entry


def load_sequence(root: str | Path) -> Sequence:
    """Load a sequence directory in the layout documented above."""
    root = Path(root)
    meta_path = root / "meta.json"
    if not meta_path.is_file():
        raise MalformedSequence(f"{root}: meta.json missing")
    try:
        meta = json.loads(meta_path.read_text())
        name = str(meta["name"])
        fps = float(meta["fps"])
    except (KeyError, ValueError, TypeError) as exc:
        raise MalformedSequence(f"{root}: bad meta.json ({exc})") from exc
    if fps <= 0:
        raise MalformedSequence(f"{root}: fps must be positive")

    frame_paths = sorted((root / "frames").glob("*.png"))
    if not frame_paths:
        raise MalformedSequence(f"{root}: no frames/*.png found")

    gt_path = root / "groundtruth.txt"
    if not gt_path.is_file():
        raise MissingGroundTruth(f"{root}: groundtruth.txt missing")
    entries = _parse_ground_truth(gt_path.read_text(), frame_count=len(frame_paths))

    seq = Sequence(name=name, fps=fps, sources=frame_paths, entries=entries)
    seq.initial_box  # demand a present frame-0 entry up front
    return seq


def _parse_ground_truth(text: str, frame_count: int) -> list[GroundTruthEntry]:
    entries: list[GroundTruthEntry] = []
    seen: set[int] = set()
    prev = -1
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 5:
            raise MalformedLine(line_no, f"expected 5 fields, got {len(parts)}")
        try:
            idx = int(parts[0])
            pan, tilt, w, h = (float(v) for v in parts[1:])
        except ValueError as exc:
            raise MalformedLine(line_no, str(exc)) from exc
        if idx < 0 or idx >= frame_count:
            raise MalformedLine(line_no, f"frame index {idx} outside [0, {frame_count})")
        if idx in seen:
            raise MalformedLine(line_no, f"duplicate frame index {idx}")
        if idx < prev:
            raise NonMonotoneIndex(f"line {line_no}: frame index {idx} after {prev}")
        seen.add(idx)
        prev = idx
        if pan == ABSENT_SENTINEL and tilt == ABSENT_SENTINEL and w == ABSENT_SENTINEL and h == ABSENT_SENTINEL:
            entries.append(GroundTruthEntry.absent(idx))
            continue
        if w < 0 or h < 0:
            raise MalformedLine(line_no, f"negative box size {w}x{h}")
        try:
            center = SphericalPoint(pan, tilt)
        except ValueError as exc:
            raise MalformedLine(line_no, str(exc)) from exc
        entries.append(GroundTruthEntry(idx, center, w, h, True))
    return entries


def write_sequence(seq: Sequence, root: str | Path) -> Path:
    """Materialize a sequence in the on-disk layout; inverse of load_sequence."""
    root = Path(root)
    frames_dir = root / "frames"
    frames_dir.mkdir(parents=True, exist_ok=True)
    for i in range(len(seq)):
        Image.fromarray(seq.frame(i).pixels, mode="RGB").save(frames_dir / f"{i:06d}.png")
    lines = []
    for e in seq.entries:
        if e.present:
            lines.append(f"{e.frame_index} {e.center.pan} {e.center.tilt} {e.angular_width} {e.angular_height}")
        else:
            lines.append(f"{e.frame_index} -1 -1 -1 -1")
    (root / "groundtruth.txt").write_text("\n".join(lines) + "\n")
    (root / "meta.json").write_text(json.dumps({"fps": seq.fps, "name": seq.name}) + "\n")
    return root


def ground_truth_in_view(entry: GroundTruthEntry, pose: CameraPose) -> BoundingBox | None:
    """Project an annotated target into the current viewpoint.

    Returns the axis-aligned hull of the projected center and the four
    angular-extent corners, or None when the center falls outside the
    frustum (which is what flips the per-frame metrics to invalid).
    """
    if not entry.present:
        raise ValueError("entry has no geometry")
    center = project_sphere_to_image(entry.center, pose)
    if center is None:
        return None
    half_w = entry.angular_width / 2.0
    half_h = entry.angular_height / 2.0
    xs, ys = [center.x], [center.y]
    for dp in (-half_w, half_w):
        for dt in (-half_h, half_h):
            corner = SphericalPoint(
                wrap_pan(entry.center.pan + dp),
                max(-90.0, min(90.0, entry.center.tilt + dt)),
            )
            q = _project_unbounded(corner, pose)
            if q is not None:
                xs.append(q.x)
                ys.append(q.y)
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    return BoundingBox(x0, y0, x1 - x0, y1 - y0)


@dataclass
class SyntheticSpec:
    """Deterministic synthetic-sequence recipe.

    The target moves with per-axis angle kinematics
    angle(t) = start + velocity*t + acceleration*t^2/2 + sway*sin(2*pi*sway_hz*t)
    (degrees), rendered as a magenta rectangle with a white core over a
    seeded blocky background. The sway term models direction changes that
    polynomial motion models cannot anticipate; leave it at zero for
    motion that is exactly constant-velocity or constant-acceleration.
    """

    name: str = "synthetic"
    duration: float = 3.0
    fps: float = 10.0
    seed: int = 0
    pano_width: int = 720
    start: SphericalPoint = field(default_factory=lambda: SphericalPoint(0.0, 0.0))
    velocity: tuple[float, float] = (0.0, 0.0)
    acceleration: tuple[float, float] = (0.0, 0.0)
    sway: tuple[float, float] = (0.0, 0.0)
    sway_hz: float = 0.0
    target_width: float = 10.0
    target_height: float = 10.0

    def position(self, t: float) -> SphericalPoint:
        phase = math.sin(2.0 * math.pi * self.sway_hz * t)
        pan = self.start.pan + self.velocity[0] * t + 0.5 * self.acceleration[0] * t * t + self.sway[0] * phase
        tilt = self.start.tilt + self.velocity[1] * t + 0.5 * self.acceleration[1] * t * t + self.sway[1] * phase
        return SphericalPoint(wrap_pan(pan), tilt)


TARGET_COLOR = (255, 0, 255)
TARGET_CORE_COLOR = (255, 255, 255)


def generate_synthetic_sequence(spec: SyntheticSpec) -> Sequence:
    """Build an in-memory sequence whose ground truth follows the motion law exactly."""
    if spec.duration <= 0 or spec.fps <= 0:
        raise InvalidSpec("duration and fps must be positive")
    if spec.pano_width < 16 or spec.pano_width % 2:
        raise InvalidSpec("pano_width must be an even integer >= 16")
    if spec.target_width <= 0 or spec.target_height <= 0:
        raise InvalidSpec("target size must be positive")

    frame_count = int(round(spec.duration * spec.fps))
    if frame_count < 1:
        raise InvalidSpec("duration too short for one frame")

    background = _blocky_background(spec.pano_width, spec.seed)
    sources = []
    entries = []
    for i in range(frame_count):
        t = i / spec.fps
        center = spec.position(t)
        if not (-90.0 + spec.target_height / 2.0 <= center.tilt <= 90.0 - spec.target_height / 2.0):
            raise InvalidSpec(f"target leaves the tilt range at frame {i}")
        frame = background.copy()
        _stamp_target(frame, center, spec.target_width, spec.target_height)
        sources.append(frame)
        entries.append(GroundTruthEntry(i, center, spec.target_width, spec.target_height, True))
    return Sequence(name=spec.name, fps=spec.fps, sources=sources, entries=entries)


def _blocky_background(pano_width: int, seed: int) -> np.ndarray:
    """Static low-frequency color texture, deterministic for a seed."""
    rng = np.random.default_rng(seed)
    w, h = pano_width, pano_width // 2
    block = 20
    bw = max(1, w // block)
    bh = max(1, h // block)
    small = rng.integers(30, 170, size=(bh, bw, 3), dtype=np.uint8)
    big = np.repeat(np.repeat(small, block, axis=0), block, axis=1)
    return np.ascontiguousarray(big[:h, :w])


def _stamp_target(pixels: np.ndarray, center: SphericalPoint, width_deg: float, height_deg: float) -> None:
    """Draw the angular target rect into an equirect frame (pan wrap, tilt clamp)."""
    h, w = pixels.shape[0], pixels.shape[1]
    _fill_angular_rect(pixels, center, width_deg, height_deg, TARGET_COLOR)
    _fill_angular_rect(pixels, center, width_deg / 2.0, height_deg / 2.0, TARGET_CORE_COLOR)


def _fill_angular_rect(pixels, center, width_deg, height_deg, color) -> None:
    h, w = pixels.shape[0], pixels.shape[1]
    col_lo = (center.pan - width_deg / 2.0 + 180.0) / 360.0 * w
    col_hi = (center.pan + width_deg / 2.0 + 180.0) / 360.0 * w
    row_lo = (90.0 - (center.tilt + height_deg / 2.0)) / 180.0 * h
    row_hi = (90.0 - (center.tilt - height_deg / 2.0)) / 180.0 * h
    rows = np.arange(max(0, math.ceil(row_lo - 0.5)), min(h, math.floor(row_hi - 0.5) + 1))
    cols = np.arange(math.ceil(col_lo - 0.5), math.floor(col_hi - 0.5) + 1) % w
    if rows.size and cols.size:
        pixels[np.ix_(rows, cols)] = color
