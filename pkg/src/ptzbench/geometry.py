"""View-sphere geometry and camera rendering.

Positions on the view sphere are (pan, tilt) pairs in degrees: pan is the
azimuth in [-180, 180) around the vertical axis, tilt the elevation in
[-90, 90]. The camera is a pinhole with no roll, oriented pan-then-tilt
(yaw about the world vertical, then pitch); zoom is expressed as the
horizontal field of view. Pixel coordinates have their origin at the
top-left corner, x growing with pan and y growing against tilt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import MalformedPanorama


def wrap_pan(deg: float) -> float:
    """Normalize a pan angle into [-180, 180)."""
    return (deg + 180.0) % 360.0 - 180.0


@dataclass(frozen=True)
class SphericalPoint:
    """A direction on the view sphere, degrees."""

    pan: float
    tilt: float

    def __post_init__(self):
        if not (-90.0 <= self.tilt <= 90.0):
            raise ValueError(f"tilt {self.tilt} outside [-90, 90]")
        object.__setattr__(self, "pan", wrap_pan(float(self.pan)))
        object.__setattr__(self, "tilt", float(self.tilt))


@dataclass(frozen=True)
class PlanePoint:
    """A real-valued image-plane position in pixels, origin top-left."""

    x: float
    y: float


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned image-plane rectangle: top-left corner plus size, pixels."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        if self.w < 0 or self.h < 0:
            raise ValueError("box dimensions must be non-negative")

    @property
    def center(self) -> PlanePoint:
        return PlanePoint(self.x + self.w / 2.0, self.y + self.h / 2.0)

    @property
    def area(self) -> float:
        return self.w * self.h


@dataclass(frozen=True)
class CameraPose:
    """Camera aim plus intrinsics: horizontal FOV and image size.

    The image-plane center (width/2, height/2) corresponds exactly to `aim`;
    the vertical FOV follows from hfov and the aspect ratio (square pixels).
    """

    aim: SphericalPoint
    hfov: float
    width: int
    height: int

    def __post_init__(self):
        if not (0.0 < self.hfov < 180.0):
            raise ValueError(f"hfov {self.hfov} outside (0, 180)")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("image dimensions must be positive")

    @property
    def focal_px(self) -> float:
        return (self.width / 2.0) / math.tan(math.radians(self.hfov) / 2.0)

    @property
    def center(self) -> PlanePoint:
        return PlanePoint(self.width / 2.0, self.height / 2.0)


@dataclass
class Frame:
    """An RGB image plus its simulated capture time.

    pixels is a (height, width, 3) uint8 array, row-major RGB. Rendered
    views carry the pose they were rendered at; source panoramas do not.
    """

    timestamp: float
    pixels: np.ndarray = field(repr=False)
    pose: "CameraPose | None" = None
    index: int | None = None

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValueError("pixels must be an (H, W, 3) array")
        self.pixels = px.astype(np.uint8, copy=False)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


def _direction(p: SphericalPoint) -> np.ndarray:
    """Unit vector for a sphere point: x forward (pan 0), z up."""
    pan = math.radians(p.pan)
    tilt = math.radians(p.tilt)
    ct = math.cos(tilt)
    return np.array([ct * math.cos(pan), ct * math.sin(pan), math.sin(tilt)])


def _camera_basis(aim: SphericalPoint) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Orthonormal (right, up, forward) in world coordinates for a no-roll camera."""
    pan = math.radians(aim.pan)
    tilt = math.radians(aim.tilt)
    sp, cp = math.sin(pan), math.cos(pan)
    st, ct = math.sin(tilt), math.cos(tilt)
    right = np.array([-sp, cp, 0.0])
    up = np.array([-st * cp, -st * sp, ct])
    forward = np.array([ct * cp, ct * sp, st])
    return right, up, forward


def project_sphere_to_image(p: SphericalPoint, pose: CameraPose) -> PlanePoint | None:
    """Pinhole projection of a sphere direction into the camera image plane.

    Returns None when the direction is behind the camera or lands outside
    the [0, width] x [0, height] frustum bounds.
    """
    q = _project_unbounded(p, pose)
    if q is None:
        return None
    if not (0.0 <= q.x <= pose.width and 0.0 <= q.y <= pose.height):
        return None
    return q


def _project_unbounded(p: SphericalPoint, pose: CameraPose) -> PlanePoint | None:
    """Projection without the frustum-bounds check; None only behind the camera."""
    right, up, forward = _camera_basis(pose.aim)
    d = _direction(p)
    vz = float(d @ forward)
    if vz <= 1e-12:
        return None
    f = pose.focal_px
    x = pose.width / 2.0 + f * float(d @ right) / vz
    y = pose.height / 2.0 - f * float(d @ up) / vz
    return PlanePoint(x, y)


def backproject_image_to_sphere(q: PlanePoint, pose: CameraPose) -> SphericalPoint:
    """Inverse of project_sphere_to_image for in-frustum image points."""
    right, up, forward = _camera_basis(pose.aim)
    f = pose.focal_px
    vx = (q.x - pose.width / 2.0) / f
    vy = (q.y - pose.height / 2.0) / f
    d = vx * right - vy * up + forward
    d /= np.linalg.norm(d)
    pan = math.degrees(math.atan2(d[1], d[0]))
    tilt = math.degrees(math.asin(max(-1.0, min(1.0, float(d[2])))))
    return SphericalPoint(pan, tilt)


def angular_distance(a: SphericalPoint, b: SphericalPoint) -> float:
    """Great-circle angle between two sphere points, degrees in [0, 180]."""
    da, db = _direction(a), _direction(b)
    cross = np.linalg.norm(np.cross(da, db))
    dot = float(da @ db)
    return math.degrees(math.atan2(cross, dot))


def render_view(panorama: Frame, pose: CameraPose) -> Frame:
    """Render the camera's current view out of an equirectangular panorama.

    Every output pixel center is backprojected to a sphere direction and
    sampled bilinearly from the panorama, wrapping across the +-180 deg pan
    seam and clamping tilt at the poles. The timestamp carries over.
    """
    src = panorama.pixels
    ph, pw = src.shape[0], src.shape[1]
    if pw != 2 * ph:
        raise MalformedPanorama(f"panorama is {pw}x{ph}, expected 2:1 equirectangular")

    right, up, forward = _camera_basis(pose.aim)
    f = pose.focal_px
    w, h = pose.width, pose.height

    # Camera-plane coordinates of output pixel centers.
    xs = (np.arange(w) + 0.5 - w / 2.0) / f
    ys = (np.arange(h) + 0.5 - h / 2.0) / f
    vx, vy = np.meshgrid(xs, ys)

    dx = vx * right[0] - vy * up[0] + forward[0]
    dy = vx * right[1] - vy * up[1] + forward[1]
    dz = vx * right[2] - vy * up[2] + forward[2]
    norm = np.sqrt(dx * dx + dy * dy + dz * dz)

    pan = np.degrees(np.arctan2(dy, dx))
    tilt = np.degrees(np.arcsin(np.clip(dz / norm, -1.0, 1.0)))

    # Equirect pixel (i, j) center sits at pan (j+0.5)/pw*360-180, tilt 90-(i+0.5)/ph*180.
    col = (pan + 180.0) / 360.0 * pw - 0.5
    row = (90.0 - tilt) / 180.0 * ph - 0.5

    sampled = _bilinear_wrap(src, row, col)
    return Frame(timestamp=panorama.timestamp, pixels=sampled, pose=pose)


def _bilinear_wrap(src: np.ndarray, row: np.ndarray, col: np.ndarray) -> np.ndarray:
    """Bilinear sampling with horizontal wrap-around and vertical clamping."""
    ph, pw = src.shape[0], src.shape[1]
    r0 = np.floor(row).astype(np.int64)
    c0 = np.floor(col).astype(np.int64)
    fr = (row - r0)[..., None]
    fc = (col - c0)[..., None]

    r0c = np.clip(r0, 0, ph - 1)
    r1c = np.clip(r0 + 1, 0, ph - 1)
    c0w = c0 % pw
    c1w = (c0 + 1) % pw

    img = src.astype(np.float64)
    top = img[r0c, c0w] * (1.0 - fc) + img[r0c, c1w] * fc
    bot = img[r1c, c0w] * (1.0 - fc) + img[r1c, c1w] * fc
    out = top * (1.0 - fr) + bot * fr
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)
