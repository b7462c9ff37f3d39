"""Shared scene builders for tracker and pipeline tests."""

import json
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

from ptzbench.geometry import BoundingBox


def make_textured_scene():
    """Layered rectangles over noise; strong template for correlation trackers."""
    rng = np.random.default_rng(5)
    base = rng.integers(0, 256, (200, 300, 3), dtype=np.uint8)
    base[95:145, 145:205] = (255, 40, 200)
    base[105:135, 155:195] = (30, 220, 60)
    base[112:128, 165:185] = rng.integers(0, 256, (16, 20, 3), dtype=np.uint8)
    return base, BoundingBox(145, 95, 60, 50)


def make_blob_scene():
    """Color-rich blob on flat gray; histogram and correlation trackers both lock on."""
    rng = np.random.default_rng(9)
    img = np.full((240, 320, 3), 40, dtype=np.uint8)
    img[102:138, 138:182] = rng.integers(60, 256, (36, 44, 3), dtype=np.uint8)
    return img, BoundingBox(138, 102, 44, 36)


def make_quadrant_scene():
    """Four solid colors in quadrants; few histogram bins, sharp similarity peak."""
    img = np.full((240, 320, 3), 40, dtype=np.uint8)
    img[102:120, 138:160] = (220, 50, 50)
    img[102:120, 160:182] = (50, 220, 50)
    img[120:138, 138:160] = (50, 50, 220)
    img[120:138, 160:182] = (220, 220, 50)
    return img, BoundingBox(138, 102, 44, 36)


def translate(pixels, dx, dy):
    """Whole-frame integer translation with wraparound on both axes."""
    return np.roll(pixels, (dy, dx), axis=(0, 1))


def write_sequence_dir(root: Path, gt_lines, frames=3, fps=30.0, name="seq", size=(16, 32)):
    """Materialize a minimal on-disk sequence; gt_lines go in verbatim."""
    root.mkdir(parents=True, exist_ok=True)
    (root / "meta.json").write_text(json.dumps({"name": name, "fps": fps}))
    frames_dir = root / "frames"
    frames_dir.mkdir(exist_ok=True)
    h, w = size
    for i in range(frames):
        pixels = np.full((h, w, 3), 10 * i, dtype=np.uint8)
        Image.fromarray(pixels, mode="RGB").save(frames_dir / f"{i:06d}.png")
    (root / "groundtruth.txt").write_text("\n".join(gt_lines) + "\n")
    return root


@pytest.fixture
def textured_scene():
    return make_textured_scene()


@pytest.fixture
def blob_scene():
    return make_blob_scene()
