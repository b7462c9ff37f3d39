"""Sequence loading, ground-truth parsing, and synthetic generation."""

import math

import numpy as np
import pytest

from conftest import write_sequence_dir
from ptzbench.dataset import (
    SyntheticSpec,
    TARGET_COLOR,
    generate_synthetic_sequence,
    ground_truth_in_view,
    load_sequence,
    write_sequence,
)
from ptzbench.errors import (
    InvalidSpec,
    MalformedLine,
    MalformedSequence,
    MissingGroundTruth,
    NonMonotoneIndex,
)
from ptzbench.geometry import CameraPose, SphericalPoint, project_sphere_to_image


GT_OK = ["0 0 0 10 10", "1 1 0 10 10", "2 2 0 10 10"]


def test_load_sequence_and_timestamps(tmp_path):
    seq = load_sequence(write_sequence_dir(tmp_path / "s", GT_OK, fps=30.0))
    assert len(seq) == 3
    assert [seq.timestamp(i) for i in range(3)] == pytest.approx([0.0, 1 / 30.0, 2 / 30.0])
    assert seq.frame(1).pixels.shape == (16, 32, 3)
    assert seq.initial_box.center.pan == 0.0


def test_absent_sentinel_line_parses_as_absent(tmp_path):
    lines = ["0 0 0 10 10", "1 -1 -1 -1 -1"]
    seq = load_sequence(write_sequence_dir(tmp_path / "s", lines, frames=2))
    assert not seq.ground_truth[1].present
    assert seq.ground_truth[0].present


def test_wrong_field_count_is_a_malformed_line(tmp_path):
    with pytest.raises(MalformedLine) as err:
        load_sequence(write_sequence_dir(tmp_path / "s", ["0 0 0 10 10", "1 2 3 4"], frames=2))
    assert err.value.line_no == 2


def test_unparseable_number_is_a_malformed_line(tmp_path):
    with pytest.raises(MalformedLine):
        load_sequence(write_sequence_dir(tmp_path / "s", ["0 zero 0 10 10"], frames=1))


def test_duplicate_frame_index_is_a_malformed_line(tmp_path):
    with pytest.raises(MalformedLine):
        load_sequence(write_sequence_dir(tmp_path / "s", ["0 0 0 10 10", "0 1 0 10 10"], frames=2))


def test_decreasing_frame_index_is_non_monotone(tmp_path):
    with pytest.raises(NonMonotoneIndex):
        load_sequence(write_sequence_dir(tmp_path / "s", ["0 0 0 10 10", "2 0 0 10 10", "1 0 0 10 10"], frames=3))


def test_out_of_range_index_and_negative_size_are_malformed(tmp_path):
    with pytest.raises(MalformedLine):
        load_sequence(write_sequence_dir(tmp_path / "a", ["0 0 0 10 10", "9 0 0 10 10"], frames=2))
    with pytest.raises(MalformedLine):
        load_sequence(write_sequence_dir(tmp_path / "b", ["0 0 0 -5 10"], frames=1))


def test_missing_pieces_raise_distinct_errors(tmp_path):
    d = write_sequence_dir(tmp_path / "no_meta", GT_OK)
    (d / "meta.json").unlink()
    with pytest.raises(MalformedSequence):
        load_sequence(d)

    d = write_sequence_dir(tmp_path / "no_gt", GT_OK)
    (d / "groundtruth.txt").unlink()
    with pytest.raises(MissingGroundTruth):
        load_sequence(d)

    d = write_sequence_dir(tmp_path / "no_frames", GT_OK)
    for p in (d / "frames").glob("*.png"):
        p.unlink()
    with pytest.raises(MalformedSequence):
        load_sequence(d)

    d = write_sequence_dir(tmp_path / "bad_fps", GT_OK, fps=0.0)
    with pytest.raises(MalformedSequence):
        load_sequence(d)


def test_sequence_without_initial_ground_truth_is_rejected(tmp_path):
    with pytest.raises(MissingGroundTruth):
        load_sequence(write_sequence_dir(tmp_path / "s", ["0 -1 -1 -1 -1", "1 0 0 10 10"], frames=2))


def test_write_then_load_round_trips(tmp_path):
    spec = SyntheticSpec(name="rt", duration=0.5, fps=10.0, seed=4, pano_width=64)
    seq = generate_synthetic_sequence(spec)
    load_root = write_sequence(seq, tmp_path / "out")
    loaded = load_sequence(load_root)
    assert loaded.name == seq.name
    assert loaded.fps == seq.fps
    assert len(loaded) == len(seq)
    for i in range(len(seq)):
        assert np.array_equal(loaded.frame(i).pixels, seq.frame(i).pixels)
    for a, b in zip(loaded.entries, seq.entries):
        assert a.frame_index == b.frame_index
        assert a.present == b.present
        if a.present:
            assert a.center.pan == pytest.approx(b.center.pan, abs=1e-12)
            assert a.center.tilt == pytest.approx(b.center.tilt, abs=1e-12)


def test_ground_truth_projection_matches_pinhole_scaling():
    entry_pose = CameraPose(aim=SphericalPoint(0.0, 0.0), hfov=90.0, width=800, height=800)
    seq = generate_synthetic_sequence(SyntheticSpec(name="s", duration=0.2, fps=10.0))
    entry = seq.entries[0]  # 10x10 deg target at (0, 0)
    box = ground_truth_in_view(entry, entry_pose)
    expected = 800.0 * math.tan(math.radians(5.0)) / math.tan(math.radians(45.0))
    assert abs(box.w - expected) / expected < 0.01


def test_zero_size_ground_truth_collapses_to_view_center():
    from ptzbench.dataset import GroundTruthEntry

    entry = GroundTruthEntry(0, SphericalPoint(15.0, -3.0), 0.0, 0.0, True)
    view = CameraPose(aim=SphericalPoint(15.0, -3.0), hfov=60.0, width=640, height=480)
    box = ground_truth_in_view(entry, view)
    assert box.area == 0.0
    assert box.center.x == pytest.approx(320.0)
    assert box.center.y == pytest.approx(240.0)


def test_ground_truth_behind_camera_is_out_of_view():
    from ptzbench.dataset import GroundTruthEntry

    entry = GroundTruthEntry(0, SphericalPoint(120.0, 0.0), 10.0, 10.0, True)
    view = CameraPose(aim=SphericalPoint(0.0, 0.0), hfov=90.0, width=800, height=600)
    assert ground_truth_in_view(entry, view) is None


def test_absent_ground_truth_cannot_be_projected():
    from ptzbench.dataset import GroundTruthEntry

    with pytest.raises(ValueError):
        ground_truth_in_view(GroundTruthEntry.absent(0), CameraPose(aim=SphericalPoint(0, 0), hfov=60, width=64, height=48))


def test_small_target_box_center_tracks_projected_center():
    from ptzbench.dataset import GroundTruthEntry

    entry = GroundTruthEntry(0, SphericalPoint(10.0, 5.0), 8.0, 8.0, True)
    view = CameraPose(aim=SphericalPoint(8.0, 4.0), hfov=60.0, width=800, height=600)
    box = ground_truth_in_view(entry, view)
    q = project_sphere_to_image(entry.center, view)
    assert math.hypot(box.center.x - q.x, box.center.y - q.y) < 0.5


def test_synthetic_constant_velocity_advances_linearly():
    spec = SyntheticSpec(name="cv", duration=0.5, fps=10.0, velocity=(10.0, 0.0))
    seq = generate_synthetic_sequence(spec)
    for i, entry in enumerate(seq.entries):
        assert entry.center.pan == pytest.approx(i * 1.0, abs=1e-9)
        assert entry.center.tilt == pytest.approx(0.0, abs=1e-9)


def test_synthetic_acceleration_is_quadratic_from_rest():
    spec = SyntheticSpec(name="acc", duration=1.2, fps=10.0, acceleration=(4.0, 0.0))
    seq = generate_synthetic_sequence(spec)
    # pan(t) = 4 t^2 / 2; at t = 1.0 that is 2 deg
    assert seq.entries[10].center.pan == pytest.approx(2.0, abs=1e-9)


def test_synthetic_positions_follow_the_motion_law_exactly():
    spec = SyntheticSpec(
        name="mix", duration=1.0, fps=10.0, seed=2,
        start=SphericalPoint(-5.0, 2.0), velocity=(6.0, -1.0),
        acceleration=(2.0, 0.5), sway=(1.5, 0.0), sway_hz=2.0,
    )
    seq = generate_synthetic_sequence(spec)
    for i, entry in enumerate(seq.entries):
        want = spec.position(i / spec.fps)
        assert entry.center.pan == pytest.approx(want.pan, abs=1e-9)
        assert entry.center.tilt == pytest.approx(want.tilt, abs=1e-9)


def test_sway_term_is_sinusoidal():
    spec = SyntheticSpec(name="sway", duration=1.0, fps=10.0, sway=(3.0, 0.0), sway_hz=1.0)
    assert spec.position(0.25).pan == pytest.approx(3.0, abs=1e-9)
    assert spec.position(0.5).pan == pytest.approx(0.0, abs=1e-9)


def test_synthetic_target_is_painted_at_its_annotated_position():
    spec = SyntheticSpec(name="paint", duration=0.2, fps=10.0, pano_width=720)
    seq = generate_synthetic_sequence(spec)
    entry = seq.entries[0]
    pano = seq.frame(0).pixels
    u = int((entry.center.pan + 180.0) / 360.0 * pano.shape[1])
    v = int((90.0 - entry.center.tilt) / 180.0 * pano.shape[0])
    patch = pano[v - 2:v + 3, u - 2:u + 3]
    colors = {tuple(px) for px in patch.reshape(-1, 3)}
    assert any(c in colors for c in (TARGET_COLOR, (255, 255, 255)))


def test_unusable_synthetic_parameters_are_rejected():
    with pytest.raises(InvalidSpec):
        generate_synthetic_sequence(SyntheticSpec(name="x", duration=0.0))
    with pytest.raises(InvalidSpec):
        generate_synthetic_sequence(SyntheticSpec(name="x", fps=0.0))
    with pytest.raises(InvalidSpec):
        generate_synthetic_sequence(SyntheticSpec(name="x", pano_width=15))
    with pytest.raises(InvalidSpec):
        generate_synthetic_sequence(SyntheticSpec(name="x", pano_width=8))
    with pytest.raises(InvalidSpec):
        generate_synthetic_sequence(SyntheticSpec(name="x", target_width=0.0))
