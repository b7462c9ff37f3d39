"""Exception types shared across the package."""


class PtzBenchError(Exception):
    """Base class for all ptzbench errors."""


class MalformedPanorama(PtzBenchError):
    """Panorama image is not a 2:1 equirectangular frame."""


class MalformedSequence(PtzBenchError):
    """Sequence directory is missing pieces or its metadata is unreadable."""


class MissingGroundTruth(PtzBenchError):
    """Sequence directory has no usable ground-truth annotation."""


class MalformedLine(PtzBenchError):
    """A ground-truth line could not be parsed (or duplicates a frame index)."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class NonMonotoneIndex(PtzBenchError):
    """Ground-truth frame indices are not strictly increasing."""


class InvalidSpec(PtzBenchError):
    """Synthetic sequence parameters are unusable."""


class DegenerateBox(PtzBenchError):
    """Tracker init box has zero area or lies entirely outside the frame."""


class InsufficientHistory(PtzBenchError):
    """Motion estimate does not carry enough velocities for the requested model."""


class EmptyTrace(PtzBenchError):
    """No frame records to aggregate."""
