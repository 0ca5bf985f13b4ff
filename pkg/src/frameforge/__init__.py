"""Phase retrieval, norm retrieval, spark and lifting analysis of real frames."""

from .errors import FrameForgeError
from .linalg import DEFAULT_TOL, Tolerance
from .model import AnalysisReport, Frame, ProjectionFamily, SequenceFamily, parse_frame, serialize_frame, truncate

__version__ = "0.1.0"

__all__ = [
    "FrameForgeError",
    "Tolerance",
    "DEFAULT_TOL",
    "Frame",
    "ProjectionFamily",
    "SequenceFamily",
    "AnalysisReport",
    "parse_frame",
    "serialize_frame",
    "truncate",
]
