"""Domain data models."""

from .manifest import DatasetManifest, Split, VideoEntry
from .report import METRIC_FIELDS, MetricReport, MetricScores, VideoMetrics
from .sequences import PhaseSequence, Segment, SegmentList, segments_from_frames

__all__ = [
    "PhaseSequence",
    "Segment",
    "SegmentList",
    "segments_from_frames",
    "DatasetManifest",
    "VideoEntry",
    "Split",
    "METRIC_FIELDS",
    "MetricScores",
    "VideoMetrics",
    "MetricReport",
]
