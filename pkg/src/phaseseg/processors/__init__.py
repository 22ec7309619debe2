"""Post-hoc analysis of predicted segmentations."""

from .segmentation_analysis import (
    AnalysisReport,
    Finding,
    FindingCategory,
    FindingLevel,
    SegmentationAnalyzer,
    VideoDiagnostics,
    confusion_pairs,
    diagnose_video,
)

__all__ = [
    "AnalysisReport",
    "Finding",
    "FindingCategory",
    "FindingLevel",
    "SegmentationAnalyzer",
    "VideoDiagnostics",
    "confusion_pairs",
    "diagnose_video",
]
