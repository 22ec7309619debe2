"""Segmentation metrics."""

from .scores import (
    TAUS,
    accuracy,
    aligned_labels,
    aggregate,
    class_counts,
    edit_score,
    f1_at_tau,
    levenshtein,
    macro_prf_jaccard,
    match_segments,
    per_phase_scores,
    score_video,
    segment_iou,
)

__all__ = [
    "TAUS",
    "accuracy",
    "aligned_labels",
    "aggregate",
    "class_counts",
    "edit_score",
    "f1_at_tau",
    "levenshtein",
    "macro_prf_jaccard",
    "match_segments",
    "per_phase_scores",
    "score_video",
    "segment_iou",
]
