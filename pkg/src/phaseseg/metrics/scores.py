"""Frame-wise and segmental scores, all on a 0-100 scale."""

from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from ..models.report import METRIC_FIELDS, MetricReport, MetricScores, VideoMetrics
from ..models.sequences import PhaseSequence, SegmentList, segments_from_frames
from ..utils.exceptions import DataError, EmptyInputError, ParameterError

FrameLabels = Union[PhaseSequence, Sequence[int], np.ndarray]
Segments = Union[SegmentList, FrameLabels]

TAUS = (25, 50, 75)


def _frames(seq: FrameLabels) -> np.ndarray:
    if isinstance(seq, PhaseSequence):
        return seq.labels
    return np.asarray(seq, dtype=np.int64)


def aligned_labels(pred: FrameLabels, gt: FrameLabels) -> Tuple[np.ndarray, np.ndarray]:
    """Frame label arrays of a prediction and its ground truth; lengths must agree."""
    p, g = _frames(pred), _frames(gt)
    if p.shape != g.shape:
        raise DataError(f"Prediction has {p.size} frames but ground truth has {g.size}", field="length")
    if p.size == 0:
        raise EmptyInputError("Cannot score an empty sequence")
    return p, g


def _segments(seq: Segments) -> SegmentList:
    if isinstance(seq, SegmentList):
        return seq
    return segments_from_frames(seq)


def accuracy(pred: FrameLabels, gt: FrameLabels) -> float:
    """Percentage of frames whose predicted label equals the ground truth."""
    p, g = aligned_labels(pred, gt)
    return 100.0 * float(np.count_nonzero(p == g)) / p.size


def class_counts(pred: FrameLabels, gt: FrameLabels) -> Dict[int, Tuple[int, int, int]]:
    """Frame-wise (TP, FP, FN) for every class present in ``pred`` or ``gt``."""
    p, g = aligned_labels(pred, gt)
    counts = {}
    for c in np.union1d(np.unique(p), np.unique(g)):
        tp = int(np.count_nonzero((p == c) & (g == c)))
        fp = int(np.count_nonzero((p == c) & (g != c)))
        fn = int(np.count_nonzero((p != c) & (g == c)))
        counts[int(c)] = (tp, fp, fn)
    return counts


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


def per_phase_scores(pred: FrameLabels, gt: FrameLabels) -> Dict[int, Dict[str, float]]:
    """Per-class precision, recall, Jaccard and F1 (0-100) with frame support.

    A class present in ``gt`` but never predicted gets precision 0; a class
    only predicted gets recall 0.
    """
    scores = {}
    for c, (tp, fp, fn) in class_counts(pred, gt).items():
        precision = _ratio(tp, tp + fp)
        recall = _ratio(tp, tp + fn)
        scores[c] = {
            "precision": 100.0 * precision,
            "recall": 100.0 * recall,
            "jaccard": 100.0 * _ratio(tp, tp + fp + fn),
            "f1": 100.0 * _ratio(2 * tp, 2 * tp + fp + fn),
            "support": tp + fn,
        }
    return scores


def macro_prf_jaccard(pred: FrameLabels, gt: FrameLabels) -> Tuple[float, float, float]:
    """Macro-averaged (precision, recall, Jaccard) over classes present in either sequence."""
    scores = per_phase_scores(pred, gt)
    rows = list(scores.values())
    return (
        float(np.mean([r["precision"] for r in rows])),
        float(np.mean([r["recall"] for r in rows])),
        float(np.mean([r["jaccard"] for r in rows])),
    )


def levenshtein(a: Sequence[int], b: Sequence[int]) -> int:
    """Minimum insertions, deletions and substitutions turning ``a`` into ``b``."""
    a, b = list(a), list(b)
    previous = list(range(len(b) + 1))
    for i, x in enumerate(a, start=1):
        current = [i] + [0] * len(b)
        for j, y in enumerate(b, start=1):
            current[j] = min(
                previous[j] + 1,
                current[j - 1] + 1,
                previous[j - 1] + (x != y),
            )
        previous = current
    return previous[-1]


def edit_score(pred_segs: Segments, gt_segs: Segments) -> float:
    """``100 * (1 - LEV / max(|pred|, |gt|))`` over segment label sequences, floored at 0."""
    p, g = _segments(pred_segs).labels, _segments(gt_segs).labels
    longest = max(len(p), len(g))
    if longest == 0:
        return 100.0
    return max(0.0, 100.0 * (1.0 - levenshtein(p, g) / longest))


def segment_iou(a, b) -> Tuple[int, int]:
    """(intersection, union) frame counts of two segments."""
    inter = max(0, min(a.end, b.end) - max(a.start, b.start))
    union = max(a.end, b.end) - min(a.start, b.start) if inter else (a.end - a.start) + (b.end - b.start)
    return inter, union


def match_segments(pred_segs: Segments, gt_segs: Segments, tau: int) -> Tuple[int, int, int]:
    """Greedy segment matching; returns (TP, FP, FN).

    Predicted segments are visited in order. Each one takes the not yet
    matched same-label ground-truth segment with the highest IoU; it is a
    true positive if that IoU is at least ``tau / 100`` and only then
    consumes the ground-truth segment.
    """
    if not 0 <= tau <= 100:
        raise ParameterError(f"tau must be in [0, 100], got {tau}")
    pred, gt = _segments(pred_segs), _segments(gt_segs)
    used = [False] * len(gt)
    tp = fp = 0
    for p in pred:
        best, best_iou = None, (-1, 1)
        for j, g in enumerate(gt):
            if used[j] or g.label != p.label:
                continue
            inter, union = segment_iou(p, g)
            # Compare inter/union fractions exactly.
            if inter * best_iou[1] > best_iou[0] * union:
                best, best_iou = j, (inter, union)
        if best is not None and 100 * best_iou[0] >= tau * best_iou[1]:
            tp += 1
            used[best] = True
        else:
            fp += 1
    return tp, fp, len(gt) - tp


def f1_at_tau(pred_segs: Segments, gt_segs: Segments, tau: int) -> float:
    """Segmental F1 at IoU threshold ``tau / 100``."""
    tp, fp, fn = match_segments(pred_segs, gt_segs, tau)
    if tp == 0:
        return 0.0
    return 100.0 * 2 * tp / (2 * tp + fp + fn)


def score_video(pred: FrameLabels, gt: FrameLabels, video_id: str = "video") -> VideoMetrics:
    """All scores of one video."""
    p, g = aligned_labels(pred, gt)
    pred_segs, gt_segs = segments_from_frames(p), segments_from_frames(g)
    precision, recall, jaccard = macro_prf_jaccard(p, g)
    scores = MetricScores(
        accuracy=accuracy(p, g),
        precision=precision,
        recall=recall,
        jaccard=jaccard,
        edit=edit_score(pred_segs, gt_segs),
        **{f"f1_{tau}": f1_at_tau(pred_segs, gt_segs, tau) for tau in TAUS},
    )
    return VideoMetrics(
        video_id=video_id,
        num_frames=int(p.size),
        scores=scores,
        predicted_segments=len(pred_segs),
        ground_truth_segments=len(gt_segs),
    )


def aggregate(videos: List[VideoMetrics], ddof: int = 1, **extra) -> MetricReport:
    """Unweighted mean and standard deviation across videos.

    The std removes ``ddof`` degrees of freedom (sample std by default) and is
    0 for a single video.
    """
    if not videos:
        raise EmptyInputError("Cannot aggregate an empty list of videos")
    table = np.array([v.scores.as_row() for v in videos], dtype=np.float64)
    mean = table.mean(axis=0)
    if len(videos) > ddof:
        std = table.std(axis=0, ddof=ddof)
    else:
        std = np.zeros(table.shape[1])
    return MetricReport(
        videos=list(videos),
        mean=MetricScores(**{name: float(m) for name, m in zip(METRIC_FIELDS, mean)}),
        std={name: float(s) for name, s in zip(METRIC_FIELDS, std)},
        std_ddof=ddof,
        **extra,
    )
