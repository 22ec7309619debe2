"""Error analysis of predicted phase segmentations.

Looks at the failure modes that the frame metrics alone hide: too many short
segments, errors clustered around phase transitions, and systematic confusion
between specific phase pairs.
"""

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..config.settings import ReportConfig
from ..metrics.scores import aligned_labels, per_phase_scores
from ..models.sequences import segments_from_frames
from ..synthdata.features import transition_mask
from ..utils.logging import get_logger


logger = get_logger(__name__)

OVER_SEGMENTATION_RATIO = 1.5


class FindingLevel(str, Enum):
    """Finding severity levels."""
    INFO = "info"
    WARNING = "warning"


class FindingCategory(str, Enum):
    """Categories of segmentation findings."""
    OVER_SEGMENTATION = "over_segmentation"
    UNDER_SEGMENTATION = "under_segmentation"
    TRANSITION_ERRORS = "transition_errors"
    CONFUSION = "confusion"


@dataclass
class Finding:
    """Single observation about one video or the whole set."""

    title: str
    description: str
    category: FindingCategory
    level: FindingLevel
    video_id: Optional[str] = None

    def to_dict(self) -> Dict:
        return {
            "title": self.title,
            "description": self.description,
            "category": self.category.value,
            "level": self.level.value,
            "video_id": self.video_id,
        }


@dataclass
class VideoDiagnostics:
    """Segment counts and transition-proximity error split of one video."""

    video_id: str
    num_frames: int
    predicted_segments: int
    ground_truth_segments: int
    frames_near_transition: int
    errors_near_transition: int
    errors_elsewhere: int

    @property
    def segment_ratio(self) -> float:
        return self.predicted_segments / self.ground_truth_segments

    @property
    def frames_elsewhere(self) -> int:
        return self.num_frames - self.frames_near_transition

    @property
    def near_error_rate(self) -> float:
        """Share of frames near a transition that are wrong (0-100)."""
        if self.frames_near_transition == 0:
            return 0.0
        return 100.0 * self.errors_near_transition / self.frames_near_transition

    @property
    def far_error_rate(self) -> float:
        if self.frames_elsewhere == 0:
            return 0.0
        return 100.0 * self.errors_elsewhere / self.frames_elsewhere

    @property
    def total_errors(self) -> int:
        return self.errors_near_transition + self.errors_elsewhere

    def to_dict(self) -> Dict:
        return {
            "video_id": self.video_id,
            "num_frames": self.num_frames,
            "predicted_segments": self.predicted_segments,
            "ground_truth_segments": self.ground_truth_segments,
            "segment_ratio": self.segment_ratio,
            "frames_near_transition": self.frames_near_transition,
            "errors_near_transition": self.errors_near_transition,
            "errors_elsewhere": self.errors_elsewhere,
            "near_error_rate": self.near_error_rate,
            "far_error_rate": self.far_error_rate,
        }


@dataclass
class AnalysisReport:
    """Diagnostics for a set of videos."""

    transition_window: int
    phase_names: List[str] = field(default_factory=list)
    videos: List[VideoDiagnostics] = field(default_factory=list)
    confusions: List[Tuple[int, int, int]] = field(default_factory=list)
    per_phase: Dict[int, Dict[str, float]] = field(default_factory=dict)
    findings: List[Finding] = field(default_factory=list)

    def add_finding(self, finding: Finding):
        self.findings.append(finding)

    def phase_name(self, label: int) -> str:
        if 0 <= label < len(self.phase_names):
            return self.phase_names[label]
        return f"Phase {label}"

    @property
    def error_share_near_transitions(self) -> float:
        """Percentage of all frame errors that fall within the transition window."""
        errors = sum(v.total_errors for v in self.videos)
        if errors == 0:
            return 0.0
        return 100.0 * sum(v.errors_near_transition for v in self.videos) / errors

    @property
    def mean_segment_ratio(self) -> float:
        if not self.videos:
            return 0.0
        return float(np.mean([v.segment_ratio for v in self.videos]))

    def get_findings_by_category(self, category: FindingCategory) -> List[Finding]:
        return [f for f in self.findings if f.category == category]

    def to_dict(self) -> Dict:
        return {
            "transition_window": self.transition_window,
            "summary": {
                "videos": len(self.videos),
                "mean_segment_ratio": self.mean_segment_ratio,
                "error_share_near_transitions": self.error_share_near_transitions,
            },
            "videos": [v.to_dict() for v in self.videos],
            "confusions": [
                {
                    "ground_truth": gt,
                    "predicted": pred,
                    "ground_truth_name": self.phase_name(gt),
                    "predicted_name": self.phase_name(pred),
                    "frames": count,
                }
                for gt, pred, count in self.confusions
            ],
            "per_phase": {
                str(c): dict(scores, name=self.phase_name(c)) for c, scores in sorted(self.per_phase.items())
            },
            "findings": [f.to_dict() for f in self.findings],
        }


def diagnose_video(video_id: str, pred, gt, transition_window: int) -> VideoDiagnostics:
    p, g = aligned_labels(pred, gt)
    near = transition_mask(g, transition_window) if transition_window > 0 else np.zeros(g.size, dtype=bool)
    wrong = p != g
    return VideoDiagnostics(
        video_id=video_id,
        num_frames=int(g.size),
        predicted_segments=len(segments_from_frames(p)),
        ground_truth_segments=len(segments_from_frames(g)),
        frames_near_transition=int(near.sum()),
        errors_near_transition=int((wrong & near).sum()),
        errors_elsewhere=int((wrong & ~near).sum()),
    )


def confusion_pairs(pairs: Sequence[Tuple[np.ndarray, np.ndarray]], top: int) -> List[Tuple[int, int, int]]:
    """Most frequent (ground truth, predicted) mistakes, ties in label order."""
    counts: Counter = Counter()
    for pred, gt in pairs:
        p, g = aligned_labels(pred, gt)
        wrong = p != g
        counts.update(zip(g[wrong].tolist(), p[wrong].tolist()))
    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    return [(gt, pred, count) for (gt, pred), count in ranked[:top]]


class SegmentationAnalyzer:
    """Collect segmentation diagnostics over aligned prediction/ground-truth pairs."""

    def __init__(self, cfg: Optional[ReportConfig] = None, phase_names: Optional[List[str]] = None):
        self.cfg = cfg or ReportConfig()
        self.phase_names = list(phase_names or [])

    def analyze(self, videos: Sequence[Tuple[str, np.ndarray, np.ndarray]]) -> AnalysisReport:
        """Analyze ``(video_id, predicted, ground_truth)`` triples.

        Args:
            videos: Frame label arrays of equal length per video

        Returns:
            Per-video diagnostics, pooled confusions, per-phase scores and findings.
        """
        report = AnalysisReport(transition_window=self.cfg.transition_window, phase_names=self.phase_names)
        pooled: Dict[int, List[Dict[str, float]]] = {}
        for video_id, pred, gt in videos:
            diagnostics = diagnose_video(video_id, pred, gt, self.cfg.transition_window)
            report.videos.append(diagnostics)
            for c, scores in per_phase_scores(pred, gt).items():
                pooled.setdefault(c, []).append(scores)
            self._check_segments(report, diagnostics)

        report.confusions = confusion_pairs([(p, g) for _, p, g in videos], self.cfg.top_confusions)
        # Per-phase scores averaged over the videos in which the phase occurs.
        report.per_phase = {
            c: {
                "precision": float(np.mean([s["precision"] for s in rows])),
                "recall": float(np.mean([s["recall"] for s in rows])),
                "jaccard": float(np.mean([s["jaccard"] for s in rows])),
                "f1": float(np.mean([s["f1"] for s in rows])),
                "support": int(sum(s["support"] for s in rows)),
                "videos": len(rows),
            }
            for c, rows in pooled.items()
        }
        self._check_transitions(report)
        for gt, pred, count in report.confusions:
            report.add_finding(Finding(
                title="Frequent confusion",
                description=f"{report.phase_name(gt)} predicted as {report.phase_name(pred)} on {count} frames",
                category=FindingCategory.CONFUSION,
                level=FindingLevel.INFO,
            ))
        logger.debug(
            "Analysis complete",
            videos=len(report.videos),
            findings=len(report.findings),
            mean_segment_ratio=report.mean_segment_ratio,
        )
        return report

    def _check_segments(self, report: AnalysisReport, d: VideoDiagnostics) -> None:
        if d.segment_ratio >= OVER_SEGMENTATION_RATIO:
            report.add_finding(Finding(
                title="Over-segmentation",
                description=(
                    f"{d.predicted_segments} predicted segments for {d.ground_truth_segments} "
                    f"ground-truth segments (ratio {d.segment_ratio:.2f})"
                ),
                category=FindingCategory.OVER_SEGMENTATION,
                level=FindingLevel.WARNING,
                video_id=d.video_id,
            ))
        elif d.segment_ratio < 1.0:
            report.add_finding(Finding(
                title="Under-segmentation",
                description=f"{d.predicted_segments} predicted segments for {d.ground_truth_segments} ground-truth segments",
                category=FindingCategory.UNDER_SEGMENTATION,
                level=FindingLevel.INFO,
                video_id=d.video_id,
            ))

    def _check_transitions(self, report: AnalysisReport) -> None:
        near = sum(v.errors_near_transition for v in report.videos)
        frames_near = sum(v.frames_near_transition for v in report.videos)
        frames_far = sum(v.frames_elsewhere for v in report.videos)
        far = sum(v.errors_elsewhere for v in report.videos)
        if frames_near == 0 or near == 0:
            return
        near_rate = near / frames_near
        far_rate = far / frames_far if frames_far else 0.0
        if near_rate > far_rate:
            report.add_finding(Finding(
                title="Errors concentrate near transitions",
                description=(
                    f"{100.0 * near_rate:.1f}% of frames within {report.transition_window} frames of a "
                    f"transition are wrong versus {100.0 * far_rate:.1f}% elsewhere"
                ),
                category=FindingCategory.TRANSITION_ERRORS,
                level=FindingLevel.WARNING,
            ))
