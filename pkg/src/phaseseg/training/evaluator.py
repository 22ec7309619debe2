"""Evaluation of trained models on manifest splits."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np

from ..autodiff import no_grad
from ..metrics.scores import aggregate, score_video
from ..models.manifest import DatasetManifest, Split
from ..models.report import MetricReport, VideoMetrics
from ..models.sequences import PhaseSequence
from ..network.checkpoint import load_checkpoint
from ..network.model import CausalPhaseModel, stage_predictions
from ..synthdata.dataset import load_video
from ..synthdata.io import save_labels
from ..utils.exceptions import ConfigurationError, DataError
from ..utils.logging import get_logger


logger = get_logger(__name__)


@dataclass
class Video:
    """A loaded manifest entry."""

    video_id: str
    features: np.ndarray
    labels: PhaseSequence


def load_split(manifest: DatasetManifest, split: Union[Split, str], dtype: str = "float64") -> List[Video]:
    videos = []
    for entry in manifest.split(split):
        features, labels = load_video(manifest, entry)
        if features.num_frames != len(labels):
            raise DataError(
                f"Video {entry.video_id}: {features.num_frames} feature frames but {len(labels)} labels",
                field="length",
            )
        videos.append(Video(entry.video_id, features.data.astype(dtype), labels))
    return videos


def check_compatible(model: CausalPhaseModel, manifest: DatasetManifest) -> None:
    """Raise ConfigurationError when the model cannot read this dataset."""
    cfg = model.cfg
    if cfg.input_dim != manifest.feature_dim:
        raise ConfigurationError(
            f"Model expects {cfg.input_dim}-dimensional features but the dataset has {manifest.feature_dim}",
            {"expected": cfg.input_dim, "actual": manifest.feature_dim},
        )
    if cfg.num_classes != manifest.num_classes:
        raise ConfigurationError(
            f"Model predicts {cfg.num_classes} classes but the dataset has {manifest.num_classes}",
            {"expected": cfg.num_classes, "actual": manifest.num_classes},
        )


class Evaluator:
    """Predict and score videos with a fixed model."""

    def __init__(self, model: CausalPhaseModel, workers: int = 1):
        self.model = model
        self.workers = workers
        self.logger = logger.bind(component="evaluator")

    def predict_stages(self, videos: List[Video]) -> Dict[str, List[np.ndarray]]:
        """Per-video argmax labels of every stage."""
        predictions = {}
        with no_grad():
            for video in videos:
                predictions[video.video_id] = stage_predictions(self.model(video.features))
        return predictions

    def _score(self, videos: List[Video], labels: Dict[str, np.ndarray]) -> List[VideoMetrics]:
        def score(video: Video) -> VideoMetrics:
            return score_video(labels[video.video_id], video.labels, video.video_id)

        if self.workers <= 1:
            return [score(v) for v in videos]
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            return list(pool.map(score, videos))

    def evaluate(self, videos: List[Video], stage: int = -1, split: Optional[str] = None) -> MetricReport:
        if not videos:
            raise DataError(f"No videos to evaluate in split {split!r}")
        predictions = self.predict_stages(videos)
        final = {vid: stages[stage] for vid, stages in predictions.items()}
        report = aggregate(self._score(videos, final), split=split, stage=stage)
        self.logger.debug(
            "Evaluated",
            split=split,
            videos=len(videos),
            accuracy=report.mean.accuracy,
            edit=report.mean.edit,
        )
        return report

    def evaluate_stages(self, videos: List[Video], split: Optional[str] = None) -> List[MetricReport]:
        """One report per stage, encoder first."""
        if not videos:
            raise DataError(f"No videos to evaluate in split {split!r}")
        predictions = self.predict_stages(videos)
        reports = []
        for stage in range(len(next(iter(predictions.values())))):
            labels = {vid: stages[stage] for vid, stages in predictions.items()}
            reports.append(aggregate(self._score(videos, labels), split=split, stage=stage))
        return reports

    def dump_predictions(self, videos: List[Video], out_dir: Union[str, Path], stage: int = -1) -> List[Path]:
        """Write ``<video_id>.txt`` label files in the ground-truth label format."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        predictions = self.predict_stages(videos)
        return [save_labels(predictions[v.video_id][stage], out_dir / f"{v.video_id}.txt") for v in videos]


def evaluate(
    checkpoint: Union[str, Path],
    manifest: DatasetManifest,
    split: Union[Split, str] = Split.TEST,
    workers: int = 1,
    stage: int = -1,
) -> MetricReport:
    """Score a checkpoint on one split using the final stage by default."""
    model, _ = load_checkpoint(checkpoint)
    check_compatible(model, manifest)
    split = Split(split).value
    videos = load_split(manifest, split, model.cfg.dtype)
    return Evaluator(model, workers).evaluate(videos, stage=stage, split=split)


def evaluate_stages(
    checkpoint: Union[str, Path],
    manifest: DatasetManifest,
    split: Union[Split, str] = Split.TEST,
    workers: int = 1,
) -> List[MetricReport]:
    model, _ = load_checkpoint(checkpoint)
    check_compatible(model, manifest)
    split = Split(split).value
    videos = load_split(manifest, split, model.cfg.dtype)
    return Evaluator(model, workers).evaluate_stages(videos, split=split)
