"""Whole synthetic datasets on disk."""

from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from ..config.settings import SynthConfig
from ..models.manifest import DatasetManifest, Split, VideoEntry
from ..utils.exceptions import ConfigurationError
from ..utils.logging import get_logger
from .features import synthesize_features
from .io import load_features, load_labels, save_features, save_labels
from .presets import preset_from_config
from .workflow import WorkflowModel, generate_video


logger = get_logger(__name__)


def split_counts(videos: int, ratio: Tuple[int, int, int] = (14, 4, 9)) -> Tuple[int, int, int]:
    """Train/val/test counts at ``ratio``; the test split takes the remainder."""
    total = sum(ratio)
    train = int(round(videos * ratio[0] / total))
    val = int(round(videos * ratio[1] / total))
    if videos > 1 and train == 0:
        train = 1
    val = min(val, videos - train)
    return train, val, videos - train - val


def video_seeds(seed: int, index: int) -> Tuple[int, int]:
    """Independent (labels, noise) seeds of one video, derived from the dataset seed."""
    stream = np.random.default_rng([seed, index])
    labels_seed, noise_seed = stream.integers(0, 2**63 - 1, size=2)
    return int(labels_seed), int(noise_seed)


class DatasetGenerator:
    """Write features, labels and a manifest for a synthetic workflow dataset."""

    def __init__(self, cfg: SynthConfig, workflow: Optional[WorkflowModel] = None):
        self.cfg = cfg
        self.workflow = workflow or preset_from_config(cfg)
        self.logger = logger.bind(component="generator", preset=cfg.preset)

    def video_length(self, index: int) -> int:
        rng = np.random.default_rng([self.cfg.seed, index, 1])
        return int(rng.integers(self.cfg.min_length, self.cfg.max_length + 1))

    def generate(self, out_dir: Union[str, Path]) -> DatasetManifest:
        out_dir = Path(out_dir)
        (out_dir / "features").mkdir(parents=True, exist_ok=True)
        (out_dir / "labels").mkdir(parents=True, exist_ok=True)

        train, val, test = split_counts(self.cfg.videos, self.cfg.split_ratio)
        splits: List[Split] = [Split.TRAIN] * train + [Split.VAL] * val + [Split.TEST] * test
        if self.workflow.min_total_frames() > self.cfg.min_length:
            raise ConfigurationError(
                f"min_length {self.cfg.min_length} is below the workflow minimum {self.workflow.min_total_frames()}"
            )

        entries = []
        for index, split in enumerate(splits):
            video_id = f"video_{index + 1:03d}"
            labels_seed, noise_seed = video_seeds(self.cfg.seed, index)
            labels = generate_video(self.workflow, labels_seed, self.video_length(index))
            features = synthesize_features(
                labels,
                self.cfg.feature_dim,
                self.cfg.noise_scale,
                self.workflow.ambiguity_width,
                noise_seed,
                anchor_seed=self.cfg.anchor_seed,
            )
            feature_path = Path("features") / f"{video_id}.phsf"
            label_path = Path("labels") / f"{video_id}.txt"
            save_features(features, out_dir / feature_path)
            save_labels(labels, out_dir / label_path)
            entries.append(VideoEntry(
                video_id=video_id,
                features=feature_path.as_posix(),
                labels=label_path.as_posix(),
                split=split,
                num_frames=len(labels),
            ))
            self.logger.debug("Generated video", video_id=video_id, split=split.value, frames=len(labels))

        manifest = DatasetManifest(
            num_classes=self.workflow.num_classes,
            feature_dim=self.cfg.feature_dim,
            phase_names=self.workflow.phase_names,
            preset=self.cfg.preset,
            seed=self.cfg.seed,
            videos=entries,
        )
        manifest.save(out_dir / "manifest.json")
        manifest.root = out_dir
        self.logger.info("Dataset written", out=str(out_dir), **manifest.split_counts())
        return manifest


def generate_dataset(cfg: SynthConfig, out_dir: Union[str, Path]) -> DatasetManifest:
    """Generate a dataset for ``cfg`` under ``out_dir``."""
    return DatasetGenerator(cfg).generate(out_dir)


def load_video(manifest: DatasetManifest, entry: VideoEntry):
    """(features, labels) of one manifest entry."""
    features = load_features(manifest.resolve(entry.features))
    labels = load_labels(manifest.resolve(entry.labels), manifest.num_classes)
    return features, labels
