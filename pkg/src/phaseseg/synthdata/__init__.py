"""Synthetic workflow data and feature file formats."""

from .dataset import DatasetGenerator, generate_dataset, load_video, split_counts, video_seeds
from .features import FeatureSequence, class_anchors, synthesize_features, transition_mask
from .io import (
    iter_csv_frames,
    iter_csv_rows,
    iter_feature_frames,
    iter_frames,
    load_features,
    load_features_csv,
    load_labels,
    read_label_values,
    save_features,
    save_labels,
)
from .presets import autolaparo_preset, preset_from_config, ramie_preset, tiny_preset
from .workflow import DurationLaw, WorkflowModel, fit_durations, generate_video

__all__ = [
    "WorkflowModel",
    "DurationLaw",
    "generate_video",
    "fit_durations",
    "ramie_preset",
    "autolaparo_preset",
    "tiny_preset",
    "preset_from_config",
    "FeatureSequence",
    "synthesize_features",
    "class_anchors",
    "transition_mask",
    "load_features",
    "save_features",
    "load_features_csv",
    "iter_feature_frames",
    "iter_csv_frames",
    "iter_csv_rows",
    "iter_frames",
    "load_labels",
    "read_label_values",
    "save_labels",
    "DatasetGenerator",
    "generate_dataset",
    "load_video",
    "split_counts",
    "video_seeds",
]
