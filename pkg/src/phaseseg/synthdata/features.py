"""Feature sequences and their synthesis from labels."""

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from ..models.sequences import PhaseSequence
from ..utils.exceptions import DataError, ParameterError

FEATURE_DTYPE = np.float32


@dataclass(frozen=True, eq=False)
class FeatureSequence:
    """Per-frame feature matrix of shape (T, D)."""

    data: np.ndarray
    source: str = "external"

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 2:
            raise DataError(f"Features must be a (T, D) matrix, got shape {data.shape}", field="features")
        if not np.isfinite(data).all():
            frame = int(np.flatnonzero(~np.isfinite(data).all(axis=1))[0])
            raise DataError(f"Non-finite feature value at frame {frame}", index=frame, field="features")
        if self.source not in ("synthetic", "external"):
            raise DataError(f"Unknown feature source {self.source!r}", field="source")
        object.__setattr__(self, "data", data)

    @property
    def num_frames(self) -> int:
        return int(self.data.shape[0])

    @property
    def dim(self) -> int:
        return int(self.data.shape[1])

    def __len__(self) -> int:
        return self.num_frames


def class_anchors(num_classes: int, dim: int, anchor_seed: int = 0) -> np.ndarray:
    """Fixed standard-normal anchor vector per class."""
    return np.random.default_rng(anchor_seed).standard_normal((num_classes, dim))


def synthesize_features(
    labels: Union[PhaseSequence, np.ndarray],
    dim: int,
    noise_scale: float,
    ambiguity_width: int,
    seed: int,
    anchor_seed: int = 0,
    num_classes: Optional[int] = None,
) -> FeatureSequence:
    """Class anchors plus Gaussian noise, blended linearly around transitions.

    Around a transition at frame b, frames ``b - w .. b + w`` interpolate from
    the outgoing to the incoming class anchor with weight
    ``(t - (b - w)) / (2w)``, so frame b sits halfway.
    """
    if dim < 2:
        raise ParameterError(f"Feature dimension must be >= 2, got {dim}")
    if noise_scale < 0 or ambiguity_width < 0:
        raise ParameterError("noise_scale and ambiguity_width must be non-negative")
    if isinstance(labels, PhaseSequence):
        num_classes = labels.num_classes
        y = labels.labels
    else:
        y = np.asarray(labels, dtype=np.int64)
        num_classes = num_classes or int(y.max()) + 1

    anchors = class_anchors(num_classes, dim, anchor_seed)
    clean = anchors[y].copy()
    length = y.size
    w = ambiguity_width
    if w > 0:
        for b in np.flatnonzero(y[1:] != y[:-1]) + 1:
            before, after = anchors[y[b - 1]], anchors[y[b]]
            for t in range(max(0, b - w), min(length, b + w + 1)):
                alpha = (t - (b - w)) / (2.0 * w)
                clean[t] = (1.0 - alpha) * before + alpha * after

    noise = np.random.default_rng(seed).standard_normal((length, dim)) * noise_scale
    return FeatureSequence((clean + noise).astype(FEATURE_DTYPE), source="synthetic")


def transition_mask(labels: np.ndarray, width: int) -> np.ndarray:
    """True for frames within ``width`` of a ground-truth transition."""
    labels = np.asarray(labels)
    mask = np.zeros(labels.size, dtype=bool)
    for b in np.flatnonzero(labels[1:] != labels[:-1]) + 1:
        mask[max(0, b - width):min(labels.size, b + width + 1)] = True
    return mask
