"""Training objective: frame-wise cross-entropy plus clamped temporal smoothing."""

from typing import Optional, Union

import numpy as np

from ..autodiff import Tensor
from ..autodiff import ops
from ..config.settings import LossConfig
from ..models.sequences import PhaseSequence
from ..network.model import StageLogits
from ..utils.exceptions import DataError, DimensionError

Labels = Union[PhaseSequence, np.ndarray]


def _label_array(labels: Labels) -> np.ndarray:
    if isinstance(labels, PhaseSequence):
        return labels.labels
    return np.asarray(labels, dtype=np.int64)


def cross_entropy(logits: Tensor, labels: Labels) -> Tensor:
    """Mean over frames of ``-log softmax(logits)[t, y_t]``."""
    y = _label_array(labels)
    if logits.ndim != 2 or y.shape != (logits.shape[0],):
        raise DimensionError(
            f"Logits {logits.shape} do not line up with {y.shape[0]} labels",
            expected=(logits.shape[0],),
            actual=y.shape,
        )
    num_classes = logits.shape[1]
    bad = np.flatnonzero((y < 0) | (y >= num_classes))
    if bad.size:
        raise DataError(
            f"Label {int(y[bad[0]])} at frame {int(bad[0])} is outside [0, {num_classes})",
            index=int(bad[0]),
            field="label",
        )
    picked = ops.pick(ops.log_softmax(logits, axis=1), y)
    return ops.scale(ops.mean(picked), -1.0)


def smoothing_loss(logits: Tensor, cfg: Optional[LossConfig] = None) -> Tensor:
    """Clamped squared difference of log-probabilities between neighbouring frames.

    ``sum_{t>=1} sum_c clamp((lsm[t, c] - lsm[t-1, c])**2, 0, clamp_hi) / (T * C)``.
    With ``cfg.stop_gradient_previous`` the frame t-1 term is treated as a
    constant. Sequences shorter than two frames give 0.
    """
    cfg = cfg or LossConfig()
    length, num_classes = logits.shape
    if length < 2:
        return Tensor(np.zeros((), dtype=logits.dtype))
    log_probs = ops.log_softmax(logits, axis=1)
    current = ops.slice_rows(log_probs, 1, length)
    previous = ops.slice_rows(log_probs, 0, length - 1)
    if cfg.stop_gradient_previous:
        previous = ops.detach(previous)
    delta = ops.sub(current, previous)
    clamped = ops.clamp(ops.mul(delta, delta), cfg.clamp_lo, cfg.clamp_hi)
    return ops.scale(ops.sum(clamped), 1.0 / (length * num_classes))


def total_loss(stages: StageLogits, labels: Labels, cfg: Optional[LossConfig] = None) -> Tensor:
    """Sum over stages of cross-entropy plus ``lambda`` times the smoothing term."""
    cfg = cfg or LossConfig()
    total = None
    for logits in stages.stages:
        term = cross_entropy(logits, labels)
        if cfg.lambda_ != 0.0:
            term = ops.add(term, ops.scale(smoothing_loss(logits, cfg), cfg.lambda_))
        total = term if total is None else ops.add(total, term)
    return total
