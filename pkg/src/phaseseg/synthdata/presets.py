"""Workflow presets mirroring the structure of the two surgical datasets."""

from typing import Callable, Dict, List

import numpy as np

from ..utils.exceptions import ConfigurationError
from .workflow import DurationLaw, WorkflowModel

RAMIE_ANATOMICAL = 11
NON_STANDARD_ACTION = 11
CAMERA_OUT_OF_BODY = 12

# Anatomical phases numbered from 1 as in the clinical protocol; unnamed ones stay generic.
RAMIE_PHASE_NAMES = [
    "Phase 1",
    "Phase 2",
    "Phase 3: Right pleural dissection",
    "Phase 4",
    "Phase 5",
    "Phase 6",
    "Phase 7: Left laryngeal nerve dissection",
    "Phase 8",
    "Phase 9: Subcarinal dissection",
    "Phase 10: AP lymph node dissection",
    "Phase 11",
    "Non-standard action",
    "Camera out of body",
]

# Heterogeneous means give the class imbalance of the real recordings;
# phases 3 and 10 are the short ones.
RAMIE_MEAN_FRAMES = [90.0, 140.0, 35.0, 160.0, 110.0, 70.0, 150.0, 60.0, 120.0, 30.0, 80.0, 20.0, 12.0]

AUTOLAPARO_PHASE_NAMES = [
    "Preparation",
    "Dividing Ligament and Peritoneum",
    "Dividing Uterine Vessels and Ligament",
    "Transecting the Vagina",
    "Specimen Removal",
    "Suturing",
    "Washing",
]

AUTOLAPARO_MEAN_FRAMES = [60.0, 220.0, 180.0, 120.0, 50.0, 200.0, 40.0]


def _sequential(num_classes: int) -> np.ndarray:
    matrix = np.zeros((num_classes, num_classes))
    for i in range(num_classes - 1):
        matrix[i, i + 1] = 1.0
    matrix[num_classes - 1, 0] = 1.0
    return matrix


def ramie_preset(
    skip_prob: float = 0.05,
    return_prob: float = 0.05,
    interrupt_prob: float = 0.05,
    ambiguity_width: int = 5,
) -> WorkflowModel:
    """13 classes: 11 anatomical phases, non-standard actions and camera-out-of-body.

    From anatomical phase i the workflow moves to i+1, skips to i+2, returns
    to i-1 or is interrupted by one of the two non-anatomical classes, after
    which it resumes phase i. Phase 11 ends the procedure.
    """
    for name, value in (("skip_prob", skip_prob), ("return_prob", return_prob), ("interrupt_prob", interrupt_prob)):
        if not 0.0 <= value <= 1.0:
            raise ConfigurationError(f"{name} must be in [0, 1], got {value}")
    c = len(RAMIE_PHASE_NAMES)
    last = RAMIE_ANATOMICAL - 1
    matrix = np.zeros((c, c))
    for i in range(last):
        row = matrix[i]
        if i + 2 <= last:
            row[i + 2] = skip_prob
        if i >= 1:
            row[i - 1] = return_prob
        row[NON_STANDARD_ACTION] = interrupt_prob / 2.0
        row[CAMERA_OUT_OF_BODY] = interrupt_prob / 2.0
        remaining = 1.0 - row.sum()
        if remaining <= 0.0:
            raise ConfigurationError(
                f"skip, return and interrupt probabilities leave no mass for moving on from phase {i + 1}"
            )
        row[i + 1] = remaining
    for i in (last, NON_STANDARD_ACTION, CAMERA_OUT_OF_BODY):
        matrix[i, 0] = 1.0

    durations = [
        DurationLaw(mean=m, dispersion=4.0, min_frames=5 if i < RAMIE_ANATOMICAL else 2)
        for i, m in enumerate(RAMIE_MEAN_FRAMES)
    ]
    return WorkflowModel(
        phase_names=RAMIE_PHASE_NAMES,
        transition=matrix.tolist(),
        durations=durations,
        initial_phase=0,
        terminal_phases=[last],
        interrupt_classes=[NON_STANDARD_ACTION, CAMERA_OUT_OF_BODY],
        ambiguity_width=ambiguity_width,
    )


def autolaparo_preset(swap_prob: float = 0.3, ambiguity_width: int = 5) -> WorkflowModel:
    """Seven sequential hysterectomy phases; phases 2 and 3 swap order with ``swap_prob``."""
    c = len(AUTOLAPARO_PHASE_NAMES)
    return WorkflowModel(
        phase_names=AUTOLAPARO_PHASE_NAMES,
        transition=_sequential(c).tolist(),
        durations=[DurationLaw(mean=m, dispersion=6.0, min_frames=5) for m in AUTOLAPARO_MEAN_FRAMES],
        initial_phase=0,
        terminal_phases=[c - 1],
        swap_pairs=[(1, 2)],
        swap_prob=swap_prob,
        ambiguity_width=ambiguity_width,
    )


def tiny_preset(num_classes: int = 5, ambiguity_width: int = 0) -> WorkflowModel:
    """Strictly sequential workflow with equal durations, for smoke tests."""
    if num_classes < 2:
        raise ConfigurationError(f"tiny preset needs at least 2 classes, got {num_classes}")
    return WorkflowModel(
        phase_names=[f"Phase {i + 1}" for i in range(num_classes)],
        transition=_sequential(num_classes).tolist(),
        durations=[DurationLaw(mean=40.0, dispersion=20.0, min_frames=5) for _ in range(num_classes)],
        initial_phase=0,
        terminal_phases=[num_classes - 1],
        ambiguity_width=ambiguity_width,
    )


PRESETS: Dict[str, Callable[..., WorkflowModel]] = {
    "ramie": ramie_preset,
    "autolaparo": autolaparo_preset,
    "tiny": tiny_preset,
}


def preset_from_config(cfg) -> WorkflowModel:
    """Build the preset named by a ``SynthConfig``."""
    if cfg.preset == "ramie":
        return ramie_preset(cfg.skip_prob, cfg.return_prob, cfg.interrupt_prob, cfg.ambiguity_width)
    if cfg.preset == "autolaparo":
        return autolaparo_preset(cfg.swap_prob, cfg.ambiguity_width)
    if cfg.preset == "tiny":
        return tiny_preset(cfg.num_classes, cfg.ambiguity_width)
    raise ConfigurationError(f"Unknown preset {cfg.preset!r}; choose one of {sorted(PRESETS)}")


def preset_names() -> List[str]:
    return sorted(PRESETS)
