"""Training, evaluation and seed-swept experiments."""

from .evaluator import Evaluator, Video, check_compatible, evaluate, evaluate_stages, load_split
from .experiments import (
    ExperimentRunner,
    ExperimentSummary,
    RefinementComparison,
    RunSummary,
    SmoothingAblation,
    run_experiments,
)
from .history import HISTORY_FIELDS, EpochRecord, TrainHistory
from .trainer import CHECKPOINT_NAME, HISTORY_NAME, Trainer, TrainResult, train

__all__ = [
    "Evaluator",
    "Video",
    "check_compatible",
    "evaluate",
    "evaluate_stages",
    "load_split",
    "ExperimentRunner",
    "ExperimentSummary",
    "RefinementComparison",
    "RunSummary",
    "SmoothingAblation",
    "run_experiments",
    "HISTORY_FIELDS",
    "EpochRecord",
    "TrainHistory",
    "CHECKPOINT_NAME",
    "HISTORY_NAME",
    "Trainer",
    "TrainResult",
    "train",
]
