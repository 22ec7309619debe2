"""
phaseseg

Causal surgical phase segmentation: a hierarchical-attention encoder with
refinement decoders, trained on per-frame feature sequences, plus synthetic
workflow data, segmentation metrics and reports.
"""

__version__ = "0.1.0"

from .config.settings import Settings
from .network.model import CausalPhaseModel
from .synthdata.dataset import generate_dataset
from .training.evaluator import evaluate
from .training.trainer import train

__all__ = [
    "Settings",
    "CausalPhaseModel",
    "generate_dataset",
    "train",
    "evaluate",
]
