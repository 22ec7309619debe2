"""Minimal reverse-mode automatic differentiation."""

from . import ops
from .gradcheck import check_gradients, relative_error
from .optim import Adam, AdamState, adam_step
from .tensor import Graph, OperationRecord, Tensor, check_finite, is_grad_enabled, no_grad

__all__ = [
    "ops",
    "Tensor",
    "Graph",
    "OperationRecord",
    "no_grad",
    "is_grad_enabled",
    "check_finite",
    "check_gradients",
    "relative_error",
    "Adam",
    "AdamState",
    "adam_step",
]
