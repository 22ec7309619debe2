"""Adam optimizer."""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from ..utils.exceptions import DimensionError, ParameterError
from .tensor import Tensor


@dataclass
class AdamState:
    """First and second moment buffers, one per parameter."""

    step: int = 0
    m: List[np.ndarray] = field(default_factory=list)
    v: List[np.ndarray] = field(default_factory=list)

    @classmethod
    def zeros_like(cls, params: Sequence[np.ndarray]) -> "AdamState":
        return cls(
            step=0,
            m=[np.zeros_like(p) for p in params],
            v=[np.zeros_like(p) for p in params],
        )


def adam_step(
    params: Sequence[np.ndarray],
    grads: Sequence[np.ndarray],
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> Tuple[List[np.ndarray], AdamState]:
    """One bias-corrected Adam update.

    Args:
        params: Current parameter arrays
        grads: Gradients shaped like ``params``
        state: Moment buffers shaped like ``params``
        lr: Learning rate, must be positive
        beta1: First-moment decay
        beta2: Second-moment decay
        eps: Denominator guard

    Returns:
        The updated parameters and a new state; inputs are not modified.
    """
    if lr <= 0:
        raise ParameterError(f"Learning rate must be positive, got {lr}", {"lr": lr})
    if not (len(params) == len(grads) == len(state.m) == len(state.v)):
        raise DimensionError(
            "adam_step needs one gradient and one moment pair per parameter",
            expected=(len(params),),
            actual=(len(grads), len(state.m), len(state.v)),
        )

    step = state.step + 1
    correction1 = 1.0 - beta1 ** step
    correction2 = 1.0 - beta2 ** step
    new_params, new_m, new_v = [], [], []
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if not (p.shape == g.shape == m.shape == v.shape):
            raise DimensionError(
                f"Parameter {p.shape}, gradient {g.shape} and moments {m.shape}/{v.shape} disagree",
                expected=p.shape,
                actual=g.shape,
            )
        m = beta1 * m + (1.0 - beta1) * g
        v = beta2 * v + (1.0 - beta2) * (g * g)
        m_hat = m / correction1
        v_hat = v / correction2
        update = lr * m_hat / (np.sqrt(v_hat) + eps)
        new_params.append((p - update).astype(p.dtype, copy=False))
        new_m.append(m.astype(p.dtype, copy=False))
        new_v.append(v.astype(p.dtype, copy=False))
    return new_params, AdamState(step=step, m=new_m, v=new_v)


class Adam:
    """Adam over a fixed list of parameter tensors."""

    def __init__(
        self,
        params: Sequence[Tensor],
        lr: float,
        betas: Tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8,
    ):
        if lr <= 0:
            raise ParameterError(f"Learning rate must be positive, got {lr}", {"lr": lr})
        self.params = list(params)
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.state = AdamState.zeros_like([p.data for p in self.params])

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()

    def step(self) -> None:
        # Parameters that took no part in the forward pass see a zero gradient.
        grads = [p.grad if p.grad is not None else np.zeros_like(p.data) for p in self.params]
        updated, self.state = adam_step(
            [p.data for p in self.params],
            grads,
            self.state,
            self.lr,
            self.beta1,
            self.beta2,
            self.eps,
        )
        for p, data in zip(self.params, updated):
            p.data = data

    def state_dict(self) -> Dict[str, Any]:
        """Hyper-parameters recorded alongside checkpoints."""
        return {
            "name": "adam",
            "lr": self.lr,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "eps": self.eps,
            "step": self.state.step,
        }
