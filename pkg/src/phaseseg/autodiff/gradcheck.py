"""Central finite-difference gradient checking."""

from typing import Callable, List, Optional, Sequence

import numpy as np

from ..utils.exceptions import ParameterError
from .tensor import Tensor


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-3) -> np.ndarray:
    """Element-wise |a - n| / max(|a|, |n|, floor).

    Entries whose magnitudes are both below ``floor`` are compared in absolute
    terms, scaled by ``1 / floor``; pass a smaller floor to check tiny gradients.
    """
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return np.abs(analytic - numeric) / scale


def check_gradients(
    fn: Callable[..., Tensor],
    inputs: Sequence[Tensor],
    eps: float = 1e-5,
    max_entries: Optional[int] = None,
    seed: int = 0,
    floor: float = 1e-3,
) -> List[float]:
    """Compare backward() against central differences for every input.

    ``fn`` maps the inputs to a tensor. Non-scalar outputs are reduced with a
    fixed random projection so every output entry contributes to the check.
    Inputs must be float64 and are restored after perturbation.

    Args:
        fn: Function under test
        inputs: Tensors to differentiate with respect to
        eps: Finite-difference step
        max_entries: Check at most this many random entries per input
        seed: Seed of the projection and of the entry subset
        floor: Gradient magnitude below which the error is absolute,
            |a - n| / floor, instead of relative

    Returns:
        Maximum relative error per input.
    """
    for x in inputs:
        if x.dtype != np.float64:
            raise ParameterError(f"Gradient checks need float64 inputs, got {x.dtype}")
        x.data = np.ascontiguousarray(x.data)

    rng = np.random.default_rng(seed)
    shaped = fn(*inputs)
    projection = rng.standard_normal(shaped.shape) if shaped.data.size != 1 else None

    def objective() -> float:
        out = fn(*inputs)
        if projection is None:
            return float(out.data.sum())
        return float((out.data * projection).sum())

    for x in inputs:
        x.requires_grad = True
        x.zero_grad()
    out = fn(*inputs)
    seed_grad = np.ones_like(out.data) if projection is None else projection.astype(out.dtype)
    out.backward(seed_grad)
    analytic = [x.grad if x.grad is not None else np.zeros_like(x.data) for x in inputs]

    errors: List[float] = []
    for x, grad in zip(inputs, analytic):
        flat = x.data.reshape(-1)
        entries = np.arange(flat.size)
        if max_entries is not None and flat.size > max_entries:
            entries = np.sort(rng.choice(flat.size, size=max_entries, replace=False))
        numeric = np.empty(entries.size)
        for n, i in enumerate(entries):
            original = flat[i]
            flat[i] = original + eps
            plus = objective()
            flat[i] = original - eps
            minus = objective()
            flat[i] = original
            numeric[n] = (plus - minus) / (2.0 * eps)
        err = relative_error(grad.reshape(-1)[entries], numeric, floor=floor)
        errors.append(float(err.max()) if err.size else 0.0)
    return errors
