"""Dense tensors with reverse-mode gradients."""

import itertools
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ..utils.exceptions import NonFiniteError, ParameterError, DimensionError


_node_ids = itertools.count()
_state = threading.local()


def is_grad_enabled() -> bool:
    """Whether new operations are being recorded for backward."""
    return getattr(_state, "grad_enabled", True)


@contextmanager
def no_grad() -> Iterator[None]:
    """Run forward passes without recording a graph."""
    previous = is_grad_enabled()
    _state.grad_enabled = False
    try:
        yield
    finally:
        _state.grad_enabled = previous


def check_finite(data: np.ndarray, op: str) -> None:
    if not np.isfinite(data).all():
        raise NonFiniteError(f"Non-finite values produced by {op}", op=op)


class Tensor:
    """N-dimensional real array with an optional gradient buffer.

    Tensors created by operations keep references to their inputs and a
    closure that pushes the output gradient back to them. Leaves created by
    the user carry ``requires_grad`` to say whether they collect gradients.
    """

    def __init__(
        self,
        data,
        requires_grad: bool = False,
        _parents: Tuple["Tensor", ...] = (),
        _op: str = "leaf",
    ):
        array = np.asarray(data)
        if not np.issubdtype(array.dtype, np.floating):
            array = array.astype(np.float64)
        self.data: np.ndarray = array
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = requires_grad
        self.op = _op
        self.id = next(_node_ids)
        self._parents = _parents
        self._backward: Optional[Callable[[np.ndarray], None]] = None

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def __len__(self) -> int:
        return self.data.shape[0]

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, op={self.op!r}, requires_grad={self.requires_grad})"

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def accumulate(self, grad: np.ndarray) -> None:
        """Add ``grad`` into this tensor's buffer."""
        if not self.requires_grad:
            return
        if grad.shape != self.data.shape:
            raise DimensionError(
                f"Gradient shape {grad.shape} does not match tensor shape {self.data.shape}",
                expected=self.data.shape,
                actual=grad.shape,
            )
        if self.grad is None:
            self.grad = np.array(grad, dtype=self.data.dtype, copy=True)
        else:
            self.grad = self.grad + grad

    def backward(self, grad: Optional[np.ndarray] = None) -> "Graph":
        """Propagate gradients from this tensor to every leaf that requires them."""
        if not self.requires_grad:
            raise ParameterError("backward() called on a tensor that does not require gradients")
        if grad is None:
            if self.data.size != 1:
                raise ParameterError("backward() without a seed gradient needs a single-element tensor")
            grad = np.ones_like(self.data)
        graph = Graph.from_output(self)
        # Interior gradients are per pass; only leaves accumulate across passes.
        for node in graph.nodes:
            if node._backward is not None:
                node.grad = None
        self.accumulate(np.asarray(grad, dtype=self.data.dtype))
        for node in reversed(graph.nodes):
            if node._backward is None or node.grad is None:
                continue
            node._backward(node.grad)
        for node in graph.nodes:
            if node.grad is not None:
                check_finite(node.grad, f"backward of {node.op}")
        return graph

    # Operator sugar; the functional forms live in ops.py.
    def __add__(self, other):
        from . import ops
        return ops.add(self, other)

    def __sub__(self, other):
        from . import ops
        return ops.sub(self, other)

    def __mul__(self, other):
        from . import ops
        return ops.mul(self, other)

    def __matmul__(self, other):
        from . import ops
        return ops.matmul(self, other)

    def __neg__(self):
        from . import ops
        return ops.scale(self, -1.0)


@dataclass(frozen=True)
class OperationRecord:
    """One executed operation: its output node and the nodes it read."""

    op: str
    node_id: int
    input_ids: Tuple[int, ...]


class Graph:
    """Executed operations in topological order (inputs before outputs)."""

    def __init__(self, nodes: Sequence[Tensor]):
        self.nodes: List[Tensor] = list(nodes)
        self.records: List[OperationRecord] = [
            OperationRecord(node.op, node.id, tuple(p.id for p in node._parents))
            for node in self.nodes
        ]

    @classmethod
    def from_output(cls, output: Tensor) -> "Graph":
        order: List[Tensor] = []
        visited = set()
        stack = [(output, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if node.id in visited:
                continue
            visited.add(node.id)
            stack.append((node, True))
            for parent in reversed(node._parents):
                if parent.id not in visited:
                    stack.append((parent, False))
        return cls(order)

    def __len__(self) -> int:
        return len(self.nodes)

    def __iter__(self):
        return iter(self.records)
