"""Frame-by-frame causal inference."""

from typing import Iterable, Iterator, List

import numpy as np

from ..autodiff import no_grad
from ..utils.exceptions import DimensionError
from ..utils.logging import get_logger
from .model import CausalPhaseModel


logger = get_logger(__name__)


class StreamingSession:
    """Single-owner session that labels frames as they arrive.

    Each pushed frame is appended to the buffered prefix and the label for it
    is the final stage's argmax at the last position of a forward pass over
    that prefix. Emitted labels are never revised.
    """

    def __init__(self, model: CausalPhaseModel):
        self.model = model
        self._frames: List[np.ndarray] = []
        self.labels: List[int] = []

    def __len__(self) -> int:
        return len(self.labels)

    def push(self, frame) -> int:
        frame = np.asarray(frame, dtype=self.model.cfg.dtype).reshape(-1)
        if frame.shape[0] != self.model.cfg.input_dim:
            raise DimensionError(
                f"Frame {len(self._frames)} has {frame.shape[0]} features, model expects {self.model.cfg.input_dim}",
                expected=(self.model.cfg.input_dim,),
                actual=frame.shape,
            )
        self._frames.append(frame)
        with no_grad():
            logits = self.model(np.stack(self._frames))
        label = int(np.argmax(logits.final.data[-1]))
        self.labels.append(label)
        return label


def streaming_infer(model: CausalPhaseModel, frames: Iterable) -> Iterator[int]:
    """Yield one label per incoming frame."""
    session = StreamingSession(model)
    for frame in frames:
        yield session.push(frame)
    logger.debug("Stream finished", frames=len(session))
