"""The causal encoder-decoder phase model."""

from dataclasses import dataclass
from typing import List, Optional, Union

import numpy as np

from ..autodiff import Tensor, no_grad
from ..config.settings import ModelConfig
from ..utils.exceptions import DimensionError, EmptyInputError
from ..utils.logging import get_logger
from .blocks import Decoder, Encoder
from .module import Module, ModuleList


logger = get_logger(__name__)


@dataclass
class StageLogits:
    """Logits of every stage, encoder first: ``(1 + num_decoders)`` tensors of shape (T, C)."""

    stages: List[Tensor]

    def __post_init__(self):
        if not self.stages:
            raise DimensionError("StageLogits needs at least one stage")
        shape = self.stages[0].shape
        if len(shape) != 2:
            raise DimensionError(f"Stage logits must be (T, C), got {shape}", actual=shape)
        for stage in self.stages[1:]:
            if stage.shape != shape:
                raise DimensionError("All stages must share T and C", expected=shape, actual=stage.shape)

    def __len__(self) -> int:
        return len(self.stages)

    def __getitem__(self, index: int) -> Tensor:
        return self.stages[index]

    @property
    def num_frames(self) -> int:
        return self.stages[0].shape[0]

    @property
    def num_classes(self) -> int:
        return self.stages[0].shape[1]

    @property
    def final(self) -> Tensor:
        return self.stages[-1]

    def predictions(self, stage: int = -1) -> np.ndarray:
        """Per-frame argmax labels of one stage."""
        return np.argmax(self.stages[stage].data, axis=1).astype(np.int64)

    def to_array(self) -> np.ndarray:
        return np.stack([s.data for s in self.stages])


def stage_predictions(logits: StageLogits) -> List[np.ndarray]:
    """Argmax labels of every stage, encoder first."""
    return [logits.predictions(s) for s in range(len(logits))]


class CausalPhaseModel(Module):
    """One encoder followed by ``num_decoders`` refinement decoders, all causal."""

    def __init__(self, cfg: ModelConfig, seed: int = 0):
        super().__init__()
        self.cfg = cfg
        self.seed = seed
        rng = np.random.default_rng(seed)
        self.encoder = Encoder(cfg, rng)
        self.decoders = ModuleList(Decoder(cfg, rng) for _ in range(cfg.num_decoders))
        logger.debug(
            "Built model",
            layers=cfg.num_layers,
            decoders=cfg.num_decoders,
            scalars=self.num_scalars(),
            seed=seed,
        )

    def forward(self, features: Union[Tensor, np.ndarray]) -> StageLogits:
        """Run every stage on a (T, D) feature sequence.

        Args:
            features: Per-frame features, D must equal ``cfg.input_dim``

        Returns:
            Logits of the encoder and of each decoder.
        """
        if not isinstance(features, Tensor):
            features = Tensor(np.asarray(features, dtype=self.cfg.dtype))
        elif features.dtype != np.dtype(self.cfg.dtype):
            features = Tensor(features.data.astype(self.cfg.dtype))
        if features.ndim != 2:
            raise DimensionError(f"Features must be (T, D), got {features.shape}", actual=features.shape)
        if features.shape[1] != self.cfg.input_dim:
            raise DimensionError(
                f"Feature dimension {features.shape[1]} does not match model input_dim {self.cfg.input_dim}",
                expected=(self.cfg.input_dim,),
                actual=(features.shape[1],),
            )
        if features.shape[0] == 0:
            raise EmptyInputError("Cannot run the model on a sequence with no frames")

        logits, embedding = self.encoder(features)
        stages = [logits]
        for decoder in self.decoders:
            logits = decoder(logits, embedding)
            stages.append(logits)
        return StageLogits(stages)

    def predict(self, features: Union[Tensor, np.ndarray], stage: int = -1) -> np.ndarray:
        with no_grad():
            return self.forward(features).predictions(stage)

    def cast(self, dtype: Optional[str]) -> "CausalPhaseModel":
        """Convert every parameter to ``dtype`` in place."""
        if dtype is None or np.dtype(dtype) == np.dtype(self.cfg.dtype):
            return self
        for p in self.parameters():
            p.data = p.data.astype(dtype)
        self.cfg = self.cfg.model_copy(update={"dtype": dtype})
        return self
