"""Encoder and decoder blocks and the stacks built from them."""

from typing import Tuple

import numpy as np

from ..autodiff import Tensor
from ..autodiff import ops
from ..config.settings import ModelConfig
from ..utils.exceptions import DimensionError
from .layers import CausalConv1d, Linear, WindowedCausalAttention
from .module import Module, ModuleList


class EncoderBlock(Module):
    """Causal dilated convolution, windowed self-attention and a pointwise map, with a residual.

    ``out = x + s * W(a)`` where ``f = relu(conv(x))`` and ``a = f + attn(f)``.
    Layer ``l`` uses dilation and window ``2**(l-1)``.
    """

    def __init__(self, cfg: ModelConfig, layer: int, rng: np.random.Generator):
        super().__init__()
        self.layer = layer
        self.residual_scale = cfg.residual_scale
        d = cfg.internal_dim
        self.conv = CausalConv1d(d, d, cfg.kernel_size, cfg.dilation(layer), rng, cfg.dtype)
        self.self_attention = WindowedCausalAttention(d, cfg.window(layer), rng, cfg.dtype)
        self.pointwise = Linear(d, d, rng, cfg.dtype)

    def _features(self, x: Tensor) -> Tensor:
        f = ops.relu(self.conv(x))
        return ops.add(f, self.self_attention(f))

    def _residual(self, x: Tensor, a: Tensor) -> Tensor:
        branch = self.pointwise(a)
        if self.residual_scale != 1.0:
            branch = ops.scale(branch, self.residual_scale)
        return ops.add(x, branch)

    def forward(self, x: Tensor) -> Tensor:
        return self._residual(x, self._features(x))


class DecoderBlock(EncoderBlock):
    """Encoder block plus cross-attention from the decoder state to the encoder embedding."""

    def __init__(self, cfg: ModelConfig, layer: int, rng: np.random.Generator):
        super().__init__(cfg, layer, rng)
        self.cross_attention = WindowedCausalAttention(cfg.internal_dim, cfg.window(layer), rng, cfg.dtype)

    def forward(self, x: Tensor, enc: Tensor) -> Tensor:
        if enc.shape[0] != x.shape[0]:
            raise DimensionError(
                f"Decoder state has {x.shape[0]} frames but the encoder embedding has {enc.shape[0]}",
                expected=(x.shape[0],),
                actual=(enc.shape[0],),
            )
        a = self._features(x)
        a = ops.add(a, self.cross_attention(a, memory=enc))
        return self._residual(x, a)


class Encoder(Module):
    """Input projection, L encoder blocks and a classifier."""

    def __init__(self, cfg: ModelConfig, rng: np.random.Generator):
        super().__init__()
        self.input_projection = Linear(cfg.input_dim, cfg.internal_dim, rng, cfg.dtype)
        self.blocks = ModuleList(EncoderBlock(cfg, layer, rng) for layer in range(1, cfg.num_layers + 1))
        self.classifier = Linear(cfg.internal_dim, cfg.num_classes, rng, cfg.dtype)

    def forward(self, features: Tensor) -> Tuple[Tensor, Tensor]:
        """Return (logits, embedding)."""
        h = self.input_projection(features)
        for block in self.blocks:
            h = block(h)
        return self.classifier(h), h


class Decoder(Module):
    """Refines the previous stage's class probabilities using the encoder embedding."""

    def __init__(self, cfg: ModelConfig, rng: np.random.Generator):
        super().__init__()
        self.input_projection = Linear(cfg.num_classes, cfg.internal_dim, rng, cfg.dtype)
        self.blocks = ModuleList(DecoderBlock(cfg, layer, rng) for layer in range(1, cfg.num_layers + 1))
        self.classifier = Linear(cfg.internal_dim, cfg.num_classes, rng, cfg.dtype)

    def forward(self, previous_logits: Tensor, enc: Tensor) -> Tensor:
        h = self.input_projection(ops.softmax(previous_logits, axis=-1))
        for block in self.blocks:
            h = block(h, enc)
        return self.classifier(h)
