"""Causal hierarchical-attention encoder-decoder."""

from .blocks import Decoder, DecoderBlock, Encoder, EncoderBlock
from .checkpoint import decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint
from .layers import CausalConv1d, Linear, WindowedCausalAttention, window_layout
from .model import CausalPhaseModel, StageLogits, stage_predictions
from .module import Module, ModuleList
from .streaming import StreamingSession, streaming_infer

__all__ = [
    "CausalPhaseModel",
    "StageLogits",
    "stage_predictions",
    "Encoder",
    "Decoder",
    "EncoderBlock",
    "DecoderBlock",
    "Linear",
    "CausalConv1d",
    "WindowedCausalAttention",
    "window_layout",
    "Module",
    "ModuleList",
    "StreamingSession",
    "streaming_infer",
    "encode_checkpoint",
    "decode_checkpoint",
    "save_checkpoint",
    "load_checkpoint",
]
