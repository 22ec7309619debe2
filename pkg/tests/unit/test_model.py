"""Tests for the causal encoder-decoder, streaming inference and checkpoints."""

import json
import struct

import numpy as np
import pytest

from phaseseg.autodiff import Tensor, check_gradients
from phaseseg.config.settings import LossConfig, ModelConfig
from phaseseg.losses import total_loss
from phaseseg.network import (
    CausalPhaseModel,
    DecoderBlock,
    EncoderBlock,
    StreamingSession,
    WindowedCausalAttention,
    decode_checkpoint,
    encode_checkpoint,
    load_checkpoint,
    save_checkpoint,
    stage_predictions,
    streaming_infer,
    window_layout,
)
from phaseseg.network.layers import causal_window_mask
from phaseseg.utils.exceptions import DimensionError, EmptyInputError, FormatError, ParameterError

TOLERANCE = 1e-4


@pytest.fixture
def model(small_model_config):
    return CausalPhaseModel(small_model_config, seed=5)


@pytest.fixture
def features(rng, small_model_config):
    return rng.standard_normal((20, small_model_config.input_dim))


class TestWindowLayout:
    """Block partition of the timeline for windowed attention."""

    def test_blocks_cover_previous_and_current_window(self):
        query_index, query_valid, key_index, key_valid, w = window_layout(5, 2)
        assert w == 2
        assert query_index.tolist() == [[0, 1], [2, 3], [4, 5]]
        assert query_valid.tolist() == [[True, True], [True, True], [True, False]]
        assert key_index.tolist() == [[-2, -1, 0, 1], [0, 1, 2, 3], [2, 3, 4, 5]]
        assert key_valid[0].tolist() == [False, False, True, True]

    def test_window_longer_than_sequence(self):
        query_index, _, key_index, _, w = window_layout(3, 8)
        assert w == 3
        assert query_index.shape == (1, 3)
        assert key_index.shape == (1, 6)

    def test_mask_only_allows_past_keys(self):
        query_index, _, key_index, key_valid, _ = window_layout(6, 2)
        masked = causal_window_mask(query_index, key_index, key_valid)
        for b in range(query_index.shape[0]):
            for i, t in enumerate(query_index[b]):
                allowed = key_index[b][~masked[b, i]]
                assert all(k <= t for k in allowed)
                assert all(k >= 0 for k in allowed)
                assert t in allowed or t >= 6

    def test_invalid_window(self):
        with pytest.raises(ParameterError):
            window_layout(4, 0)


class TestWindowedAttention:
    """Windowed causal self- and cross-attention."""

    def test_gradient(self, rng):
        attention = WindowedCausalAttention(6, 4, rng)
        errors = check_gradients(attention, [Tensor(rng.standard_normal((11, 6)))])
        assert max(errors) < TOLERANCE

    def test_cross_attention_length_mismatch(self, rng):
        attention = WindowedCausalAttention(4, 2, rng)
        with pytest.raises(DimensionError):
            attention(Tensor(rng.standard_normal((5, 4))), memory=Tensor(rng.standard_normal((6, 4))))


class TestEncoderBlock:
    """A single encoder block."""

    def test_gradient_through_block(self, rng, small_model_config):
        block = EncoderBlock(small_model_config, layer=2, rng=rng)
        x = Tensor(rng.standard_normal((12, small_model_config.internal_dim)))
        errors = check_gradients(block, [x], max_entries=40)
        assert max(errors) < TOLERANCE

    def test_layer_sets_dilation_and_window(self, rng, small_model_config):
        block = EncoderBlock(small_model_config, layer=3, rng=rng)
        assert block.conv.dilation == 4
        assert block.self_attention.window == 4

    def test_layer_four_depends_on_frames_sixteen_back(self, rng):
        cfg = ModelConfig(num_layers=4, num_decoders=1, internal_dim=16, num_classes=3, input_dim=4)
        block = EncoderBlock(cfg, layer=4, rng=rng)
        length, t = 48, 40
        x = rng.standard_normal((length, cfg.internal_dim))
        base = block(Tensor(x)).data[t]
        # Frame 40 attends keys 32..40; each key's convolution reads k, k-8 and k-16.
        reachable = {k - m * 8 for k in range(32, t + 1) for m in range(3)}
        assert min(reachable) == t - 16 and max(reachable) == t

        for j in range(length):
            changed = x.copy()
            changed[j] += 3.0
            moved = not np.array_equal(block(Tensor(changed)).data[t], base)
            assert moved == (j in reachable), f"frame {j}"

    def test_zero_weights_give_identity(self, rng, small_model_config):
        x = rng.standard_normal((9, small_model_config.internal_dim))
        enc = rng.standard_normal((9, small_model_config.internal_dim))
        encoder_block = EncoderBlock(small_model_config, layer=2, rng=rng)
        decoder_block = DecoderBlock(small_model_config, layer=2, rng=rng)
        for block in (encoder_block, decoder_block):
            for p in block.parameters():
                p.data[...] = 0.0
        np.testing.assert_array_equal(encoder_block(Tensor(x)).data, x)
        np.testing.assert_array_equal(decoder_block(Tensor(x), Tensor(enc)).data, x)

    def test_decoder_block_is_causal_in_the_encoder_embedding(self, rng, small_model_config):
        block = DecoderBlock(small_model_config, layer=3, rng=rng)
        x = rng.standard_normal((16, small_model_config.internal_dim))
        enc = rng.standard_normal((16, small_model_config.internal_dim))
        changed = enc.copy()
        changed[10:] = rng.standard_normal(changed[10:].shape) * 10
        a = block(Tensor(x), Tensor(enc)).data
        b = block(Tensor(x), Tensor(changed)).data
        np.testing.assert_array_equal(a[:10], b[:10])
        assert not np.array_equal(a[10:], b[10:])


class TestCausalPhaseModel:
    """Forward pass, causality and predictions."""

    def test_stage_shapes(self, model, features, small_model_config):
        logits = model(features)
        assert len(logits) == small_model_config.num_stages == 3
        for stage in logits.stages:
            assert stage.shape == (20, small_model_config.num_classes)
        assert logits.to_array().shape == (3, 20, 3)

    def test_future_frames_do_not_change_past_outputs(self, model, features):
        changed = features.copy()
        changed[12:] = np.random.default_rng(0).standard_normal(changed[12:].shape) * 10
        a = model(features).to_array()
        b = model(changed).to_array()
        np.testing.assert_array_equal(a[:, :12], b[:, :12])

    def test_random_cuts_are_causal(self):
        rng = np.random.default_rng(77)
        for _ in range(12):
            cfg = ModelConfig(
                num_layers=int(rng.integers(1, 5)),
                num_decoders=int(rng.integers(0, 3)),
                internal_dim=6,
                num_classes=3,
                input_dim=4,
            )
            length = int(rng.integers(1, 41))
            t = int(rng.integers(0, length))
            model = CausalPhaseModel(cfg, seed=int(rng.integers(0, 1000)))
            features = rng.standard_normal((length, 4))
            changed = features.copy()
            changed[t + 1:] = rng.standard_normal(changed[t + 1:].shape) * 10
            a = model(features).to_array()
            b = model(changed).to_array()
            np.testing.assert_array_equal(a[:, :t + 1], b[:, :t + 1])

    def test_single_frame(self, model, features):
        logits = model(features[:1]).to_array()
        assert logits.shape == (3, 1, 3)
        assert np.all(np.isfinite(logits))
        session = StreamingSession(model)
        assert session.push(features[0]) == int(np.argmax(logits[-1, 0]))

    def test_prefix_matches_full_sequence(self, model, features):
        full = model(features).to_array()
        for t in (1, 3, 7, 13):
            prefix = model(features[:t]).to_array()
            np.testing.assert_allclose(prefix, full[:, :t], rtol=1e-9, atol=1e-12)

    def test_same_seed_same_parameters(self, small_model_config, features):
        a = CausalPhaseModel(small_model_config, seed=9)
        b = CausalPhaseModel(small_model_config, seed=9)
        np.testing.assert_array_equal(a(features).to_array(), b(features).to_array())

    def test_predictions(self, model, features):
        logits = model(features)
        labels = model.predict(features)
        assert labels.dtype == np.int64
        np.testing.assert_array_equal(labels, np.argmax(logits.final.data, axis=1))
        stages = stage_predictions(logits)
        assert len(stages) == 3
        np.testing.assert_array_equal(stages[-1], labels)

    def test_wrong_feature_width(self, model, rng):
        with pytest.raises(DimensionError) as exc_info:
            model(rng.standard_normal((5, 7)))
        assert exc_info.value.expected == (4,)

    def test_empty_sequence(self, model):
        with pytest.raises(EmptyInputError):
            model(np.zeros((0, 4)))

    def test_cast(self, model, features):
        model.cast("float32")
        assert model.cfg.dtype == "float32"
        assert all(p.dtype == np.float32 for p in model.parameters())
        assert model(features).final.dtype == np.float32

    def test_full_model_and_loss_gradient(self, model, rng):
        features = rng.standard_normal((10, 4))
        labels = np.array([0, 0, 0, 1, 1, 1, 1, 2, 2, 2])
        cfg = LossConfig(lambda_=0.15, stop_gradient_previous=False)
        params = [
            model.encoder.input_projection.weight,
            model.encoder.blocks[1].self_attention.key.weight,
            model.decoders[0].blocks[2].cross_attention.query.weight,
            model.decoders[-1].classifier.bias,
        ]

        def loss(*_):
            return total_loss(model(features), labels, cfg)

        errors = check_gradients(loss, params, max_entries=8)
        assert max(errors) < TOLERANCE


class TestStreaming:
    """Frame-by-frame causal inference."""

    def test_streaming_equals_batch(self, model, features):
        streamed = list(streaming_infer(model, features))
        np.testing.assert_array_equal(streamed, model.predict(features))

    def test_session_counts_frames(self, model, features):
        session = StreamingSession(model)
        for frame in features[:4]:
            session.push(frame)
        assert len(session) == 4
        assert session.labels == model.predict(features[:4]).tolist()

    def test_wrong_frame_width(self, model):
        session = StreamingSession(model)
        with pytest.raises(DimensionError):
            session.push(np.zeros(3))


class TestCheckpoint:
    """Binary checkpoint round trips and malformed files."""

    def test_round_trip(self, model, features, temp_dir):
        path = save_checkpoint(temp_dir / "model.pseg", model, {"training": {"epoch": 3}})
        loaded, header = load_checkpoint(path)
        assert header["training"]["epoch"] == 3
        assert header["model"]["num_layers"] == 3
        assert loaded.cfg == model.cfg
        for (name, a), (other, b) in zip(model.named_parameters(), loaded.named_parameters()):
            assert name == other
            np.testing.assert_array_equal(b.data, a.data.astype(np.float32).astype(np.float64))

    def test_parameters_stored_in_module_order(self, model):
        blob = encode_checkpoint(model)
        (header_len,) = struct.unpack_from("<I", blob, 8)
        (count,) = struct.unpack_from("<Q", blob, 12 + header_len)
        assert count == model.num_scalars()
        body = np.frombuffer(blob, dtype="<f4", offset=20 + header_len)
        first = model.parameters()[0].data.reshape(-1)
        np.testing.assert_array_equal(body[:first.size], first.astype(np.float32))

    def test_dtype_override(self, model):
        loaded, _ = decode_checkpoint(encode_checkpoint(model), dtype="float32")
        assert loaded.cfg.dtype == "float32"
        assert loaded.parameters()[0].dtype == np.float32

    def test_bad_magic(self, model):
        blob = b"XXXX" + encode_checkpoint(model)[4:]
        with pytest.raises(FormatError) as exc_info:
            decode_checkpoint(blob)
        assert exc_info.value.offset == 0
        assert "byte offset 0" in str(exc_info.value)

    def test_truncated_body(self, model):
        blob = encode_checkpoint(model)
        with pytest.raises(FormatError) as exc_info:
            decode_checkpoint(blob[:-6])
        assert exc_info.value.offset == len(blob) - 6

    def test_trailing_bytes(self, model):
        blob = encode_checkpoint(model)
        with pytest.raises(FormatError) as exc_info:
            decode_checkpoint(blob + b"\x00")
        assert exc_info.value.offset == len(blob)

    def test_unsupported_version(self, model):
        blob = bytearray(encode_checkpoint(model))
        struct.pack_into("<I", blob, 4, 99)
        with pytest.raises(FormatError) as exc_info:
            decode_checkpoint(bytes(blob))
        assert exc_info.value.offset == 4

    @staticmethod
    def _with_header(blob, edit):
        (header_len,) = struct.unpack_from("<I", blob, 8)
        header = json.loads(blob[12:12 + header_len])
        edit(header)
        raw = json.dumps(header, sort_keys=True).encode("utf-8")
        return blob[:4] + struct.pack("<II", 1, len(raw)) + raw + blob[12 + header_len:]

    def test_header_without_model(self, model):
        blob = self._with_header(encode_checkpoint(model), lambda h: h.pop("model"))
        with pytest.raises(FormatError) as exc_info:
            decode_checkpoint(blob)
        assert exc_info.value.offset == 12
        assert "byte offset 12" in str(exc_info.value)

    def test_header_with_invalid_model_config(self, model):
        blob = self._with_header(encode_checkpoint(model), lambda h: h["model"].update(num_layers=0))
        with pytest.raises(FormatError) as exc_info:
            decode_checkpoint(blob)
        assert exc_info.value.offset == 12

    def test_missing_file(self, temp_dir):
        with pytest.raises(FormatError):
            load_checkpoint(temp_dir / "absent.pseg")
