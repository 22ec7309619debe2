"""Tests for synthetic workflows, feature synthesis and dataset generation."""

import numpy as np
import pytest
from pydantic import ValidationError

from phaseseg.config.settings import SynthConfig
from phaseseg.models.manifest import DatasetManifest
from phaseseg.models.sequences import segments_from_frames
from phaseseg.synthdata import (
    DurationLaw,
    WorkflowModel,
    autolaparo_preset,
    class_anchors,
    fit_durations,
    generate_dataset,
    generate_video,
    load_video,
    preset_from_config,
    ramie_preset,
    split_counts,
    synthesize_features,
    tiny_preset,
    transition_mask,
    video_seeds,
)
from phaseseg.synthdata.features import FeatureSequence
from phaseseg.synthdata.presets import CAMERA_OUT_OF_BODY, NON_STANDARD_ACTION
from phaseseg.utils.exceptions import ConfigurationError, DataError, GenerationError, ParameterError


def segment_labels(seq):
    return segments_from_frames(seq).labels


class TestWorkflowModel:
    """Test workflow validation."""

    def _model(self, transition):
        return WorkflowModel(
            phase_names=["a", "b"],
            transition=transition,
            durations=[DurationLaw(mean=10.0), DurationLaw(mean=10.0)],
        )

    def test_valid_model(self):
        model = self._model([[0.0, 1.0], [1.0, 0.0]])
        assert model.num_classes == 2

    def test_rows_must_sum_to_one(self):
        """Test row-stochastic check."""
        with pytest.raises(ValidationError):
            self._model([[0.0, 0.9], [1.0, 0.0]])

    def test_diagonal_must_be_zero(self):
        """Test self-transitions are rejected."""
        with pytest.raises(ValidationError):
            self._model([[0.5, 0.5], [1.0, 0.0]])

    def test_minimum_duration(self):
        with pytest.raises(ValidationError):
            DurationLaw(mean=10.0, min_frames=0)


class TestPresets:
    """Test the dataset-shaped workflow presets."""

    def test_ramie_classes(self):
        """Test the ramie preset has 13 row-stochastic classes."""
        model = ramie_preset()
        assert model.num_classes == 13
        np.testing.assert_allclose(model.matrix.sum(axis=1), 1.0, atol=1e-9)

    def test_ramie_without_returns_moves_forward(self):
        """Test anatomical phases never go back when the return probability is 0."""
        model = ramie_preset(return_prob=0.0, skip_prob=0.1, interrupt_prob=0.2)
        interrupts = {NON_STANDARD_ACTION, CAMERA_OUT_OF_BODY}
        for seed in range(50):
            anatomical = [p for p in segment_labels(generate_video(model, seed)) if p not in interrupts]
            assert anatomical == sorted(anatomical)

    def test_ramie_interrupts_resume(self):
        """Test leaving an interrupt class goes back to the interrupted phase."""
        model = ramie_preset(interrupt_prob=0.3)
        interrupts = {NON_STANDARD_ACTION, CAMERA_OUT_OF_BODY}
        for seed in range(30):
            labels = segment_labels(generate_video(model, seed))
            for i in range(1, len(labels) - 1):
                if labels[i] in interrupts:
                    assert labels[i + 1] == labels[i - 1]

    def test_ramie_rejects_impossible_probabilities(self):
        with pytest.raises(ConfigurationError):
            ramie_preset(skip_prob=0.5, return_prob=0.5, interrupt_prob=0.1)

    def test_autolaparo_classes(self):
        assert autolaparo_preset().num_classes == 7

    def test_autolaparo_no_swap_is_ordered(self):
        """Test swap probability 0 gives phases 1..7 in order."""
        model = autolaparo_preset(swap_prob=0.0)
        for seed in range(20):
            assert segment_labels(generate_video(model, seed)) == list(range(7))

    def test_autolaparo_always_swapped(self):
        """Test swap probability 1 puts phase 3 before phase 2 for every seed."""
        model = autolaparo_preset(swap_prob=1.0)
        for seed in range(100):
            labels = segment_labels(generate_video(model, seed))
            assert labels.index(2) < labels.index(1)

    def test_preset_from_config(self):
        assert preset_from_config(SynthConfig(preset="autolaparo")).num_classes == 7
        assert preset_from_config(SynthConfig(preset="tiny", num_classes=4)).num_classes == 4
        assert preset_from_config(SynthConfig()).num_classes == 13


class TestGenerateVideo:
    """Test semi-Markov label sampling."""

    def test_deterministic(self):
        model = ramie_preset()
        a = generate_video(model, 11, 300)
        b = generate_video(model, 11, 300)
        np.testing.assert_array_equal(a.labels, b.labels)

    def test_distinct_seeds(self):
        """Test 1000 seeds give 1000 different sequences."""
        model = ramie_preset()
        seen = {generate_video(model, seed).labels.tobytes() for seed in range(1000)}
        assert len(seen) == 1000

    def test_target_length_and_minimum_runs(self):
        """Test exact length and that every run keeps its minimum duration."""
        model = autolaparo_preset()
        for seed in range(20):
            seq = generate_video(model, seed, 200)
            assert len(seq) == 200
            assert all(s.length >= 5 for s in segments_from_frames(seq))

    def test_target_below_minimum(self):
        with pytest.raises(GenerationError):
            generate_video(tiny_preset(), 0, 3)

    def test_transition_frequencies_match_matrix(self):
        """Test empirical next-phase frequencies are within 0.05 of the matrix."""
        model = ramie_preset(skip_prob=0.1, return_prob=0.1, interrupt_prob=0.1)
        interrupts = set(model.interrupt_classes)
        counts = np.zeros((model.num_classes, model.num_classes))
        rng = np.random.default_rng(0)
        while counts.sum() < 10_000:
            path = model.sample_path(rng)
            for a, b in zip(path[:-1], path[1:]):
                if a not in interrupts:
                    counts[a, b] += 1
        for row in range(model.num_classes):
            if counts[row].sum() < 500:
                continue
            freq = counts[row] / counts[row].sum()
            np.testing.assert_allclose(freq, model.matrix[row], atol=0.05)


class TestFitDurations:
    """Test run-length rescaling."""

    def test_sums_to_target(self):
        result = fit_durations([10, 40, 7], [5, 5, 5], 100)
        assert sum(result) == 100
        assert all(r >= 5 for r in result)

    def test_budget_too_small(self):
        with pytest.raises(GenerationError):
            fit_durations([10, 10], [5, 5], 9)


class TestSynthesizeFeatures:
    """Test class-anchor feature synthesis."""

    def test_noise_free_is_piecewise_constant(self):
        labels = np.array([0, 0, 0, 1, 1, 2])
        features = synthesize_features(labels, dim=4, noise_scale=0.0, ambiguity_width=0, seed=1, num_classes=3)
        anchors = class_anchors(3, 4).astype(np.float32)
        np.testing.assert_array_equal(features.data, anchors[labels])
        assert features.source == "synthetic"

    def test_blend_midpoint_is_equidistant(self):
        labels = np.array([0] * 10 + [1] * 10)
        features = synthesize_features(labels, dim=8, noise_scale=0.0, ambiguity_width=3, seed=1, num_classes=2)
        anchors = class_anchors(2, 8)
        mid = features.data[10].astype(np.float64)
        assert np.linalg.norm(mid - anchors[0]) == pytest.approx(np.linalg.norm(mid - anchors[1]), rel=1e-5)
        np.testing.assert_allclose(features.data[5], anchors[0], rtol=1e-6)
        np.testing.assert_allclose(features.data[15], anchors[1], rtol=1e-6)

    def test_nearest_anchor_accuracy(self):
        """Test low-noise features are separable away from transitions."""
        model = ramie_preset()
        seq = generate_video(model, 4, 800)
        features = synthesize_features(seq, dim=16, noise_scale=0.1, ambiguity_width=5, seed=2)
        anchors = class_anchors(13, 16)
        distances = np.linalg.norm(features.data[:, None, :] - anchors[None, :, :], axis=2)
        predicted = distances.argmin(axis=1)
        outside = ~transition_mask(seq.labels, 5)
        assert np.mean(predicted[outside] == seq.labels[outside]) > 0.95

    def test_deterministic_per_seed(self):
        labels = np.array([0, 1, 1, 0])
        a = synthesize_features(labels, 3, 0.5, 1, seed=9, num_classes=2)
        b = synthesize_features(labels, 3, 0.5, 1, seed=9, num_classes=2)
        np.testing.assert_array_equal(a.data, b.data)

    def test_dimension_too_small(self):
        with pytest.raises(ParameterError):
            synthesize_features(np.array([0, 1]), dim=1, noise_scale=0.1, ambiguity_width=0, seed=0)

    def test_non_finite_features(self):
        data = np.zeros((3, 2))
        data[1, 0] = np.nan
        with pytest.raises(DataError) as exc_info:
            FeatureSequence(data)
        assert exc_info.value.index == 1

    def test_transition_mask(self):
        mask = transition_mask(np.array([0, 0, 0, 0, 1, 1, 1, 1]), 1)
        assert mask.tolist() == [False, False, False, True, True, True, False, False]


class TestDatasetGeneration:
    """Test whole datasets on disk."""

    def test_split_counts(self):
        """Test the 14/4/9 ratio."""
        assert split_counts(27) == (14, 4, 9)
        assert split_counts(4) == (2, 1, 1)
        assert sum(split_counts(11)) == 11

    def test_video_seeds_differ(self):
        assert video_seeds(1, 0) != video_seeds(1, 1)
        assert video_seeds(1, 0) == video_seeds(1, 0)

    def test_tiny_dataset(self, tiny_dataset, tiny_synth_config):
        """Test files, manifest and splits of a generated dataset."""
        assert tiny_dataset.split_counts() == {"train": 2, "val": 1, "test": 1}
        assert tiny_dataset.num_classes == 5
        assert tiny_dataset.feature_dim == 8
        reloaded = DatasetManifest.load(tiny_dataset.root / "manifest.json")
        assert reloaded.videos == tiny_dataset.videos
        for entry in reloaded.videos:
            features, labels = load_video(reloaded, entry)
            assert features.num_frames == len(labels) == entry.num_frames
            assert tiny_synth_config.min_length <= len(labels) <= tiny_synth_config.max_length

    def test_same_seed_same_bytes(self, tiny_synth_config, temp_dir):
        """Test generation is byte-for-byte reproducible."""
        a = generate_dataset(tiny_synth_config, temp_dir / "a")
        b = generate_dataset(tiny_synth_config, temp_dir / "b")
        for entry in a.videos:
            for kind in ("features", "labels"):
                path = getattr(entry, kind)
                assert (a.root / path).read_bytes() == (b.root / path).read_bytes()
        assert (a.root / "manifest.json").read_text() == (b.root / "manifest.json").read_text()

    def test_length_below_workflow_minimum(self, temp_dir):
        cfg = SynthConfig(preset="tiny", videos=2, min_length=3, max_length=4, feature_dim=4)
        with pytest.raises(ConfigurationError):
            generate_dataset(cfg, temp_dir / "data")
