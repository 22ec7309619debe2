"""Shared test fixtures and configuration."""

import tempfile
from pathlib import Path

import numpy as np
import pytest

from phaseseg.config.settings import (
    LoggingConfig, ModelConfig, ReportConfig, Settings, SynthConfig, TrainConfig
)
from phaseseg.models.manifest import DatasetManifest
from phaseseg.synthdata.dataset import generate_dataset
from phaseseg.utils.logging import Logger


@pytest.fixture
def temp_dir():
    """Create a temporary directory for testing."""
    with tempfile.TemporaryDirectory() as tmp_dir:
        yield Path(tmp_dir)


@pytest.fixture
def small_model_config():
    """Three-layer model small enough for gradient checks."""
    return ModelConfig(
        num_layers=3,
        num_decoders=2,
        internal_dim=8,
        num_classes=3,
        input_dim=4,
        dtype="float64",
    )


@pytest.fixture
def tiny_synth_config():
    """Four short videos of the sequential five-phase workflow."""
    return SynthConfig(
        preset="tiny",
        videos=4,
        seed=7,
        feature_dim=8,
        min_length=30,
        max_length=40,
        noise_scale=0.3,
        ambiguity_width=0,
    )


@pytest.fixture
def tiny_dataset(tiny_synth_config, temp_dir) -> DatasetManifest:
    """Generated tiny dataset; split 2/1/1."""
    return generate_dataset(tiny_synth_config, temp_dir / "data")


@pytest.fixture
def tiny_model_config(tiny_synth_config):
    """Model matching the tiny dataset's feature width and class count."""
    return ModelConfig(
        num_layers=3,
        num_decoders=1,
        internal_dim=8,
        num_classes=tiny_synth_config.num_classes,
        input_dim=tiny_synth_config.feature_dim,
    )


@pytest.fixture
def quick_train_config():
    """Two epochs at float64."""
    return TrainConfig(epochs=2, learning_rate=5e-3, seed=3, dtype="float64")


@pytest.fixture
def test_settings():
    """Create test settings configuration."""
    return Settings(
        environment="testing",
        debug=True,
        train=TrainConfig(epochs=2, learning_rate=5e-3),
        synth=SynthConfig(preset="tiny", videos=4, feature_dim=8, min_length=30, max_length=40),
        report=ReportConfig(transition_window=2),
        logging=LoggingConfig(level="WARNING", file_enabled=False, file_path=None),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(autouse=True)
def quiet_logging():
    """Keep per-epoch and per-video log lines out of test output."""
    Logger.setup(LoggingConfig(level="WARNING"))
    yield
