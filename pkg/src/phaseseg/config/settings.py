"""Configuration management using Pydantic Settings."""

import json
from pathlib import Path
from typing import Any, Dict, Iterable, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from ..utils.exceptions import ConfigurationError, ParameterError


class ModelConfig(BaseModel):
    """Causal encoder-decoder temporal model."""

    num_layers: int = Field(default=10, ge=1, description="Blocks per encoder/decoder (L)")
    num_decoders: int = Field(default=3, ge=0, description="Refinement decoders after the encoder")
    internal_dim: int = Field(default=64, ge=1, description="Feature width inside blocks (d)")
    num_classes: int = Field(default=13, ge=2, description="Number of phases (C)")
    input_dim: int = Field(default=64, ge=1, description="Per-frame feature width (D)")
    kernel_size: int = Field(default=3, ge=1, description="Dilated convolution kernel size")
    window_base: Literal[2] = Field(default=2, description="Attention window growth per layer")
    dilation_base: Literal[2] = Field(default=2, description="Dilation growth per layer")
    activation: Literal["relu"] = Field(default="relu", description="Feed-forward activation")
    residual_scale: float = Field(default=1.0, gt=0.0, description="Scale on each block's residual branch")
    dtype: Literal["float64", "float32"] = Field(default="float64", description="Parameter precision")

    def _check_layer(self, layer: int) -> None:
        if layer < 1 or layer > self.num_layers:
            raise ParameterError(
                f"Layer {layer} out of range [1, {self.num_layers}]",
                {"layer": layer, "num_layers": self.num_layers},
            )

    def dilation(self, layer: int) -> int:
        """Dilation of layer l, 2^(l-1)."""
        self._check_layer(layer)
        return self.dilation_base ** (layer - 1)

    def window(self, layer: int) -> int:
        """Attention window length of layer l, 2^(l-1)."""
        self._check_layer(layer)
        return self.window_base ** (layer - 1)

    @property
    def num_stages(self) -> int:
        return 1 + self.num_decoders


class LossConfig(BaseModel):
    """Frame-wise cross-entropy plus clamped smoothing."""

    model_config = ConfigDict(populate_by_name=True)

    lambda_: float = Field(default=0.15, ge=0.0, alias="lambda", description="Smoothing weight")
    clamp_lo: float = Field(default=0.0, description="Lower clamp bound (fixed at 0)")
    clamp_hi: float = Field(default=16.0, description="Upper clamp bound")
    stop_gradient_previous: bool = Field(
        default=True, description="Stop gradients through the t-1 log-probabilities"
    )

    @field_validator("clamp_lo")
    @classmethod
    def validate_clamp_lo(cls, v):
        if v != 0.0:
            raise ValueError("clamp_lo is fixed at 0")
        return v

    @model_validator(mode="after")
    def validate_clamp_hi(self):
        if self.clamp_hi < self.clamp_lo:
            raise ValueError("clamp_hi must be >= clamp_lo")
        return self


class OptimizerConfig(BaseModel):
    """Adam hyper-parameters, stored in checkpoint metadata."""

    name: Literal["adam"] = "adam"
    beta1: float = Field(default=0.9, ge=0.0, lt=1.0)
    beta2: float = Field(default=0.999, ge=0.0, lt=1.0)
    eps: float = Field(default=1e-8, gt=0.0)


class TrainConfig(BaseModel):
    """Training on saved feature sequences."""

    model_config = ConfigDict(populate_by_name=True)

    learning_rate: float = Field(default=5e-4, gt=0.0, description="Constant Adam learning rate")
    epochs: int = Field(default=200, ge=1, description="Training epochs")
    lambda_: float = Field(default=0.15, ge=0.0, alias="lambda", description="Smoothing weight")
    seed: int = Field(default=42, description="Initialization and shuffling seed")
    checkpoint_every: Optional[int] = Field(default=None, ge=1, description="Save a checkpoint every N epochs")
    patience: Optional[int] = Field(default=None, ge=1, description="Early-stop patience in epochs")
    dtype: Literal["float64", "float32"] = Field(default="float32", description="Training precision")
    stop_gradient_previous: bool = Field(default=True)
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)
    workers: int = Field(default=1, ge=1, description="Threads for per-video validation metrics")

    def loss_config(self) -> LossConfig:
        """Loss settings implied by this training run."""
        return LossConfig(lambda_=self.lambda_, stop_gradient_previous=self.stop_gradient_previous)


class SynthConfig(BaseModel):
    """Synthetic workflow dataset generation."""

    preset: Literal["ramie", "autolaparo", "tiny"] = Field(default="ramie")
    videos: int = Field(default=27, ge=1)
    seed: int = Field(default=42)
    feature_dim: int = Field(default=64, ge=2)
    min_length: int = Field(default=500, ge=1)
    max_length: int = Field(default=1500, ge=1)
    noise_scale: float = Field(default=0.5, ge=0.0)
    ambiguity_width: int = Field(default=5, ge=0)
    anchor_seed: int = Field(default=0, description="Seed of the per-class anchor vectors")
    skip_prob: float = Field(default=0.05, ge=0.0, le=1.0)
    return_prob: float = Field(default=0.05, ge=0.0, le=1.0)
    interrupt_prob: float = Field(default=0.05, ge=0.0, le=1.0)
    swap_prob: float = Field(default=0.3, ge=0.0, le=1.0)
    num_classes: int = Field(default=5, ge=2, description="Classes of the tiny preset")
    split_ratio: Tuple[int, int, int] = Field(default=(14, 4, 9), description="train/val/test ratio")

    @model_validator(mode="after")
    def validate_lengths(self):
        if self.max_length < self.min_length:
            raise ValueError("max_length must be >= min_length")
        return self


class ReportConfig(BaseModel):
    """Report and ribbon rendering."""

    px_per_frame: float = Field(default=1.0, gt=0.0, description="Horizontal scale of ribbons")
    row_height: int = Field(default=24, ge=1)
    transition_window: int = Field(default=10, ge=0, description="Frames counted as near a transition")
    top_confusions: int = Field(default=5, ge=0)


class LoggingConfig(BaseModel):
    """Configuration for logging."""

    level: str = Field(default="INFO", description="Logging level")
    format: str = Field(
        default="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        description="Log format string",
    )
    file_enabled: bool = Field(default=False, description="Enable file logging")
    file_path: Optional[Path] = Field(None, description="Log file path")
    metric_digits: int = Field(default=4, ge=0, description="Decimal places kept for float values in log events")

    @field_validator("level")
    @classmethod
    def validate_level(cls, v):
        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if v.upper() not in valid_levels:
            raise ValueError(f"Log level must be one of {valid_levels}")
        return v.upper()


class Settings(BaseSettings):
    """Main application settings."""

    environment: str = Field(default="production", description="Environment (development/production/testing)")
    debug: bool = Field(default=False, description="Enable debug mode")
    seed: Optional[int] = Field(default=None, description="Default seed for generation and training")

    model: ModelConfig = Field(default_factory=ModelConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    synth: SynthConfig = Field(default_factory=SynthConfig)
    report: ReportConfig = Field(default_factory=ReportConfig)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)

    model_config = SettingsConfigDict(
        env_prefix="PHASESEG_",
        env_file=".env",
        env_file_encoding="utf-8",
        env_nested_delimiter="__",
        case_sensitive=False,
        extra="ignore",
    )

    @field_validator("environment")
    @classmethod
    def validate_environment(cls, v):
        valid_envs = ["development", "production", "testing"]
        if v not in valid_envs:
            raise ValueError(f"Environment must be one of {valid_envs}")
        return v

    @model_validator(mode="after")
    def propagate_seed(self):
        # A global seed fills in sections that did not set their own.
        if self.seed is not None:
            if "seed" not in self.train.model_fields_set:
                self.train.seed = self.seed
            if "seed" not in self.synth.model_fields_set:
                self.synth.seed = self.seed
        return self

    def is_testing(self) -> bool:
        """Check if running in testing mode."""
        return self.environment == "testing"


def parse_override(item: str) -> Tuple[str, Any]:
    """Split a dotted ``key=value`` override; values are JSON literals or strings."""
    if "=" not in item:
        raise ConfigurationError(f"Override must look like key=value, got {item!r}")
    key, raw = item.split("=", 1)
    key = key.strip()
    if not key:
        raise ConfigurationError(f"Override has an empty key: {item!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def apply_overrides(data: Dict[str, Any], overrides: Iterable[str]) -> Dict[str, Any]:
    """Merge dotted overrides into a nested settings dictionary."""
    for item in overrides:
        key, value = parse_override(item)
        node = data
        parts = key.split(".")
        for part in parts[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigurationError(f"Override {key!r} descends into a non-section value")
            node = child
        node[parts[-1]] = value
    return data


def load_settings(
    config_file: Optional[Union[str, Path]] = None,
    overrides: Iterable[str] = (),
) -> Settings:
    """Build settings with precedence flags > config file > environment > defaults."""
    from dotenv import load_dotenv
    load_dotenv()

    data: Dict[str, Any] = {}
    if config_file:
        path = Path(config_file)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except OSError as e:
            raise ConfigurationError(f"Cannot read config file {path}: {e}")
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"Config file {path} is not valid JSON: {e}")
        if not isinstance(data, dict):
            raise ConfigurationError(f"Config file {path} must hold a JSON object")

    apply_overrides(data, overrides)

    try:
        return Settings(**data)
    except ValidationError as e:
        raise ConfigurationError(f"Invalid configuration: {e}", {"errors": e.errors()})


def get_settings() -> Settings:
    """Get application settings from the environment and defaults."""
    return load_settings()
