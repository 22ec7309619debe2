"""Logging utilities for the phase segmentation engine."""

import logging
import logging.handlers
import math
from typing import Any, Callable, Dict, Optional

import numpy as np
import structlog
import colorlog

from ..config.settings import LoggingConfig


def metric_values(digits: int) -> Callable[[Any, str, Dict[str, Any]], Dict[str, Any]]:
    """Processor that unwraps numpy scalars and rounds finite floats to ``digits`` places."""

    def processor(logger: Any, method_name: str, event_dict: Dict[str, Any]) -> Dict[str, Any]:
        for key, value in event_dict.items():
            if isinstance(value, np.generic):
                value = value.item()
            if isinstance(value, float) and math.isfinite(value):
                value = round(value, digits)
            event_dict[key] = value
        return event_dict

    return processor


class Logger:
    """Centralized logging configuration."""

    _initialized = False
    _logger = None

    @classmethod
    def setup(cls, config: LoggingConfig) -> None:
        """Setup structured logging with colorization."""
        if cls._initialized:
            # Handlers are installed once; later calls may still change the level.
            logging.getLogger().setLevel(getattr(logging, config.level))
            return

        structlog.configure(
            processors=[
                structlog.stdlib.filter_by_level,
                structlog.stdlib.add_logger_name,
                structlog.stdlib.add_log_level,
                structlog.stdlib.PositionalArgumentsFormatter(),
                structlog.processors.TimeStamper(fmt="ISO"),
                structlog.processors.StackInfoRenderer(),
                structlog.processors.format_exc_info,
                structlog.processors.UnicodeDecoder(),
                metric_values(config.metric_digits),
                structlog.processors.JSONRenderer(sort_keys=True),
            ],
            context_class=dict,
            logger_factory=structlog.stdlib.LoggerFactory(),
            wrapper_class=structlog.stdlib.BoundLogger,
            cache_logger_on_first_use=True,
        )

        console_handler = colorlog.StreamHandler()
        console_handler.setFormatter(
            colorlog.ColoredFormatter(
                "%(log_color)s%(levelname)-8s%(reset)s %(blue)s%(name)s%(reset)s: %(message)s",
                datefmt=None,
                reset=True,
                log_colors={
                    "DEBUG": "cyan",
                    "INFO": "green",
                    "WARNING": "yellow",
                    "ERROR": "red",
                    "CRITICAL": "red,bg_white",
                },
                secondary_log_colors={},
                style="%",
            )
        )

        root_logger = logging.getLogger()
        root_logger.setLevel(getattr(logging, config.level))
        root_logger.addHandler(console_handler)

        if config.file_enabled and config.file_path:
            file_handler = logging.handlers.RotatingFileHandler(
                config.file_path,
                maxBytes=10 * 1024 * 1024,  # 10MB
                backupCount=5,
            )
            file_handler.setFormatter(logging.Formatter(config.format))
            root_logger.addHandler(file_handler)

        cls._initialized = True
        cls._logger = structlog.get_logger("phaseseg")

    @classmethod
    def get_logger(cls, name: Optional[str] = None) -> structlog.stdlib.BoundLogger:
        """Get a logger instance."""
        if not cls._initialized:
            cls.setup(LoggingConfig())

        if name:
            return structlog.get_logger(name)
        return cls._logger or structlog.get_logger("phaseseg")


def get_logger(name: Optional[str] = None) -> structlog.stdlib.BoundLogger:
    """Convenience function to get a logger."""
    return Logger.get_logger(name)
