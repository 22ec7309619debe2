"""Loss functions."""

from .objective import cross_entropy, smoothing_loss, total_loss

__all__ = ["cross_entropy", "smoothing_loss", "total_loss"]
