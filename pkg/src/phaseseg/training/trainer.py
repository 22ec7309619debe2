"""Training loop: one full video per optimization step."""

import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from ..autodiff import Adam
from ..config.settings import ModelConfig, TrainConfig
from ..losses.objective import total_loss
from ..metrics.scores import accuracy
from ..models.manifest import DatasetManifest, Split
from ..models.report import MetricReport
from ..network.checkpoint import save_checkpoint
from ..network.model import CausalPhaseModel
from ..utils.exceptions import DataError, NonFiniteError, TrainingError
from ..utils.logging import get_logger
from .evaluator import Evaluator, Video, check_compatible, load_split
from .history import EpochRecord, TrainHistory


logger = get_logger(__name__)

CHECKPOINT_NAME = "checkpoint.pseg"
HISTORY_NAME = "history.csv"


@dataclass
class TrainResult:
    """Outcome of a training run; ``model`` holds the selected parameters."""

    model: CausalPhaseModel
    history: TrainHistory
    best_epoch: int
    best_report: MetricReport
    selection_split: str
    metadata: Dict[str, Any] = field(default_factory=dict)
    checkpoint_path: Optional[Path] = None
    history_path: Optional[Path] = None


class Trainer:
    """Adam on whole-video sequences with per-epoch validation.

    The model is selected by validation accuracy, ties broken by edit score;
    when the manifest has no validation videos the train split is used.
    """

    def __init__(self, cfg: TrainConfig, model_cfg: ModelConfig):
        self.cfg = cfg
        self.model_cfg = model_cfg.model_copy(update={"dtype": cfg.dtype})
        self.loss_cfg = cfg.loss_config()
        self.logger = logger.bind(component="trainer", seed=cfg.seed)

    def _selection(self, manifest: DatasetManifest, train: List[Video]) -> Tuple[str, List[Video]]:
        if manifest.split(Split.VAL):
            return Split.VAL.value, load_split(manifest, Split.VAL, self.cfg.dtype)
        self.logger.warning("No validation videos; selecting on the train split")
        return Split.TRAIN.value, train

    def _step(self, model: CausalPhaseModel, optimizer: Adam, video: Video, epoch: int) -> Tuple[float, float]:
        optimizer.zero_grad()
        try:
            stages = model(video.features)
            loss = total_loss(stages, video.labels, self.loss_cfg)
            loss.backward()
        except NonFiniteError as e:
            raise TrainingError(
                f"Non-finite values at epoch {epoch}, video {video.video_id}: {e.message}",
                epoch=epoch,
                video_id=video.video_id,
            )
        value = loss.item()
        if not np.isfinite(value):
            raise TrainingError(
                f"Non-finite loss at epoch {epoch}, video {video.video_id}",
                epoch=epoch,
                video_id=video.video_id,
            )
        optimizer.step()
        return value, accuracy(stages.predictions(), video.labels)

    def _metadata(self, optimizer: Adam, epoch: int, report: MetricReport, split: str, epochs_run: int) -> Dict[str, Any]:
        return {
            "optimizer": optimizer.state_dict(),
            "loss": self.loss_cfg.model_dump(mode="json", by_alias=True),
            "training": {
                "epoch": epoch,
                "epochs_run": epochs_run,
                "learning_rate": self.cfg.learning_rate,
                "seed": self.cfg.seed,
                "dtype": self.cfg.dtype,
                "selection_split": split,
                "val_accuracy": report.mean.accuracy,
                "val_edit": report.mean.edit,
            },
        }

    def train(self, manifest: DatasetManifest, out_dir: Optional[Union[str, Path]] = None) -> TrainResult:
        """Train on the manifest's train split.

        Args:
            manifest: Dataset to train on
            out_dir: Where the checkpoint, history and periodic checkpoints go

        Returns:
            The selected model and the full history.
        """
        model = CausalPhaseModel(self.model_cfg, seed=self.cfg.seed)
        check_compatible(model, manifest)
        if not manifest.split(Split.TRAIN):
            raise DataError("Manifest has no train videos", field="split")

        train_videos = load_split(manifest, Split.TRAIN, self.cfg.dtype)
        split, selection = self._selection(manifest, train_videos)
        evaluator = Evaluator(model, self.cfg.workers)
        opt_cfg = self.cfg.optimizer
        optimizer = Adam(
            model.parameters(),
            lr=self.cfg.learning_rate,
            betas=(opt_cfg.beta1, opt_cfg.beta2),
            eps=opt_cfg.eps,
        )
        shuffle = np.random.default_rng([self.cfg.seed, 1])
        out_dir = Path(out_dir) if out_dir is not None else None

        history = TrainHistory()
        best: Optional[Tuple[float, float]] = None
        best_epoch, best_report, best_arrays = 0, None, None

        self.logger.info(
            "Training started",
            videos=len(train_videos),
            selection_split=split,
            epochs=self.cfg.epochs,
            scalars=model.num_scalars(),
        )
        for epoch in range(1, self.cfg.epochs + 1):
            started = time.perf_counter()
            losses, accuracies = [], []
            for index in shuffle.permutation(len(train_videos)):
                loss, acc = self._step(model, optimizer, train_videos[index], epoch)
                losses.append(loss)
                accuracies.append(acc)

            report = evaluator.evaluate(selection, split=split)
            record = EpochRecord(
                epoch=epoch,
                train_loss=float(np.mean(losses)),
                train_accuracy=float(np.mean(accuracies)),
                val_accuracy=report.mean.accuracy,
                val_edit=report.mean.edit,
                wall_clock_s=time.perf_counter() - started,
            )
            history.append(record)

            key = (record.val_accuracy, record.val_edit)
            if best is None or key > best:
                best, best_epoch, best_report = key, epoch, report
                best_arrays = {n: a.copy() for n, a in model.state_arrays().items()}

            self.logger.info(
                "Epoch finished",
                epoch=epoch,
                loss=record.train_loss,
                train_accuracy=record.train_accuracy,
                val_accuracy=record.val_accuracy,
                val_edit=record.val_edit,
                seconds=record.wall_clock_s,
            )

            if out_dir is not None and self.cfg.checkpoint_every and epoch % self.cfg.checkpoint_every == 0:
                save_checkpoint(
                    out_dir / "checkpoints" / f"epoch_{epoch:03d}.pseg",
                    model,
                    self._metadata(optimizer, epoch, report, split, epoch),
                )
            if self.cfg.patience and epoch - best_epoch >= self.cfg.patience:
                self.logger.info("Early stop", epoch=epoch, best_epoch=best_epoch)
                break

        model.load_parameters(best_arrays)
        metadata = self._metadata(optimizer, best_epoch, best_report, split, len(history))
        result = TrainResult(
            model=model,
            history=history,
            best_epoch=best_epoch,
            best_report=best_report,
            selection_split=split,
            metadata=metadata,
        )
        if out_dir is not None:
            out_dir.mkdir(parents=True, exist_ok=True)
            result.checkpoint_path = save_checkpoint(out_dir / CHECKPOINT_NAME, model, metadata)
            result.history_path = history.save(out_dir / HISTORY_NAME)
        self.logger.info(
            "Training finished",
            best_epoch=best_epoch,
            val_accuracy=best[0],
            val_edit=best[1],
        )
        return result


def train(
    cfg: TrainConfig,
    manifest: DatasetManifest,
    model_cfg: ModelConfig,
    out_dir: Optional[Union[str, Path]] = None,
) -> TrainResult:
    """Train a model on ``manifest`` and optionally write its artifacts."""
    return Trainer(cfg, model_cfg).train(manifest, out_dir)
