"""Seed-swept comparisons: smoothing ablation and stage refinement."""

from statistics import median
from typing import Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field

from ..config.settings import ModelConfig, TrainConfig
from ..models.manifest import DatasetManifest, Split
from ..models.report import MetricReport
from ..utils.exceptions import DataError, ParameterError
from ..utils.logging import get_logger
from .evaluator import Evaluator, load_split
from .trainer import Trainer


logger = get_logger(__name__)

DEFAULT_SEEDS = (0, 1, 2, 3, 4)


class RunSummary(BaseModel):
    """Test-split summary of one trained model."""

    seed: int
    lambda_: float = Field(..., alias="lambda")
    mean_predicted_segments: float
    mean_ground_truth_segments: float
    edit: float
    accuracy: float
    stage_edit: List[float] = Field(default_factory=list, description="Edit score per stage, encoder first")

    model_config = ConfigDict(populate_by_name=True)


class SmoothingAblation(BaseModel):
    """Runs with and without the smoothing term, compared by medians over seeds."""

    smoothing_lambda: float
    runs: List[RunSummary]
    median_segments: Dict[str, float]
    median_edit: Dict[str, float]
    fewer_segments: bool
    higher_edit: bool


class RefinementComparison(BaseModel):
    """Encoder versus final-decoder edit score per seed."""

    runs: List[RunSummary]
    seeds_improved: int = Field(..., description="Seeds where the final stage edit >= encoder edit")
    num_seeds: int


class ExperimentSummary(BaseModel):
    split: str
    ablation: SmoothingAblation
    refinement: RefinementComparison


def _summary(seed: int, lambda_: float, reports: List[MetricReport]) -> RunSummary:
    final = reports[-1]
    n = final.num_videos
    return RunSummary(
        seed=seed,
        lambda_=lambda_,
        mean_predicted_segments=sum(v.predicted_segments for v in final.videos) / n,
        mean_ground_truth_segments=sum(v.ground_truth_segments for v in final.videos) / n,
        edit=final.mean.edit,
        accuracy=final.mean.accuracy,
        stage_edit=[r.mean.edit for r in reports],
    )


class ExperimentRunner:
    """Train one model per (seed, lambda) and score every stage on a held-out split."""

    def __init__(
        self,
        manifest: DatasetManifest,
        train_cfg: TrainConfig,
        model_cfg: ModelConfig,
        split: str = Split.TEST.value,
    ):
        self.manifest = manifest
        self.train_cfg = train_cfg
        self.model_cfg = model_cfg
        self.split = Split(split).value
        self.logger = logger.bind(component="experiments", split=self.split)
        self._videos = None
        self._cache: Dict[Tuple[int, float], RunSummary] = {}

    def _held_out(self):
        if self._videos is None:
            self._videos = load_split(self.manifest, self.split, self.train_cfg.dtype)
            if not self._videos:
                raise DataError(f"Split {self.split!r} has no videos to score", field="split")
        return self._videos

    def run(self, seed: int, lambda_: float) -> RunSummary:
        key = (seed, lambda_)
        if key not in self._cache:
            cfg = self.train_cfg.model_copy(update={"seed": seed, "lambda_": lambda_})
            result = Trainer(cfg, self.model_cfg).train(self.manifest)
            reports = Evaluator(result.model, cfg.workers).evaluate_stages(self._held_out(), split=self.split)
            self._cache[key] = _summary(seed, lambda_, reports)
            self.logger.info(
                "Run scored",
                seed=seed,
                lambda_=lambda_,
                segments=self._cache[key].mean_predicted_segments,
                edit=self._cache[key].edit,
            )
        return self._cache[key]

    def smoothing_ablation(self, seeds: Sequence[int] = DEFAULT_SEEDS, smoothing_lambda: float = 0.15) -> SmoothingAblation:
        """Median predicted-segment count and edit score with ``smoothing_lambda`` versus 0."""
        if not seeds:
            raise ParameterError("Need at least one seed")
        runs = {"smoothed": [], "unsmoothed": []}
        for seed in seeds:
            runs["smoothed"].append(self.run(seed, smoothing_lambda))
            runs["unsmoothed"].append(self.run(seed, 0.0))
        segments = {k: float(median(r.mean_predicted_segments for r in v)) for k, v in runs.items()}
        edit = {k: float(median(r.edit for r in v)) for k, v in runs.items()}
        return SmoothingAblation(
            smoothing_lambda=smoothing_lambda,
            runs=runs["smoothed"] + runs["unsmoothed"],
            median_segments=segments,
            median_edit=edit,
            fewer_segments=segments["smoothed"] < segments["unsmoothed"],
            higher_edit=edit["smoothed"] > edit["unsmoothed"],
        )

    def refinement(self, seeds: Sequence[int] = DEFAULT_SEEDS, lambda_: Optional[float] = None) -> RefinementComparison:
        if not seeds:
            raise ParameterError("Need at least one seed")
        lambda_ = self.train_cfg.lambda_ if lambda_ is None else lambda_
        runs = [self.run(seed, lambda_) for seed in seeds]
        improved = sum(1 for r in runs if r.stage_edit[-1] >= r.stage_edit[0])
        return RefinementComparison(runs=runs, seeds_improved=improved, num_seeds=len(runs))


def run_experiments(
    manifest: DatasetManifest,
    train_cfg: TrainConfig,
    model_cfg: ModelConfig,
    seeds: Sequence[int] = DEFAULT_SEEDS,
    split: str = Split.TEST.value,
) -> ExperimentSummary:
    """Both comparisons; the smoothed runs are shared between them."""
    runner = ExperimentRunner(manifest, train_cfg, model_cfg, split)
    ablation = runner.smoothing_ablation(seeds, train_cfg.lambda_ or 0.15)
    refinement = runner.refinement(seeds, train_cfg.lambda_ or 0.15)
    return ExperimentSummary(split=runner.split, ablation=ablation, refinement=refinement)
