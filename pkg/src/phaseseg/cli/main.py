"""Command Line Interface for the phase segmentation engine."""

import functools
import json
import sys
from pathlib import Path
from typing import List, Optional, Tuple

import click
import numpy as np
from pydantic import BaseModel, ValidationError
from rich.console import Console
from rich.markup import escape
from rich.panel import Panel
from rich.table import Table

from ..config.settings import Settings, load_settings
from ..generators.report_generator import ReportGenerator
from ..metrics.scores import aggregate, score_video
from ..models.manifest import DatasetManifest, Split
from ..models.report import METRIC_FIELDS, MetricReport
from ..network.checkpoint import load_checkpoint
from ..network.streaming import StreamingSession
from ..processors.segmentation_analysis import SegmentationAnalyzer
from ..synthdata.dataset import generate_dataset
from ..synthdata.io import iter_csv_rows, iter_frames, read_label_values
from ..training.evaluator import Evaluator, check_compatible, load_split
from ..training.experiments import run_experiments
from ..training.trainer import train as run_training
from ..utils.exceptions import ConfigurationError, DataError, PhaseSegError
from ..utils.files import atomic_output_dir
from ..utils.logging import Logger, get_logger


console = Console()
logger = get_logger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

SPLITS = [s.value for s in Split]


def _fail(message: str, code: int) -> None:
    console.print(f"[red]❌ {escape(message)}[/red]", soft_wrap=True)
    sys.exit(code)


def handle_errors(func):
    """Map engine errors to exit codes: 2 for configuration, 1 for everything else."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except ConfigurationError as e:
            _fail(f"Configuration error: {e}", EXIT_USAGE)
        except PhaseSegError as e:
            _fail(f"Error: {e}", EXIT_FAILURE)
        except OSError as e:
            _fail(f"I/O error: {e}", EXIT_FAILURE)

    return wrapper


def _with_updates(section: BaseModel, **updates) -> BaseModel:
    """Re-validate a settings section with command-line values; ``None`` means unset."""
    updates = {k: v for k, v in updates.items() if v is not None}
    if not updates:
        return section
    try:
        return type(section)(**{**section.model_dump(), **updates})
    except ValidationError as e:
        raise ConfigurationError(f"Invalid option: {e}", {"errors": e.errors()})


def _load_manifest(path: str) -> DatasetManifest:
    path = Path(path)
    if path.is_dir():
        path = path / "manifest.json"
    return DatasetManifest.load(path)


def _metrics_table(report: MetricReport, title: str) -> Table:
    table = Table(title=title)
    table.add_column("Metric")
    table.add_column("Mean", justify="right")
    table.add_column("Std", justify="right")
    for name in METRIC_FIELDS:
        table.add_row(name, f"{getattr(report.mean, name):.2f}", f"{report.std[name]:.2f}")
    return table


@click.group()
@click.option("--debug", is_flag=True, help="Enable debug logging")
@click.option("--config-file", type=click.Path(exists=True, dir_okay=False), help="JSON configuration file")
@click.option("--set", "overrides", multiple=True, metavar="KEY=VALUE", help="Dotted override, e.g. train.epochs=5")
@click.pass_context
def cli(ctx, debug: bool, config_file: Optional[str], overrides: Tuple[str, ...]):
    """Causal phase segmentation: generate data, train, evaluate, stream and report."""

    ctx.ensure_object(dict)

    try:
        settings = load_settings(config_file, overrides)
    except ConfigurationError as e:
        _fail(f"Configuration error: {e}", EXIT_USAGE)
    if debug:
        settings.debug = True
        settings.logging.level = "DEBUG"

    Logger.setup(settings.logging)
    ctx.obj["settings"] = settings


@cli.command()
@click.option("--preset", type=click.Choice(["ramie", "autolaparo", "tiny"]), help="Workflow preset")
@click.option("--videos", type=int, help="Number of videos")
@click.option("--seed", type=int, help="Dataset seed")
@click.option("--out", required=True, type=click.Path(file_okay=False), help="Dataset directory")
@click.option("--force", is_flag=True, help="Replace a non-empty output directory")
@click.pass_context
@handle_errors
def gen(ctx, preset: Optional[str], videos: Optional[int], seed: Optional[int], out: str, force: bool):
    """Generate a synthetic workflow dataset."""

    settings: Settings = ctx.obj["settings"]
    cfg = _with_updates(settings.synth, preset=preset, videos=videos, seed=seed)

    with atomic_output_dir(out, force) as staging:
        manifest = generate_dataset(cfg, staging)

    counts = manifest.split_counts()
    console.print(
        f"[green]✅ {len(manifest.videos)} videos, {manifest.num_classes} phases written to {escape(out)}[/green]",
        soft_wrap=True,
    )
    console.print(f"   train={counts['train']} val={counts['val']} test={counts['test']}")


@cli.command()
@click.option("--data", required=True, type=click.Path(exists=True), help="Dataset directory or manifest.json")
@click.option("--out", required=True, type=click.Path(file_okay=False), help="Run directory")
@click.option("--epochs", type=int, help="Training epochs")
@click.option("--lr", "learning_rate", type=float, help="Learning rate")
@click.option("--lambda", "lambda_", type=float, help="Smoothing weight")
@click.option("--seed", type=int, help="Initialization and shuffling seed")
@click.option("--force", is_flag=True, help="Replace a non-empty output directory")
@click.pass_context
@handle_errors
def train(ctx, data: str, out: str, epochs, learning_rate, lambda_, seed, force: bool):
    """Train the causal encoder-decoder on a dataset's train split."""

    settings: Settings = ctx.obj["settings"]
    manifest = _load_manifest(data)
    train_cfg = _with_updates(
        settings.train, epochs=epochs, learning_rate=learning_rate, lambda_=lambda_, seed=seed
    )
    model_cfg = settings.model
    # Unset model dimensions follow the dataset.
    model_cfg = _with_updates(
        model_cfg,
        input_dim=None if "input_dim" in model_cfg.model_fields_set else manifest.feature_dim,
        num_classes=None if "num_classes" in model_cfg.model_fields_set else manifest.num_classes,
    )

    console.print(Panel.fit("Training", style="bold blue"))
    with atomic_output_dir(out, force) as staging:
        result = run_training(train_cfg, manifest, model_cfg, staging)
        result.best_report.save(staging, "selection_metrics")

    console.print(
        f"[green]✅ Best epoch {result.best_epoch}: {result.selection_split} accuracy "
        f"{result.best_report.mean.accuracy:.2f}, edit {result.best_report.mean.edit:.2f}[/green]"
    )
    console.print(f"   Checkpoint and history written to {escape(out)}", soft_wrap=True)


@cli.command("eval")
@click.option("--checkpoint", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--data", required=True, type=click.Path(exists=True), help="Dataset directory or manifest.json")
@click.option("--split", type=click.Choice(SPLITS), default=Split.TEST.value, show_default=True)
@click.option("--out", required=True, type=click.Path(file_okay=False), help="Report directory")
@click.option("--stages", is_flag=True, help="Also write one report per stage")
@click.option("--dump-predictions", is_flag=True, help="Write predicted label files")
@click.option("--workers", type=int, help="Threads for per-video metrics")
@click.option("--force", is_flag=True, help="Replace a non-empty output directory")
@click.pass_context
@handle_errors
def evaluate(ctx, checkpoint: str, data: str, split: str, out: str, stages: bool, dump_predictions: bool,
             workers: Optional[int], force: bool):
    """Score a checkpoint on one split with the final stage."""

    settings: Settings = ctx.obj["settings"]
    manifest = _load_manifest(data)
    model, _ = load_checkpoint(checkpoint)
    check_compatible(model, manifest)
    videos = load_split(manifest, split, model.cfg.dtype)
    evaluator = Evaluator(model, workers or settings.train.workers)

    with atomic_output_dir(out, force) as staging:
        report = evaluator.evaluate(videos, split=split)
        report.save(staging, "metrics")
        if stages:
            for stage_report in evaluator.evaluate_stages(videos, split=split):
                stage_report.save(staging, f"metrics_stage{stage_report.stage}")
        if dump_predictions:
            evaluator.dump_predictions(videos, staging / "predictions")

    console.print(_metrics_table(report, f"{split} split, {report.num_videos} videos"))


@cli.command()
@click.option("--checkpoint", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--features", required=True, help="PHSF or CSV feature file; '-' reads CSV rows from stdin")
@click.option("--out", type=click.Path(dir_okay=False), help="Label file (default: stdout)")
@handle_errors
def infer(checkpoint: str, features: str, out: Optional[str]):
    """Stream frames through the model, emitting one label per frame as it arrives."""

    model, _ = load_checkpoint(checkpoint)
    session = StreamingSession(model)
    if features == "-":
        frames = iter_csv_rows(sys.stdin)
    else:
        if not Path(features).is_file():
            raise ConfigurationError(f"Feature file {features} does not exist")
        frames = iter_frames(features)

    sink = open(out, "w", encoding="utf-8") if out else sys.stdout
    try:
        for frame in frames:
            sink.write(f"{session.push(frame)}\n")
            sink.flush()
    finally:
        if out:
            sink.close()
    logger.info("Stream finished", frames=len(session))


def _pair_label_files(pred_dir: Path, gt_dir: Path) -> Tuple[List[Tuple[str, Path, Path]], List[str]]:
    pairs, missing = [], []
    for pred_path in sorted(pred_dir.glob("*.txt")):
        gt_path = gt_dir / pred_path.name
        if gt_path.is_file():
            pairs.append((pred_path.stem, pred_path, gt_path))
        else:
            missing.append(pred_path.stem)
    return pairs, missing


@cli.command()
@click.option("--predictions", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--ground-truth", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--out", required=True, type=click.Path(file_okay=False), help="Report directory")
@click.option("--data", type=click.Path(exists=True), help="Dataset for phase names and class count")
@click.option("--num-classes", type=int, help="Class count when no dataset is given")
@click.option("--force", is_flag=True, help="Replace a non-empty output directory")
@click.pass_context
@handle_errors
def report(ctx, predictions: str, ground_truth: str, out: str, data: Optional[str], num_classes: Optional[int],
           force: bool):
    """Metrics, segmentation analysis and SVG ribbons for predicted label files."""

    settings: Settings = ctx.obj["settings"]
    phase_names: List[str] = []
    if data:
        manifest = _load_manifest(data)
        phase_names, num_classes = manifest.phase_names, manifest.num_classes

    pairs, missing = _pair_label_files(Path(predictions), Path(ground_truth))
    loaded = [(vid, read_label_values(p), read_label_values(g)) for vid, p, g in pairs]
    if num_classes is None:
        num_classes = max([2] + [int(max(p.max(initial=0), g.max(initial=0))) + 1 for _, p, g in loaded])

    skipped = [(vid, "no ground-truth file") for vid in missing]
    videos = []
    for vid, pred, gt in loaded:
        if pred.size != gt.size:
            skipped.append((vid, f"{pred.size} predicted vs {gt.size} ground-truth frames"))
            continue
        bad = np.flatnonzero((np.concatenate([pred, gt]) < 0) | (np.concatenate([pred, gt]) >= num_classes))
        if pred.size == 0 or bad.size:
            skipped.append((vid, "empty or out-of-range labels"))
            continue
        videos.append((vid, pred, gt))

    for vid, reason in skipped:
        console.print(f"[yellow]⚠️  Skipped {escape(vid)}: {escape(reason)}[/yellow]", soft_wrap=True)
    if not videos:
        raise DataError("No aligned prediction/ground-truth pairs to report on")

    metrics = aggregate([score_video(pred, gt, vid) for vid, pred, gt in videos])
    analysis = SegmentationAnalyzer(settings.report, phase_names).analyze(videos)
    with atomic_output_dir(out, force) as staging:
        ReportGenerator(staging, settings.report, phase_names).generate(videos, metrics, analysis, num_classes)

    table = Table(title="Segments per video")
    table.add_column("Video")
    table.add_column("Predicted", justify="right")
    table.add_column("Ground truth", justify="right")
    for v in metrics.videos:
        table.add_row(v.video_id, str(v.predicted_segments), str(v.ground_truth_segments))
    console.print(table)
    console.print(_metrics_table(metrics, f"{metrics.num_videos} videos"))
    if skipped:
        _fail(f"{len(skipped)} video(s) skipped", EXIT_FAILURE)


@cli.command()
@click.option("--data", required=True, type=click.Path(exists=True), help="Dataset directory or manifest.json")
@click.option("--out", required=True, type=click.Path(file_okay=False), help="Summary directory")
@click.option("--seeds", default="0,1,2,3,4", show_default=True, help="Comma-separated training seeds")
@click.option("--epochs", type=int, help="Training epochs per run")
@click.option("--split", type=click.Choice(SPLITS), default=Split.TEST.value, show_default=True)
@click.option("--force", is_flag=True, help="Replace a non-empty output directory")
@click.pass_context
@handle_errors
def ablate(ctx, data: str, out: str, seeds: str, epochs: Optional[int], split: str, force: bool):
    """Smoothing ablation and stage refinement comparison over several seeds."""

    settings: Settings = ctx.obj["settings"]
    try:
        seed_list = [int(s) for s in seeds.split(",") if s.strip()]
    except ValueError:
        raise ConfigurationError(f"--seeds must be comma-separated integers, got {seeds!r}")
    manifest = _load_manifest(data)
    train_cfg = _with_updates(settings.train, epochs=epochs)
    model_cfg = _with_updates(settings.model, input_dim=manifest.feature_dim, num_classes=manifest.num_classes)

    summary = run_experiments(manifest, train_cfg, model_cfg, seed_list, split)
    with atomic_output_dir(out, force) as staging:
        (staging / "experiments.json").write_text(
            json.dumps(summary.model_dump(mode="json", by_alias=True), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )

    ablation, refinement = summary.ablation, summary.refinement
    table = Table(title=f"Smoothing ablation ({split}, median over {len(seed_list)} seeds)")
    table.add_column("Run")
    table.add_column("Predicted segments", justify="right")
    table.add_column("Edit", justify="right")
    for key in ("smoothed", "unsmoothed"):
        table.add_row(key, f"{ablation.median_segments[key]:.2f}", f"{ablation.median_edit[key]:.2f}")
    console.print(table)
    console.print(
        f"Final stage edit >= encoder edit in {refinement.seeds_improved} of {refinement.num_seeds} seeds"
    )


@cli.command()
@click.pass_context
def validate(ctx):
    """Validate configuration and print the effective settings."""

    settings: Settings = ctx.obj["settings"]
    console.print(Panel.fit("🔍 Configuration", style="bold cyan"))
    console.print(f"Environment: [bold]{settings.environment}[/bold]")
    console.print(f"Debug: {'✅' if settings.debug else '❌'}")
    console.print_json(json.dumps(settings.model_dump(mode="json", by_alias=True)))


if __name__ == "__main__":
    cli()
