"""Report and phase-ribbon generation."""

import json
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from jinja2 import Environment, PackageLoader, StrictUndefined

from ..config.settings import ReportConfig
from ..models.report import MetricReport
from ..models.sequences import segments_from_frames
from ..processors.segmentation_analysis import AnalysisReport
from ..utils.exceptions import ParameterError
from ..utils.logging import get_logger


logger = get_logger(__name__)

# Tableau 20, dark/light pairs interleaved; phase c uses PALETTE[c].
PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
    "#aec7e8", "#ffbb78", "#98df8a", "#ff9896", "#c5b0d5",
    "#c49c94", "#f7b6d2", "#c7c7c7", "#dbdb8d", "#9edae5",
)

LABEL_WIDTH = 110
MARGIN = 10
ROW_GAP = 6
LEGEND_COLUMN = 230
LEGEND_ROW = 18


def phase_color(label: int) -> str:
    """Palette colour of a phase; more than 20 phases is unsupported."""
    if not 0 <= label < len(PALETTE):
        raise ParameterError(f"No palette colour for phase {label}; the palette has {len(PALETTE)} entries")
    return PALETTE[label]


class ReportGenerator:
    """Write metric reports, analysis JSON and SVG phase ribbons to a directory."""

    def __init__(
        self,
        output_dir: Path,
        cfg: Optional[ReportConfig] = None,
        phase_names: Optional[Sequence[str]] = None,
    ):
        """Initialize the report generator.

        Args:
            output_dir: Directory to save generated artifacts
            cfg: Ribbon scale and analysis settings
            phase_names: Display name per phase index
        """
        self.output_dir = Path(output_dir)
        self.cfg = cfg or ReportConfig()
        self.phase_names = list(phase_names or [])
        self.env = Environment(
            loader=PackageLoader("phaseseg", "templates"),
            autoescape=True,
            undefined=StrictUndefined,
            trim_blocks=True,
            lstrip_blocks=True,
            keep_trailing_newline=True,
        )

    def phase_name(self, label: int) -> str:
        if 0 <= label < len(self.phase_names):
            return self.phase_names[label]
        return f"Phase {label}"

    def _row(self, name: str, title: str, labels: np.ndarray, y: float) -> Dict:
        px = self.cfg.px_per_frame
        segments = [
            {
                "x": seg.start * px,
                "width": seg.length * px,
                "color": phase_color(seg.label),
                "label": seg.label,
                "name": self.phase_name(seg.label),
                "start": seg.start,
                "end": seg.end,
            }
            for seg in segments_from_frames(labels)
        ]
        return {"name": name, "title": title, "y": y, "segments": segments}

    def render_ribbon(self, video_id: str, gt: np.ndarray, pred: np.ndarray, num_classes: Optional[int] = None) -> str:
        """Two-row ribbon, ground truth above prediction, one rect per segment.

        Every frame takes ``px_per_frame`` pixels horizontally, so both rows
        span ``T * px_per_frame`` pixels.
        """
        gt = np.asarray(gt, dtype=np.int64)
        pred = np.asarray(pred, dtype=np.int64)
        if gt.shape != pred.shape:
            raise ParameterError(f"Ribbon rows disagree: {gt.size} ground-truth vs {pred.size} predicted frames")
        height = self.cfg.row_height
        rows = [
            self._row("ground_truth", "Ground truth", gt, MARGIN),
            self._row("prediction", "Prediction", pred, MARGIN + height + ROW_GAP),
        ]

        if num_classes is None:
            num_classes = max(len(self.phase_names), int(max(gt.max(), pred.max())) + 1)
        track = gt.size * self.cfg.px_per_frame
        columns = max(1, int(max(track, LEGEND_COLUMN) // LEGEND_COLUMN))
        legend = [
            {
                "x": (c % columns) * LEGEND_COLUMN,
                "y": (c // columns) * LEGEND_ROW,
                "color": phase_color(c),
                "label": c,
                "name": self.phase_name(c),
            }
            for c in range(num_classes)
        ]
        legend_y = MARGIN + 2 * height + ROW_GAP + 2 * MARGIN
        legend_rows = (num_classes + columns - 1) // columns
        template = self.env.get_template("ribbon.svg.j2")
        return template.render(
            video_id=video_id,
            num_frames=int(gt.size),
            px_per_frame=self.cfg.px_per_frame,
            width=LABEL_WIDTH + max(track, columns * LEGEND_COLUMN) + MARGIN,
            height=legend_y + legend_rows * LEGEND_ROW + MARGIN,
            label_width=LABEL_WIDTH,
            row_height=height,
            rows=rows,
            legend=legend,
            legend_y=legend_y,
        )

    def write_ribbon(self, video_id: str, gt: np.ndarray, pred: np.ndarray, num_classes: Optional[int] = None) -> Path:
        ribbons = self.output_dir / "ribbons"
        ribbons.mkdir(parents=True, exist_ok=True)
        path = ribbons / f"{video_id}.svg"
        path.write_text(self.render_ribbon(video_id, gt, pred, num_classes), encoding="utf-8")
        logger.debug("Wrote ribbon", video_id=video_id, path=str(path))
        return path

    def write_metrics(self, report: MetricReport, stem: str = "metrics") -> Dict[str, Path]:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        return report.save(self.output_dir, stem)

    def write_analysis(self, analysis: AnalysisReport, name: str = "analysis.json") -> Path:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        path = self.output_dir / name
        with open(path, "w", encoding="utf-8") as f:
            json.dump(analysis.to_dict(), f, indent=2, sort_keys=True)
        return path

    def generate(
        self,
        videos: Sequence[Tuple[str, np.ndarray, np.ndarray]],
        report: MetricReport,
        analysis: Optional[AnalysisReport] = None,
        num_classes: Optional[int] = None,
    ) -> Dict[str, List[Path]]:
        """Write everything for ``(video_id, predicted, ground_truth)`` triples."""
        written: Dict[str, List[Path]] = {"metrics": list(self.write_metrics(report).values())}
        if analysis is not None:
            written["analysis"] = [self.write_analysis(analysis)]
        written["ribbons"] = [self.write_ribbon(vid, gt, pred, num_classes) for vid, pred, gt in videos]
        logger.info("Report written", out=str(self.output_dir), videos=len(written["ribbons"]))
        return written
