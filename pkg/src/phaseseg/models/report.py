"""Metric report models."""

import csv
import io
import json
from pathlib import Path
from typing import Dict, List, Optional, Union

from pydantic import BaseModel, Field, field_validator

# Column order of every CSV report.
METRIC_FIELDS = [
    "accuracy",
    "precision",
    "recall",
    "jaccard",
    "edit",
    "f1_25",
    "f1_50",
    "f1_75",
]


class MetricScores(BaseModel):
    """Segmentation scores on the 0-100 scale."""
    accuracy: float = Field(..., ge=0.0, le=100.0)
    precision: float = Field(..., ge=0.0, le=100.0)
    recall: float = Field(..., ge=0.0, le=100.0)
    jaccard: float = Field(..., ge=0.0, le=100.0)
    edit: float = Field(..., ge=0.0, le=100.0)
    f1_25: float = Field(..., ge=0.0, le=100.0)
    f1_50: float = Field(..., ge=0.0, le=100.0)
    f1_75: float = Field(..., ge=0.0, le=100.0)

    def as_row(self) -> List[float]:
        return [getattr(self, name) for name in METRIC_FIELDS]


class VideoMetrics(BaseModel):
    """Scores of one video plus the segment counts behind them."""
    video_id: str
    num_frames: int = Field(..., ge=1)
    scores: MetricScores
    predicted_segments: int = Field(default=0, ge=0)
    ground_truth_segments: int = Field(default=0, ge=0)


class MetricReport(BaseModel):
    """Per-video scores and their mean and standard deviation across videos."""
    videos: List[VideoMetrics] = Field(default_factory=list)
    mean: MetricScores
    std: Dict[str, float]
    std_ddof: int = Field(default=1, description="Degrees of freedom removed in the std")
    split: Optional[str] = None
    stage: Optional[int] = None

    @field_validator("std")
    @classmethod
    def validate_std(cls, v):
        missing = [name for name in METRIC_FIELDS if name not in v]
        if missing:
            raise ValueError(f"std is missing {missing}")
        return v

    @property
    def num_videos(self) -> int:
        return len(self.videos)

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        """One row per video, then ``mean`` and ``std`` rows."""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["video_id", "num_frames", *METRIC_FIELDS, "predicted_segments", "ground_truth_segments"])
        for video in self.videos:
            writer.writerow([
                video.video_id,
                video.num_frames,
                *[repr(x) for x in video.scores.as_row()],
                video.predicted_segments,
                video.ground_truth_segments,
            ])
        writer.writerow(["mean", "", *[repr(x) for x in self.mean.as_row()], "", ""])
        writer.writerow(["std", "", *[repr(self.std[name]) for name in METRIC_FIELDS], "", ""])
        return buffer.getvalue()

    def save(self, directory: Union[str, Path], stem: str = "metrics") -> Dict[str, Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        paths = {"json": directory / f"{stem}.json", "csv": directory / f"{stem}.csv"}
        paths["json"].write_text(self.to_json(), encoding="utf-8")
        paths["csv"].write_text(self.to_csv(), encoding="utf-8")
        return paths
