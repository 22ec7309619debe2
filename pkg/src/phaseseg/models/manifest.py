"""Dataset manifest models."""

import json
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Union

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from ..utils.exceptions import DataError


class Split(str, Enum):
    """Dataset partitions."""
    TRAIN = "train"
    VAL = "val"
    TEST = "test"


class VideoEntry(BaseModel):
    """One video: its feature file, label file and split."""
    video_id: str = Field(..., description="Unique video identifier")
    features: str = Field(..., description="Feature file path, relative to the manifest")
    labels: str = Field(..., description="Label file path, relative to the manifest")
    split: Split = Field(..., description="Partition the video belongs to")
    num_frames: Optional[int] = Field(default=None, ge=0)

    @field_validator("video_id")
    @classmethod
    def validate_video_id(cls, v):
        if not v or not v.strip():
            raise ValueError("video_id cannot be empty")
        return v.strip()


class DatasetManifest(BaseModel):
    """Videos of a dataset with their splits."""
    num_classes: int = Field(..., ge=2)
    feature_dim: int = Field(..., ge=1)
    phase_names: List[str] = Field(default_factory=list)
    preset: Optional[str] = None
    seed: Optional[int] = None
    videos: List[VideoEntry] = Field(default_factory=list)
    root: Optional[Path] = Field(default=None, exclude=True)

    @model_validator(mode="after")
    def validate_unique_ids(self):
        seen = set()
        for entry in self.videos:
            if entry.video_id in seen:
                raise ValueError(f"Duplicate video id {entry.video_id!r}")
            seen.add(entry.video_id)
        return self

    def split(self, name: Union[Split, str]) -> List[VideoEntry]:
        name = Split(name)
        return [v for v in self.videos if v.split == name]

    def split_counts(self) -> Dict[str, int]:
        return {s.value: len(self.split(s)) for s in Split}

    def resolve(self, relative: str) -> Path:
        path = Path(relative)
        if path.is_absolute() or self.root is None:
            return path
        return self.root / path

    def check_files(self) -> None:
        """Raise DataError for the first referenced file that does not exist."""
        for index, entry in enumerate(self.videos):
            for kind in ("features", "labels"):
                path = self.resolve(getattr(entry, kind))
                if not path.is_file():
                    raise DataError(
                        f"Video {entry.video_id}: {kind} file {path} does not exist",
                        index=index,
                        field=kind,
                    )

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.write_text(
            json.dumps(self.model_dump(mode="json"), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
        return path

    @classmethod
    def load(cls, path: Union[str, Path], check_files: bool = True) -> "DatasetManifest":
        """Read a manifest; duplicate ids and missing files raise DataError."""
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except OSError as e:
            raise DataError(f"Cannot read manifest {path}: {e}")
        except json.JSONDecodeError as e:
            raise DataError(f"Manifest {path} is not valid JSON: {e}")
        if not isinstance(data, dict):
            raise DataError(f"Manifest {path} must hold a JSON object")
        try:
            manifest = cls(**data)
        except ValidationError as e:
            raise DataError(f"Invalid manifest {path}: {e}")
        manifest.root = path.parent
        if check_files:
            manifest.check_files()
        return manifest
