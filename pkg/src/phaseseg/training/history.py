"""Per-epoch training records."""

import csv
import io
from pathlib import Path
from typing import List, Optional, Union

from pydantic import BaseModel, Field

from ..utils.exceptions import DataError

HISTORY_FIELDS = ["epoch", "train_loss", "train_accuracy", "val_accuracy", "val_edit", "wall_clock_s"]


class EpochRecord(BaseModel):
    """Summary of one completed epoch."""
    epoch: int = Field(..., ge=1)
    train_loss: float
    train_accuracy: float = Field(..., ge=0.0, le=100.0)
    val_accuracy: float = Field(..., ge=0.0, le=100.0)
    val_edit: float = Field(..., ge=0.0, le=100.0)
    wall_clock_s: float = Field(default=0.0, ge=0.0, description="Seconds spent in the epoch; not reproducible")


class TrainHistory(BaseModel):
    """Ordered epoch records, indexed 1, 2, 3, ..."""
    records: List[EpochRecord] = Field(default_factory=list)

    def append(self, record: EpochRecord) -> None:
        expected = len(self.records) + 1
        if record.epoch != expected:
            raise DataError(f"Epoch {record.epoch} recorded out of order; expected {expected}", index=record.epoch)
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    def __getitem__(self, index: int) -> EpochRecord:
        return self.records[index]

    def record(self, epoch: int) -> Optional[EpochRecord]:
        for r in self.records:
            if r.epoch == epoch:
                return r
        return None

    def deterministic_view(self) -> List[dict]:
        """Records without the wall-clock column, for reproducibility checks."""
        return [r.model_dump(exclude={"wall_clock_s"}) for r in self.records]

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(HISTORY_FIELDS)
        for r in self.records:
            writer.writerow([
                r.epoch,
                repr(r.train_loss),
                repr(r.train_accuracy),
                repr(r.val_accuracy),
                repr(r.val_edit),
                f"{r.wall_clock_s:.3f}",
            ])
        return buffer.getvalue()

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.write_text(self.to_csv(), encoding="utf-8")
        return path

    @classmethod
    def load(cls, path: Union[str, Path]) -> "TrainHistory":
        history = cls()
        with open(path, "r", encoding="utf-8", newline="") as handle:
            for row in csv.DictReader(handle):
                history.append(EpochRecord(**{k: row[k] for k in HISTORY_FIELDS}))
        return history
