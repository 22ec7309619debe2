"""Frame-level phase labels and their segment encoding."""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, List, NamedTuple, Sequence, Union

import numpy as np

from ..utils.exceptions import DataError, EmptyInputError


@dataclass(frozen=True, eq=False)
class PhaseSequence:
    """One label per frame in ``[0, num_classes)``."""

    labels: np.ndarray
    num_classes: int
    fps: Fraction = field(default=Fraction(1))

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 1:
            raise DataError(f"Labels must be one-dimensional, got shape {labels.shape}", field="labels")
        if labels.size == 0:
            raise EmptyInputError("A phase sequence needs at least one frame")
        if not np.issubdtype(labels.dtype, np.integer):
            if not np.all(np.equal(np.mod(labels, 1), 0)):
                raise DataError("Labels must be integers", field="labels")
        labels = labels.astype(np.int64)
        if self.num_classes < 1:
            raise DataError(f"num_classes must be positive, got {self.num_classes}", field="num_classes")
        bad = np.flatnonzero((labels < 0) | (labels >= self.num_classes))
        if bad.size:
            raise DataError(
                f"Label {int(labels[bad[0]])} at frame {int(bad[0])} is outside [0, {self.num_classes})",
                index=int(bad[0]),
                field="labels",
            )
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "fps", Fraction(self.fps))

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    @classmethod
    def from_list(cls, labels: Sequence[int], num_classes: int) -> "PhaseSequence":
        return cls(np.asarray(labels, dtype=np.int64), num_classes)

    def tolist(self) -> List[int]:
        return [int(v) for v in self.labels]


class Segment(NamedTuple):
    """Maximal run of one label over ``[start, end)``."""

    label: int
    start: int
    end: int

    @property
    def length(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class SegmentList:
    """Ordered runs that tile ``[0, T)`` with no two neighbours sharing a label."""

    segments: tuple

    def __post_init__(self):
        segments = tuple(Segment(*s) for s in self.segments)
        cursor = 0
        for i, seg in enumerate(segments):
            if seg.start != cursor or seg.end <= seg.start:
                raise DataError(f"Segment {i} {tuple(seg)} does not continue the tiling at {cursor}", index=i)
            if i and segments[i - 1].label == seg.label:
                raise DataError(f"Segments {i - 1} and {i} share label {seg.label}", index=i)
            cursor = seg.end
        object.__setattr__(self, "segments", segments)

    def __len__(self) -> int:
        return len(self.segments)

    def __iter__(self) -> Iterator[Segment]:
        return iter(self.segments)

    def __getitem__(self, index: int) -> Segment:
        return self.segments[index]

    @property
    def num_frames(self) -> int:
        return self.segments[-1].end if self.segments else 0

    @property
    def labels(self) -> List[int]:
        return [s.label for s in self.segments]

    def to_frames(self) -> np.ndarray:
        """Expand back to one label per frame."""
        return np.repeat(
            np.asarray(self.labels, dtype=np.int64),
            [s.length for s in self.segments],
        )


def segments_from_frames(seq: Union[PhaseSequence, Sequence[int], np.ndarray]) -> SegmentList:
    """Run-length encode a label sequence into maximal segments."""
    labels = seq.labels if isinstance(seq, PhaseSequence) else np.asarray(seq, dtype=np.int64)
    if labels.size == 0:
        raise EmptyInputError("Cannot segment an empty sequence")
    change = np.flatnonzero(labels[1:] != labels[:-1]) + 1
    starts = np.concatenate([[0], change])
    ends = np.concatenate([change, [labels.size]])
    return SegmentList(tuple(
        Segment(int(labels[s]), int(s), int(e)) for s, e in zip(starts, ends)
    ))
