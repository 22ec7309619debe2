"""Semi-Markov workflow models and label sequence sampling."""

from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

from ..models.sequences import PhaseSequence
from ..utils.exceptions import GenerationError

ROW_TOLERANCE = 1e-9


class DurationLaw(BaseModel):
    """Negative-binomial run length in frames, clamped below at ``min_frames``."""
    mean: float = Field(..., gt=0.0, description="Mean run length")
    dispersion: float = Field(default=4.0, gt=0.0, description="Shape r; variance is mean + mean^2 / r")
    min_frames: int = Field(default=1, ge=1, description="Shortest allowed run")

    def sample(self, rng: np.random.Generator) -> int:
        p = self.dispersion / (self.dispersion + self.mean)
        return max(self.min_frames, int(rng.negative_binomial(self.dispersion, p)))


class WorkflowModel(BaseModel):
    """Phase transitions plus per-phase durations.

    Rows of ``transition`` are the next-phase distribution of each phase.
    Rows of terminal phases and of interrupt classes are never sampled; by
    convention they send all mass to phase 0. Leaving an interrupt class
    resumes the phase it interrupted.
    """
    phase_names: List[str] = Field(..., min_length=2)
    transition: List[List[float]] = Field(..., description="C x C row-stochastic matrix, zero diagonal")
    durations: List[DurationLaw]
    initial_phase: int = Field(default=0, ge=0)
    terminal_phases: List[int] = Field(default_factory=list)
    interrupt_classes: List[int] = Field(default_factory=list)
    swap_pairs: List[Tuple[int, int]] = Field(default_factory=list)
    swap_prob: float = Field(default=0.0, ge=0.0, le=1.0)
    ambiguity_width: int = Field(default=0, ge=0, description="Frames of feature blending at transitions")
    max_path_length: int = Field(default=64, ge=1)

    @model_validator(mode="after")
    def validate_shapes(self):
        c = len(self.phase_names)
        matrix = np.asarray(self.transition, dtype=np.float64)
        if matrix.shape != (c, c):
            raise ValueError(f"transition must be {c}x{c}, got {matrix.shape}")
        if (matrix < 0).any():
            raise ValueError("transition probabilities must be non-negative")
        row_sums = matrix.sum(axis=1)
        bad = np.flatnonzero(np.abs(row_sums - 1.0) > ROW_TOLERANCE)
        if bad.size:
            raise ValueError(f"row {int(bad[0])} of transition sums to {row_sums[bad[0]]!r}, not 1")
        if np.any(np.diag(matrix) != 0.0):
            raise ValueError("transition diagonal must be 0; self-transitions come from durations")
        if len(self.durations) != c:
            raise ValueError(f"need {c} duration laws, got {len(self.durations)}")
        for index in [self.initial_phase, *self.terminal_phases, *self.interrupt_classes,
                      *[i for pair in self.swap_pairs for i in pair]]:
            if not 0 <= index < c:
                raise ValueError(f"phase index {index} outside [0, {c})")
        if self.initial_phase in self.interrupt_classes:
            raise ValueError("the workflow cannot start in an interrupt class")
        return self

    @property
    def num_classes(self) -> int:
        return len(self.phase_names)

    @property
    def matrix(self) -> np.ndarray:
        return np.asarray(self.transition, dtype=np.float64)

    def min_total_frames(self) -> int:
        """Frames needed by the shortest allowed first run."""
        return self.durations[self.initial_phase].min_frames

    def sample_path(self, rng: np.random.Generator) -> List[int]:
        """Sequence of visited phases, before any order swaps."""
        matrix = self.matrix
        interrupts = set(self.interrupt_classes)
        terminals = set(self.terminal_phases)
        path = [self.initial_phase]
        resume: Optional[int] = None
        while path[-1] not in terminals and len(path) < self.max_path_length:
            current = path[-1]
            if current in interrupts:
                nxt, resume = resume, None
            else:
                nxt = int(rng.choice(self.num_classes, p=matrix[current]))
                if nxt in interrupts:
                    resume = current
            path.append(nxt)
        return path

    def apply_swaps(self, path: List[int], rng: np.random.Generator) -> List[int]:
        """Swap ``a, b`` to ``b, a`` where they occur back to back, with ``swap_prob``."""
        path = list(path)
        for a, b in self.swap_pairs:
            if rng.random() >= self.swap_prob:
                continue
            for i in range(len(path) - 1):
                if path[i] == a and path[i + 1] == b:
                    path[i], path[i + 1] = b, a
                    break
        return path


def fit_durations(durations: List[int], minimums: List[int], target: int) -> List[int]:
    """Rescale run lengths to sum exactly to ``target`` keeping every run at or above its minimum.

    The slack above the minimums is scaled proportionally; rounding leftovers
    go to the largest fractional parts, ties to the earlier run.
    """
    budget = target - sum(minimums)
    if budget < 0:
        raise GenerationError(f"Minimum durations need {sum(minimums)} frames, target is {target}")
    slack = [max(0, d - m) for d, m in zip(durations, minimums)]
    total = sum(slack)
    if total == 0:
        slack, total = [1] * len(durations), len(durations)
    alloc = [s * budget // total for s in slack]
    remainders = [s * budget % total for s in slack]
    leftover = budget - sum(alloc)
    order = sorted(range(len(slack)), key=lambda i: (-remainders[i], i))
    for i in order[:leftover]:
        alloc[i] += 1
    return [m + a for m, a in zip(minimums, alloc)]


def generate_video(
    model: WorkflowModel,
    seed: int,
    target_length: Optional[int] = None,
) -> PhaseSequence:
    """Sample one label sequence.

    Args:
        model: Workflow to sample from
        seed: Seed of this video's random stream
        target_length: Exact number of frames, or None to keep sampled durations

    Returns:
        Frame labels; same seed and model give the same sequence.
    """
    rng = np.random.default_rng(seed)
    path = model.apply_swaps(model.sample_path(rng), rng)
    durations = [model.durations[p].sample(rng) for p in path]

    if target_length is not None:
        if target_length < 1:
            raise GenerationError(f"Target length must be positive, got {target_length}")
        minimums = [model.durations[p].min_frames for p in path]
        keep = len(path)
        while keep > 0 and sum(minimums[:keep]) > target_length:
            keep -= 1
        if keep == 0:
            raise GenerationError(
                f"Target length {target_length} is below the {minimums[0]}-frame minimum of the first phase"
            )
        path, durations, minimums = path[:keep], durations[:keep], minimums[:keep]
        durations = fit_durations(durations, minimums, target_length)

    labels = np.repeat(np.asarray(path, dtype=np.int64), durations)
    return PhaseSequence(labels, model.num_classes)
