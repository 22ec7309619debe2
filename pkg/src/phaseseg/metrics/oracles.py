"""Brute-force reference implementations used to cross-check the metrics.

Everything here is deliberately naive: loops over frames, exhaustive
searches and an augmenting-path matcher. They are only meant for small
instances.
"""

from itertools import product
from typing import List, Sequence, Tuple


def oracle_accuracy(pred: Sequence[int], gt: Sequence[int]) -> float:
    correct = 0
    for p, g in zip(pred, gt):
        if p == g:
            correct += 1
    return 100.0 * correct / len(gt)


def oracle_confusion(pred: Sequence[int], gt: Sequence[int], num_classes: int) -> List[List[int]]:
    """``matrix[g][p]`` counts frames with ground truth g predicted as p."""
    matrix = [[0] * num_classes for _ in range(num_classes)]
    for p, g in zip(pred, gt):
        matrix[g][p] += 1
    return matrix


def oracle_prf_jaccard(pred: Sequence[int], gt: Sequence[int], num_classes: int) -> Tuple[float, float, float]:
    matrix = oracle_confusion(pred, gt, num_classes)
    precisions, recalls, jaccards = [], [], []
    for c in range(num_classes):
        tp = matrix[c][c]
        fp = 0
        fn = 0
        for other in range(num_classes):
            if other != c:
                fp += matrix[other][c]
                fn += matrix[c][other]
        if tp + fp + fn == 0:
            continue
        precisions.append(100.0 * tp / (tp + fp) if tp + fp else 0.0)
        recalls.append(100.0 * tp / (tp + fn) if tp + fn else 0.0)
        jaccards.append(100.0 * tp / (tp + fp + fn))
    n = len(precisions)
    return sum(precisions) / n, sum(recalls) / n, sum(jaccards) / n


def oracle_segments(labels: Sequence[int]) -> List[Tuple[int, int, int]]:
    runs = []
    start = 0
    for t in range(1, len(labels) + 1):
        if t == len(labels) or labels[t] != labels[start]:
            runs.append((labels[start], start, t))
            start = t
    return runs


def oracle_edit_distance(a: Sequence[int], b: Sequence[int]) -> int:
    """Search every edit path from ``a`` to ``b``.

    Equal leading symbols are always kept, which never loses optimality and
    keeps the search small enough for short sequences.
    """
    a, b = tuple(a), tuple(b)
    if not a:
        return len(b)
    if not b:
        return len(a)
    if a[0] == b[0]:
        return oracle_edit_distance(a[1:], b[1:])
    return 1 + min(
        oracle_edit_distance(a[1:], b),
        oracle_edit_distance(a, b[1:]),
        oracle_edit_distance(a[1:], b[1:]),
    )


def oracle_edit_score(pred: Sequence[int], gt: Sequence[int]) -> float:
    p = [s[0] for s in oracle_segments(pred)]
    g = [s[0] for s in oracle_segments(gt)]
    return 100.0 * (1 - oracle_edit_distance(p, g) / max(len(p), len(g)))


def _eligible_pairs(pred, gt, tau) -> List[List[int]]:
    """For each predicted segment, the same-label gt segments with IoU >= tau/100."""
    pairs = []
    for pl, ps, pe in pred:
        row = []
        for j, (gl, gs, ge) in enumerate(gt):
            if gl != pl:
                continue
            inter = len(set(range(ps, pe)) & set(range(gs, ge)))
            union = len(set(range(ps, pe)) | set(range(gs, ge)))
            if 100 * inter >= tau * union:
                row.append(j)
        pairs.append(row)
    return pairs


def oracle_optimal_tp(pred: Sequence[int], gt: Sequence[int], tau: int) -> int:
    """Largest number of true positives any one-to-one matching achieves (exhaustive)."""
    pred_segs, gt_segs = oracle_segments(pred), oracle_segments(gt)
    eligible = _eligible_pairs(pred_segs, gt_segs, tau)
    options = [[None] + row for row in eligible]
    best = 0
    for choice in product(*options):
        taken = [j for j in choice if j is not None]
        if len(taken) == len(set(taken)):
            best = max(best, len(taken))
    return best


def oracle_kuhn_tp(pred: Sequence[int], gt: Sequence[int], tau: int) -> int:
    """Maximum matching on the eligible pairs with augmenting paths."""
    pred_segs, gt_segs = oracle_segments(pred), oracle_segments(gt)
    eligible = _eligible_pairs(pred_segs, gt_segs, tau)
    owner = [-1] * len(gt_segs)

    def augment(i, seen):
        for j in eligible[i]:
            if seen[j]:
                continue
            seen[j] = True
            if owner[j] == -1 or augment(owner[j], seen):
                owner[j] = i
                return True
        return False

    return sum(augment(i, [False] * len(gt_segs)) for i in range(len(pred_segs)))


def oracle_f1(pred: Sequence[int], gt: Sequence[int], tau: int) -> float:
    """F1 from the optimal matching."""
    tp = oracle_optimal_tp(pred, gt, tau)
    n_pred, n_gt = len(oracle_segments(pred)), len(oracle_segments(gt))
    if tp == 0:
        return 0.0
    return 100.0 * 2 * tp / (n_pred + n_gt)
