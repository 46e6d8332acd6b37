"""Ranking metrics: AUC by rank summation and ROC curve points."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RocCurve:
    """ROC points from (0, 0) to (1, 1) and the trapezoidal area."""

    points: np.ndarray
    auc: float


def _validated(scores, labels):
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ValueError(
            f"scores and labels must be equal-length vectors, got "
            f"{scores.shape} and {labels.shape}"
        )
    if not np.isin(labels, (0, 1)).all():
        raise ValueError("labels must be binary (0 or 1)")
    n_pos = int(labels.sum())
    if n_pos == 0 or n_pos == len(labels):
        raise ValueError("need at least one positive and one negative label")
    return scores, labels.astype(np.int64)


def _midranks(scores: np.ndarray) -> np.ndarray:
    """1-based ranks with ties assigned the mean rank of their group."""
    n = len(scores)
    order = np.argsort(scores, kind="mergesort")
    s = scores[order]
    starts = np.flatnonzero(np.r_[True, s[1:] != s[:-1]])
    ends = np.r_[starts[1:], n]
    group_rank = (starts + 1 + ends) / 2.0
    ranks_sorted = np.repeat(group_rank, ends - starts)
    ranks = np.empty(n)
    ranks[order] = ranks_sorted
    return ranks


def auc(scores, labels) -> float:
    """Probability a random positive outranks a random negative, ties 1/2.

    Rank-summation (Mann-Whitney) form over a stable sort.
    """
    scores, labels = _validated(scores, labels)
    ranks = _midranks(scores)
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    pos_rank_sum = float(ranks[labels == 1].sum())
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def roc_points(scores, labels) -> RocCurve:
    """ROC curve swept over distinct score thresholds, descending.

    The trapezoidal area under the returned points equals :func:`auc`.
    """
    scores, labels = _validated(scores, labels)
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    order = np.argsort(-scores, kind="mergesort")
    s = scores[order]
    y = labels[order]
    tp = np.cumsum(y)
    fp = np.cumsum(1 - y)
    last_of_group = np.r_[s[1:] != s[:-1], True]
    tpr = tp[last_of_group] / n_pos
    fpr = fp[last_of_group] / n_neg
    points = np.concatenate([[[0.0, 0.0]], np.column_stack([fpr, tpr])])
    x, y = points[:, 0], points[:, 1]
    area = float(np.sum((x[1:] - x[:-1]) * (y[1:] + y[:-1]) / 2.0))
    return RocCurve(points=points, auc=area)


def write_roc_csv(curve: RocCurve, path) -> None:
    """ROC CSV: ``fpr,tpr`` rows."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("fpr,tpr\n")
        for fpr, tpr in curve.points:
            fh.write(f"{fpr:.17g},{tpr:.17g}\n")
