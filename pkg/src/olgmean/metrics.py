"""Running confusion counts and the imbalance-aware metrics computed from them.

A class with no observed instances has its recall defined as 1, so online
traces are defined from the very first round.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .errors import InsufficientCounts, NoRounds


class ConfusionState(NamedTuple):
    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def positives(self) -> int:
        return self.tp + self.fn

    @property
    def negatives(self) -> int:
        return self.tn + self.fp

    @property
    def rounds(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


def update_confusion(c: ConfusionState, y: int, yhat: int) -> ConfusionState:
    tp, tn, fp, fn = c
    if y == 1:
        if yhat == 1:
            return ConfusionState(tp + 1, tn, fp, fn)
        return ConfusionState(tp, tn, fp, fn + 1)
    if yhat == 1:
        return ConfusionState(tp, tn, fp + 1, fn)
    return ConfusionState(tp, tn + 1, fp, fn)


def confusion_from_log(pairs: Iterable[tuple[int, int]]) -> ConfusionState:
    """Count a ``(y, yhat)`` log from scratch."""
    tp = tn = fp = fn = 0
    for y, yhat in pairs:
        if y == 1 and yhat == 1:
            tp += 1
        elif y == 1:
            fn += 1
        elif yhat == 1:
            fp += 1
        else:
            tn += 1
    return ConfusionState(tp, tn, fp, fn)


def recall_pos(c: ConfusionState) -> float:
    """Sensitivity TP / (TP + FN)."""
    p = c.positives
    return c.tp / p if p else 1.0


def recall_neg(c: ConfusionState) -> float:
    """Specificity TN / (TN + FP)."""
    n = c.negatives
    return c.tn / n if n else 1.0


def gmean(c: ConfusionState) -> float:
    return math.sqrt(recall_pos(c) * recall_neg(c))


def sum_metric(c: ConfusionState, n_p: float = 0.5, n_n: float = 0.5) -> float:
    """Weighted sum ``n_p * sensitivity + n_n * specificity``."""
    if n_p < 0 or n_n < 0:
        raise ValueError("sum weights must be non-negative")
    return n_p * recall_pos(c) + n_n * recall_neg(c)


def mistake_rate(c: ConfusionState) -> float:
    if c.rounds == 0:
        raise NoRounds("mistake rate undefined before the first round")
    return (c.fp + c.fn) / c.rounds


def lemma1_objective(c: ConfusionState) -> float:
    """Cost-weighted error count ``(N/P)*FN + ((P-FN)/P)*FP``.

    Equals ``N * (1 - gmean(c)**2)``, so minimizing it maximizes G-mean.
    """
    p, n = c.positives, c.negatives
    if p < 1 or n < 1:
        raise InsufficientCounts(f"need P >= 1 and N >= 1, got P={p}, N={n}")
    return (n / p) * c.fn + ((p - c.fn) / p) * c.fp


@dataclass(frozen=True)
class MetricSnapshot:
    t: int
    mistake_rate: float
    gmean: float
    sum: float
    cumulative_loss: float
    updates: int
    elapsed: float
    confusion: ConfusionState = ConfusionState()

    @classmethod
    def from_state(cls, c: ConfusionState, cumulative_loss: float, updates: int,
                   elapsed: float, n_p: float = 0.5, n_n: float = 0.5) -> "MetricSnapshot":
        return cls(
            t=c.rounds,
            mistake_rate=mistake_rate(c) if c.rounds else 0.0,
            gmean=gmean(c),
            sum=sum_metric(c, n_p, n_n),
            cumulative_loss=cumulative_loss,
            updates=updates,
            elapsed=elapsed,
            confusion=c,
        )
