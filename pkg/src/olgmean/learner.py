"""Shared pieces of every linear online learner: dense weights, sparse dot
products, the sign rule, and the test-then-train stream loop."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .dataio import Dataset, SparseFeatures
from .errors import IndexOutOfRange
from .metrics import ConfusionState, MetricSnapshot, update_confusion


@dataclass(frozen=True)
class Prediction:
    margin: float
    label: int


@dataclass(frozen=True)
class StepOutcome:
    prediction: Prediction
    loss: float
    updated: bool


@dataclass
class HyperParams:
    tau: float = 0.2
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be > 0, got {self.tau}")

    def get(self, key, default=None):
        return self.extras.get(key, default)


def check_dimension(w: np.ndarray, x: SparseFeatures) -> None:
    if len(x.indices) and x.indices[-1] >= len(w):
        raise IndexOutOfRange(
            f"feature index {int(x.indices[-1]) + 1} exceeds weight dimension {len(w)}"
        )


def dot(w: np.ndarray, x: SparseFeatures) -> float:
    check_dimension(w, x)
    return float(w[x.indices] @ x.values)


def decide_label(margin: float) -> int:
    # sign(0) maps to the negative (majority) class
    return 1 if margin > 0 else -1


class OnlineLearner:
    """Base class: subclasses implement :meth:`step`.

    ``step`` must compute its prediction from the current weights before the
    label is used for anything.
    """

    name = "learner"

    def __init__(self, dimension: int, initial_weights=None):
        if initial_weights is None:
            self.w = np.zeros(dimension, dtype=np.float64)
        else:
            self.w = np.array(initial_weights, dtype=np.float64)
            if self.w.shape != (dimension,):
                raise ValueError("initial_weights has the wrong shape")
        self.updates = 0

    @property
    def dimension(self) -> int:
        return len(self.w)

    def predict(self, x: SparseFeatures) -> Prediction:
        m = dot(self.w, x)
        return Prediction(m, decide_label(m))

    def step(self, x: SparseFeatures, y: int) -> StepOutcome:
        raise NotImplementedError

    def _add(self, x: SparseFeatures, scale: float) -> None:
        # indices are unique within an instance, so fancy-index += is safe
        self.w[x.indices] += scale * x.values
        self.updates += 1


TraceSink = Callable[[MetricSnapshot], None]


@dataclass
class StreamResult:
    learner: OnlineLearner
    confusion: ConfusionState
    updates: int
    cumulative_loss: float
    elapsed: float
    snapshots: list
    final: MetricSnapshot


def default_trace_every(total: int) -> int:
    return max(1, math.ceil(total / 200))


def run_stream(
    learner: OnlineLearner,
    dataset: Dataset,
    order: Sequence[int] | None = None,
    sink: TraceSink | None = None,
    trace_every: int | None = None,
    n_p: float = 0.5,
    n_n: float = 0.5,
    clock: Callable[[], float] = time.perf_counter,
) -> StreamResult:
    """Feed ``dataset`` through ``learner`` once, in ``order``.

    Each round: predict, reveal the label, suffer loss, maybe update, then
    fold ``(y, yhat)`` into the confusion counts.  A snapshot is taken every
    ``trace_every`` rounds and after the last round; snapshots go to ``sink``
    and are also returned.
    """
    instances = dataset.instances
    if order is None:
        order = range(len(instances))
    total = len(order)
    if trace_every is None:
        trace_every = default_trace_every(total)
    if trace_every < 1:
        raise ValueError("trace_every must be >= 1")
    for inst in instances:
        if inst.features.max_index() >= learner.dimension:
            raise IndexOutOfRange(
                f"dataset {dataset.name} has index {inst.features.max_index() + 1} "
                f"beyond learner dimension {learner.dimension}"
            )

    conf = ConfusionState()
    cum_loss = 0.0
    updates = 0
    snapshots = []
    start = clock()
    t = 0
    for t, idx in enumerate(order, 1):
        inst = instances[idx]
        out = learner.step(inst.features, inst.label)
        conf = update_confusion(conf, inst.label, out.prediction.label)
        cum_loss += out.loss
        updates += out.updated
        if t % trace_every == 0 or t == total:
            snap = MetricSnapshot.from_state(conf, cum_loss, updates, clock() - start, n_p, n_n)
            snapshots.append(snap)
            if sink is not None:
                sink(snap)
    elapsed = clock() - start
    final = snapshots[-1] if snapshots else MetricSnapshot.from_state(conf, 0.0, 0, elapsed, n_p, n_n)
    return StreamResult(learner, conf, updates, cum_loss, elapsed, snapshots, final)
