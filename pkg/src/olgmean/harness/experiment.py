"""Multi-permutation experiment runner and mean/std aggregation."""

from __future__ import annotations

import dataclasses
import logging
import math
import statistics
from dataclasses import dataclass, field
from typing import Sequence

from ..baselines import PAUM, CsocSum, PassiveAggressive, Perceptron
from ..dataio import NORMALIZE_MODES, Dataset, open_dataset, permute
from ..errors import EmptyList, UnknownAlgorithm
from ..learner import OnlineLearner, run_stream
from ..metrics import MetricSnapshot
from ..ogmean import OGMEAN

logger = logging.getLogger(__name__)

_MASK64 = (1 << 64) - 1

ALGORITHMS = ("ogmean", "csoc_sum", "perceptron", "pa", "pa1", "pa2", "paum")


def make_learner(algo: str, dimension: int, tau: float = 0.2, params: dict | None = None) -> OnlineLearner:
    """Instantiate a registered algorithm.

    Recognized ``params``: ``schedule`` (ogmean), ``C`` (pa1/pa2),
    ``m_pos``/``m_neg`` (paum), ``eta_p``/``eta_n`` (csoc_sum).
    """
    p = params or {}
    if algo == "ogmean":
        return OGMEAN(dimension, tau, schedule=p.get("schedule", "constant"))
    if algo == "csoc_sum":
        return CsocSum(dimension, tau, float(p.get("eta_p", 0.5)), float(p.get("eta_n", 0.5)))
    if algo == "perceptron":
        return Perceptron(dimension)
    if algo == "pa":
        return PassiveAggressive(dimension, "plain")
    if algo == "pa1":
        return PassiveAggressive(dimension, "slack-I", float(p.get("C", 1.0)))
    if algo == "pa2":
        return PassiveAggressive(dimension, "slack-II", float(p.get("C", 1.0)))
    if algo == "paum":
        return PAUM(dimension, tau, float(p.get("m_pos", 1.0)), float(p.get("m_neg", 0.0)))
    raise UnknownAlgorithm(f"unknown algorithm {algo!r}; expected one of {ALGORITHMS}")


@dataclass
class ExperimentConfig:
    dataset: str
    algo: str = "ogmean"
    tau: float = 0.2
    runs: int = 20
    seed: int = 0
    normalize: str = "none"
    trace_every: int | None = None
    n_p: float = 0.5
    n_n: float = 0.5
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if not self.tau > 0:
            raise ValueError("tau must be > 0")
        if self.normalize not in NORMALIZE_MODES:
            raise ValueError(f"normalize must be one of {NORMALIZE_MODES}")
        if self.algo not in ALGORITHMS:
            raise UnknownAlgorithm(f"unknown algorithm {self.algo!r}; expected one of {ALGORITHMS}")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class TraceRecord:
    algo: str
    dataset: str
    run_id: int
    snapshot: MetricSnapshot


def aggregate(values: Sequence[float]) -> tuple[float, float]:
    """Mean and sample (n-1) standard deviation; std is 0 for one value."""
    values = list(values)
    if not values:
        raise EmptyList("cannot aggregate an empty list")
    mean = math.fsum(values) / len(values)
    std = statistics.stdev(values) if len(values) > 1 else 0.0
    return mean, std


@dataclass
class RunSummary:
    algo: str
    dataset: str
    finals: list
    mistake_rate: tuple = (0.0, 0.0)
    updates: tuple = (0.0, 0.0)
    elapsed: tuple = (0.0, 0.0)
    sum: tuple = (0.0, 0.0)
    gmean: tuple = (0.0, 0.0)

    @property
    def runs(self) -> int:
        return len(self.finals)

    @classmethod
    def from_finals(cls, algo: str, dataset: str, finals: Sequence[MetricSnapshot]) -> "RunSummary":
        finals = list(finals)
        return cls(
            algo, dataset, finals,
            mistake_rate=aggregate([f.mistake_rate for f in finals]),
            updates=aggregate([float(f.updates) for f in finals]),
            elapsed=aggregate([f.elapsed for f in finals]),
            sum=aggregate([f.sum for f in finals]),
            gmean=aggregate([f.gmean for f in finals]),
        )


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    summary: RunSummary
    traces: list


def run_seed(base: int, run_id: int) -> int:
    return (base + run_id) & _MASK64


def run_experiment(config: ExperimentConfig, dataset: Dataset | None = None, manifest=None,
                   cache_dir=None, timing: bool = True) -> ExperimentResult:
    """Run ``config.runs`` permutations; run ``r`` uses seed ``config.seed + r``.

    With ``timing=False`` every elapsed value is recorded as 0 so outputs are
    byte-reproducible.
    """
    if dataset is None:
        dataset = open_dataset(config.dataset, manifest, cache_dir, config.normalize)
    else:
        dataset = dataset.normalized(config.normalize)

    traces = []
    finals = []
    for run_id in range(config.runs):
        order = permute(len(dataset), run_seed(config.seed, run_id))
        learner = make_learner(config.algo, dataset.dimension, config.tau, config.params)
        res = run_stream(learner, dataset, order, trace_every=config.trace_every,
                         n_p=config.n_p, n_n=config.n_n)
        snaps = res.snapshots
        if not timing:
            snaps = [dataclasses.replace(s, elapsed=0.0) for s in snaps]
        traces.extend(TraceRecord(config.algo, config.dataset, run_id, s) for s in snaps)
        finals.append(snaps[-1])
        logger.debug("%s/%s run %d: mistake rate %.4f, %d updates",
                     config.algo, config.dataset, run_id, snaps[-1].mistake_rate, snaps[-1].updates)
    summary = RunSummary.from_finals(config.algo, config.dataset, finals)
    logger.info("%s on %s: mistake rate %.4f +- %.4f, updates %.2f +- %.2f",
                config.algo, config.dataset, *summary.mistake_rate, *summary.updates)
    return ExperimentResult(config, summary, traces)
