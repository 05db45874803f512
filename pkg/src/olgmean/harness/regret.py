"""Empirical check of the relative loss bound

    sum_t L_t(w_t) <= sum_t L_t(u) + ||u|| * sqrt(T)

for the OGMEAN iterates ``w_t`` against a fixed comparator ``u``.  The
per-round losses ``L_t`` use the margin requirements ``rho_t`` produced by
the online run itself, so both sides are evaluated on identical functions.

The bound follows from online gradient descent with step ``||u|| / sqrt(T)``
and instances in the unit ball.  The report also evaluates the literal
``||u|| * sqrt(T)`` step for comparison.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from ..dataio import Dataset
from ..errors import EmptyDataset
from ..ogmean import OGMEAN


@dataclass(frozen=True)
class RegretReport:
    T: int
    online_loss: float
    comparator_loss: float
    comparator_norm: float
    bound: float
    satisfied: bool
    tau: float
    tau_fallback: bool
    literal_tau: float
    literal_online_loss: float
    literal_satisfied: bool
    max_instance_norm: float
    passes: int

    def as_dict(self) -> dict:
        return asdict(self)


def fit_comparator(dataset: Dataset, order: Sequence[int], passes: int, tau: float = 0.2) -> np.ndarray:
    """Weights after ``passes`` consecutive OGMEAN sweeps over ``order``."""
    learner = OGMEAN(dataset.dimension, tau)
    inst = dataset.instances
    for _ in range(passes):
        for i in order:
            learner.step(inst[i].features, inst[i].label)
    return learner.w.copy()


def _online_pass(dataset: Dataset, order: Sequence[int], tau: float):
    learner = OGMEAN(dataset.dimension, tau)
    rhos = np.empty(len(order))
    total = 0.0
    inst = dataset.instances
    for t, i in enumerate(order):
        out = learner.step(inst[i].features, inst[i].label)
        rhos[t] = learner.last_rho
        total += out.loss
    return total, rhos


def _fixed_loss(dataset: Dataset, order: Sequence[int], u: np.ndarray, rhos: np.ndarray) -> float:
    total = 0.0
    inst = dataset.instances
    for t, i in enumerate(order):
        x, y = inst[i].features, inst[i].label
        total += max(0.0, float(rhos[t]) - y * float(u[x.indices] @ x.values))
    return total


def regret_check(dataset: Dataset, order: Sequence[int] | None = None, comparator_fit_passes: int = 5,
                 comparator: np.ndarray | None = None, default_tau: float = 0.2) -> RegretReport:
    """Run the bound check; ``comparator`` overrides the multi-pass fit."""
    if len(dataset) == 0:
        raise EmptyDataset("regret check needs at least one instance")
    if order is None:
        order = range(len(dataset))
    order = list(order)
    T = len(order)

    if comparator is None:
        u = fit_comparator(dataset, order, comparator_fit_passes, default_tau)
    else:
        u = np.asarray(comparator, dtype=np.float64)
        if u.shape != (dataset.dimension,):
            raise ValueError("comparator has the wrong dimension")
    u_norm = float(np.linalg.norm(u))
    sqrt_t = math.sqrt(T)

    fallback = u_norm == 0.0
    tau = default_tau if fallback else u_norm / sqrt_t
    online, rhos = _online_pass(dataset, order, tau)
    fixed = _fixed_loss(dataset, order, u, rhos)
    bound = fixed + u_norm * sqrt_t

    literal_tau = default_tau if fallback else u_norm * sqrt_t
    lit_online, lit_rhos = _online_pass(dataset, order, literal_tau)
    lit_bound = _fixed_loss(dataset, order, u, lit_rhos) + u_norm * sqrt_t

    max_norm = float(max(inst.features.norm() for inst in dataset.instances))
    return RegretReport(
        T=T,
        online_loss=online,
        comparator_loss=fixed,
        comparator_norm=u_norm,
        bound=bound,
        satisfied=bool(online <= bound),
        tau=tau,
        tau_fallback=fallback,
        literal_tau=literal_tau,
        literal_online_loss=lit_online,
        literal_satisfied=bool(lit_online <= lit_bound),
        max_instance_norm=max_norm,
        passes=comparator_fit_passes if comparator is None else 0,
    )
