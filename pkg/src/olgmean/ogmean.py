"""Online G-mean maximization.

Maximizing sqrt(recall+ * recall-) is equivalent to minimizing the weighted
error count ``(N/P)*FN + ((P-FN)/P)*FP``.  Its convex relaxation is a hinge
loss with a class-dependent margin requirement

    rho(+1) = N / P          rho(-1) = (P - FN) / P
    loss(w; x, y) = max(0, rho(y) - y * <w, x>)

which is minimized online by plain gradient steps ``w <- w + tau * y * x``
whenever the loss is positive.  P, N and FN are running counts from the
rounds *before* the current one; both denominators are floored at 1 so the
first rounds are defined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .dataio import Instance, SparseFeatures
from .learner import OnlineLearner, Prediction, StepOutcome, decide_label, dot

SCHEDULES = ("constant", "inv-sqrt")


class ClassCounts(NamedTuple):
    P: int = 0
    N: int = 0
    FN: int = 0

    def observe(self, y: int, yhat: int) -> "ClassCounts":
        if y == 1:
            return ClassCounts(self.P + 1, self.N, self.FN + (yhat != 1))
        return ClassCounts(self.P, self.N + 1, self.FN)


def rho(y: int, counts: ClassCounts) -> float:
    p_hat = max(counts.P, 1)
    if y == 1:
        return max(counts.N, 1) / p_hat
    return (p_hat - counts.FN) / p_hat


def loss(w: np.ndarray, x: SparseFeatures, y: int, counts: ClassCounts) -> float:
    return max(0.0, rho(y, counts) - y * dot(w, x))


def loss_subgradient(w: np.ndarray, x: SparseFeatures, y: int, counts: ClassCounts) -> SparseFeatures:
    """Gradient of :func:`loss` w.r.t. ``w`` on the support of ``x``.

    At the kink (loss exactly 0 with ``y<w,x> == rho``) the zero subgradient is
    returned.
    """
    if loss(w, x, y, counts) > 0:
        return SparseFeatures(x.indices.copy(), -y * x.values)
    return SparseFeatures(x.indices.copy(), np.zeros_like(x.values))


def update(w: np.ndarray, x: SparseFeatures, y: int, tau: float, loss_value: float) -> np.ndarray:
    """Return ``w + tau*y*x`` if ``loss_value > 0``, else ``w`` itself."""
    if loss_value <= 0:
        return w
    out = w.copy()
    out[x.indices] += tau * y * x.values
    return out


@dataclass(frozen=True)
class OgmeanState:
    weights: np.ndarray
    counts: ClassCounts = ClassCounts()
    tau: float = 0.2

    @classmethod
    def initial(cls, dimension: int, tau: float = 0.2) -> "OgmeanState":
        if not tau > 0:
            raise ValueError("tau must be > 0")
        return cls(np.zeros(dimension), ClassCounts(), tau)


def ogmean_step(state: OgmeanState, instance: Instance) -> tuple[StepOutcome, OgmeanState]:
    """One round on an immutable state; returns the outcome and the next state."""
    x, y = instance.features, instance.label
    margin = dot(state.weights, x)
    yhat = decide_label(margin)
    ell = max(0.0, rho(y, state.counts) - y * margin)
    weights = update(state.weights, x, y, state.tau, ell)
    outcome = StepOutcome(Prediction(margin, yhat), ell, ell > 0)
    return outcome, replace(state, weights=weights, counts=state.counts.observe(y, yhat))


class OGMEAN(OnlineLearner):
    """Mutable learner equivalent to folding :func:`ogmean_step` over a stream.

    ``schedule="inv-sqrt"`` uses ``tau / sqrt(t)`` at round ``t``.
    ``rho_override`` replaces the adaptive margin by a constant; with 0 the
    update fires exactly on strict mistakes ``y<w,x> < 0``.
    """

    name = "ogmean"

    def __init__(self, dimension: int, tau: float = 0.2, schedule: str = "constant",
                 rho_override: float | None = None, initial_weights=None):
        super().__init__(dimension, initial_weights)
        if not tau > 0:
            raise ValueError("tau must be > 0")
        if schedule not in SCHEDULES:
            raise ValueError(f"schedule must be one of {SCHEDULES}")
        self.tau = tau
        self.schedule = schedule
        self.rho_override = rho_override
        self.counts = ClassCounts()
        self.t = 0
        self.last_rho = math.nan

    def current_rho(self, y: int) -> float:
        if self.rho_override is not None:
            return self.rho_override
        return rho(y, self.counts)

    def step(self, x: SparseFeatures, y: int) -> StepOutcome:
        self.t += 1
        margin = float(self.w[x.indices] @ x.values)
        yhat = decide_label(margin)
        r = self.current_rho(y)
        self.last_rho = r
        ell = r - y * margin
        updated = ell > 0
        if updated:
            tau = self.tau if self.schedule == "constant" else self.tau / math.sqrt(self.t)
            self._add(x, tau * y)
        else:
            ell = 0.0
        self.counts = self.counts.observe(y, yhat)
        return StepOutcome(Prediction(margin, yhat), ell, updated)
