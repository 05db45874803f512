"""First-order comparison learners.

Each algorithm has a pure ``*_step`` function over explicit state, and a
mutable :class:`~olgmean.learner.OnlineLearner` wrapper that the harness
drives.  Mistake-driven learners (perceptron, PAUM) report the trigger
indicator as their loss so that ``updated == (loss > 0)`` holds everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .dataio import Instance, SparseFeatures
from .errors import ZeroNormInstance
from .learner import OnlineLearner, Prediction, StepOutcome, decide_label, dot

PA_KINDS = ("plain", "slack-I", "slack-II")


def _added(w: np.ndarray, x: SparseFeatures, scale: float) -> np.ndarray:
    out = w.copy()
    out[x.indices] += scale * x.values
    return out


# -- perceptron -------------------------------------------------------------

def perceptron_step(w: np.ndarray, instance: Instance) -> tuple[StepOutcome, np.ndarray]:
    x, y = instance.features, instance.label
    m = dot(w, x)
    mistake = y * m <= 0
    out = StepOutcome(Prediction(m, decide_label(m)), float(mistake), mistake)
    return out, (_added(w, x, y) if mistake else w)


class Perceptron(OnlineLearner):
    name = "perceptron"

    def step(self, x, y):
        m = float(self.w[x.indices] @ x.values)
        mistake = y * m <= 0
        if mistake:
            self._add(x, y)
        return StepOutcome(Prediction(m, decide_label(m)), float(mistake), mistake)


# -- passive-aggressive -----------------------------------------------------

@dataclass(frozen=True)
class PaVariant:
    kind: str = "plain"
    C: float = 1.0

    def __post_init__(self):
        if self.kind not in PA_KINDS:
            raise ValueError(f"PA kind must be one of {PA_KINDS}")
        if not self.C > 0:
            raise ValueError("C must be > 0")

    def step_size(self, ell: float, sq_norm: float) -> float:
        if self.kind == "slack-II":
            return ell / (sq_norm + 1.0 / (2.0 * self.C))
        if sq_norm == 0.0:
            raise ZeroNormInstance("PA update on an all-zero instance")
        if self.kind == "plain":
            return ell / sq_norm
        return min(self.C, ell / sq_norm)


def pa_step(w: np.ndarray, instance: Instance, params: PaVariant = PaVariant()
            ) -> tuple[StepOutcome, np.ndarray]:
    x, y = instance.features, instance.label
    m = dot(w, x)
    ell = max(0.0, 1.0 - y * m)
    out = StepOutcome(Prediction(m, decide_label(m)), ell, ell > 0)
    if ell <= 0:
        return out, w
    step = params.step_size(ell, float(x.values @ x.values))
    return out, _added(w, x, step * y)


class PassiveAggressive(OnlineLearner):
    def __init__(self, dimension, kind="plain", C=1.0, initial_weights=None):
        super().__init__(dimension, initial_weights)
        self.params = PaVariant(kind, C)
        self.name = {"plain": "pa", "slack-I": "pa1", "slack-II": "pa2"}[kind]

    def step(self, x, y):
        m = float(self.w[x.indices] @ x.values)
        ell = max(0.0, 1.0 - y * m)
        if ell > 0:
            self._add(x, self.params.step_size(ell, float(x.values @ x.values)) * y)
        return StepOutcome(Prediction(m, decide_label(m)), ell, ell > 0)


# -- perceptron with uneven margins -----------------------------------------

def paum_step(w: np.ndarray, instance: Instance, margins: tuple[float, float] = (1.0, 0.0),
              tau: float = 1.0) -> tuple[StepOutcome, np.ndarray]:
    """Update ``w + tau*y*x`` when ``y<w,x> <= m_y``; ``margins = (m_pos, m_neg)``."""
    m_pos, m_neg = margins
    if m_pos < 0 or m_neg < 0:
        raise ValueError("PAUM margins must be non-negative")
    x, y = instance.features, instance.label
    m = dot(w, x)
    trigger = y * m <= (m_pos if y == 1 else m_neg)
    out = StepOutcome(Prediction(m, decide_label(m)), float(trigger), trigger)
    return out, (_added(w, x, tau * y) if trigger else w)


class PAUM(OnlineLearner):
    name = "paum"

    def __init__(self, dimension, tau=1.0, m_pos=1.0, m_neg=0.0, initial_weights=None):
        super().__init__(dimension, initial_weights)
        if m_pos < 0 or m_neg < 0:
            raise ValueError("PAUM margins must be non-negative")
        self.tau, self.m_pos, self.m_neg = tau, m_pos, m_neg

    def step(self, x, y):
        m = float(self.w[x.indices] @ x.values)
        trigger = y * m <= (self.m_pos if y == 1 else self.m_neg)
        if trigger:
            self._add(x, self.tau * y)
        return StepOutcome(Prediction(m, decide_label(m)), float(trigger), trigger)


# -- cost-sensitive sum learner ---------------------------------------------

@dataclass(frozen=True)
class CsocParams:
    tau: float = 0.2
    eta_p: float = 0.5
    eta_n: float = 0.5

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be > 0")
        if self.eta_p < 0 or self.eta_n < 0 or abs(self.eta_p + self.eta_n - 1.0) > 1e-12:
            raise ValueError("eta_p and eta_n must be non-negative and sum to 1")


class CsocCounts(NamedTuple):
    P: int = 0
    N: int = 0


def csoc_rho(y: int, counts: CsocCounts, params: CsocParams) -> float:
    """Margin requirement with add-one (Laplace) smoothed class counts."""
    if y == 1:
        return params.eta_p * (counts.N + 1) / (counts.P + 1)
    return params.eta_n


@dataclass(frozen=True)
class CsocState:
    weights: np.ndarray
    counts: CsocCounts = CsocCounts()


def csoc_sum_step(state: CsocState, instance: Instance, params: CsocParams = CsocParams()
                  ) -> tuple[StepOutcome, CsocState]:
    x, y = instance.features, instance.label
    m = dot(state.weights, x)
    ell = max(0.0, csoc_rho(y, state.counts, params) - y * m)
    w = _added(state.weights, x, params.tau * y) if ell > 0 else state.weights
    counts = CsocCounts(state.counts.P + (y == 1), state.counts.N + (y != 1))
    return StepOutcome(Prediction(m, decide_label(m)), ell, ell > 0), replace(state, weights=w, counts=counts)


class CsocSum(OnlineLearner):
    name = "csoc_sum"

    def __init__(self, dimension, tau=0.2, eta_p=0.5, eta_n=0.5, initial_weights=None):
        super().__init__(dimension, initial_weights)
        self.params = CsocParams(tau, eta_p, eta_n)
        self.counts = CsocCounts()

    def step(self, x, y):
        m = float(self.w[x.indices] @ x.values)
        ell = csoc_rho(y, self.counts, self.params) - y * m
        updated = ell > 0
        if updated:
            self._add(x, self.params.tau * y)
        else:
            ell = 0.0
        self.counts = CsocCounts(self.counts.P + (y == 1), self.counts.N + (y != 1))
        return StepOutcome(Prediction(m, decide_label(m)), ell, updated)
