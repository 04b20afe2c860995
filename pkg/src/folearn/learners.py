"""Pluggable online learners: Perceptron, online gradient descent on the
hinge loss, and SGD on the logistic loss.

Every learner starts from the zero weight vector and exposes one uniform
interface: step(example) returns the truncated loss of the *current* weights
on the example (evaluated before the update) and then updates the weights.
The gradient steps use the untruncated surrogate; only the returned value is
capped into [0, 1].
"""

from __future__ import annotations

import math

import numpy as np

from .core import LN2, DimensionMismatch, Example, Hypothesis, LossKind

PERCEPTRON = "perceptron"
OGD_HINGE = "ogd_hinge"
SGD_LOGISTIC = "sgd_logistic"

KINDS = (PERCEPTRON, OGD_HINGE, SGD_LOGISTIC)

LOSS_OF_KIND = {
    PERCEPTRON: LossKind.ZERO_ONE,
    OGD_HINGE: LossKind.HINGE,
    SGD_LOGISTIC: LossKind.LOGISTIC,
}

# numeric codes shared with the compiled fast path
KIND_CODES = {PERCEPTRON: 0, OGD_HINGE: 1, SGD_LOGISTIC: 2}


def _softplus(a):
    # log(1 + exp(a)) without overflow
    return max(a, 0.0) + math.log1p(math.exp(-abs(a)))


class OnlineLearner:
    """One online learner with a step-indexed learning-rate schedule
    eta_t = base_rate * (1 + decay * t) ** (-power)."""

    def __init__(self, kind, d, base_rate=0.01, decay=1e-4, power=0.75, l2=0.0):
        if kind not in KINDS:
            raise ValueError(f"unknown learner kind {kind!r}; expected one of {KINDS}")
        if d < 1:
            raise ValueError("dimension must be >= 1")
        if base_rate <= 0.0:
            raise ValueError("base learning rate must be positive")
        if decay < 0.0 or l2 < 0.0:
            raise ValueError("decay and l2 must be nonnegative")
        self.kind = kind
        self.loss_kind = LOSS_OF_KIND[kind]
        self.d = int(d)
        self.base_rate = float(base_rate)
        self.decay = float(decay)
        self.power = float(power)
        self.l2 = float(l2)
        self.weights = np.zeros(self.d, dtype=np.float64)
        self.step_count = 0

    def clone_fresh(self) -> "OnlineLearner":
        """A new learner with the same configuration and zeroed state."""
        return OnlineLearner(self.kind, self.d, self.base_rate, self.decay, self.power, self.l2)

    def rate(self) -> float:
        """Learning rate used by the next step."""
        return self.base_rate * (1.0 + self.decay * self.step_count) ** (-self.power)

    def step(self, e: Example) -> float:
        """Truncated loss of the current weights on e, then update in place."""
        x = e.features
        if x.shape[0] != self.d:
            raise DimensionMismatch(f"example dim {x.shape[0]} != learner dim {self.d}")
        y = e.label
        margin = y * float(self.weights @ x)

        if self.kind == PERCEPTRON:
            loss = 1.0 if margin <= 0.0 else 0.0
            if margin <= 0.0:
                self.weights += y * x
        elif self.kind == OGD_HINGE:
            loss = min(1.0, max(0.0, 1.0 - margin))
            eta = self.rate()
            if margin < 1.0:
                self.weights += eta * (y * x - self.l2 * self.weights)
            elif self.l2 > 0.0:
                self.weights -= eta * self.l2 * self.weights
        else:  # SGD_LOGISTIC
            loss = min(1.0, _softplus(-margin) / LN2)
            eta = self.rate()
            # d/dw log(1 + exp(-y<w,x>)) = -y x sigma(-y<w,x>)
            if margin > 0.0:
                s = math.exp(-margin) / (1.0 + math.exp(-margin))
            else:
                s = 1.0 / (1.0 + math.exp(margin))
            self.weights += eta * (y * s * x - self.l2 * self.weights)

        self.step_count += 1
        return loss

    def snapshot(self) -> Hypothesis:
        """Immutable copy of the current weight vector."""
        return Hypothesis(self.weights.copy())


def make_learner(kind, d, base_rate=None, decay=1e-4, power=0.75, l2=0.0) -> OnlineLearner:
    """Learner factory with per-kind default base rates (the Perceptron
    ignores the schedule entirely; its update has no rate)."""
    if base_rate is None:
        base_rate = 1.0 if kind == PERCEPTRON else 0.01
    return OnlineLearner(kind, d, base_rate=base_rate, decay=decay, power=power, l2=l2)
