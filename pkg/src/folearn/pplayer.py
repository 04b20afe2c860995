"""The adversarial example-sampling player.

Maintains a weight tree over the m training examples, samples from the
mixture p = gamma * uniform + (1 - gamma) * q (gamma defaults to 1/2), and
on feedback multiplies the sampled leaf by exp(eta * loss / p_i), the
exponentiated-gradient step for the importance-weighted loss estimate. With
eta <= 1/(2m) and gamma = 1/2 the exponent never exceeds the observed loss,
so single-round factors stay below e.

Audit mode keeps a per-round record (sampled index, probability, loss, and a
snapshot of q) so that the exponentiated-gradient regret inequality can be
re-checked after a run against every corner of the simplex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sampler import SamplerTree

AUDIT_MAX_M = 256


@dataclass
class RoundRecord:
    t: int
    index: int
    prob: float
    loss: float
    q: np.ndarray | None = None


@dataclass
class AuditReport:
    """Outcome of re-checking the exponentiated-gradient regret bound.

    For every corner u = e_j of the simplex the audited inequality is

        sum_t <q_t - u, z_t>  <=  log(m)/eta + eta * sum_t sum_i q_{t,i} z_{t,i}^2

    with z_t = -(loss_t / p_t) e_{i_t}. `max_violation` is the largest
    lhs - rhs over corners; a correct sampler keeps it <= 0 up to float error.
    """

    lhs_per_corner: np.ndarray
    rhs: float
    max_violation: float
    worst_corner: int
    mean_true_loss_per_corner: np.ndarray | None = None

    @property
    def ok(self):
        return self.max_violation <= 1e-9


class PPlayer:
    def __init__(self, m, eta=None, gamma=0.5, audit=False, theorem_mode=False):
        if m < 1:
            raise ValueError("need at least one example")
        self.m = int(m)
        self.eta = 1.0 / (2.0 * self.m) if eta is None else float(eta)
        if self.eta <= 0.0:
            raise ValueError("eta must be positive")
        if not 0.0 < gamma <= 1.0:
            raise ValueError("gamma must lie in (0, 1]")
        self.gamma = float(gamma)
        if theorem_mode:
            if self.gamma != 0.5:
                raise ValueError("guaranteed-schedule mode requires gamma = 1/2")
            if self.eta > 1.0 / (2.0 * self.m):
                raise ValueError("guaranteed-schedule mode requires eta <= 1/(2m)")
        if audit and self.m > AUDIT_MAX_M:
            raise ValueError(f"audit mode stores per-round q and is limited to m <= {AUDIT_MAX_M}")
        self.audit = bool(audit)
        self.tree = SamplerTree(self.m)
        self.round_log: list[RoundRecord] = []
        self._t = 0

    def pick(self, rng):
        """Sample (i_t, p_{i_t}) for the next round."""
        return self.tree.sample(self.gamma, rng)

    def observe(self, i, p, loss):
        """Feed back the loss of the round; applies the multiplicative update."""
        if not 0.0 <= loss <= 1.0:
            raise ValueError(f"loss must be truncated into [0, 1], got {loss}")
        if p < self.gamma / self.m - 1e-12:
            raise ValueError("probability below the exploration floor; not produced by pick()?")
        self._t += 1
        if self.audit:
            self.round_log.append(RoundRecord(self._t, int(i), float(p), float(loss), self.tree.q()))
        self.tree.update(i, math.exp(self.eta * loss / p))

    def probabilities(self):
        return self.tree.probabilities(self.gamma)


def audit_regret(round_log, eta, m, losses_full=None) -> AuditReport:
    """Re-check the exponentiated-gradient regret inequality on an audited run.

    `round_log` must come from a PPlayer created with audit=True (every record
    carries its q snapshot). When `losses_full` (one full loss vector per
    round) is provided, the report also carries the per-corner mean true loss,
    useful for comparing the bandit estimate against the full-information run.
    """
    records = list(round_log)
    if any(r.q is None for r in records):
        raise ValueError("round log lacks q snapshots; run the player with audit=True")
    T = len(records)
    lhs = np.zeros(m)
    quad = 0.0
    for r in records:
        ratio = r.loss / r.prob
        # <q_t - e_j, z_t> = (indicator(j == i_t) - q_{t,i_t}) * loss/p
        lhs += (-r.q[r.index]) * ratio
        lhs[r.index] += ratio
        quad += r.q[r.index] * ratio * ratio
    rhs = math.log(m) / eta + eta * quad
    violation = lhs - rhs
    worst = int(np.argmax(violation))
    mean_true = None
    if losses_full is not None:
        losses_full = np.asarray(losses_full, dtype=np.float64)
        if losses_full.shape != (T, m):
            raise ValueError(f"losses_full must have shape ({T}, {m})")
        mean_true = losses_full.mean(axis=0) if T > 0 else np.zeros(m)
    return AuditReport(
        lhs_per_corner=lhs,
        rhs=float(rhs),
        max_violation=float(violation.max()),
        worst_corner=worst,
        mean_true_loss_per_corner=mean_true,
    )


def round_log_rows(round_log):
    """Round log as plain CSV-ready rows: (t, i_t, p_it, loss)."""
    return [(r.t, r.index, r.prob, r.loss) for r in round_log]
