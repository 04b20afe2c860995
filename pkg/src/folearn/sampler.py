"""Weighted sampling tree for the example-picking player.

A full binary tree of height h = ceil(log2(m)) is stored implicitly in one
array (node 1 is the root, node v has children 2v and 2v+1, leaves occupy
indices leaf0 .. 2*leaf0-1 with leaf0 = 2**h). Internal nodes hold the sum of
their children, so weighted sampling and multiplicative leaf updates both
touch O(log m) nodes.

Finite precision guard: leaf factors compound over many rounds, so the whole
tree is rescaled (which leaves the induced distribution q unchanged) whenever
the root grows past 1e100, shrinks past 1e-100, or the smallest live leaf
drops below 1e-300 relative to the root.
"""

from __future__ import annotations

import math

import numpy as np

ROOT_OVERFLOW = 1e100
ROOT_UNDERFLOW = 1e-100
LEAF_RELATIVE_FLOOR = 1e-300


class SamplerTree:
    def __init__(self, m: int):
        if m < 1:
            raise ValueError("need at least one leaf")
        self.m = int(m)
        self.height = max(0, math.ceil(math.log2(self.m)))
        self.leaf0 = 1 << self.height
        self.values = np.zeros(2 * self.leaf0, dtype=np.float64)
        self.values[self.leaf0 : self.leaf0 + self.m] = 1.0
        for node in range(self.leaf0 - 1, 0, -1):
            self.values[node] = self.values[2 * node] + self.values[2 * node + 1]
        self._min_live_leaf = 1.0
        # nodes touched by the most recent sample()/update(), for cost asserts
        self.last_sample_visits = 0
        self.last_update_visits = 0

    # -- inspection --------------------------------------------------------

    @property
    def root_sum(self) -> float:
        return float(self.values[1])

    def leaf_values(self):
        return self.values[self.leaf0 : self.leaf0 + self.m].copy()

    def q(self):
        """The induced probability vector q_i = leaf_i / root."""
        root = self.root_sum
        if root <= 0.0:
            raise ValueError("degenerate tree: root sum is not positive")
        return self.leaf_values() / root

    # -- operations --------------------------------------------------------

    def sample(self, gamma: float, rng) -> tuple[int, float]:
        """Draw an index from p = gamma * uniform + (1 - gamma) * q.

        With probability gamma the index is uniform on [0, m); otherwise the
        tree is descended choosing each child proportionally to its value.
        Returns (i, p_i) where p_i is the analytic probability of i under the
        mixture, regardless of which branch produced it.
        """
        if not 0.0 <= gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        root = self.values[1]
        if not root > 0.0:
            raise ValueError("degenerate tree: root sum is not positive")
        visits = 0
        if rng.random() < gamma:
            i = int(rng.random() * self.m)
            if i >= self.m:  # guards the measure-zero u == 1.0 edge
                i = self.m - 1
            visits = 1
        else:
            node = 1
            visits = 1
            while node < self.leaf0:
                left = self.values[2 * node]
                right = self.values[2 * node + 1]
                if right <= 0.0:
                    node = 2 * node
                elif left <= 0.0:
                    node = 2 * node + 1
                elif rng.random() * (left + right) < left:
                    node = 2 * node
                else:
                    node = 2 * node + 1
                visits += 1
            i = node - self.leaf0
        self.last_sample_visits = visits
        p_i = gamma / self.m + (1.0 - gamma) * float(self.values[self.leaf0 + i]) / float(root)
        return i, p_i

    def update(self, i: int, factor: float):
        """Multiply leaf i by `factor`, keeping ancestor sums consistent."""
        if not 0 <= i < self.m:
            raise IndexError(f"leaf index {i} out of range [0, {self.m})")
        if not (math.isfinite(factor) and factor > 0.0):
            raise ValueError(f"update factor must be positive and finite, got {factor}")
        node = self.leaf0 + i
        v = self.values[node]
        delta = factor * v - v
        visits = 0
        if delta != 0.0:
            while node >= 1:
                self.values[node] += delta
                node //= 2
                visits += 1
        self.last_update_visits = visits
        if factor < 1.0:
            self._min_live_leaf = min(self._min_live_leaf, float(self.values[self.leaf0 + i]))
        self._maybe_renormalize()

    def renormalize(self):
        """Divide every node by the root sum; q is preserved (same ratios)."""
        root = self.values[1]
        if not root > 0.0:
            raise ValueError("degenerate tree: root sum is not positive")
        self.values /= root
        self._min_live_leaf /= root

    def _maybe_renormalize(self):
        root = self.values[1]
        if root > ROOT_OVERFLOW or 0.0 < root < ROOT_UNDERFLOW or (
            self._min_live_leaf < LEAF_RELATIVE_FLOOR * root and root > 1.0
        ):
            self.renormalize()

    # -- bulk sampling (read-only, vectorized) ------------------------------

    def sample_many(self, n: int, gamma: float, rng):
        """Draw n indices from p without mutating the tree.

        Level-by-level vectorized version of `sample`; the draws follow the
        same distribution but consume the RNG in a different order.
        """
        if not 0.0 <= gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        root = self.values[1]
        if not root > 0.0:
            raise ValueError("degenerate tree: root sum is not positive")
        uniform_mask = rng.random(n) < gamma
        idx = np.empty(n, dtype=np.int64)
        n_uni = int(uniform_mask.sum())
        idx[uniform_mask] = np.minimum(
            (rng.random(n_uni) * self.m).astype(np.int64), self.m - 1
        )
        n_tree = n - n_uni
        node = np.ones(n_tree, dtype=np.int64)
        for _ in range(self.height):
            left = self.values[2 * node]
            right = self.values[2 * node + 1]
            total = left + right
            go_left = np.where(
                right <= 0.0,
                True,
                np.where(left <= 0.0, False, rng.random(n_tree) * total < left),
            )
            node = np.where(go_left, 2 * node, 2 * node + 1)
        idx[~uniform_mask] = node - self.leaf0
        return idx

    def probabilities(self, gamma: float):
        """The analytic mixture p = gamma/m + (1-gamma) * q."""
        return gamma / self.m + (1.0 - gamma) * self.q()
