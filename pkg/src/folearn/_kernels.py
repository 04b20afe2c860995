"""Compiled inner loop for long runs.

Mirrors the pure-Python game loop operation for operation, including the RNG
call sequence, the tree layout, and the renormalization triggers, so that a
compiled run consumes the same random stream as the reference loop. Falls
back gracefully when numba is unavailable (HAVE_NUMBA is False and the
driver stays on the Python path).
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap


ROOT_OVERFLOW = 1e100
ROOT_UNDERFLOW = 1e-100
LEAF_RELATIVE_FLOOR = 1e-300


@njit(cache=True)
def _game_loop(rng, X, y, T, eta, gamma, learner_code, base_rate, decay, power, l2,
               snap_at, snaps, log_i, log_p, log_loss, do_log):
    m, d = X.shape

    # implicit full binary tree, leaves at [leaf0, 2*leaf0)
    height = 0
    while (1 << height) < m:
        height += 1
    leaf0 = 1 << height
    tree = np.zeros(2 * leaf0, dtype=np.float64)
    for i in range(m):
        tree[leaf0 + i] = 1.0
    for node in range(leaf0 - 1, 0, -1):
        tree[node] = tree[2 * node] + tree[2 * node + 1]
    min_live_leaf = 1.0

    w = np.zeros(d, dtype=np.float64)
    step_count = 0
    cum_loss = 0.0
    ln2 = 0.6931471805599453

    n_snaps = snap_at.shape[0]
    sp = 0

    for t in range(1, T + 1):
        while sp < n_snaps and snap_at[sp] == t:
            for j in range(d):
                snaps[sp, j] = w[j]
            sp += 1

        # --- sample i_t ~ gamma * uniform + (1-gamma) * q
        if rng.random() < gamma:
            i = int(rng.random() * m)
            if i >= m:
                i = m - 1
        else:
            node = 1
            while node < leaf0:
                left = tree[2 * node]
                right = tree[2 * node + 1]
                if right <= 0.0:
                    node = 2 * node
                elif left <= 0.0:
                    node = 2 * node + 1
                elif rng.random() * (left + right) < left:
                    node = 2 * node
                else:
                    node = 2 * node + 1
            i = node - leaf0
        p = gamma / m + (1.0 - gamma) * tree[leaf0 + i] / tree[1]

        # --- learner step on example i (loss of current w, then update)
        margin = 0.0
        for j in range(d):
            margin += w[j] * X[i, j]
        margin *= y[i]

        if learner_code == 0:  # perceptron, zero-one loss
            loss = 1.0 if margin <= 0.0 else 0.0
            if margin <= 0.0:
                for j in range(d):
                    w[j] += y[i] * X[i, j]
        elif learner_code == 1:  # gradient step on the hinge
            loss = 1.0 - margin
            if loss < 0.0:
                loss = 0.0
            elif loss > 1.0:
                loss = 1.0
            rate = base_rate * (1.0 + decay * step_count) ** (-power)
            if margin < 1.0:
                for j in range(d):
                    w[j] += rate * (y[i] * X[i, j] - l2 * w[j])
            elif l2 > 0.0:
                for j in range(d):
                    w[j] -= rate * l2 * w[j]
        else:  # SGD on the logistic loss
            a = -margin
            sp_val = (a if a > 0.0 else 0.0) + np.log1p(np.exp(-abs(a)))
            loss = sp_val / ln2
            if loss > 1.0:
                loss = 1.0
            rate = base_rate * (1.0 + decay * step_count) ** (-power)
            if margin > 0.0:
                s = np.exp(-margin) / (1.0 + np.exp(-margin))
            else:
                s = 1.0 / (1.0 + np.exp(margin))
            c = y[i] * s
            for j in range(d):
                w[j] += rate * (c * X[i, j] - l2 * w[j])
        step_count += 1
        cum_loss += loss

        if do_log:
            log_i[t - 1] = i
            log_p[t - 1] = p
            log_loss[t - 1] = loss

        # --- multiplicative tree update
        f = np.exp(eta * loss / p)
        node = leaf0 + i
        v = tree[node]
        delta = f * v - v
        if delta != 0.0:
            while node >= 1:
                tree[node] += delta
                node //= 2
        if f < 1.0 and tree[leaf0 + i] < min_live_leaf:
            min_live_leaf = tree[leaf0 + i]
        root = tree[1]
        if root > ROOT_OVERFLOW or 0.0 < root < ROOT_UNDERFLOW or (
            min_live_leaf < LEAF_RELATIVE_FLOOR * root and root > 1.0
        ):
            for node in range(1, 2 * leaf0):
                tree[node] /= root
            min_live_leaf /= root

    return cum_loss, w


def run_game_loop_fast(rng, X, y, T, eta, gamma, learner_code, base_rate, decay,
                       power, l2, snap_at, want_log):
    """Wrapper allocating outputs; returns (cum_loss, final_w, snaps, log)."""
    k = snap_at.shape[0]
    d = X.shape[1]
    snaps = np.zeros((k, d), dtype=np.float64)
    if want_log:
        log_i = np.zeros(T, dtype=np.int64)
        log_p = np.zeros(T, dtype=np.float64)
        log_loss = np.zeros(T, dtype=np.float64)
    else:
        log_i = np.zeros(0, dtype=np.int64)
        log_p = np.zeros(0, dtype=np.float64)
        log_loss = np.zeros(0, dtype=np.float64)
    cum_loss, w = _game_loop(
        rng, X, y, T, eta, gamma, learner_code, base_rate, decay, power, l2,
        snap_at, snaps, log_i, log_p, log_loss, want_log,
    )
    log = (log_i, log_p, log_loss) if want_log else None
    return cum_loss, w, snaps, log
