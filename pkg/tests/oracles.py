"""Slow, independent reference computations used to check the library.

None of these import the code under test; each re-derives its answer by
brute force or finite differences.
"""

import itertools
import math

import numpy as np


def central_difference(f, w, h=1e-5):
    g = np.zeros_like(w)
    for j in range(w.size):
        e = np.zeros_like(w)
        e[j] = h
        g[j] = (f(w + e) - f(w - e)) / (2 * h)
    return g


def separating_pairs_1d(x, y, grid):
    """All (b0, b1) on ``grid x grid`` whose sign pattern classifies (x, y) perfectly."""
    hits = []
    for b0, b1 in itertools.product(grid, grid):
        z = b0 + b1 * np.asarray(x)
        if np.array_equal((z > 0).astype(int), np.asarray(y)):
            hits.append((b0, b1))
    return hits


def svm_dual_grid(x, y, C, step=0.05, top=2.0):
    """Maximise the linear-kernel SVM dual over a grid of multipliers.

    The last multiplier is fixed by the equality constraint sum(a * y) = 0.
    Returns ``(dual_value, w, b)`` for the best grid point.
    """
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    K = x @ x.T
    Q = (y[:, None] * y[None, :]) * K
    values = np.arange(0.0, top + step / 2, step)
    best = (-math.inf, None)
    n = len(y)
    for head in itertools.product(values, repeat=n - 1):
        a = np.array(head + (0.0,))
        a[-1] = -(a[:-1] @ y[:-1]) * y[-1]
        if a[-1] < -1e-12 or a[-1] > C:
            continue
        val = a.sum() - 0.5 * a @ Q @ a
        if val > best[0]:
            best = (val, a.copy())
    val, a = best
    w = (a * y) @ x
    sv = a > 1e-9
    b = float(np.mean(y[sv] - x[sv] @ w))
    return val, w, b


def hard_margin_primal_grid(x, y, wgrid, bgrid):
    """Smallest-norm (w, b) on a grid satisfying y_i (w . x_i + b) >= 1."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    best = (math.inf, None, None)
    for w in itertools.product(wgrid, repeat=x.shape[1]):
        w = np.array(w)
        norm = w @ w
        if norm >= best[0]:
            continue
        for b in bgrid:
            if (y * (x @ w + b) >= 1 - 1e-12).all():
                best = (norm, w, b)
                break
    return best[1], best[2]


def _impurity(n0, n1, criterion):
    n = n0 + n1
    p = [n0 / n, n1 / n]
    if criterion == "gini":
        return 1.0 - sum(q * q for q in p)
    return -sum(q * math.log2(q) for q in p if q > 0)


def best_split_brute(x, y, criterion="gini", min_leaf=1):
    """Try every (feature, midpoint) pair; return the best (gain, feature, threshold) or None.

    Ties keep the first pair found, scanning features then thresholds upward.
    """
    x = np.asarray(x, float)
    y = np.asarray(y, int)
    n = len(y)
    parent = _impurity(int((y == 0).sum()), int((y == 1).sum()), criterion)
    best = None
    for j in range(x.shape[1]):
        vals = sorted(set(x[:, j].tolist()))
        for lo, hi in zip(vals, vals[1:]):
            t = (lo + hi) / 2
            left = y[x[:, j] <= t]
            right = y[x[:, j] > t]
            if len(left) < min_leaf or len(right) < min_leaf:
                continue
            child = sum(
                len(s) / n * _impurity(int((s == 0).sum()), int((s == 1).sum()), criterion) for s in (left, right)
            )
            gain = parent - child
            if gain > 1e-12 and (best is None or gain > best[0] + 1e-12):
                best = (gain, j, t)
    return best
