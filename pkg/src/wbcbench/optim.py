"""Deterministic smooth minimizers used by the logistic-regression solvers.

All three take a callable ``fun(x) -> (f, g)`` and stop once ``||g||_2 <= tol``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np


@dataclass
class OptimResult:
    x: np.ndarray
    fun: float
    grad_norm: float
    n_iter: int
    converged: bool


def _backtrack(fun, x, f, g, direction, step=1.0, c1=1e-4, shrink=0.5, max_halvings=60):
    """Armijo backtracking along ``direction``; returns (x_new, f_new, g_new) or None."""
    slope = float(g @ direction)
    if slope >= 0:
        return None
    for _ in range(max_halvings):
        x_new = x + step * direction
        f_new, g_new = fun(x_new)
        if np.isfinite(f_new) and f_new <= f + c1 * step * slope:
            return x_new, f_new, g_new
        step *= shrink
    return None


def lbfgs(fun, x0, tol=1e-6, max_iters=1000, memory=10):
    x = np.array(x0, dtype=float)
    f, g = fun(x)
    s_hist = deque(maxlen=memory)
    y_hist = deque(maxlen=memory)
    for it in range(max_iters):
        gnorm = float(np.linalg.norm(g))
        if gnorm <= tol:
            return OptimResult(x, f, gnorm, it, True)

        # two-loop recursion
        q = g.copy()
        alphas = []
        for s, y in zip(reversed(s_hist), reversed(y_hist)):
            rho = 1.0 / (y @ s)
            a = rho * (s @ q)
            alphas.append((rho, a))
            q -= a * y
        if s_hist:
            s, y = s_hist[-1], y_hist[-1]
            q *= (s @ y) / (y @ y)
        else:
            q /= max(gnorm, 1.0)
        for (s, y), (rho, a) in zip(zip(s_hist, y_hist), reversed(alphas)):
            b = rho * (y @ q)
            q += (a - b) * s
        direction = -q

        step = _backtrack(fun, x, f, g, direction)
        if step is None:
            # memory went stale; restart along steepest descent
            s_hist.clear()
            y_hist.clear()
            step = _backtrack(fun, x, f, g, -g / max(gnorm, 1.0))
            if step is None:
                return OptimResult(x, f, gnorm, it, False)
        x_new, f_new, g_new = step
        s, y = x_new - x, g_new - g
        if s @ y > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            s_hist.append(s)
            y_hist.append(y)
        x, f, g = x_new, f_new, g_new
    gnorm = float(np.linalg.norm(g))
    return OptimResult(x, f, gnorm, max_iters, gnorm <= tol)


def _conjugate_gradient(hessp, b, rtol, max_iter):
    """Approximately solve ``H p = b`` for symmetric positive-definite H."""
    p = np.zeros_like(b)
    r = b.copy()
    d = r.copy()
    rr = r @ r
    stop = (rtol * np.sqrt(rr)) ** 2
    for _ in range(max_iter):
        if rr <= stop:
            break
        hd = hessp(d)
        curv = d @ hd
        if curv <= 0:
            # negative curvature: fall back to what we have (or the rhs itself)
            return p if p.any() else b
        alpha = rr / curv
        p += alpha * d
        r -= alpha * hd
        rr_new = r @ r
        d = r + (rr_new / rr) * d
        rr = rr_new
    return p


def newton_cg(fun, hessp_at, x0, tol=1e-6, max_iters=1000):
    """Truncated Newton: the Newton system is solved by conjugate gradients
    using Hessian-vector products only. ``hessp_at(x)`` returns ``v -> H(x) v``.
    """
    x = np.array(x0, dtype=float)
    f, g = fun(x)
    for it in range(max_iters):
        gnorm = float(np.linalg.norm(g))
        if gnorm <= tol:
            return OptimResult(x, f, gnorm, it, True)
        hessp = hessp_at(x)
        rtol = min(0.5, np.sqrt(gnorm))
        direction = _conjugate_gradient(hessp, -g, rtol, max_iter=20 * x.size)
        step = _backtrack(fun, x, f, g, direction)
        if step is None:
            step = _backtrack(fun, x, f, g, -g)
            if step is None:
                return OptimResult(x, f, gnorm, it, False)
        x, f, g = step
    gnorm = float(np.linalg.norm(g))
    return OptimResult(x, f, gnorm, max_iters, gnorm <= tol)


def newton_cholesky(fun, hess_at, x0, tol=1e-6, max_iters=1000):
    """Damped Newton with the step from a Cholesky solve of the full Hessian."""
    x = np.array(x0, dtype=float)
    f, g = fun(x)
    for it in range(max_iters):
        gnorm = float(np.linalg.norm(g))
        if gnorm <= tol:
            return OptimResult(x, f, gnorm, it, True)
        h = hess_at(x)
        jitter = 0.0
        while True:
            try:
                chol = np.linalg.cholesky(h + jitter * np.eye(h.shape[0]))
                break
            except np.linalg.LinAlgError:
                jitter = max(2 * jitter, 1e-10 * max(1.0, np.abs(h).max()))
        direction = -np.linalg.solve(chol.T, np.linalg.solve(chol, g))
        step = _backtrack(fun, x, f, g, direction)
        if step is None:
            step = _backtrack(fun, x, f, g, -g)
            if step is None:
                return OptimResult(x, f, gnorm, it, False)
        x, f, g = step
    gnorm = float(np.linalg.norm(g))
    return OptimResult(x, f, gnorm, max_iters, gnorm <= tol)
