"""Soft-margin kernel SVM trained in the dual with sequential minimal optimization.

Labels 0/1 are mapped to -1/+1 internally. The decision function is
``f(x) = sum_i a_i y_i K(sv_i, x) + b``; a row is classed malignant iff f >= 0.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numba
import numpy as np

from wbcbench.errors import ConfigError, DataError, ShapeError

KERNELS = ("linear", "poly", "rbf", "sigmoid")
SV_THRESHOLD = 1e-8


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "rbf"
    gamma: float = 0.1
    degree: int = 3
    coef0: float = 0.0

    def __post_init__(self):
        if self.kind not in KERNELS:
            raise ConfigError(f"unknown kernel {self.kind!r}; choose from {KERNELS}")
        if not self.gamma > 0:
            raise ConfigError(f"gamma must be positive, got {self.gamma}")
        if int(self.degree) != self.degree or self.degree < 1:
            raise ConfigError(f"degree must be an integer >= 1, got {self.degree}")

    def matrix(self, a, b):
        """Gram matrix ``K[i, j] = k(a_i, b_j)``."""
        a = np.atleast_2d(np.asarray(a, dtype=float))
        b = np.atleast_2d(np.asarray(b, dtype=float))
        if a.shape[1] != b.shape[1]:
            raise ShapeError(f"kernel arguments differ in dimension: {a.shape[1]} vs {b.shape[1]}")
        if self.kind == "rbf":
            sq = (a * a).sum(1)[:, None] + (b * b).sum(1)[None, :] - 2.0 * (a @ b.T)
            return np.exp(-self.gamma * np.maximum(sq, 0.0))
        dot = a @ b.T
        if self.kind == "linear":
            return dot
        if self.kind == "poly":
            return (self.gamma * dot + self.coef0) ** int(self.degree)
        return np.tanh(self.gamma * dot + self.coef0)


def kernel_eval(k: KernelSpec, x, x2) -> float:
    x = np.asarray(x, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if x.shape != x2.shape:
        raise ShapeError(f"kernel arguments differ in shape: {x.shape} vs {x2.shape}")
    if k.kind == "linear":
        return float(x @ x2)
    if k.kind == "poly":
        return float((k.gamma * (x @ x2) + k.coef0) ** int(k.degree))
    if k.kind == "rbf":
        diff = x - x2
        return float(np.exp(-k.gamma * (diff @ diff)))
    return float(np.tanh(k.gamma * (x @ x2) + k.coef0))


@dataclass(frozen=True)
class SvmConfig:
    c: float = 1.0
    kernel: KernelSpec = KernelSpec()
    tol: float = 1e-3
    max_passes: int = 100_000
    fit_seed: int = 0

    def __post_init__(self):
        if not self.c > 0:
            raise ConfigError(f"C must be positive, got {self.c}")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        if self.max_passes < 1:
            raise ConfigError("max_passes must be >= 1")


@dataclass(frozen=True, eq=False)
class SvmModel:
    support_vectors: np.ndarray
    dual_coefs: np.ndarray
    bias: float
    kernel: KernelSpec
    config: SvmConfig
    converged: bool = True
    n_passes: int = 0
    separated: bool = True
    objective_trace: tuple = ()

    def to_dict(self):
        return {
            "kernel": asdict(self.kernel),
            "config": {**asdict(self.config), "kernel": asdict(self.config.kernel)},
            "support_vectors": self.support_vectors.tolist(),
            "dual_coefs": self.dual_coefs.tolist(),
            "bias": self.bias,
            "converged": self.converged,
            "n_passes": self.n_passes,
            "separated": self.separated,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data):
        cfg = dict(data["config"])
        cfg["kernel"] = KernelSpec(**cfg["kernel"])
        return cls(
            np.asarray(data["support_vectors"], dtype=float).reshape(len(data["dual_coefs"]), -1),
            np.asarray(data["dual_coefs"], dtype=float),
            float(data["bias"]),
            KernelSpec(**data["kernel"]),
            SvmConfig(**cfg),
            bool(data.get("converged", True)),
            int(data.get("n_passes", 0)),
            bool(data.get("separated", True)),
        )

    def linear_weights(self):
        """Explicit primal ``w`` (linear kernel only)."""
        if self.kernel.kind != "linear":
            raise ConfigError("explicit weights exist only for the linear kernel")
        return self.dual_coefs @ self.support_vectors


# --- SMO --------------------------------------------------------------------
# K is the full training Gram matrix; grad[i] = sum_j a_j y_j K[i, j], so the
# error of row i is grad[i] + b - y[i].


@numba.njit(cache=True, nogil=True)
def _take_step(i1, i2, K, y, alpha, grad, state, C, eps):
    if i1 == i2:
        return False
    b = state[0]
    a1, a2 = alpha[i1], alpha[i2]
    y1, y2 = y[i1], y[i2]
    e1 = grad[i1] + b - y1
    e2 = grad[i2] + b - y2
    s = y1 * y2
    if s < 0:
        lo = max(0.0, a2 - a1)
        hi = min(C, C + a2 - a1)
    else:
        lo = max(0.0, a2 + a1 - C)
        hi = min(C, a2 + a1)
    if lo >= hi:
        return False
    k11, k12, k22 = K[i1, i1], K[i1, i2], K[i2, i2]
    eta = k11 + k22 - 2.0 * k12
    if eta > 0:
        new2 = a2 + y2 * (e1 - e2) / eta
        if new2 < lo:
            new2 = lo
        elif new2 > hi:
            new2 = hi
    else:
        # objective at the two ends of the feasible segment
        f1 = y1 * (e1 - b) - a1 * k11 - s * a2 * k12
        f2 = y2 * (e2 - b) - s * a1 * k12 - a2 * k22
        l1 = a1 + s * (a2 - lo)
        h1 = a1 + s * (a2 - hi)
        obj_lo = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 + 0.5 * lo * lo * k22 + s * lo * l1 * k12
        obj_hi = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 + 0.5 * hi * hi * k22 + s * hi * h1 * k12
        if obj_lo < obj_hi - eps:
            new2 = lo
        elif obj_lo > obj_hi + eps:
            new2 = hi
        else:
            new2 = a2
    if new2 < SV_THRESHOLD:
        new2 = 0.0
    elif new2 > C - SV_THRESHOLD * C:
        new2 = C
    if abs(new2 - a2) < eps * (new2 + a2 + eps):
        return False
    new1 = a1 + s * (a2 - new2)
    if new1 < 0.0:
        new1 = 0.0
    elif new1 > C:
        new1 = C
    d1 = y1 * (new1 - a1)
    d2 = y2 * (new2 - a2)
    b1 = b - e1 - d1 * k11 - d2 * k12
    b2 = b - e2 - d1 * k12 - d2 * k22
    if 0.0 < new1 < C:
        state[0] = b1
    elif 0.0 < new2 < C:
        state[0] = b2
    else:
        state[0] = 0.5 * (b1 + b2)
    n = y.shape[0]
    for j in range(n):
        grad[j] += d1 * K[i1, j] + d2 * K[i2, j]
    alpha[i1] = new1
    alpha[i2] = new2
    return True


@numba.njit(cache=True, nogil=True)
def _examine(i2, K, y, alpha, grad, state, C, tol, eps):
    n = y.shape[0]
    b = state[0]
    a2 = alpha[i2]
    e2 = grad[i2] + b - y[i2]
    r2 = e2 * y[i2]
    if not ((r2 < -tol and a2 < C) or (r2 > tol and a2 > 0)):
        return False
    # second choice: largest |E1 - E2| among non-bound multipliers
    best = -1
    gap = -1.0
    n_free = 0
    for j in range(n):
        if 0.0 < alpha[j] < C:
            n_free += 1
            d = abs(grad[j] + b - y[j] - e2)
            if d > gap:
                gap = d
                best = j
    if n_free > 1 and best >= 0:
        if _take_step(best, i2, K, y, alpha, grad, state, C, eps):
            return True
    start = np.random.randint(0, n)
    for t in range(n):
        j = (start + t) % n
        if 0.0 < alpha[j] < C:
            if _take_step(j, i2, K, y, alpha, grad, state, C, eps):
                return True
    start = np.random.randint(0, n)
    for t in range(n):
        j = (start + t) % n
        if _take_step(j, i2, K, y, alpha, grad, state, C, eps):
            return True
    return False


@numba.njit(cache=True, nogil=True)
def _dual_objective(alpha, y, grad):
    return alpha.sum() - 0.5 * np.sum(alpha * y * grad)


@numba.njit(cache=True, nogil=True)
def _smo(K, y, C, tol, eps, max_passes, seed, trace):
    np.random.seed(seed)
    n = y.shape[0]
    alpha = np.zeros(n)
    grad = np.zeros(n)
    state = np.zeros(1)
    examine_all = True
    passes = 0
    while passes < max_passes:
        changed = 0
        for i in range(n):
            if examine_all or (0.0 < alpha[i] < C):
                if _examine(i, K, y, alpha, grad, state, C, tol, eps):
                    changed += 1
        trace[passes] = _dual_objective(alpha, y, grad)
        passes += 1
        if examine_all:
            if changed == 0:
                return alpha, state[0], passes, True
            examine_all = False
        elif changed == 0:
            examine_all = True
    return alpha, state[0], passes, False


def _recover_bias(alpha, y, grad, C):
    """Bias consistent with the current multipliers, for a run cut off at max_passes.

    Mean of ``y_i - grad_i`` over free multipliers; if there are none, the
    midpoint of the interval allowed by the bound ones.
    """
    free = (alpha > 0) & (alpha < C)
    target = y - grad
    if free.any():
        return float(target[free].mean())
    up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
    lo_side = target[up]
    hi_side = target[~up]
    lo = lo_side.max() if lo_side.size else -np.inf
    hi = hi_side.min() if hi_side.size else np.inf
    if np.isfinite(lo) and np.isfinite(hi):
        return float(0.5 * (lo + hi))
    return float(lo if np.isfinite(lo) else hi)


def _signed_labels(labels):
    return np.where(np.asarray(labels) == 1, 1.0, -1.0)


def fit_svm(d, cfg: SvmConfig | None = None) -> SvmModel:
    cfg = cfg or SvmConfig()
    if len(d) == 0 or d.labels.min() == d.labels.max():
        raise DataError("SVM training needs both classes present")
    x = d.features
    y = _signed_labels(d.labels)
    K = np.ascontiguousarray(cfg.kernel.matrix(x, x))
    trace = np.zeros(cfg.max_passes)
    alpha, b, passes, converged = _smo(
        K, y, float(cfg.c), float(cfg.tol), 1e-12, int(cfg.max_passes), int(cfg.fit_seed) % 2**32, trace
    )
    if not converged:
        b = _recover_bias(alpha, y, K @ (alpha * y), float(cfg.c))
    keep = alpha > SV_THRESHOLD
    margins = y * (K @ (alpha * y) + b)
    return SvmModel(
        support_vectors=x[keep].copy(),
        dual_coefs=(alpha * y)[keep],
        bias=float(b),
        kernel=cfg.kernel,
        config=cfg,
        converged=bool(converged),
        n_passes=int(passes),
        separated=bool((margins > 0).all()),
        objective_trace=tuple(trace[:passes].tolist()),
    )


def decision_function(m: SvmModel, x):
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x2 = x.reshape(1, -1) if single else x
    if x2.ndim != 2 or x2.shape[1] != m.support_vectors.shape[1]:
        raise ShapeError(f"expected {m.support_vectors.shape[1]} features, got shape {x.shape}")
    if not np.isfinite(x2).all():
        raise ValueError("decision_function needs finite inputs")
    if m.dual_coefs.size:
        f = m.kernel.matrix(x2, m.support_vectors) @ m.dual_coefs + m.bias
    else:
        f = np.full(x2.shape[0], m.bias)
    return float(f[0]) if single else f


def predict_from_decision(f):
    return int(f >= 0) if np.ndim(f) == 0 else (np.asarray(f) >= 0).astype(np.int64)


def predict(m: SvmModel, x):
    return predict_from_decision(decision_function(m, x))


_WARM = False


def warmup():
    """Compile the SMO kernels once so later fits are timed without JIT cost."""
    global _WARM
    if not _WARM:
        K = np.eye(2)
        _smo(K, np.array([-1.0, 1.0]), 1.0, 1e-3, 1e-12, 10, 0, np.zeros(10))
        _WARM = True
