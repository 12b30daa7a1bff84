"""Binary logistic regression fitted by penalized maximum likelihood.

The objective minimised over ``w = (beta0, beta)`` is::

    F(w) = (1/n) sum_i [log(1 + exp(z_i)) - y_i z_i]  +  R(beta) / (C n)
    z_i  = beta0 + beta . x_i

with ``R = 0.5 ||beta||_2^2`` (l2), ``||beta||_1`` (l1) or ``0`` (none). The
intercept is never penalized.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numba
import numpy as np

from wbcbench import optim
from wbcbench.errors import ConfigError, DataError, ShapeError

SOLVERS = ("lbfgs", "newton-cg", "newton-cholesky", "sag", "saga")
PENALTIES = ("none", "l1", "l2")


@dataclass(frozen=True)
class LogRegConfig:
    c: float = 1.0
    penalty: str = "l2"
    solver: str = "lbfgs"
    max_iters: int = 1000
    tol: float = 1e-6
    fit_seed: int = 0

    def __post_init__(self):
        if self.solver not in SOLVERS:
            raise ConfigError(f"unknown solver {self.solver!r}; choose from {SOLVERS}")
        if self.penalty not in PENALTIES:
            raise ConfigError(f"unknown penalty {self.penalty!r}; choose from {PENALTIES}")
        if not self.c > 0:
            raise ConfigError(f"C must be positive, got {self.c}")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be >= 1")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        if self.penalty == "l1" and self.solver != "saga":
            raise ConfigError(f"penalty 'l1' needs solver 'saga', not {self.solver!r}")

    def penalty_weights(self, n):
        """Return ``(lam_l2, lam_l1)`` multipliers for a training set of size n."""
        lam = 1.0 / (self.c * n)
        return (lam if self.penalty == "l2" else 0.0, lam if self.penalty == "l1" else 0.0)


@dataclass(frozen=True, eq=False)
class LogRegModel:
    beta0: float
    beta: np.ndarray
    config: LogRegConfig
    converged: bool
    iters_used: int
    grad_norm: float = float("nan")

    def __post_init__(self):
        beta = np.array(self.beta, dtype=float)
        if not (np.isfinite(beta).all() and np.isfinite(self.beta0)):
            raise ValueError("logistic regression parameters must be finite")
        beta.setflags(write=False)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "beta0", float(self.beta0))

    @property
    def coef(self):
        return np.concatenate([[self.beta0], self.beta])

    def to_dict(self):
        return {
            "beta0": self.beta0,
            "beta": self.beta.tolist(),
            "config": asdict(self.config),
            "converged": self.converged,
            "iters_used": self.iters_used,
            "grad_norm": self.grad_norm,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data):
        return cls(
            data["beta0"],
            np.asarray(data["beta"], dtype=float),
            LogRegConfig(**data["config"]),
            bool(data["converged"]),
            int(data["iters_used"]),
            float(data.get("grad_norm", float("nan"))),
        )


def sigmoid(z):
    """Overflow-free logistic function, ``exp(-log(1 + exp(-z)))``."""
    return np.exp(-np.logaddexp(0.0, -np.asarray(z, dtype=float)))


def _as_rows(m, x):
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x2 = x.reshape(1, -1) if single else x
    if x2.ndim != 2 or x2.shape[1] != m.beta.shape[0]:
        raise ShapeError(f"expected {m.beta.shape[0]} features, got shape {x.shape}")
    return x2, single


def predict_proba(m: LogRegModel, x):
    """P(malignant | x); accepts one feature vector or a matrix of rows."""
    x2, single = _as_rows(m, x)
    p = np.clip(sigmoid(m.beta0 + x2 @ m.beta), 0.0, 1.0)
    return float(p[0]) if single else p


def predict(m: LogRegModel, x):
    p = predict_proba(m, x)
    # p == 0.5 counts as malignant
    return int(p >= 0.5) if np.ndim(p) == 0 else (p >= 0.5).astype(np.int64)


def _augment(x):
    return np.hstack([np.ones((x.shape[0], 1)), x])


def _objective(w, xa, y, lam_l2, lam_l1):
    z = xa @ w
    n = y.shape[0]
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z))
    grad = xa.T @ (sigmoid(z) - y) / n
    beta = w[1:]
    if lam_l2:
        loss += 0.5 * lam_l2 * float(beta @ beta)
        grad[1:] += lam_l2 * beta
    if lam_l1:
        loss += lam_l1 * float(np.abs(beta).sum())
        grad[1:] += lam_l1 * np.sign(beta)
    return loss, grad


def _hessian(w, xa, lam_l2):
    p = sigmoid(xa @ w)
    h = (xa * (p * (1 - p))[:, None]).T @ xa / xa.shape[0]
    if lam_l2:
        h[1:, 1:] += lam_l2 * np.eye(h.shape[0] - 1)
    return h


def _hessp_factory(xa, lam_l2):
    def at(w):
        p = sigmoid(xa @ w)
        s = p * (1 - p) / xa.shape[0]

        def hv(v):
            out = xa.T @ (s * (xa @ v))
            if lam_l2:
                out[1:] += lam_l2 * v[1:]
            return out

        return hv

    return at


def _check_dataset(d):
    if len(d) == 0:
        raise DataError("cannot evaluate the likelihood on an empty dataset")
    return d.features, d.labels.astype(float)


def nll_and_gradient(beta0, beta, d, cfg: LogRegConfig):
    """Mean negative log-likelihood plus scaled penalty, with its gradient.

    The gradient is returned for ``(beta0, beta_1..beta_p)``. For the l1
    penalty the subgradient with 0 at the kinks is used.
    """
    x, y = _check_dataset(d)
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (x.shape[1],):
        raise ShapeError(f"beta must have length {x.shape[1]}, got shape {beta.shape}")
    lam_l2, lam_l1 = cfg.penalty_weights(len(y))
    return _objective(np.concatenate([[beta0], beta]), _augment(x), y, lam_l2, lam_l1)


def _optimality(w, xa, y, lam_l2, lam_l1):
    """Norm of the minimum-norm element of the (sub)differential of F at w."""
    _, g = _objective(w, xa, y, lam_l2, 0.0)
    if lam_l1:
        b, gb = w[1:], g[1:]
        nz = b != 0
        gb = np.where(nz, gb + lam_l1 * np.sign(b), np.sign(gb) * np.maximum(np.abs(gb) - lam_l1, 0))
        g = np.concatenate([g[:1], gb])
    return float(np.linalg.norm(g))


@numba.njit(cache=True, nogil=True)
def _sag_epoch(xa, y, w, memory, grad_sum, order, step, lam_l2, lam_l1, saga):
    n, p = xa.shape
    for t in range(order.shape[0]):
        i = order[t]
        z = 0.0
        for j in range(p):
            z += xa[i, j] * w[j]
        if z >= 0:
            prob = 1.0 / (1.0 + np.exp(-z))
        else:
            ez = np.exp(z)
            prob = ez / (1.0 + ez)
        g_new = prob - y[i]
        diff = g_new - memory[i]
        memory[i] = g_new
        if saga:
            # unbiased step, then proximal map of the penalty
            for j in range(p):
                w[j] -= step * (diff * xa[i, j] + grad_sum[j] / n)
                grad_sum[j] += diff * xa[i, j]
            for j in range(1, p):
                if lam_l2 > 0:
                    w[j] /= 1.0 + step * lam_l2
                if lam_l1 > 0:
                    thr = step * lam_l1
                    if w[j] > thr:
                        w[j] -= thr
                    elif w[j] < -thr:
                        w[j] += thr
                    else:
                        w[j] = 0.0
        else:
            for j in range(p):
                grad_sum[j] += diff * xa[i, j]
            w[0] -= step * grad_sum[0] / n
            for j in range(1, p):
                w[j] -= step * (grad_sum[j] / n + lam_l2 * w[j])


def _fit_sag(xa, y, cfg, lam_l2, lam_l1):
    n = xa.shape[0]
    w = np.zeros(xa.shape[1])
    memory = sigmoid(xa @ w) - y
    grad_sum = xa.T @ memory
    lipschitz = 0.25 * float((xa * xa).sum(axis=1).max())
    if cfg.solver == "saga":
        step = 1.0 / (3.0 * (lipschitz + lam_l2))
    else:
        step = 1.0 / (lipschitz + lam_l2)
    rng = np.random.default_rng(cfg.fit_seed)
    saga = cfg.solver == "saga"
    gnorm = _optimality(w, xa, y, lam_l2, lam_l1)
    for epoch in range(cfg.max_iters):
        if gnorm <= cfg.tol:
            return w, True, epoch, gnorm
        order = rng.integers(0, n, size=n)
        _sag_epoch(xa, y, w, memory, grad_sum, order, step, lam_l2, lam_l1, saga)
        gnorm = _optimality(w, xa, y, lam_l2, lam_l1)
    return w, gnorm <= cfg.tol, cfg.max_iters, gnorm


def fit_logreg(d, cfg: LogRegConfig | None = None) -> LogRegModel:
    cfg = cfg or LogRegConfig()
    x, y = _check_dataset(d)
    if y.min() == y.max():
        raise DataError("logistic regression needs both classes in the training data")
    xa = _augment(x)
    lam_l2, lam_l1 = cfg.penalty_weights(len(y))
    w0 = np.zeros(xa.shape[1])

    def fun(w):
        return _objective(w, xa, y, lam_l2, 0.0)

    if cfg.solver == "lbfgs":
        res = optim.lbfgs(fun, w0, tol=cfg.tol, max_iters=cfg.max_iters)
    elif cfg.solver == "newton-cg":
        res = optim.newton_cg(fun, _hessp_factory(xa, lam_l2), w0, cfg.tol, cfg.max_iters)
    elif cfg.solver == "newton-cholesky":
        res = optim.newton_cholesky(fun, lambda w: _hessian(w, xa, lam_l2), w0, cfg.tol, cfg.max_iters)
    else:
        w, converged, iters, gnorm = _fit_sag(xa, y, cfg, lam_l2, lam_l1)
        return LogRegModel(w[0], w[1:], cfg, bool(converged), int(iters), gnorm)
    w = res.x
    return LogRegModel(w[0], w[1:], cfg, res.converged, res.n_iter, res.grad_norm)


_WARM = False


def warmup():
    """Compile the SAG/SAGA epoch kernel ahead of any timed fit."""
    global _WARM
    if not _WARM:
        xa = np.ones((2, 2))
        _sag_epoch(xa, np.array([0.0, 1.0]), np.zeros(2), np.zeros(2), np.zeros(2),
                   np.array([0, 1]), 0.1, 0.0, 0.0, False)
        _WARM = True
