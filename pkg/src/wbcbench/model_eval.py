"""Stratified k-fold cross-validation and exhaustive grid search."""

from __future__ import annotations

import csv
import itertools
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from wbcbench import logreg, svm, tree
from wbcbench.dataset import DEFAULT_SEED, Dataset
from wbcbench.errors import ConfigError, FitError, FoldError

log = logging.getLogger(__name__)


# --- metrics ------------------------------------------------------------------


def accuracy(y_true, y_pred) -> float:
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape != y_pred.shape:
        raise ValueError(f"length mismatch: {y_true.shape} vs {y_pred.shape}")
    if y_true.size == 0:
        raise ValueError("accuracy of an empty prediction is undefined")
    return float(np.mean(y_true == y_pred))


def f1_score(y_true, y_pred) -> float:
    """F1 of the malignant class; 0 when there are no positives at all."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape != y_pred.shape:
        raise ValueError(f"length mismatch: {y_true.shape} vs {y_pred.shape}")
    tp = np.sum((y_true == 1) & (y_pred == 1))
    denom = np.sum(y_true == 1) + np.sum(y_pred == 1)
    return float(2 * tp / denom) if denom else 0.0


# --- folds ----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FoldPlan:
    k: int
    assignments: np.ndarray
    seed: int

    def test_index(self, fold):
        return np.flatnonzero(self.assignments == fold)

    def train_index(self, fold):
        return np.flatnonzero(self.assignments != fold)

    def fold_sizes(self):
        return np.bincount(self.assignments, minlength=self.k)


def stratified_kfold(labels, k=10, seed=DEFAULT_SEED) -> FoldPlan:
    """Shuffle each class with ``seed`` and deal rows round-robin into k folds.

    The deal continues from one class to the next, so fold sizes differ by at
    most one overall as well as per class.
    """
    labels = np.asarray(labels)
    if k < 2:
        raise FoldError(f"k must be at least 2, got {k}")
    classes, counts = np.unique(labels, return_counts=True)
    if (counts < k).any():
        raise FoldError(
            f"every class needs at least k={k} rows; counts are {dict(zip(classes.tolist(), counts.tolist()))}"
        )
    rng = np.random.default_rng(seed)
    dealt = np.concatenate([rng.permutation(np.flatnonzero(labels == c)) for c in classes])
    assignments = np.empty(labels.shape[0], dtype=np.int64)
    assignments[dealt] = np.arange(dealt.size) % k
    return FoldPlan(k, assignments, seed)


# --- model families -------------------------------------------------------------


class Family:
    """Adapter giving cross_validate a uniform view of one model type."""

    name = ""
    title = ""

    def build(self, params: dict, seed: int):
        raise NotImplementedError

    def fit(self, d: Dataset, cfg):
        raise NotImplementedError

    def predict(self, model, x):
        raise NotImplementedError

    def inert(self, params: dict) -> list[str]:
        """Names of hyperparameters that have no effect under ``params``."""
        return []

    def prepare(self):
        """Hook run before any timed fit (JIT warm-up)."""


class LogRegFamily(Family):
    name = "lr"
    title = "Logistic Regression"

    def build(self, params, seed):
        p = dict(params)
        return logreg.LogRegConfig(
            c=float(p.pop("C", 1.0)),
            solver=p.pop("solver", "lbfgs"),
            penalty=p.pop("penalty", "l2"),
            fit_seed=seed,
            **p,
        )

    def fit(self, d, cfg):
        return logreg.fit_logreg(d, cfg)

    def predict(self, model, x):
        return logreg.predict(model, x)

    def prepare(self):
        logreg.warmup()

    def inert(self, params):
        return ["C"] if params.get("penalty") == "none" and "C" in params else []


class SvmFamily(Family):
    name = "svm"
    title = "Support Vector Machine"

    def build(self, params, seed):
        p = dict(params)
        kernel = svm.KernelSpec(
            kind=p.pop("kernel", "rbf"),
            gamma=float(p.pop("gamma", 0.1)),
            degree=int(p.pop("degree", 3)),
            coef0=float(p.pop("coef0", 0.0)),
        )
        return svm.SvmConfig(c=float(p.pop("C", 1.0)), kernel=kernel, fit_seed=seed, **p)

    def fit(self, d, cfg):
        return svm.fit_svm(d, cfg)

    def predict(self, model, x):
        return svm.predict(model, x)

    def prepare(self):
        svm.warmup()

    def inert(self, params):
        return ["gamma"] if params.get("kernel") == "linear" and "gamma" in params else []


class TreeFamily(Family):
    name = "dt"
    title = "Decision Tree"

    def build(self, params, seed):
        return tree.TreeConfig(**params)

    def fit(self, d, cfg):
        return tree.fit_tree(d, cfg)

    def predict(self, model, x):
        return tree.predict(model, x)


FAMILIES = {f.name: f for f in (LogRegFamily(), TreeFamily(), SvmFamily())}
FAMILY_ORDER = ("lr", "dt", "svm")


def get_family(family) -> Family:
    if isinstance(family, Family):
        return family
    try:
        return FAMILIES[family]
    except KeyError:
        raise ConfigError(f"unknown model family {family!r}; choose from {sorted(FAMILIES)}") from None


# --- grid specs -------------------------------------------------------------------


@dataclass(frozen=True)
class CandidateConfig:
    family: str
    params: tuple[tuple[str, object], ...]

    def as_dict(self):
        return dict(self.params)

    def label(self):
        return ", ".join(f"{k}={v}" for k, v in self.params)


@dataclass(frozen=True)
class GridSpec:
    family: str
    axes: tuple[tuple[str, tuple], ...]

    def __post_init__(self):
        if not self.axes:
            raise ConfigError("a grid needs at least one axis")
        for name, values in self.axes:
            if len(values) == 0:
                raise ConfigError(f"grid axis {name!r} has no values")

    @classmethod
    def from_mapping(cls, family, axes: dict):
        return cls(family, tuple((str(k), tuple(v)) for k, v in axes.items()))

    @classmethod
    def load(cls, path):
        """Read ``{"family": ..., "axes": {name: [values, ...], ...}}`` from JSON."""
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"grid file {path} is not valid JSON: {exc}") from None
        if "family" not in data or "axes" not in data:
            raise ConfigError(f"grid file {path} needs 'family' and 'axes' keys")
        return cls.from_mapping(data["family"], data["axes"])

    @property
    def axis_names(self):
        return [name for name, _ in self.axes]

    def __len__(self):
        return int(np.prod([len(v) for _, v in self.axes]))

    def candidates(self):
        names = self.axis_names
        for combo in itertools.product(*(values for _, values in self.axes)):
            yield CandidateConfig(self.family, tuple(zip(names, combo)))


# --- cross-validation -------------------------------------------------------------


@dataclass(frozen=True)
class FoldScore:
    train: float
    test: float
    test_f1: float
    fit_time_ms: float
    converged: bool = True


@dataclass(frozen=True)
class CVResult:
    config: CandidateConfig
    per_fold: tuple[FoldScore, ...]
    train_mean: float
    train_std: float
    test_mean: float
    test_std: float
    test_f1_mean: float
    fit_time_ms_mean: float
    std_convention: str = "population (divide by k)"

    @property
    def per_fold_scores(self):
        return [(f.train, f.test) for f in self.per_fold]

    @property
    def gap(self):
        return self.train_mean - self.test_mean

    @property
    def n_unconverged(self):
        return sum(not f.converged for f in self.per_fold)

    @classmethod
    def from_folds(cls, config, folds):
        train = np.array([f.train for f in folds])
        test = np.array([f.test for f in folds])
        return cls(
            config,
            tuple(folds),
            float(train.mean()),
            float(train.std()),
            float(test.mean()),
            float(test.std()),
            float(np.mean([f.test_f1 for f in folds])),
            float(np.mean([f.fit_time_ms for f in folds])),
        )

    def to_dict(self):
        return {
            "family": self.config.family,
            "params": self.config.as_dict(),
            "train_mean": self.train_mean,
            "train_std": self.train_std,
            "test_mean": self.test_mean,
            "test_std": self.test_std,
            "test_f1_mean": self.test_f1_mean,
            "fit_time_ms_mean": self.fit_time_ms_mean,
            "std_convention": self.std_convention,
            "per_fold": [
                {"train": f.train, "test": f.test, "test_f1": f.test_f1,
                 "fit_time_ms": f.fit_time_ms, "converged": f.converged}
                for f in self.per_fold
            ],
        }


def _standardize(train_x, test_x):
    mu = train_x.mean(axis=0)
    sd = train_x.std(axis=0)
    sd[sd == 0] = 1.0
    return (train_x - mu) / sd, (test_x - mu) / sd


def cross_validate(family, cfg: CandidateConfig, d: Dataset, plan: FoldPlan, standardize=False) -> CVResult:
    """Fit on k-1 folds, score accuracy on the held-out fold and on the training rows."""
    fam = get_family(family)
    if plan.assignments.shape[0] != len(d):
        raise FoldError(f"fold plan covers {plan.assignments.shape[0]} rows, dataset has {len(d)}")
    model_cfg = fam.build(cfg.as_dict(), plan.seed)
    fam.prepare()
    folds = []
    for f in range(plan.k):
        tr_idx, te_idx = plan.train_index(f), plan.test_index(f)
        train, test = d.subset(tr_idx), d.subset(te_idx)
        if standardize:
            xs_tr, xs_te = _standardize(train.features, test.features)
            train = Dataset(xs_tr, train.labels, d.feature_names)
            test = Dataset(xs_te, test.labels, d.feature_names)
        try:
            t0 = time.perf_counter()
            model = fam.fit(train, model_cfg)
            fit_ms = (time.perf_counter() - t0) * 1e3
            train_pred = fam.predict(model, train.features)
            test_pred = fam.predict(model, test.features)
        except Exception as exc:
            raise FitError(f"fold {f} failed for {fam.name} [{cfg.label()}]: {exc}") from exc
        folds.append(
            FoldScore(
                accuracy(train.labels, train_pred),
                accuracy(test.labels, test_pred),
                f1_score(test.labels, test_pred),
                fit_ms,
                bool(getattr(model, "converged", True)),
            )
        )
    return CVResult.from_folds(cfg, folds)


# --- grid search -------------------------------------------------------------------


@dataclass(frozen=True)
class SkippedCandidate:
    config: CandidateConfig
    reason: str


@dataclass(frozen=True)
class GridSearchResult:
    family: str
    spec: GridSpec
    all_results: tuple[CVResult, ...]
    skipped: tuple[SkippedCandidate, ...]
    best: CandidateConfig
    best_result: CVResult
    selection_metric: str = "accuracy"

    def to_dict(self):
        fam = get_family(self.family)
        return {
            "family": self.family,
            "selection_metric": self.selection_metric,
            "n_candidates": len(self.spec),
            "n_evaluated": len(self.all_results),
            "best": self.best.as_dict(),
            "inert": fam.inert(self.best.as_dict()),
            "best_result": self.best_result.to_dict(),
            "skipped": [{"params": s.config.as_dict(), "reason": s.reason} for s in self.skipped],
        }


def _evaluate(args):
    family, cfg, d, plan, standardize = args
    return cross_validate(family, cfg, d, plan, standardize)


def split_valid(spec: GridSpec, seed=0):
    """Partition the grid into buildable candidates and skipped ones."""
    fam = get_family(spec.family)
    valid, skipped = [], []
    for cand in spec.candidates():
        try:
            fam.build(cand.as_dict(), seed)
        except (ConfigError, TypeError, ValueError) as exc:
            log.info("skipping %s [%s]: %s", spec.family, cand.label(), exc)
            skipped.append(SkippedCandidate(cand, str(exc)))
        else:
            valid.append(cand)
    return valid, skipped


def grid_search(spec: GridSpec, d: Dataset, plan: FoldPlan, jobs=1, standardize=False) -> GridSearchResult:
    """Cross-validate every valid grid point; best = highest mean test accuracy.

    Ties go to the candidate that comes first in grid order (first axis
    slowest). ``jobs > 1`` evaluates candidates in worker processes; scores
    do not depend on ``jobs``.
    """
    valid, skipped = split_valid(spec, plan.seed)
    if not valid:
        raise ConfigError(f"every candidate in the {spec.family} grid is invalid")
    if skipped:
        log.warning("%s grid: %d of %d candidates skipped as invalid", spec.family, len(skipped), len(spec))
    work = [(spec.family, cand, d, plan, standardize) for cand in valid]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_evaluate, work, chunksize=max(1, len(work) // (4 * jobs))))
    else:
        results = [_evaluate(w) for w in work]
    best_i = max(range(len(results)), key=lambda i: (results[i].test_mean, -i))
    return GridSearchResult(
        spec.family, spec, tuple(results), tuple(skipped), results[best_i].config, results[best_i]
    )


def write_grid_csv(result: GridSearchResult, path):
    """One row per grid point (skipped ones included) in grid order."""
    fam = get_family(result.family)
    axes = result.spec.axis_names
    by_cfg = {r.config: r for r in result.all_results}
    why = {s.config: s.reason for s in result.skipped}
    header = [*axes, "status", "train_mean", "train_std", "test_mean", "test_std",
              "test_f1_mean", "fit_time_ms_mean", "unconverged_folds", "inert", "best", "note"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for cand in result.spec.candidates():
            vals = [v for _, v in cand.params]
            r = by_cfg.get(cand)
            inert = ";".join(fam.inert(cand.as_dict()))
            if r is None:
                w.writerow([*vals, "skipped", "", "", "", "", "", "", "", inert, "", why.get(cand, "")])
            else:
                w.writerow([
                    *vals, "ok", f"{r.train_mean:.6f}", f"{r.train_std:.6f}", f"{r.test_mean:.6f}",
                    f"{r.test_std:.6f}", f"{r.test_f1_mean:.6f}", f"{r.fit_time_ms_mean:.3f}",
                    r.n_unconverged, inert, int(cand == result.best), "",
                ])
