"""Binary CART decision tree with Gini or information-gain splitting.

Splits are axis-aligned: a row goes left iff ``x[feature] <= threshold``.
Candidate thresholds are midpoints between consecutive distinct values of a
feature within the node.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Optional, Union

import numpy as np

from wbcbench.errors import ConfigError, DomainError, ShapeError

CRITERIA = ("gini", "info_gain")
# gains closer than this are treated as equal when breaking ties
TIE_EPS = 1e-12


@dataclass(frozen=True)
class TreeConfig:
    criterion: str = "gini"
    max_depth: int = 5
    min_samples_split: int = 2
    min_samples_leaf: int = 1

    def __post_init__(self):
        if self.criterion not in CRITERIA:
            raise ConfigError(f"unknown criterion {self.criterion!r}; choose from {CRITERIA}")
        if self.max_depth < 1:
            raise ConfigError("max_depth must be >= 1")
        if self.min_samples_split < 2:
            raise ConfigError("min_samples_split must be >= 2")
        if self.min_samples_leaf < 1:
            raise ConfigError("min_samples_leaf must be >= 1")


@dataclass(frozen=True)
class Leaf:
    label: int
    class_counts: tuple[int, int]


@dataclass(frozen=True)
class Split:
    feature_index: int
    threshold: float
    left: "TreeNode"
    right: "TreeNode"
    class_counts: tuple[int, int] = (0, 0)


TreeNode = Union[Leaf, Split]


@dataclass(frozen=True)
class SplitChoice:
    feature_index: int
    threshold: float
    gain: float


@dataclass(frozen=True)
class TreeModel:
    root: TreeNode
    config: TreeConfig
    n_leaves: int
    depth: int
    n_features: int = 9

    @property
    def n_nodes(self):
        return 2 * self.n_leaves - 1

    def to_dict(self):
        return {
            "config": asdict(self.config),
            "n_leaves": self.n_leaves,
            "depth": self.depth,
            "n_features": self.n_features,
            "root": _node_to_dict(self.root),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data):
        return cls(
            _node_from_dict(data["root"]),
            TreeConfig(**data["config"]),
            int(data["n_leaves"]),
            int(data["depth"]),
            int(data.get("n_features", 9)),
        )

    def render(self, feature_names=None):
        """Indented if/else rule listing."""
        names = feature_names or [f"x[{j}]" for j in range(self.n_features)]
        lines = []

        def walk(node, indent):
            pad = "  " * indent
            if isinstance(node, Leaf):
                lines.append(f"{pad}-> class {node.label}  (counts {node.class_counts[0]}/{node.class_counts[1]})")
                return
            lines.append(f"{pad}if {names[node.feature_index]} <= {node.threshold:g}:")
            walk(node.left, indent + 1)
            lines.append(f"{pad}else:  # {names[node.feature_index]} > {node.threshold:g}")
            walk(node.right, indent + 1)

        walk(self.root, 0)
        return "\n".join(lines)


def _node_to_dict(node):
    if isinstance(node, Leaf):
        return {"label": node.label, "class_counts": list(node.class_counts)}
    return {
        "feature_index": node.feature_index,
        "threshold": node.threshold,
        "class_counts": list(node.class_counts),
        "left": _node_to_dict(node.left),
        "right": _node_to_dict(node.right),
    }


def _node_from_dict(data):
    if "label" in data:
        return Leaf(int(data["label"]), tuple(data["class_counts"]))
    return Split(
        int(data["feature_index"]),
        float(data["threshold"]),
        _node_from_dict(data["left"]),
        _node_from_dict(data["right"]),
        tuple(data.get("class_counts", (0, 0))),
    )


# --- impurity -----------------------------------------------------------------


def _check_counts(counts):
    counts = tuple(int(c) for c in counts)
    if any(c < 0 for c in counts):
        raise DomainError(f"class counts must be non-negative, got {counts}")
    if sum(counts) == 0:
        raise DomainError("impurity of an empty node is undefined")
    return counts


def gini(class_counts) -> float:
    counts = _check_counts(class_counts)
    total = sum(counts)
    return 1.0 - sum((c / total) ** 2 for c in counts)


def entropy(class_counts) -> float:
    counts = _check_counts(class_counts)
    total = sum(counts)
    h = 0.0
    for c in counts:
        if c:
            p = c / total
            h -= p * np.log2(p)
    return float(h)


_IMPURITY = {"gini": gini, "info_gain": entropy}


def split_gain(parent_counts, left_counts, right_counts, criterion="gini") -> float:
    """Impurity decrease of a binary split, children weighted by size."""
    if criterion not in _IMPURITY:
        raise ConfigError(f"unknown criterion {criterion!r}")
    if tuple(np.add(left_counts, right_counts)) != tuple(parent_counts):
        raise DomainError("left and right counts must add up to the parent counts")
    if sum(left_counts) == 0 or sum(right_counts) == 0:
        raise DomainError("both sides of a split must be non-empty")
    imp = _IMPURITY[criterion]
    n = sum(parent_counts)
    return (
        imp(parent_counts)
        - sum(left_counts) / n * imp(left_counts)
        - sum(right_counts) / n * imp(right_counts)
    )


def _impurity_vec(n0, n1, criterion):
    total = n0 + n1
    p0 = n0 / total
    p1 = n1 / total
    if criterion == "gini":
        return 1.0 - p0 * p0 - p1 * p1
    with np.errstate(divide="ignore", invalid="ignore"):
        t0 = np.where(p0 > 0, p0 * np.log2(np.where(p0 > 0, p0, 1.0)), 0.0)
        t1 = np.where(p1 > 0, p1 * np.log2(np.where(p1 > 0, p1, 1.0)), 0.0)
    return -(t0 + t1)


def best_split(x, y, cfg: TreeConfig) -> Optional[SplitChoice]:
    """Exhaustive search for the split with the largest impurity decrease.

    Both children must hold at least ``cfg.min_samples_leaf`` rows and the
    gain must be positive. Equal gains go to the lower feature index, then
    the lower threshold.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y)
    n = x.shape[0]
    if n == 0:
        raise DomainError("best_split needs at least one row")
    if n < 2:
        return None
    order = np.argsort(x, axis=0, kind="stable")
    xs = np.take_along_axis(x, order, axis=0)
    ys = y[order]
    cum1 = np.cumsum(ys, axis=0)[:-1].astype(float)
    n_left = np.arange(1, n, dtype=float)[:, None]
    n_right = n - n_left
    tot1 = float(y.sum())
    left1 = cum1
    left0 = n_left - left1
    right1 = tot1 - left1
    right0 = n_right - right1

    crit = cfg.criterion
    parent = float(_impurity_vec(np.float64(n - tot1), np.float64(tot1), crit))
    gain = (
        parent
        - n_left / n * _impurity_vec(left0, left1, crit)
        - n_right / n * _impurity_vec(right0, right1, crit)
    )
    leaf = cfg.min_samples_leaf
    valid = (xs[1:] > xs[:-1]) & (n_left >= leaf) & (n_right >= leaf)
    if not valid.any():
        return None
    gain = np.where(valid, gain, -np.inf)
    top = gain.max()
    if not top > TIE_EPS:
        return None
    thresholds = 0.5 * (xs[1:] + xs[:-1])
    rows, cols = np.nonzero(gain >= top - TIE_EPS)
    cands = sorted(zip(cols.tolist(), thresholds[rows, cols].tolist(), gain[rows, cols].tolist()))
    feat, thr, g = cands[0]
    return SplitChoice(int(feat), float(thr), float(g))


def fit_tree(d, cfg: TreeConfig | None = None) -> TreeModel:
    cfg = cfg or TreeConfig()
    x = d.features
    y = d.labels
    if len(y) == 0:
        raise DomainError("cannot grow a tree on an empty dataset")
    stats = {"leaves": 0, "depth": 0}

    def grow(idx, depth):
        n1 = int(y[idx].sum())
        counts = (idx.size - n1, n1)
        stats["depth"] = max(stats["depth"], depth)
        if depth >= cfg.max_depth or idx.size < cfg.min_samples_split or 0 in counts:
            stats["leaves"] += 1
            return Leaf(int(n1 >= counts[0]), counts)
        choice = best_split(x[idx], y[idx], cfg)
        if choice is None:
            stats["leaves"] += 1
            return Leaf(int(n1 >= counts[0]), counts)
        go_left = x[idx, choice.feature_index] <= choice.threshold
        left = grow(idx[go_left], depth + 1)
        right = grow(idx[~go_left], depth + 1)
        return Split(choice.feature_index, choice.threshold, left, right, counts)

    root = grow(np.arange(len(y)), 0)
    return TreeModel(root, cfg, stats["leaves"], stats["depth"], x.shape[1])


def predict(m: TreeModel, x):
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x2 = x.reshape(1, -1) if single else x
    if x2.ndim != 2 or x2.shape[1] != m.n_features:
        raise ShapeError(f"expected {m.n_features} features, got shape {x.shape}")
    out = np.empty(x2.shape[0], dtype=np.int64)

    def route(node, idx):
        if idx.size == 0:
            return
        if isinstance(node, Leaf):
            out[idx] = node.label
            return
        left = x2[idx, node.feature_index] <= node.threshold
        route(node.left, idx[left])
        route(node.right, idx[~left])

    route(m.root, np.arange(x2.shape[0]))
    return int(out[0]) if single else out


def iter_nodes(node, depth=0):
    """Yield ``(node, depth)`` pairs in pre-order."""
    yield node, depth
    if isinstance(node, Split):
        yield from iter_nodes(node.left, depth + 1)
        yield from iter_nodes(node.right, depth + 1)
