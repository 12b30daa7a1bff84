"""Loading, cleanup, balancing and exploratory statistics for the
Wisconsin breast-cancer (original, 699-row) data file.

The raw file has no header and 11 comma-separated columns::

    id, clump thickness, ..., mitoses, class

with ``?`` marking a missing value and the class coded 2 (benign) / 4
(malignant).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from wbcbench.errors import BalanceError, DataError, ParseError, StatsError

FEATURE_NAMES = (
    "Clump Thickness",
    "Uniformity Cell Size",
    "Uniformity Cell Shape",
    "Marginal Adhesion",
    "Single Epithelial Cell Size",
    "Bare Nuclei",
    "Bland Chromatin",
    "Normal Nucleoli",
    "Mitoses",
)
N_FIELDS = 11
MISSING = "?"
CLASS_CODES = {"2": 0, "4": 1}
CLASS_NAMES = {0: "benign", 1: "malignant"}
DEFAULT_SEED = 42


def bundled_data_path() -> Path:
    """Path of the copy of ``breast-cancer-wisconsin.data`` shipped with the package."""
    return Path(str(resources.files("wbcbench") / "data" / "breast-cancer-wisconsin.data"))


@dataclass(frozen=True)
class RawTable:
    rows: tuple[tuple[str, ...], ...]
    source_path: str = ""

    def __len__(self):
        return len(self.rows)


@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...] = FEATURE_NAMES

    def __post_init__(self):
        x = np.asarray(self.features, dtype=float)
        y = np.asarray(self.labels, dtype=np.int64)
        if x.ndim != 2:
            x = x.reshape(len(y), -1)
        if x.shape[0] != y.shape[0]:
            raise DataError(f"{x.shape[0]} feature rows but {y.shape[0]} labels")
        if x.shape[1] != len(self.feature_names):
            raise DataError(
                f"{x.shape[1]} feature columns but {len(self.feature_names)} feature names"
            )
        if y.size and not np.isin(y, (0, 1)).all():
            raise DataError("labels must be 0 (benign) or 1 (malignant)")
        if not np.isfinite(x).all():
            raise DataError("features contain missing or non-finite values")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    def __len__(self):
        return self.labels.shape[0]

    @property
    def n_features(self):
        return self.features.shape[1]

    def class_counts(self):
        """Return ``(n_benign, n_malignant)``."""
        n1 = int(self.labels.sum())
        return len(self) - n1, n1

    def subset(self, index) -> "Dataset":
        return Dataset(self.features[index], self.labels[index], self.feature_names)


@dataclass(frozen=True)
class ClassStats:
    """Per-class, per-feature mean and standard deviation.

    ``mean`` and ``std`` are indexed ``[class, feature]``. ``ddof`` records the
    divisor used for the std (``n - ddof``).
    """

    mean: np.ndarray
    std: np.ndarray
    counts: tuple[int, int]
    feature_names: tuple[str, ...] = FEATURE_NAMES
    ddof: int = 1

    @property
    def std_convention(self):
        return "sample (n-1)" if self.ddof == 1 else f"n-{self.ddof}"

    def records(self):
        out = []
        for c in (0, 1):
            for j, name in enumerate(self.feature_names):
                out.append(
                    {
                        "class": CLASS_NAMES[c],
                        "feature": name,
                        "mean": float(self.mean[c, j]),
                        "std": float(self.std[c, j]),
                        "count": int(self.counts[c]),
                    }
                )
        return out

    def lookup(self, cls, feature):
        c = cls if isinstance(cls, int) else {v: k for k, v in CLASS_NAMES.items()}[cls]
        j = self.feature_names.index(feature)
        return float(self.mean[c, j]), float(self.std[c, j])


def load_raw(path) -> RawTable:
    path = Path(path)
    try:
        handle = path.open(newline="")
    except OSError as exc:
        raise OSError(f"cannot read data file {path}: {exc.strerror or exc}") from exc
    rows = []
    with handle:
        for lineno, record in enumerate(csv.reader(handle), start=1):
            if not record or (len(record) == 1 and not record[0].strip()):
                continue
            if len(record) != N_FIELDS:
                raise ParseError(
                    f"expected {N_FIELDS} comma-separated fields, found {len(record)}", line=lineno
                )
            rows.append(tuple(f.strip() for f in record))
    return RawTable(tuple(rows), str(path))


def clean(raw: RawTable) -> Dataset:
    """Drop rows with missing values, recode the class, strip the id column."""
    feats = []
    labels = []
    for i, row in enumerate(raw.rows, start=1):
        if len(row) != N_FIELDS:
            raise ParseError(f"expected {N_FIELDS} fields, found {len(row)}", line=i)
        values = row[1:-1]
        if MISSING in values:
            continue
        cls = row[-1]
        if cls not in CLASS_CODES:
            raise DataError(f"row {i}: class value {cls!r} is not 2 or 4")
        try:
            parsed = [float(int(v)) for v in values]
        except ValueError:
            raise DataError(f"row {i}: non-integer feature value in {values!r}") from None
        if any(v < 1 or v > 10 for v in parsed):
            raise DataError(f"row {i}: feature value outside 1..10 in {values!r}")
        feats.append(parsed)
        labels.append(CLASS_CODES[cls])
    x = np.array(feats, dtype=float).reshape(len(feats), len(FEATURE_NAMES))
    return Dataset(x, np.array(labels, dtype=np.int64))


def balance(d: Dataset, strategy="undersample-majority", seed=DEFAULT_SEED) -> Dataset:
    """Undersample the majority class down to the minority count.

    Minority rows are all kept. Selected rows keep their original relative
    order, so the output is a deterministic function of ``(d, seed)``.
    """
    if strategy != "undersample-majority":
        raise BalanceError(f"unsupported balancing strategy {strategy!r}")
    n0, n1 = d.class_counts()
    if n0 == 0 or n1 == 0:
        raise BalanceError("balancing needs both classes present")
    if n0 == n1:
        return d
    majority = 0 if n0 > n1 else 1
    maj_idx = np.flatnonzero(d.labels == majority)
    min_idx = np.flatnonzero(d.labels != majority)
    rng = np.random.default_rng(seed)
    keep = rng.choice(maj_idx, size=min_idx.size, replace=False)
    return d.subset(np.sort(np.concatenate([keep, min_idx])))


def class_feature_stats(d: Dataset, ddof=1) -> ClassStats:
    counts = d.class_counts()
    if min(counts) <= ddof:
        raise StatsError(f"each class needs more than {ddof} rows, got counts {counts}")
    mean = np.empty((2, d.n_features))
    std = np.empty((2, d.n_features))
    for c in (0, 1):
        rows = d.features[d.labels == c]
        mean[c] = rows.mean(axis=0)
        std[c] = rows.std(axis=0, ddof=ddof)
    return ClassStats(mean, std, counts, d.feature_names, ddof)


def write_stats(stats: ClassStats, csv_path=None, json_path=None):
    recs = stats.records()
    if csv_path is not None:
        with open(csv_path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=["class", "feature", "mean", "std", "count"])
            w.writeheader()
            for r in recs:
                w.writerow({**r, "mean": f"{r['mean']:.6f}", "std": f"{r['std']:.6f}"})
    if json_path is not None:
        payload = {"std_convention": stats.std_convention, "rows": recs}
        Path(json_path).write_text(json.dumps(payload, indent=2) + "\n")


def _fmt(v):
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def export_parallel_coordinates(d: Dataset, path, svg_path=None):
    """Write one CSV record per row (class label first, then the features).

    If ``svg_path`` is given, also draw a parallel-coordinate plot there: one
    vertical axis per feature, one polyline per row coloured by class.
    """
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["class", *d.feature_names])
        for label, row in zip(d.labels, d.features):
            w.writerow([int(label), *(_fmt(v) for v in row)])
    if svg_path is not None:
        Path(svg_path).write_text(_parallel_svg(d))


def _parallel_svg(d: Dataset, width=900, height=420, margin=50):
    n_axes = d.n_features
    xs = [margin + j * (width - 2 * margin) / (n_axes - 1) for j in range(n_axes)]
    lo, hi = 1.0, 10.0
    if len(d):
        lo = min(lo, float(d.features.min()))
        hi = max(hi, float(d.features.max()))

    def y_of(v):
        return height - margin - (v - lo) / (hi - lo) * (height - 2 * margin)

    colours = {0: "#1f77b4", 1: "#d62728"}
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    for label, row in zip(d.labels, d.features):
        pts = " ".join(f"{x:.1f},{y_of(v):.1f}" for x, v in zip(xs, row))
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{colours[int(label)]}" '
            'stroke-opacity="0.15" stroke-width="1"/>'
        )
    for x, name in zip(xs, d.feature_names):
        parts.append(
            f'<line x1="{x:.1f}" y1="{margin}" x2="{x:.1f}" y2="{height - margin}" '
            'stroke="black" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{x:.1f}" y="{height - margin / 3:.1f}" font-size="9" '
            f'text-anchor="middle">{name}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def load_dataset(path=None, balanced=True, seed=DEFAULT_SEED) -> Dataset:
    """load_raw -> clean -> (optionally) balance, with the bundled file as default."""
    d = clean(load_raw(path or bundled_data_path()))
    return balance(d, seed=seed) if balanced else d
