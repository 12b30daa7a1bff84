"""Side-by-side comparison of the tuned model families."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field

from wbcbench.errors import ReportError
from wbcbench.model_eval import FAMILY_ORDER, CVResult, GridSearchResult, get_family

FORMATS = ("text", "csv", "json", "markdown")
FORMAT_SUFFIX = {"text": "txt", "csv": "csv", "json": "json", "markdown": "md"}

TABLE_COLUMNS = ("Model", "Performance", "Classification Capability", "Computation Time", "Hyperparameter Tuning")

# Static per-family annotations for the qualitative comparison table.
QUALITATIVE = {
    "lr": {
        "Performance": "Superior",
        "Classification Capability": "Suitable for binary",
        "Computation Time": "Moderate",
        "Hyperparameter Tuning": "Less complex",
    },
    "dt": {
        "Performance": "Lower test score mean; tendency for overfitting",
        "Classification Capability": "Applicable to both numerical and categorical",
        "Computation Time": "Least expensive",
        "Hyperparameter Tuning": "Moderate complexity",
    },
    "svm": {
        "Performance": "Consistent",
        "Classification Capability": "Effective in non-linear relationships",
        "Computation Time": "Slowest",
        "Hyperparameter Tuning": "Greater complexity",
    },
}
SHORT_NAMES = {"lr": "LR", "dt": "DT", "svm": "SVM"}


@dataclass
class FamilySummary:
    family: str
    model: str
    best_params: dict
    inert_params: list
    train_mean: float
    train_std: float
    test_mean: float
    test_std: float
    test_f1_mean: float
    fit_time_ms_mean: float
    train_test_gap: float
    unconverged_folds: int
    n_candidates: int
    n_skipped: int
    qualitative: dict


@dataclass
class ComparisonReport:
    families: list[FamilySummary]
    dataset: dict
    ranking_by_test: list[str]
    ranking_by_time: list[str]
    notes: list[str] = field(default_factory=list)
    selection_metric: str = "accuracy"
    std_convention: str = "population (divide by k)"

    def __post_init__(self):
        names = [f.family for f in self.families]
        if sorted(names) != sorted(FAMILY_ORDER):
            raise ReportError(f"report needs exactly the families {FAMILY_ORDER}, got {names}")
        for f in self.families:
            for key in ("train_mean", "test_mean", "train_std", "test_std"):
                v = getattr(f, key)
                if not 0.0 <= v <= 1.0:
                    raise ReportError(f"{f.family}.{key} = {v} is outside [0, 1]")

    def get(self, family) -> FamilySummary:
        for f in self.families:
            if f.family == family:
                return f
        raise KeyError(family)

    def to_dict(self):
        return {
            "selection_metric": self.selection_metric,
            "std_convention": self.std_convention,
            "dataset": self.dataset,
            "families": [asdict(f) for f in self.families],
            "ranking_by_test": self.ranking_by_test,
            "ranking_by_time": self.ranking_by_time,
            "notes": self.notes,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            families=[FamilySummary(**f) for f in data["families"]],
            dataset=data["dataset"],
            ranking_by_test=list(data["ranking_by_test"]),
            ranking_by_time=list(data["ranking_by_time"]),
            notes=list(data.get("notes", [])),
            selection_metric=data.get("selection_metric", "accuracy"),
            std_convention=data.get("std_convention", "population (divide by k)"),
        )


def _rank(summaries, key):
    order = {name: i for i, name in enumerate(FAMILY_ORDER)}
    return [s.family for s in sorted(summaries, key=lambda s: (key(s), order[s.family]))]


def compare_models(results, revalidated=None, dataset=None) -> ComparisonReport:
    """Build the comparison from one grid-search result per family.

    ``revalidated`` optionally maps family -> CVResult of the best config
    re-run on its own (used for cleaner timings); otherwise the grid's own
    CV result for the best candidate is used.
    """
    by_family = {}
    for r in results:
        if r.family in by_family:
            raise ReportError(f"two results given for family {r.family!r}")
        by_family[r.family] = r
    missing = [f for f in FAMILY_ORDER if f not in by_family]
    if missing:
        raise ReportError(f"missing grid-search results for {missing}")
    revalidated = revalidated or {}

    summaries = []
    notes = []
    for name in FAMILY_ORDER:
        gs: GridSearchResult = by_family[name]
        cv: CVResult = revalidated.get(name, gs.best_result)
        fam = get_family(name)
        params = gs.best.as_dict()
        inert = fam.inert(params)
        for p in inert:
            notes.append(f"{SHORT_NAMES[name]}: best config sets {p}={params[p]}, which has no effect here")
        summaries.append(
            FamilySummary(
                family=name,
                model=SHORT_NAMES[name],
                best_params=params,
                inert_params=inert,
                train_mean=cv.train_mean,
                train_std=cv.train_std,
                test_mean=cv.test_mean,
                test_std=cv.test_std,
                test_f1_mean=cv.test_f1_mean,
                fit_time_ms_mean=cv.fit_time_ms_mean,
                train_test_gap=cv.train_mean - cv.test_mean,
                unconverged_folds=cv.n_unconverged,
                n_candidates=len(gs.spec),
                n_skipped=len(gs.skipped),
                qualitative=dict(QUALITATIVE[name]),
            )
        )
        if cv.n_unconverged:
            notes.append(f"{SHORT_NAMES[name]}: solver hit its iteration cap on {cv.n_unconverged} fold(s)")
    crit = by_family["dt"].best.as_dict().get("criterion")
    if crit:
        notes.append(f"DT: split criterion fixed to {crit} for the grid search")
    return ComparisonReport(
        families=summaries,
        dataset=dict(dataset or {}),
        ranking_by_test=_rank(summaries, lambda s: -s.test_mean),
        ranking_by_time=_rank(summaries, lambda s: s.fit_time_ms_mean),
        notes=notes,
    )


def _pct(v):
    return f"{100 * v:.2f}"


def _params(p):
    return ", ".join(f"{k}={v}" for k, v in p.items())


def _render_text(r: ComparisonReport):
    cols = ["Model", "Train %", "Train std", "Test %", "Test std", "Gap", "F1 %", "Fit ms", "Best params"]
    rows = [
        [f.model, _pct(f.train_mean), _pct(f.train_std), _pct(f.test_mean), _pct(f.test_std),
         _pct(f.train_test_gap), _pct(f.test_f1_mean), f"{f.fit_time_ms_mean:.2f}", _params(f.best_params)]
        for f in r.families
    ]
    widths = [max(len(c), *(len(row[i]) for row in rows)) for i, c in enumerate(cols)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)) for row in rows]
    ds = r.dataset
    if ds:
        lines.append("")
        lines.append("dataset: " + ", ".join(f"{k}={v}" for k, v in ds.items()))
    lines.append("ranking by test accuracy: " + " > ".join(SHORT_NAMES[f] for f in r.ranking_by_test))
    lines.append("ranking by fit time: " + " < ".join(SHORT_NAMES[f] for f in r.ranking_by_time))
    for n in r.notes:
        lines.append(f"note: {n}")
    return "\n".join(lines) + "\n"


CSV_FIELDS = ["model", "train_mean", "train_std", "test_mean", "test_std", "test_f1_mean",
              "train_test_gap", "fit_time_ms_mean", "best_params"]


def _render_csv(r: ComparisonReport):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for f in r.families:
        w.writerow([f.model, f"{f.train_mean:.6f}", f"{f.train_std:.6f}", f"{f.test_mean:.6f}",
                    f"{f.test_std:.6f}", f"{f.test_f1_mean:.6f}", f"{f.train_test_gap:.6f}",
                    f"{f.fit_time_ms_mean:.3f}", _params(f.best_params)])
    return buf.getvalue()


def _render_markdown(r: ComparisonReport):
    lines = ["| " + " | ".join(TABLE_COLUMNS) + " |", "|" + "---|" * len(TABLE_COLUMNS)]
    for f in r.families:
        q = f.qualitative
        cells = [
            f.model,
            f"{q['Performance']} (test {_pct(f.test_mean)}% ± {_pct(f.test_std)})",
            q["Classification Capability"],
            f"{q['Computation Time']} ({f.fit_time_ms_mean:.2f} ms)",
            f"{q['Hyperparameter Tuning']} ({f.n_candidates} grid points)",
        ]
        lines.append("| " + " | ".join(cells) + " |")
    lines.append("")
    lines.append("| Model | Train mean % | Train std % | Test mean % | Test std % | Fit time (ms) | Best params |")
    lines.append("|---|---|---|---|---|---|---|")
    for f in r.families:
        lines.append(
            f"| {f.model} | {_pct(f.train_mean)} | {_pct(f.train_std)} | {_pct(f.test_mean)} | "
            f"{_pct(f.test_std)} | {f.fit_time_ms_mean:.2f} | {_params(f.best_params)} |"
        )
    if r.notes:
        lines.append("")
        lines += [f"- {n}" for n in r.notes]
    return "\n".join(lines) + "\n"


def render_report(r: ComparisonReport, fmt="text") -> str:
    if fmt == "json":
        return json.dumps(r.to_dict(), indent=2) + "\n"
    if fmt == "csv":
        return _render_csv(r)
    if fmt == "markdown":
        return _render_markdown(r)
    if fmt in ("text", "text-table"):
        return _render_text(r)
    raise ReportError(f"unknown report format {fmt!r}; choose from {FORMATS}")


def parse_json_report(text) -> ComparisonReport:
    return ComparisonReport.from_dict(json.loads(text))
