"""Command-line entry point: ``wbcbench {inspect,tune,benchmark}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

from wbcbench import dataset as ds
from wbcbench import model_eval, report
from wbcbench.errors import WbcBenchError
from wbcbench.grids import builtin_grid
from wbcbench.model_eval import FAMILY_ORDER, GridSpec, cross_validate, grid_search, stratified_kfold

log = logging.getLogger("wbcbench")


@dataclass
class RunConfig:
    data_path: Path
    seed: int = ds.DEFAULT_SEED
    k: int = 10
    output_dir: Path = Path("results")
    formats: tuple = ("text", "csv", "json", "markdown")
    jobs: int = 1
    balance: bool = True
    standardize: bool = False
    grid_path: Path | None = None
    criterion: str = "gini"

    @classmethod
    def from_args(cls, args):
        if args.k < 2:
            raise WbcBenchError(f"--k must be at least 2, got {args.k}")
        formats = tuple(f.strip() for f in getattr(args, "format", "text").split(",") if f.strip())
        for f in formats:
            if f not in report.FORMATS:
                raise WbcBenchError(f"unknown --format {f!r}; choose from {', '.join(report.FORMATS)}")
        return cls(
            data_path=Path(args.data) if args.data else ds.bundled_data_path(),
            seed=args.seed,
            k=args.k,
            output_dir=Path(args.output_dir),
            formats=formats,
            jobs=max(1, args.jobs),
            balance=not args.no_balance,
            standardize=args.standardize,
            grid_path=Path(args.grid) if getattr(args, "grid", None) else None,
            criterion=args.criterion,
        )

    def load(self):
        d = ds.clean(ds.load_raw(self.data_path))
        return ds.balance(d, seed=self.seed) if self.balance else d

    def fingerprint(self, d):
        n0, n1 = d.class_counts()
        return {
            "rows": len(d),
            "benign": n0,
            "malignant": n1,
            "balanced": self.balance,
            "seed": self.seed,
            "k": self.k,
            "standardized": self.standardize,
        }


def cmd_inspect(cfg: RunConfig, out=None):
    out = out or sys.stdout
    d = cfg.load()
    stats = ds.class_feature_stats(d)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    ds.write_stats(stats, cfg.output_dir / "class_stats.csv", cfg.output_dir / "class_stats.json")
    ds.export_parallel_coordinates(
        d, cfg.output_dir / "parallel_coordinates.csv", cfg.output_dir / "parallel_coordinates.svg"
    )
    n0, n1 = stats.counts
    print(f"{len(d)} rows ({n0} benign, {n1} malignant); std convention: {stats.std_convention}", file=out)
    print(f"{'class':<10} {'feature':<28} {'mean':>6} {'std':>6}", file=out)
    for r in stats.records():
        print(f"{r['class']:<10} {r['feature']:<28} {r['mean']:6.2f} {r['std']:6.2f}", file=out)
    return stats


def _grid_for(cfg: RunConfig, family):
    if cfg.grid_path is not None:
        spec = GridSpec.load(cfg.grid_path)
        if spec.family != family:
            raise WbcBenchError(f"grid file is for family {spec.family!r}, not {family!r}")
        return spec
    return builtin_grid(family, criterion=cfg.criterion)


def _tune(cfg, family, d, plan):
    result = grid_search(_grid_for(cfg, family), d, plan, jobs=cfg.jobs, standardize=cfg.standardize)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    model_eval.write_grid_csv(result, cfg.output_dir / f"grid_{family}.csv")
    (cfg.output_dir / f"best_{family}.json").write_text(json.dumps(result.to_dict(), indent=2) + "\n")
    return result


def cmd_tune(cfg: RunConfig, family, out=None):
    out = out or sys.stdout
    model_eval.get_family(family)
    d = cfg.load()
    plan = stratified_kfold(d.labels, cfg.k, cfg.seed)
    result = _tune(cfg, family, d, plan)
    b = result.best_result
    print(
        f"{family}: {len(result.all_results)} candidates evaluated, {len(result.skipped)} skipped; "
        f"best [{result.best.label()}] test {100 * b.test_mean:.2f}% ± {100 * b.test_std:.2f}",
        file=out,
    )
    return result


def cmd_benchmark(cfg: RunConfig, out=None):
    out = out or sys.stdout
    d = cfg.load()
    plan = stratified_kfold(d.labels, cfg.k, cfg.seed)
    results = []
    revalidated = {}
    for family in FAMILY_ORDER:
        r = _tune(cfg, family, d, plan)
        results.append(r)
        revalidated[family] = cross_validate(family, r.best, d, plan, standardize=cfg.standardize)
    rep = report.compare_models(results, revalidated, dataset=cfg.fingerprint(d))
    for fmt in cfg.formats:
        path = cfg.output_dir / f"report.{report.FORMAT_SUFFIX[fmt]}"
        path.write_text(report.render_report(rep, fmt))
    out.write(report.render_report(rep, "text"))
    return rep


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--data", help="path to breast-cancer-wisconsin.data (default: bundled copy)")
    common.add_argument("--seed", type=int, default=ds.DEFAULT_SEED, help="seed for undersampling and folds")
    common.add_argument("--k", type=int, default=10, help="number of cross-validation folds")
    common.add_argument("--output-dir", default="results", help="directory for all output files")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for grid search")
    common.add_argument("--no-balance", action="store_true", help="skip undersampling of the benign class")
    common.add_argument("--standardize", action="store_true", help="z-score features within each fold")
    common.add_argument("--criterion", choices=("gini", "info_gain"), default="gini",
                        help="tree split criterion for the built-in grid")
    common.add_argument("-v", "--verbose", action="store_true", help="log skipped grid points")

    parser = argparse.ArgumentParser(prog="wbcbench", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("inspect", parents=[common], help="clean, balance and summarise the data")
    p = sub.add_parser("tune", parents=[common], help="grid-search one model family")
    p.add_argument("family", choices=sorted(model_eval.FAMILIES))
    p.add_argument("--grid", help="JSON grid file instead of the built-in grid")
    p = sub.add_parser("benchmark", parents=[common], help="tune all families and compare them")
    p.add_argument("--format", default="text,csv,json,markdown",
                   help="comma-separated report formats (text, csv, json, markdown)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        cfg = RunConfig.from_args(args)
        if args.command == "inspect":
            cmd_inspect(cfg)
        elif args.command == "tune":
            cmd_tune(cfg, args.family)
        else:
            cmd_benchmark(cfg)
    except (WbcBenchError, OSError) as exc:
        print(f"wbcbench: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
