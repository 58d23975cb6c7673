"""``mtscbench`` command line interface.

Subcommands::

    mtscbench run --config experiments.yaml
    mtscbench run --dataset BasicMotions --classifier DTW_D [--seed N] [--normalise] [--time-budget 2h]
    mtscbench table --dir runs [--complete-only] [--out results.csv]
    mtscbench compare cd --table results.csv [--alpha 0.05] [--family global]
    mtscbench compare scatter --table results.csv --a DTW_D --b HC
    mtscbench compare summary --table results.csv [--baseline Default]

Exit codes: 0 success, 1 classifier failure, 2 configuration error,
3 data error, 4 time or memory budget abort.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from ..archive import DATA_ROOT_ENV
from ..exceptions import IncompleteTable, MissingRuns
from ..plots import render_cd_diagram, render_scatter
from ..stats import ResultsTable, compare, win_loss
from .config import ClassifierSpec, ConfigError, ExperimentConfig
from .registry import available
from .runner import OK, RESOURCE_ABORT, TIMEOUT, run_config
from .tables import assemble_table, summarise_table

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_DATA, EXIT_BUDGET = 0, 1, 2, 3, 4

log = logging.getLogger("mtscbench")


def _exit_code(records):
    code = EXIT_OK
    for r in records:
        s = r.summary
        if s["status"] == OK:
            continue
        if s["status"] in (TIMEOUT, RESOURCE_ABORT):
            c = EXIT_BUDGET
        else:
            c = {"config": EXIT_CONFIG, "data": EXIT_DATA}.get(s.get("error_kind"), EXIT_FAILED)
        code = max(code, c)
    return code


def cmd_run(args):
    if args.config:
        config = ExperimentConfig.load(args.config)
    else:
        if not (args.dataset and args.classifier):
            raise ConfigError("give --config, or both --dataset and --classifier")
        try:
            params = json.loads(args.params) if args.params else {}
        except json.JSONDecodeError as exc:
            raise ConfigError(f"--params is not valid JSON: {exc}") from exc
        config = ExperimentConfig(
            datasets=(args.dataset,),
            classifiers=(ClassifierSpec(args.classifier, params, args.seed),),
            resample_seed=args.resample,
            normalise=args.normalise,
            time_budget=args.time_budget,
            memory_budget=args.memory_budget,
            output_dir=args.out,
        )
    records = run_config(config)
    for r in records:
        m, s = r.metadata, r.summary
        line = f"{m.get('code', m['dataset'])}\t{m['classifier']}\tseed={m['seed']}\t{s['status']}"
        if s["status"] == OK:
            line += f"\taccuracy={s['accuracy']:.4f}\tfit={s['fit_time']:.2f}s"
        else:
            line += f"\t{s.get('message', '')}"
        print(line)
    return _exit_code(records)


def cmd_table(args):
    table, manifest = assemble_table(
        args.dir,
        classifiers=args.classifiers.split(",") if args.classifiers else None,
        datasets=args.datasets.split(",") if args.datasets else None,
        complete_only=args.complete_only,
    )
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(table.to_csv())
        out.with_suffix(".manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
        print(f"wrote {out} ({len(table.classifiers)} x {len(table.datasets)})")
    else:
        sys.stdout.write(table.to_csv())
    if manifest["dropped_datasets"]:
        print(f"dropped incomplete datasets: {', '.join(manifest['dropped_datasets'])}", file=sys.stderr)
    return EXIT_OK


def _load_table(path):
    try:
        with open(path) as fh:
            return ResultsTable.from_csv(fh)
    except OSError as exc:
        raise FileNotFoundError(f"cannot read table {path}: {exc}") from exc


def cmd_compare(args):
    table = _load_table(args.table)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.what == "cd":
        if args.classifiers:
            table = table.select(classifiers=args.classifiers.split(","))
        report = compare(table.complete_datasets() if args.complete_only else table, args.alpha, args.family)
        (out / "cd.svg").write_text(render_cd_diagram(report))
        (out / "cd.csv").write_text(report.to_csv())
        for i in report.order:
            print(f"{report.ranks[i]:.4f}\t{report.classifiers[i]}")
        for clique in report.cliques:
            print("clique: " + ", ".join(clique))
    elif args.what == "scatter":
        if not (args.a and args.b):
            raise ConfigError("scatter needs --a and --b")
        a, b = table.row(args.a), table.row(args.b)
        (out / f"scatter_{args.a}_vs_{args.b}.svg").write_text(render_scatter(a, b, args.a, args.b))
        wins, losses, ties = win_loss(b, a)
        print(f"{args.b} vs {args.a}: wins {wins} / ties {ties} / losses {losses}")
    else:
        rows = summarise_table(table, args.baseline, args.margin)
        lines = ["dataset,best,best_accuracy,baseline,margin,weak,beaten_by"]
        for r in rows:
            lines.append(
                f"{r.dataset},{r.best},{r.best_accuracy:.4f},{r.baseline:.4f},{r.margin:.4f},"
                f"{int(r.weak)},{' '.join(r.beaten_by)}"
            )
        (out / "summary.csv").write_text("\n".join(lines) + "\n")
        print("\n".join(lines))
        weak = [r.dataset for r in rows if r.weak]
        print(f"weak problems (best - baseline < {args.margin}): {', '.join(weak) or 'none'}")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="mtscbench", description="Multivariate time series classification benchmark.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="fit and evaluate classifiers",
                       epilog=f"Archive names resolve under ${DATA_ROOT_ENV}. Classifiers: {', '.join(available())}")
    r.add_argument("--config")
    r.add_argument("--dataset", help="archive name, problem directory or *_TRAIN.ts file")
    r.add_argument("--classifier")
    r.add_argument("--params", help="classifier parameters as a JSON object")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--resample", type=int, default=0, help="resample seed (0 = default split)")
    r.add_argument("--normalise", action="store_true")
    r.add_argument("--time-budget", default=None)
    r.add_argument("--memory-budget", default=None)
    r.add_argument("--out", default="runs")
    r.set_defaults(func=cmd_run)

    t = sub.add_parser("table", help="assemble a results table from run records")
    t.add_argument("--dir", required=True)
    t.add_argument("--complete-only", action="store_true")
    t.add_argument("--classifiers")
    t.add_argument("--datasets")
    t.add_argument("--out")
    t.set_defaults(func=cmd_table)

    c = sub.add_parser("compare", help="rank, test and plot a results table")
    c.add_argument("what", choices=["cd", "scatter", "summary"])
    c.add_argument("--table", required=True)
    c.add_argument("--alpha", type=float, default=0.05)
    c.add_argument("--family", choices=["global", "per_classifier", "none"], default="global")
    c.add_argument("--classifiers", help="comma-separated subset for cd")
    c.add_argument("--complete-only", action="store_true", help="cd: drop datasets with missing cells")
    c.add_argument("--a")
    c.add_argument("--b")
    c.add_argument("--baseline", default="Default")
    c.add_argument("--margin", type=float, default=0.15)
    c.add_argument("--out", default=".")
    c.set_defaults(func=cmd_compare)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FileNotFoundError, MissingRuns, IncompleteTable, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
