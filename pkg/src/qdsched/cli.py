"""Command-line harness for the benchmark and evolution experiments.

Subcommands: fetch, baseline, evolve, hard-subset, grid-report, crossval,
evaluate-rule. Instance-set arguments accept a directory path, a known set
name resolved under the data root (j30, j60, j90, j120, rg300), or
"<set>:validation" / "<set>:test" for the protocol split. Exits 0 on
success; on failure prints one JSON error line to stderr and exits nonzero.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import datasets, experiments
from .catalog import EVOLVED_RULES, load_evolved_rule
from .instances import load_meta
from .scheduling import evaluate_rule, prepare

#: Default baseline report order.
DEFAULT_BASELINE_RULES = ("EST", "EFT", "LST", "LFT", "SPT", "FIFO", "MTS", "RAND", "GRPW", "GRD")


class CliError(RuntimeError):
    pass


def _load_metas(meta_path):
    if not meta_path:
        return None
    return load_meta(Path(meta_path).read_text())


def _resolve_set(token: str, data_root, meta_path=None):
    """Resolve an instance-set token to a list of Instances."""
    name, _, split = token.partition(":")
    candidates = (Path(name), datasets.set_dir(name, data_root))
    directory = next((d for d in candidates if d.is_dir()), None)
    if directory is None:
        if name in datasets.DATASETS:
            raise CliError(
                f"instance set {name!r} not found under {datasets.data_root(data_root)}; "
                "run `qdsched fetch` or place the files manually"
            )
        raise CliError(f"unknown instance set or directory: {token!r}")

    paths = experiments.discover_instances(directory)
    instances = experiments.load_instances(paths)
    if not split:
        return instances
    if split.startswith("combo"):
        # "comboN": the N-th instance (0-based) of every parameter
        # combination, e.g. the desk profile trains on "<set>:combo0"
        try:
            index = int(split[len("combo"):])
        except ValueError:
            raise CliError(f"unknown split {split!r}") from None
        chosen = set(
            experiments.combination_subset([i.id for i in instances], index)
        )
    elif split in ("validation", "test"):
        metas = _load_metas(meta_path)
        ids = [i.id for i in instances]
        valid_ids, test_ids = experiments.split_first_per_combination(ids, metas)
        chosen = set(valid_ids if split == "validation" else test_ids)
    else:
        raise CliError(f"unknown split {split!r}; use validation, test, or comboN")
    return [i for i in instances if i.id in chosen]


def _resolve_rule_specs(specs):
    """Rule tokens: built-in names, catalog names, serialized forms, or files."""
    resolved = []
    for spec in specs:
        if spec in EVOLVED_RULES:
            resolved.append((spec, load_evolved_rule(spec)))
        else:
            resolved.extend(experiments.resolve_rules([spec]))
    return resolved


def cmd_fetch(args) -> int:
    counts = datasets.fetch(args.sets or None, root=args.data_root)
    for name, count in counts.items():
        print(f"{name}: {count} files")
    return 0


def cmd_baseline(args) -> int:
    instances = _resolve_set(args.instances, args.data_root, args.meta)
    prepared = prepare(instances)
    rule_specs = args.rules if args.rules is not None else list(DEFAULT_BASELINE_RULES)
    rules = _resolve_rule_specs(rule_specs)
    rows = experiments.baseline_rows(rules, prepared, seed=args.seed)
    out = Path(args.out) if args.out else None
    if out:
        experiments.write_csv(out, ["rule", "deviation", "makespan"], rows)
        print(f"wrote {out}")
    for name, dev, ms in rows:
        print(f"{name}\t{dev:.2f}\t{ms}")
    return 0


def cmd_evolve(args) -> int:
    profile = experiments.PROFILES[args.profile]
    if args.grid_bins:
        profile = experiments.ExperimentProfile(
            name=profile.name,
            config=profile.config,
            runs=profile.runs,
            grid_sizes=tuple(args.grid_bins),
        )
    if args.runs:
        profile = experiments.ExperimentProfile(
            name=profile.name,
            config=profile.config,
            runs=args.runs,
            grid_sizes=profile.grid_sizes,
        )
    spec = experiments.ExperimentSpec(
        training=tuple(_resolve_set(args.train, args.data_root, args.meta)),
        validation=tuple(_resolve_set(args.valid, args.data_root, args.meta)),
        test=tuple(_resolve_set(args.test, args.data_root, args.meta)),
        profile=profile,
        out_dir=Path(args.out),
        base_seed=args.seed,
    )
    rows = experiments.run_experiment(spec)
    print(f"wrote {spec.out_dir / 'summary.csv'} ({len(rows)} result rows)")
    return 0


def cmd_hard_subset(args) -> int:
    if not args.meta:
        raise CliError("hard-subset requires --meta")
    instances = _resolve_set(args.test, args.data_root, args.meta)
    metas = _load_metas(args.meta)
    prepared = prepare(instances)
    rule_specs = args.rules if args.rules is not None else list(DEFAULT_BASELINE_RULES)
    rules = _resolve_rule_specs(rule_specs)
    rows = experiments.hard_subset_rows(rules, prepared, metas, seed=args.seed)
    experiments.write_csv(Path(args.out), ["rule", "deviation", "makespan"], rows)
    print(f"wrote {args.out}")
    return 0


def cmd_grid_report(args) -> int:
    paths = [Path(p) for p in args.snapshots]
    expanded = []
    for p in paths:
        if p.is_dir():
            expanded.extend(sorted(p.rglob("archive.csv")))
        else:
            expanded.append(p)
    if not expanded:
        raise CliError("no archive snapshots found")
    experiments.write_grid_report(expanded, Path(args.out))
    print(f"wrote grid report to {args.out}")
    return 0


def cmd_crossval(args) -> int:
    prepared_sets = {
        token: prepare(_resolve_set(token, args.data_root, args.meta))
        for token in args.sets
    }
    rule_specs = args.rules if args.rules is not None else list(DEFAULT_BASELINE_RULES)
    rules = _resolve_rule_specs(rule_specs)
    header, rows = experiments.crossval_rows(rules, prepared_sets, seed=args.seed)
    experiments.write_csv(Path(args.out), header, rows)
    print(f"wrote {args.out}")
    return 0


def cmd_evaluate_rule(args) -> int:
    name, rule = _resolve_rule_specs([args.rule])[0]
    instances = _resolve_set(args.instances, args.data_root, args.meta)
    prepared = prepare(instances)
    report = evaluate_rule(rule, prepared, seed=args.seed)
    if args.out:
        experiments.write_csv(
            Path(args.out),
            ["instance", "makespan", "lower_bound", "deviation"],
            [
                (ident, ms, prep.lower_bound, dev)
                for ident, ms, dev, prep in zip(
                    report.ids, report.makespans, report.deviations, prepared.items
                )
            ],
        )
        print(f"wrote {args.out}")
    print(f"rule: {name}")
    print(f"mean deviation: {report.mean_deviation:.2f}")
    print(f"total makespan: {report.total_makespan}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qdsched",
        description="Evolve and benchmark priority rules for project scheduling.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--data-root", default=None, help="benchmark data directory "
                       f"(default: $"+datasets.DATA_ROOT_ENV+" or ./data)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--meta", default=None, help="instance metadata CSV")

    p = sub.add_parser("fetch", help="download benchmark sets and verify counts")
    p.add_argument("sets", nargs="*", help=f"subset of {sorted(datasets.DATASETS)}")
    p.add_argument("--data-root", default=None)
    p.set_defaults(func=cmd_fetch)

    p = sub.add_parser("baseline", help="evaluate built-in rules on a set")
    common(p)
    p.add_argument("--instances", required=True)
    p.add_argument("--rules", nargs="*", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("evolve", help="run the GPHH/MEHH experiment matrix")
    common(p)
    p.add_argument("--train", required=True)
    p.add_argument("--valid", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--profile", choices=sorted(experiments.PROFILES), default="desk")
    p.add_argument("--grid-bins", type=int, nargs="*", default=None,
                   help="bins per feature dimension (default from profile)")
    p.add_argument("--runs", type=int, default=None, help="override run count")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("hard-subset", help="re-evaluate rules on hard instances")
    common(p)
    p.add_argument("--test", required=True)
    p.add_argument("--rules", nargs="*", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_hard_subset)

    p = sub.add_parser("grid-report", help="coverage and feature matrices from snapshots")
    p.add_argument("snapshots", nargs="+", help="archive.csv files or run directories")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_grid_report)

    p = sub.add_parser("crossval", help="evaluate rules across instance sets")
    common(p)
    p.add_argument("--sets", nargs="+", required=True)
    p.add_argument("--rules", nargs="*", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_crossval)

    p = sub.add_parser("evaluate-rule", help="evaluate one rule on a set")
    common(p)
    p.add_argument("--rule", required=True,
                   help="built-in name, catalog name, serialized form, or rule file")
    p.add_argument("--instances", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_evaluate_rule)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except BrokenPipeError:
        raise
    except Exception as exc:  # noqa: BLE001 - single reporting point for the CLI
        print(json.dumps({"error": type(exc).__name__, "detail": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
