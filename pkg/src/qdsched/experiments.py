"""Experiment harness: data discovery, splits, run matrix, and CSV reports.

The protocol trains on one instance set, validates on the first instance of
each generator-parameter combination of a second set (one tenth of it), and
tests on the remainder. Each algorithm variant is run with consecutive
seeds; per-run artifacts land in their own directory and summary tables are
assembled at the experiment root. Everything written here is deterministic
for a fixed (seed, profile, instance set): no timestamps, sorted orders,
repr-formatted floats.
"""
from __future__ import annotations

import csv
import json
import logging
import re
import statistics
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .evolution import (
    EvolutionConfig,
    GridConfig,
    Individual,
    MehhResult,
    run_gphh,
    run_mehh,
    select_representative,
)
from .instances import Instance, InstanceMeta, parse_instance_file
from .rules import BUILTIN_RULES, parse_rule
from .scheduling import PreparedSet, evaluate_rule, prepare

log = logging.getLogger(__name__)

INSTANCE_SUFFIXES = (".sm", ".rcp", ".pat", ".txt")

#: Instances per generator-parameter combination in the benchmark sets.
COMBINATION_SIZE = 10


def natural_key(name: str):
    """Sort key treating digit runs numerically (file naming order)."""
    return [int(tok) if tok.isdigit() else tok for tok in re.split(r"(\d+)", name)]


def discover_instances(directory) -> list[Path]:
    root = Path(directory)
    if not root.is_dir():
        raise FileNotFoundError(f"instance directory not found: {root}")
    paths = [p for p in root.iterdir() if p.suffix.lower() in INSTANCE_SUFFIXES]
    if not paths:
        raise FileNotFoundError(f"no instance files under {root}")
    return sorted(paths, key=lambda p: natural_key(p.name))


def load_instances(paths: Iterable[Path]) -> list[Instance]:
    return [parse_instance_file(p) for p in paths]


def split_first_per_combination(
    ids: Sequence[str], metas: Sequence[InstanceMeta] | None = None
) -> tuple[list[str], list[str]]:
    """Validation = first instance of each parameter combination; test = rest.

    With metadata, combinations group by their parameter values; without,
    consecutive blocks of ten files (in natural naming order) form one
    combination each.
    """
    if metas is not None:
        by_id = {m.id: m for m in metas}
        missing = [i for i in ids if i not in by_id]
        if missing:
            raise KeyError(f"metadata missing for instances: {missing[:5]}")
        seen: set[tuple[float, ...]] = set()
        validation = []
        for ident in ids:
            combo = by_id[ident].combination
            if combo not in seen:
                seen.add(combo)
                validation.append(ident)
    else:
        validation = [ident for i, ident in enumerate(ids) if i % COMBINATION_SIZE == 0]
    chosen = set(validation)
    test = [ident for ident in ids if ident not in chosen]
    return validation, test


def combination_subset(ids: Sequence[str], index: int) -> list[str]:
    """The index-th instance (0-based) of each block-of-ten combination."""
    if not 0 <= index < COMBINATION_SIZE:
        raise ValueError(f"combination index must be in 0..{COMBINATION_SIZE - 1}")
    return [ident for i, ident in enumerate(ids) if i % COMBINATION_SIZE == index]


# ---------------------------------------------------------------------------
# Profiles and the experiment spec
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentProfile:
    name: str
    config: EvolutionConfig
    runs: int
    grid_sizes: tuple[int, ...]


PROFILES = {
    "paper": ExperimentProfile(
        name="paper",
        config=EvolutionConfig(population=1024, generations=25),
        runs=31,
        grid_sizes=(5, 10, 15, 20),
    ),
    "desk": ExperimentProfile(
        name="desk",
        config=EvolutionConfig(population=128, generations=10),
        runs=5,
        grid_sizes=(5,),
    ),
}


@dataclass(frozen=True)
class ExperimentSpec:
    training: tuple[Instance, ...]
    validation: tuple[Instance, ...]
    test: tuple[Instance, ...]
    profile: ExperimentProfile
    out_dir: Path
    base_seed: int = 0
    algorithms: tuple[str, ...] = ()  # default: gphh + all mehh grid sizes

    def algorithm_labels(self) -> tuple[str, ...]:
        if self.algorithms:
            return self.algorithms
        return ("gphh", *(f"mehh_{b ** 3}" for b in self.profile.grid_sizes))


@dataclass(frozen=True)
class ResultRow:
    algorithm: str
    run: int
    split: str
    mean_deviation: float
    total_makespan: int
    rule: str


# ---------------------------------------------------------------------------
# CSV plumbing: deterministic writers and round-trip readers
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        rows = list(reader)
    if not rows:
        raise ValueError(f"empty CSV: {path}")
    return rows[0], rows[1:]


def summary_stats(values: Sequence[float]) -> dict[str, float]:
    """Mean/median/best/worst/stdev of per-run results (lower is better)."""
    return {
        "mean": statistics.fmean(values),
        "median": statistics.median(values),
        "best": min(values),
        "worst": max(values),
        "stdev": statistics.stdev(values) if len(values) > 1 else 0.0,
    }


# ---------------------------------------------------------------------------
# Reports over built-in and provided rules
# ---------------------------------------------------------------------------

def baseline_rows(rules, prepared: PreparedSet, seed: int = 0) -> list[tuple]:
    """rule,deviation,makespan rows for each named or expression rule."""
    rows = []
    for name, rule in rules:
        report = evaluate_rule(rule, prepared, seed=seed)
        rows.append((name, report.mean_deviation, report.total_makespan))
    return rows


def resolve_rules(specs: Sequence[str]) -> list[tuple[str, object]]:
    """Map rule names / serialized forms / rule files to evaluatable rules."""
    resolved: list[tuple[str, object]] = []
    for spec in specs:
        if spec in BUILTIN_RULES:
            resolved.append((spec, BUILTIN_RULES[spec]))
        elif spec.lstrip().startswith("("):
            resolved.append((spec, parse_rule(spec, max_height=None)))
        else:
            path = Path(spec)
            if not path.is_file():
                raise FileNotFoundError(f"not a built-in rule or rule file: {spec}")
            for i, line in enumerate(path.read_text().splitlines()):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                name, _, body = line.partition("=")
                if body:
                    resolved.append((name.strip(), parse_rule(body.strip(), max_height=None)))
                else:
                    resolved.append((f"{path.stem}:{i + 1}", parse_rule(line, max_height=None)))
    return resolved


def hard_subset_rows(
    rules, prepared_all: PreparedSet, metas: Sequence[InstanceMeta], seed: int = 0
) -> list[tuple]:
    """Baseline rows restricted to hard instances (RC >= 0.6, RU >= 3)."""
    by_id = {m.id: m for m in metas}
    missing = [p.instance.id for p in prepared_all if p.instance.id not in by_id]
    if missing:
        raise KeyError(f"metadata missing for instances: {missing[:5]}")
    hard = [p for p in prepared_all if by_id[p.instance.id].is_hard]
    if not hard:
        raise ValueError("hard-instance filter matched no instances")
    return baseline_rows(rules, PreparedSet(hard), seed=seed)


def crossval_rows(
    rules, prepared_sets: dict[str, PreparedSet], seed: int = 0
) -> tuple[list[str], list[tuple]]:
    """Deviation of each rule on each named instance set (rule,set1,set2,...)."""
    set_names = list(prepared_sets)
    rows = []
    for name, rule in rules:
        devs = [
            evaluate_rule(rule, prepared_sets[s], seed=seed).mean_deviation
            for s in set_names
        ]
        rows.append((name, *devs))
    return ["rule", *set_names], rows


# ---------------------------------------------------------------------------
# The evolve command: run matrix, artifacts, summaries
# ---------------------------------------------------------------------------

def _archive_snapshot_rows(result: MehhResult) -> list[tuple]:
    rows = []
    archive = result.archive
    for cell in sorted(archive.cells()):
        ind = archive[cell]
        rows.append(
            (
                cell[0],
                cell[1],
                cell[2],
                ind.canonical,
                ind.fitness,
                ind.node_count,
                ind.resource_nodes,
                ind.slack,
            )
        )
    return rows


ARCHIVE_HEADER = [
    "cell_nodes", "cell_resource", "cell_slack",
    "rule", "fitness", "node_count", "resource_nodes", "slack",
]
POPULATION_HEADER = ["rule", "fitness", "node_count", "resource_nodes"]
TRACE_HEADER = ["generation", "unique_fraction", "best_fitness", "occupancy"]
SUMMARY_HEADER = ["algorithm", "run", "split", "mean_deviation", "total_makespan", "rule"]
AGGREGATE_HEADER = ["algorithm", "split", "mean", "median", "best", "worst", "stdev"]
UNIQUE_HEADER = ["algorithm", "mean", "median", "min", "max", "stdev"]


def _run_one(
    label: str,
    run_index: int,
    spec: ExperimentSpec,
    train: PreparedSet,
    valid: PreparedSet,
    test: PreparedSet,
) -> dict:
    run_dir = spec.out_dir / label / f"run_{run_index:02d}"
    marker = run_dir / "result.json"
    if marker.is_file():
        log.info("%s run %d: reusing completed run", label, run_index)
        return json.loads(marker.read_text())

    seed = spec.base_seed + run_index
    config = spec.profile.config
    if label == "gphh":
        result = run_gphh(config, train, seed)
        pool: Iterable[Individual] = result.population
        uniques = len({ind.canonical for ind in result.population})
        run_dir.mkdir(parents=True, exist_ok=True)
        write_csv(
            run_dir / "population.csv",
            POPULATION_HEADER,
            [
                (ind.canonical, ind.fitness, ind.node_count, ind.resource_nodes)
                for ind in result.population
            ],
        )
        occupancy = config.population
    else:
        bins = round(int(label.split("_", 1)[1]) ** (1 / 3))
        result = run_mehh(config, GridConfig(bins_per_dim=bins), train, seed)
        pool = result.archive.individuals()
        uniques = result.archive.occupancy
        occupancy = result.archive.occupancy
        run_dir.mkdir(parents=True, exist_ok=True)
        write_csv(run_dir / "archive.csv", ARCHIVE_HEADER, _archive_snapshot_rows(result))

    write_csv(
        run_dir / "trace.csv",
        TRACE_HEADER,
        [(r.generation, r.unique_fraction, r.best_fitness, r.occupancy) for r in result.trace],
    )
    representative = select_representative(pool, valid)
    val_report = evaluate_rule(representative.expr, valid)
    test_report = evaluate_rule(representative.expr, test)
    (run_dir / "representative.txt").write_text(representative.canonical + "\n")

    record = {
        "algorithm": label,
        "run": run_index,
        "seed": seed,
        "rule": representative.canonical,
        "validation": {
            "mean_deviation": val_report.mean_deviation,
            "total_makespan": val_report.total_makespan,
        },
        "test": {
            "mean_deviation": test_report.mean_deviation,
            "total_makespan": test_report.total_makespan,
        },
        "unique_individuals": uniques,
        "occupancy": occupancy,
        "evaluations": result.evaluations,
    }
    marker.write_text(json.dumps(record, sort_keys=True, indent=1) + "\n")
    return record


def run_experiment(spec: ExperimentSpec) -> list[ResultRow]:
    """Execute the full (algorithm x run) matrix and write all summary CSVs."""
    train = prepare(spec.training)
    valid = prepare(spec.validation)
    test = prepare(spec.test)

    rows: list[ResultRow] = []
    uniques: dict[str, list[int]] = {}
    for label in spec.algorithm_labels():
        for run_index in range(spec.profile.runs):
            record = _run_one(label, run_index, spec, train, valid, test)
            uniques.setdefault(label, []).append(record["unique_individuals"])
            for split in ("validation", "test"):
                rows.append(
                    ResultRow(
                        algorithm=label,
                        run=run_index,
                        split=split,
                        mean_deviation=record[split]["mean_deviation"],
                        total_makespan=record[split]["total_makespan"],
                        rule=record["rule"],
                    )
                )

    write_csv(
        spec.out_dir / "summary.csv",
        SUMMARY_HEADER,
        [
            (r.algorithm, r.run, r.split, r.mean_deviation, r.total_makespan, r.rule)
            for r in rows
        ],
    )

    aggregate_rows = []
    for label in spec.algorithm_labels():
        for split in ("validation", "test"):
            devs = [
                r.mean_deviation for r in rows if r.algorithm == label and r.split == split
            ]
            stats = summary_stats(devs)
            aggregate_rows.append(
                (label, split, stats["mean"], stats["median"], stats["best"],
                 stats["worst"], stats["stdev"])
            )
    write_csv(spec.out_dir / "aggregate.csv", AGGREGATE_HEADER, aggregate_rows)

    unique_rows = []
    for label in spec.algorithm_labels():
        counts = [float(c) for c in uniques[label]]
        stats = summary_stats(counts)
        unique_rows.append(
            (label, stats["mean"], stats["median"], stats["best"], stats["worst"],
             stats["stdev"])
        )
    write_csv(spec.out_dir / "unique.csv", UNIQUE_HEADER, unique_rows)
    return rows


# ---------------------------------------------------------------------------
# Grid reports from archive snapshots
# ---------------------------------------------------------------------------

def load_archive_snapshot(path: Path) -> list[dict]:
    header, rows = read_csv(path)
    if header != ARCHIVE_HEADER:
        raise ValueError(f"{path} is not an archive snapshot")
    records = []
    for row in rows:
        rec = dict(zip(header, row))
        records.append(
            {
                "cell": (int(rec["cell_nodes"]), int(rec["cell_resource"]), int(rec["cell_slack"])),
                "rule": rec["rule"],
                "fitness": float(rec["fitness"]),
            }
        )
    return records


_FEATURE_PAIRS = (
    ("nodes", "resource", (0, 1)),
    ("nodes", "slack", (0, 2)),
    ("resource", "slack", (1, 2)),
)


def grid_matrix_rows(snapshots: Sequence[list[dict]], axes: tuple[int, int]) -> list[tuple]:
    """Mean fitness per (bin_a, bin_b) cell, the third dimension averaged out."""
    groups: dict[tuple[int, int], list[float]] = {}
    for snapshot in snapshots:
        for rec in snapshot:
            key = (rec["cell"][axes[0]], rec["cell"][axes[1]])
            groups.setdefault(key, []).append(rec["fitness"])
    return [
        (a, b, statistics.fmean(vals), len(vals))
        for (a, b), vals in sorted(groups.items())
    ]


def write_grid_report(snapshot_paths: Sequence[Path], out_dir: Path) -> None:
    """Coverage per snapshot (plus the median) and the three feature matrices."""
    out_dir.mkdir(parents=True, exist_ok=True)
    by_bins: dict[int, list[tuple[Path, list[dict]]]] = {}
    for path in sorted(snapshot_paths, key=lambda p: natural_key(str(p))):
        records = load_archive_snapshot(path)
        bins = (
            max((max(rec["cell"]) for rec in records), default=-1) + 1
        )
        # infer the grid size from the run directory name when present
        m = re.search(r"mehh_(\d+)", str(path))
        if m:
            bins = round(int(m.group(1)) ** (1 / 3))
        by_bins.setdefault(bins, []).append((path, records))

    coverage_rows = []
    for bins in sorted(by_bins):
        total = bins ** 3
        covs = []
        for path, records in by_bins[bins]:
            cov = 100.0 * len(records) / total if total else 0.0
            covs.append(cov)
            coverage_rows.append((bins, str(path), cov))
        coverage_rows.append((bins, "median", statistics.median(covs)))
    write_csv(out_dir / "coverage.csv", ["grid_bins", "run", "coverage"], coverage_rows)

    all_snapshots = [records for group in by_bins.values() for _, records in group]
    for name_a, name_b, axes in _FEATURE_PAIRS:
        write_csv(
            out_dir / f"grid_{name_a}_{name_b}.csv",
            [f"bin_{name_a}", f"bin_{name_b}", "mean_fitness", "count"],
            grid_matrix_rows(all_snapshots, axes),
        )
