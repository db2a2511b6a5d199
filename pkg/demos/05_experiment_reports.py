"""Run the full experiment matrix and read back every report.

The same pipeline the CLI drives: write instances to disk, run each
algorithm for several seeded runs, select representatives on validation,
score them on test, and emit the summary/aggregate/unique CSVs plus
per-run archives, traces, and the grid report. Runs are resumable: a
completed run directory is reused on the next invocation.
"""
import tempfile
from pathlib import Path

from qdsched.cli import main
from qdsched.experiments import read_csv
from qdsched.instances import serialize_instance
from helpers_synth import synthetic_project

workdir = Path(tempfile.mkdtemp(prefix="qdsched_demo_"))
data = workdir / "instances"
data.mkdir()
for i in range(10):
    (data / f"proj_{i + 1}.rcp").write_text(serialize_instance(synthetic_project(i)))
print(f"wrote 10 synthetic projects under {data}")

out = workdir / "experiment"
code = main([
    "evolve",
    "--train", str(data),
    "--valid", str(data),
    "--test", str(data),
    "--profile", "desk",            # pop 128, 10 generations
    "--runs", "2",                  # trimmed from the profile's 5 for the demo
    "--grid-bins", "4",
    "--seed", "42",
    "--out", str(out),
])
assert code == 0

header, rows = read_csv(out / "summary.csv")
print(f"\nsummary.csv ({len(rows)} rows): {header}")
for row in rows:
    print(f"  {row[0]:8s} run {row[1]} {row[2]:10s} deviation {float(row[3]):7.2f}")

_, agg = read_csv(out / "aggregate.csv")
print("\naggregate.csv (mean/median/best/worst/stdev per algorithm and split):")
for row in agg:
    print(f"  {row[0]:8s} {row[1]:10s} mean {float(row[2]):7.2f} stdev {float(row[6]):.2f}")

_, uniq = read_csv(out / "unique.csv")
print("\nunique.csv (distinct rules at termination):")
for row in uniq:
    print(f"  {row[0]:8s} mean {float(row[1]):.1f} min {float(row[3]):.0f} max {float(row[4]):.0f}")

# coverage and pairwise feature-fitness matrices from the archive snapshots
report = workdir / "grid_report"
assert main(["grid-report", str(out), "--out", str(report)]) == 0
_, cov = read_csv(report / "coverage.csv")
print("\ncoverage.csv:")
for row in cov:
    print(f"  bins={row[0]} {Path(row[1]).parent.name if row[1] != 'median' else 'median':10s} {float(row[2]):.1f}%")

# a baseline table over the same instances, for context
baseline_csv = workdir / "baseline.csv"
assert main(["baseline", "--instances", str(data), "--out", str(baseline_csv)]) == 0
_, baseline = read_csv(baseline_csv)
print("\nbuilt-in rules on the same set (rule, deviation, makespan):")
for row in baseline:
    print(f"  {row[0]:5s} {float(row[1]):7.2f} {row[2]}")

print(f"\nall artifacts under {workdir}")
