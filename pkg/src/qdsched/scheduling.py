"""Parallel schedule generation, fitness reporting, and schedule slack.

The parallel scheme walks decision times forward: at each time it greedily
starts every eligible activity in ascending priority order (ties broken by
ascending activity ID), then jumps to the next finish event. Fitness of a
rule over an instance set is the mean percentage deviation of the makespan
from the critical-path lower bound.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from heapq import heappop, heappush
from typing import Sequence

import numpy as np

from .cpm import ATTRIBUTE_NAMES, AttributeTable, attribute_table
from .instances import Instance
from .rules import BuiltinRule, Expr, builtin_priorities, eval_expr


class ScheduleError(RuntimeError):
    """A schedule violated precedence, capacity, or bookkeeping invariants."""


@dataclass(frozen=True)
class Schedule:
    """Start/finish times of one feasible schedule (integer time units)."""

    start: tuple[int, ...]
    finish: tuple[int, ...]
    makespan: int


def psgs(instance: Instance, priority) -> Schedule:
    """Build a schedule with the parallel generation scheme.

    `priority` is either a full priority vector or a callable mapping an
    activity index to its value; lower values are scheduled first and ties
    fall back to the lower activity ID. Priorities are read once up front
    since the attributes they derive from are static.
    """
    m = instance.num_activities
    k = instance.num_resources
    if callable(priority):
        prio = [float(priority(j)) for j in range(m)]
    else:
        prio = [float(p) for p in priority]
        if len(prio) != m:
            raise ValueError(f"priority vector has {len(prio)} entries, expected {m}")

    durations = instance.durations
    reqs = instance.requirements
    succs = instance.successors
    avail = list(instance.capacities)
    pending_preds = [len(p) for p in instance.predecessors]

    start = [-1] * m
    finish = [-1] * m
    ready = [j for j in range(m) if pending_preds[j] == 0]
    running: list[tuple[int, int]] = []  # (finish time, activity)
    started = 0
    t = 0

    while started < m:
        # start everything that fits at time t: walking candidates in
        # (priority, ID) order and starting whatever still fits equals
        # repeatedly picking the best feasible activity, since capacity
        # only shrinks within a decision time. Zero-duration activities
        # finish instantly, so their successors join a fresh walk.
        while True:
            new_ready: list[int] = []
            for _, j in sorted((prio[j], j) for j in ready):
                d = durations[j]
                need = reqs[j]
                if d > 0:
                    blocked = False
                    for r in range(k):
                        if need[r] > avail[r]:
                            blocked = True
                            break
                    if blocked:
                        continue
                start[j] = t
                finish[j] = t + d
                started += 1
                if d > 0:
                    for r in range(k):
                        avail[r] -= need[r]
                    heappush(running, (t + d, j))
                else:
                    for s in succs[j]:
                        pending_preds[s] -= 1
                        if pending_preds[s] == 0:
                            new_ready.append(s)
            ready = [j for j in ready if start[j] < 0]
            if not new_ready:
                break
            ready.extend(new_ready)
        if started >= m:
            break
        t, j = heappop(running)
        done = [j]
        while running and running[0][0] == t:
            done.append(heappop(running)[1])
        for j in done:
            need = reqs[j]
            for r in range(k):
                avail[r] += need[r]
            for s in succs[j]:
                pending_preds[s] -= 1
                if pending_preds[s] == 0:
                    ready.append(s)

    return Schedule(start=tuple(start), finish=tuple(finish), makespan=max(finish))


def resource_profile(instance: Instance, schedule: Schedule) -> np.ndarray:
    """Dense per-time-step consumption, shape (makespan, K)."""
    profile = np.zeros((max(schedule.makespan, 1), instance.num_resources), dtype=np.int64)
    for j in range(instance.num_activities):
        if instance.durations[j] > 0:
            profile[schedule.start[j] : schedule.finish[j]] += np.asarray(
                instance.requirements[j], dtype=np.int64
            )
    return profile


def verify_schedule(instance: Instance, schedule: Schedule) -> None:
    """Re-check every schedule invariant from scratch; raises ScheduleError.

    Deliberately independent of the generation scheme's bookkeeping: finish
    times, precedence, the capacity profile, and the makespan are all
    recomputed from the start times alone.
    """
    m = instance.num_activities
    for j in range(m):
        if schedule.start[j] < 0:
            raise ScheduleError(f"activity {j + 1} never scheduled")
        if schedule.finish[j] != schedule.start[j] + instance.durations[j]:
            raise ScheduleError(f"activity {j + 1}: finish != start + duration")
    for j in range(m):
        for s in instance.successors[j]:
            if schedule.start[s] < schedule.finish[j]:
                raise ScheduleError(
                    f"activity {s + 1} starts before predecessor {j + 1} finishes"
                )
    profile = resource_profile(instance, schedule)
    caps = np.asarray(instance.capacities, dtype=np.int64)
    if (profile > caps).any():
        t, r = np.argwhere(profile > caps)[0]
        raise ScheduleError(f"capacity of resource {r + 1} exceeded at time {t}")
    if schedule.makespan != max(schedule.finish):
        raise ScheduleError("makespan is not the latest finish")
    if schedule.makespan != schedule.finish[instance.sink]:
        raise ScheduleError("sink does not finish last")


def deviation(makespan: int, lower_bound: int) -> float:
    """Percentage deviation of a makespan from the instance lower bound."""
    if lower_bound < 1:
        raise ValueError(f"lower bound must be >= 1, got {lower_bound}")
    return 100.0 * (makespan - lower_bound) / lower_bound


def schedule_slack(instance: Instance, schedule: Schedule) -> int:
    """Total schedule slack: per non-dummy activity, the unit steps it could
    be pushed past its finish toward its earliest successor start, stopping
    at the first step where adding its requirements to the existing profile
    would exceed any capacity.
    """
    profile = resource_profile(instance, schedule)
    caps = instance.capacities
    k = instance.num_resources
    total = 0
    for j in range(1, instance.num_activities - 1):
        least = min(schedule.start[s] for s in instance.successors[j])
        need = instance.requirements[j]
        for t in range(schedule.finish[j], least):
            if all(profile[t][r] + need[r] <= caps[r] for r in range(k)):
                total += 1
            else:
                break
    return total


# ---------------------------------------------------------------------------
# Rule evaluation over instance sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PreparedInstance:
    """An instance bundled with its attribute table."""

    instance: Instance
    attributes: AttributeTable

    @property
    def lower_bound(self) -> int:
        return self.attributes.lower_bound


class PreparedSet:
    """Instance set with attribute columns stacked for one-shot rule evaluation."""

    def __init__(self, items: Sequence[PreparedInstance]):
        if not items:
            raise ValueError("instance set is empty")
        self.items = tuple(items)
        sizes = [p.instance.num_activities for p in self.items]
        offsets = np.concatenate(([0], np.cumsum(sizes)))
        self._slices = tuple(
            slice(int(offsets[i]), int(offsets[i + 1])) for i in range(len(sizes))
        )
        self.columns = {
            name: np.concatenate([p.attributes.columns[name] for p in self.items])
            for name in ATTRIBUTE_NAMES
        }

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def priorities(self, rule, seed: int = 0) -> list[list[float]]:
        """Per-instance priority vectors for an expression or built-in rule."""
        if isinstance(rule, Expr):
            stacked = eval_expr(rule, self.columns)
            return [stacked[s].tolist() for s in self._slices]
        if isinstance(rule, BuiltinRule):
            return [
                builtin_priorities(rule, p.instance, p.attributes, seed)
                for p in self.items
            ]
        raise TypeError(f"not a rule: {rule!r}")


def prepare(instances: Sequence[Instance]) -> PreparedSet:
    """Compute attribute tables for a set of instances."""
    return PreparedSet([PreparedInstance(i, attribute_table(i)) for i in instances])


@dataclass(frozen=True)
class FitnessReport:
    """Per-instance and aggregate results of evaluating one rule."""

    ids: tuple[str, ...]
    makespans: tuple[int, ...]
    deviations: tuple[float, ...]
    mean_deviation: float
    total_makespan: int
    mean_slack: float | None = None


def evaluate_rule(
    rule, prepared, seed: int = 0, want_slack: bool = False
) -> FitnessReport:
    """Schedule every instance with the rule and aggregate the fitness.

    `want_slack` additionally reports the mean per-activity schedule slack
    (normalized by the non-dummy activity count) used as a grid feature.
    """
    pset = prepared if isinstance(prepared, PreparedSet) else PreparedSet(list(prepared))
    vectors = pset.priorities(rule, seed)
    ids = []
    makespans = []
    devs = []
    slack_sum = 0.0
    for prep, prio in zip(pset.items, vectors):
        sched = psgs(prep.instance, prio)
        ids.append(prep.instance.id)
        makespans.append(sched.makespan)
        devs.append(deviation(sched.makespan, prep.lower_bound))
        if want_slack:
            slack_sum += schedule_slack(prep.instance, sched) / prep.instance.num_real_activities
    return FitnessReport(
        ids=tuple(ids),
        makespans=tuple(makespans),
        deviations=tuple(devs),
        mean_deviation=float(np.mean(devs)),
        total_makespan=int(sum(makespans)),
        mean_slack=(slack_sum / len(pset) if want_slack else None),
    )


def normalized_slack(rule, prepared, seed: int = 0) -> float:
    """Mean over instances of (total schedule slack / non-dummy activity count)."""
    report = evaluate_rule(rule, prepared, seed=seed, want_slack=True)
    assert report.mean_slack is not None
    return report.mean_slack


def schedule_csv(instance: Instance, schedule: Schedule) -> str:
    """Gantt-style dump: one activity,start,finish row per activity."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["activity", "start", "finish"])
    for j in range(instance.num_activities):
        writer.writerow([instance.activity_id(j), schedule.start[j], schedule.finish[j]])
    return out.getvalue()
