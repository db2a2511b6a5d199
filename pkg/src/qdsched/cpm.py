"""Critical-path analysis and the normalized per-activity attribute table.

The forward/backward passes relax the resource constraints and give earliest
and latest start/finish times over the precedence DAG; the earliest finish of
the sink is the makespan lower bound used throughout for fitness. The
attribute table scales ten per-activity quantities into [0, 1] for use as
rule terminals.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .instances import Instance, topological_order

#: Terminal names, in canonical order.
ATTRIBUTE_NAMES = (
    "ES", "EF", "LS", "LF", "TPC", "TSC", "RR", "AvgRReq", "MaxRReq", "MinRReq",
)

#: Terminals describing resource usage (counted by the resource-node feature).
RESOURCE_ATTRIBUTES = frozenset({"RR", "AvgRReq", "MaxRReq", "MinRReq"})


def forward_pass(instance: Instance) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Earliest start/finish per activity, scheduling as early as possible."""
    es = [0] * instance.num_activities
    ef = [0] * instance.num_activities
    for j in topological_order(instance):
        preds = instance.predecessors[j]
        es[j] = max((ef[i] for i in preds), default=0)
        ef[j] = es[j] + instance.durations[j]
    return tuple(es), tuple(ef)


def backward_pass(
    instance: Instance, anchor: int
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Latest start/finish per activity with the sink finishing at `anchor`."""
    m = instance.num_activities
    ls = [0] * m
    lf = [0] * m
    for j in reversed(topological_order(instance)):
        succs = instance.successors[j]
        lf[j] = min((ls[s] for s in succs), default=anchor)
        ls[j] = lf[j] - instance.durations[j]
    return tuple(ls), tuple(lf)


def closures(instance: Instance) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Transitive predecessor/successor counts per activity (dummies included).

    Returns (|pred closure|, |succ closure|) per activity, computed with
    reachability bitsets over the DAG.
    """
    m = instance.num_activities
    order = topological_order(instance)
    succ_mask = [0] * m
    for j in reversed(order):
        mask = 0
        for s in instance.successors[j]:
            mask |= succ_mask[s] | (1 << s)
        succ_mask[j] = mask
    pred_mask = [0] * m
    for j in order:
        mask = 0
        for p in instance.predecessors[j]:
            mask |= pred_mask[p] | (1 << p)
        pred_mask[j] = mask
    preds = tuple(bin(mask).count("1") for mask in pred_mask)
    succs = tuple(bin(mask).count("1") for mask in succ_mask)
    return preds, succs


def _scaled(raw, maximum: float) -> np.ndarray:
    # all-zero column when the raw maximum is zero (degenerate instances)
    arr = np.asarray(raw, dtype=np.float64)
    if maximum <= 0:
        return np.zeros_like(arr)
    return arr / maximum


@dataclass(frozen=True, eq=False)
class AttributeTable:
    """Normalized per-activity rule terminals plus the raw CPM times."""

    es: np.ndarray
    ef: np.ndarray
    ls: np.ndarray
    lf: np.ndarray
    tpc: np.ndarray
    tsc: np.ndarray
    rr: np.ndarray
    avg_rreq: np.ndarray
    max_rreq: np.ndarray
    min_rreq: np.ndarray
    raw_es: tuple[int, ...]
    raw_ef: tuple[int, ...]
    raw_ls: tuple[int, ...]
    raw_lf: tuple[int, ...]
    raw_tpc: tuple[int, ...]
    raw_tsc: tuple[int, ...]
    lower_bound: int

    @cached_property
    def columns(self) -> dict[str, np.ndarray]:
        """Terminal-name to value-column mapping for rule evaluation."""
        return {
            "ES": self.es,
            "EF": self.ef,
            "LS": self.ls,
            "LF": self.lf,
            "TPC": self.tpc,
            "TSC": self.tsc,
            "RR": self.rr,
            "AvgRReq": self.avg_rreq,
            "MaxRReq": self.max_rreq,
            "MinRReq": self.min_rreq,
        }

    def __len__(self) -> int:
        return len(self.raw_es)


def attribute_table(instance: Instance) -> AttributeTable:
    """Compute all ten normalized attributes and the critical-path bound."""
    raw_es, raw_ef = forward_pass(instance)
    lower_bound = raw_ef[instance.sink]
    raw_ls, raw_lf = backward_pass(instance, lower_bound)
    raw_tpc, raw_tsc = closures(instance)

    m = instance.num_activities
    caps = np.asarray(instance.capacities, dtype=np.float64)
    reqs = np.asarray(instance.requirements, dtype=np.float64)
    ratios = reqs / caps  # capacities validated positive

    return AttributeTable(
        es=_scaled(raw_es, max(raw_es)),
        ef=_scaled(raw_ef, max(raw_ef)),
        ls=_scaled(raw_ls, max(raw_ls)),
        lf=_scaled(raw_lf, max(raw_lf)),
        tpc=_scaled(raw_tpc, m - 1),
        tsc=_scaled(raw_tsc, m - 1),
        rr=(reqs > 0).mean(axis=1),
        avg_rreq=ratios.mean(axis=1),
        max_rreq=ratios.max(axis=1),
        min_rreq=ratios.min(axis=1),
        raw_es=raw_es,
        raw_ef=raw_ef,
        raw_ls=raw_ls,
        raw_lf=raw_lf,
        raw_tpc=raw_tpc,
        raw_tsc=raw_tsc,
        lower_bound=lower_bound,
    )


def attribute_csv(instance: Instance, attrs: AttributeTable) -> str:
    """Debug dump: one row per activity with all attributes and raw times."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(
        ["id", "activity", *ATTRIBUTE_NAMES, "raw_ES", "raw_EF", "raw_LS", "raw_LF"]
    )
    cols = attrs.columns
    for j in range(instance.num_activities):
        writer.writerow(
            [
                instance.id,
                instance.activity_id(j),
                *(repr(float(cols[name][j])) for name in ATTRIBUTE_NAMES),
                attrs.raw_es[j],
                attrs.raw_ef[j],
                attrs.raw_ls[j],
                attrs.raw_lf[j],
            ]
        )
    return out.getvalue()
