"""Shared fixtures-as-functions: tiny hand instances, a synthetic instance
generator, and a PSPLib-format emitter used for cross-format parser tests.
"""
from __future__ import annotations

import random

from qdsched.datasets import set_dir
from qdsched.instances import Instance, validate_instance


def make_instance(
    ident: str,
    durations,
    requirements,
    capacities,
    successors,
    horizon=None,
) -> Instance:
    inst = Instance(
        id=ident,
        durations=tuple(durations),
        requirements=tuple(tuple(r) for r in requirements),
        capacities=tuple(capacities),
        successors=tuple(tuple(s) for s in successors),
        horizon=sum(durations) if horizon is None else horizon,
    )
    return validate_instance(inst)


def chain_instance() -> Instance:
    """source -> A(d=3) -> B(d=2) -> sink, one resource."""
    return make_instance(
        "chain",
        durations=(0, 3, 2, 0),
        requirements=((0,), (1,), (1,), (0,)),
        capacities=(2,),
        successors=((1,), (2,), (3,), ()),
    )


def parallel_instance(d_a=3, d_b=5, r_a=0, r_b=0, cap=3) -> Instance:
    """source -> {A, B} -> sink."""
    return make_instance(
        "parallel",
        durations=(0, d_a, d_b, 0),
        requirements=((0,), (r_a,), (r_b,), (0,)),
        capacities=(cap,),
        successors=((1, 2), (3,), (3,), ()),
    )


def contention_instance() -> Instance:
    """A(d=2,r=2) and B(d=3,r=2) competing for a single capacity-3 resource."""
    return make_instance(
        "contention",
        durations=(0, 2, 3, 0),
        requirements=((0,), (2,), (2,), (0,)),
        capacities=(3,),
        successors=((1, 2), (3,), (3,), ()),
    )


def random_instance(seed: int, max_real: int = 12, k_max: int = 3) -> Instance:
    """Random feasible DAG instance; deterministic in the seed."""
    rng = random.Random(seed)
    n_real = rng.randint(1, max_real)
    k = rng.randint(1, k_max)
    m = n_real + 2
    caps = tuple(rng.randint(2, 8) for _ in range(k))
    durations = [0, *(rng.randint(1, 9) for _ in range(n_real)), 0]
    requirements = [tuple(0 for _ in range(k))]
    for _ in range(n_real):
        requirements.append(tuple(rng.randint(0, c) for c in caps))
    requirements.append(tuple(0 for _ in range(k)))
    successors: list[list[int]] = [[] for _ in range(m)]
    for j in range(1, m - 1):
        for s in range(j + 1, m - 1):
            if rng.random() < 0.3:
                successors[j].append(s)
    has_pred = {s for succ in successors for s in succ}
    successors[0] = [j for j in range(1, m - 1) if j not in has_pred] or [m - 1]
    for j in range(1, m - 1):
        if not successors[j]:
            successors[j] = [m - 1]
    return make_instance(
        f"rand{seed}",
        durations=durations,
        requirements=requirements,
        capacities=caps,
        successors=successors,
    )


def psplib_text(inst: Instance) -> str:
    """Emit an Instance in single-mode PSPLib layout (test-side serializer)."""
    m = inst.num_activities
    k = inst.num_resources
    lines = [
        "*" * 72,
        "file with basedata            : none",
        "initial value random generator: 0",
        "*" * 72,
        "projects                      :  1",
        f"jobs (incl. supersource/sink ):  {m}",
        f"horizon                       :  {inst.horizon}",
        "RESOURCES",
        f"  - renewable                 :  {k}   R",
        "  - nonrenewable              :  0   N",
        "  - doubly constrained        :  0   D",
        "*" * 72,
        "PROJECT INFORMATION:",
        "pronr.  #jobs rel.date duedate tardcost  MPM-Time",
        f"    1     {m - 2}      0       {inst.horizon}       0       {inst.horizon}",
        "*" * 72,
        "PRECEDENCE RELATIONS:",
        "jobnr.    #modes  #successors   successors",
    ]
    for j in range(m):
        succ = " ".join(str(s + 1) for s in inst.successors[j])
        lines.append(f"  {j + 1}  1  {len(inst.successors[j])}  {succ}".rstrip())
    lines += [
        "*" * 72,
        "REQUESTS/DURATIONS:",
        "jobnr. mode duration  " + "  ".join(f"R {r + 1}" for r in range(k)),
        "-" * 72,
    ]
    for j in range(m):
        reqs = " ".join(str(r) for r in inst.requirements[j])
        lines.append(f"  {j + 1}  1  {inst.durations[j]}  {reqs}")
    lines += [
        "*" * 72,
        "RESOURCEAVAILABILITIES:",
        "  " + "  ".join(f"R {r + 1}" for r in range(k)),
        "  " + "  ".join(str(c) for c in inst.capacities),
        "*" * 72,
    ]
    return "\n".join(lines) + "\n"


def patterson_text(inst: Instance) -> str:
    """Emit an Instance in plain Patterson layout (no metadata comments)."""
    lines = [
        f"{inst.num_activities} {inst.num_resources}",
        " ".join(str(c) for c in inst.capacities),
    ]
    for j in range(inst.num_activities):
        succ = inst.successors[j]
        fields = [
            inst.durations[j],
            *inst.requirements[j],
            len(succ),
            *(s + 1 for s in succ),
        ]
        lines.append(" ".join(str(v) for v in fields))
    return "\n".join(lines) + "\n"


def dataset_dir(name: str):
    """Path to a benchmark set if present on disk, else None."""
    d = set_dir(name)
    return d if d.is_dir() and any(d.iterdir()) else None
