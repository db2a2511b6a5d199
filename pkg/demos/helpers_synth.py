"""Deterministic synthetic project generator shared by the demo scripts."""
import random

from qdsched.instances import Instance, validate_instance


def synthetic_project(seed: int, n_real: int = 16, k: int = 3) -> Instance:
    rng = random.Random(seed)
    m = n_real + 2
    caps = tuple(rng.randint(4, 8) for _ in range(k))
    durations = [0, *(rng.randint(1, 9) for _ in range(n_real)), 0]
    requirements = [(0,) * k]
    for _ in range(n_real):
        requirements.append(tuple(rng.randint(0, c) for c in caps))
    requirements.append((0,) * k)
    successors: list[list[int]] = [[] for _ in range(m)]
    for j in range(1, m - 1):
        for s in range(j + 1, m - 1):
            if rng.random() < 0.2:
                successors[j].append(s)
    has_pred = {s for succ in successors for s in succ}
    successors[0] = [j for j in range(1, m - 1) if j not in has_pred] or [m - 1]
    for j in range(1, m - 1):
        if not successors[j]:
            successors[j] = [m - 1]
    inst = Instance(
        id=f"synthetic_{seed}",
        durations=tuple(durations),
        requirements=tuple(requirements),
        capacities=caps,
        successors=tuple(tuple(s) for s in successors),
        horizon=sum(durations),
    )
    return validate_instance(inst)
