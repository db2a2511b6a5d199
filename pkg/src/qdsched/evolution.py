"""Tree generation, variation operators, the elite archive, and both search loops.

Two hyper-heuristics share the same genotype, budget, and variation pipeline:
a generational GP with tournament selection, and a quality-diversity loop
that keeps at most one elite per cell of a 3-feature grid (tree size,
resource-terminal count, normalized schedule slack) and breeds from the
whole archive.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .cpm import ATTRIBUTE_NAMES
from .rules import Expr, MAX_HEIGHT, OPERATORS, height, node_count, resource_node_count, serialize
from .scheduling import PreparedSet, evaluate_rule

_OPERATOR_NAMES = tuple(OPERATORS)
# chance of cutting a grow-branch short, as in ramped half-and-half
_TERMINAL_RATIO = len(ATTRIBUTE_NAMES) / (len(ATTRIBUTE_NAMES) + len(_OPERATOR_NAMES))


# ---------------------------------------------------------------------------
# Random trees and variation
# ---------------------------------------------------------------------------

def random_subtree(rng: random.Random, min_depth: int, max_depth: int) -> Expr:
    """Ramped half-and-half subtree with target depth uniform in the range."""
    target = rng.randint(min_depth, max_depth)
    grow = rng.random() < 0.5

    def build(depth: int) -> Expr:
        if depth >= target or (grow and depth >= min_depth and rng.random() < _TERMINAL_RATIO):
            return Expr(rng.choice(ATTRIBUTE_NAMES))
        op = rng.choice(_OPERATOR_NAMES)
        return Expr(op, tuple(build(depth + 1) for _ in range(OPERATORS[op])))

    return build(0)


def random_individual(rng: random.Random, init_heights: tuple[int, int] = (2, 5)) -> Expr:
    return random_subtree(rng, *init_heights)


def _flatten(expr: Expr) -> list[Expr]:
    out = [expr]
    for c in expr.children:
        out.extend(_flatten(c))
    return out


def _replace(expr: Expr, index: int, repl: Expr) -> tuple[Expr, int]:
    """Rebuild `expr` with the node at preorder position `index` replaced."""
    if index == 0:
        return repl, -1
    offset = 1
    children = list(expr.children)
    for i, child in enumerate(children):
        size = node_count(child)
        if offset <= index < offset + size:
            children[i], _ = _replace(child, index - offset, repl)
            return Expr(expr.symbol, tuple(children)), -1
        offset += size
    raise IndexError(index)


def _subtree_at(expr: Expr, index: int) -> Expr:
    return _flatten(expr)[index]


def crossover(
    a: Expr, b: Expr, rng: random.Random, height_limit: int = MAX_HEIGHT
) -> tuple[Expr, Expr]:
    """Swap random subtrees; a child over the height limit reverts to its parent."""
    ia = rng.randrange(node_count(a))
    ib = rng.randrange(node_count(b))
    sub_a = _subtree_at(a, ia)
    sub_b = _subtree_at(b, ib)
    child_a, _ = _replace(a, ia, sub_b)
    child_b, _ = _replace(b, ib, sub_a)
    if height(child_a) > height_limit:
        child_a = a
    if height(child_b) > height_limit:
        child_b = b
    return child_a, child_b


def mutate(
    a: Expr,
    rng: random.Random,
    height_limit: int = MAX_HEIGHT,
    subtree_heights: tuple[int, int] = (0, 2),
) -> Expr:
    """Replace a random subtree with a fresh one; over-limit children revert."""
    index = rng.randrange(node_count(a))
    child, _ = _replace(a, index, random_subtree(rng, *subtree_heights))
    return a if height(child) > height_limit else child


# ---------------------------------------------------------------------------
# The feature grid
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridConfig:
    """Binning of the 3 feature dimensions (per-dimension closed domains)."""

    bins_per_dim: int = 5
    node_domain: tuple[float, float] = (4.0, 127.0)
    resource_domain: tuple[float, float] = (0.0, 30.0)
    slack_domain: tuple[float, float] = (1.65, 2.00)

    @property
    def total_cells(self) -> int:
        return self.bins_per_dim ** 3

    @property
    def domains(self) -> tuple[tuple[float, float], ...]:
        return (self.node_domain, self.resource_domain, self.slack_domain)


def bin_features(features, config: GridConfig) -> tuple[int, int, int]:
    """Map a feature triple to its cell; out-of-domain values clamp to edge bins."""
    cell = []
    for value, (lo, hi) in zip(features, config.domains):
        if hi <= lo:
            cell.append(0)
            continue
        index = math.floor(config.bins_per_dim * (value - lo) / (hi - lo))
        cell.append(min(max(index, 0), config.bins_per_dim - 1))
    return tuple(cell)


@dataclass(frozen=True)
class Individual:
    """An evaluated rule: genotype, training fitness, and grid features."""

    expr: Expr
    canonical: str
    fitness: float
    node_count: int
    resource_nodes: int
    slack: float | None = None

    @property
    def features(self) -> tuple[float, float, float]:
        if self.slack is None:
            raise ValueError("individual was evaluated without the slack feature")
        return (float(self.node_count), float(self.resource_nodes), self.slack)


class Archive:
    """The elite grid: at most one individual per cell, best fitness wins.

    Equal fitness keeps the incumbent, so an insertion sequence never raises
    any cell's fitness and replays deterministically.
    """

    def __init__(self, config: GridConfig):
        self.config = config
        self._cells: dict[tuple[int, int, int], Individual] = {}

    def insert(self, individual: Individual) -> bool:
        cell = bin_features(individual.features, self.config)
        incumbent = self._cells.get(cell)
        if incumbent is None or incumbent.fitness > individual.fitness:
            self._cells[cell] = individual
            return True
        return False

    @property
    def occupancy(self) -> int:
        return len(self._cells)

    def cells(self) -> tuple[tuple[int, int, int], ...]:
        return tuple(self._cells)

    def __getitem__(self, cell) -> Individual:
        return self._cells[cell]

    def individuals(self) -> tuple[Individual, ...]:
        return tuple(self._cells.values())

    def best(self) -> Individual:
        if not self._cells:
            raise ValueError("archive is empty")
        return min(self._cells.values(), key=lambda ind: (ind.fitness, ind.canonical))

    def coverage(self) -> float:
        """Occupied cells as a percentage of the grid."""
        return 100.0 * len(self._cells) / self.config.total_cells


def coverage(archive: Archive) -> float:
    return archive.coverage()


def unique_fraction(individuals, container_size: int) -> float:
    """Distinct canonical serializations over the container size."""
    if container_size <= 0:
        return 0.0
    return len({ind.canonical for ind in individuals}) / container_size


# ---------------------------------------------------------------------------
# Search loops
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EvolutionConfig:
    population: int = 1024
    generations: int = 25
    crossover_prob: float = 0.8
    mutation_prob: float = 0.2
    tournament_size: int = 7
    init_heights: tuple[int, int] = (2, 5)
    height_limit: int = MAX_HEIGHT


@dataclass(frozen=True)
class TraceRow:
    generation: int
    unique_fraction: float
    best_fitness: float
    occupancy: int


@dataclass(frozen=True)
class MehhResult:
    archive: Archive
    trace: tuple[TraceRow, ...]
    evaluations: int


@dataclass(frozen=True)
class GphhResult:
    population: tuple[Individual, ...]
    trace: tuple[TraceRow, ...]
    evaluations: int


class _Evaluator:
    """Training-set evaluation with memoization on the canonical form."""

    def __init__(self, training: PreparedSet, want_slack: bool):
        self.training = training
        self.want_slack = want_slack
        self._cache: dict[str, tuple[float, float | None]] = {}
        self.evaluations = 0

    def __call__(self, expr: Expr) -> Individual:
        canonical = serialize(expr)
        self.evaluations += 1
        hit = self._cache.get(canonical)
        if hit is None:
            report = evaluate_rule(expr, self.training, want_slack=self.want_slack)
            hit = (report.mean_deviation, report.mean_slack)
            self._cache[canonical] = hit
        return Individual(
            expr=expr,
            canonical=canonical,
            fitness=hit[0],
            node_count=node_count(expr),
            resource_nodes=resource_node_count(expr),
            slack=hit[1],
        )


def _vary(parent_a: Expr, parent_b: Expr, rng: random.Random, config: EvolutionConfig) -> Expr:
    child = parent_a
    if rng.random() < config.crossover_prob:
        child = crossover(parent_a, parent_b, rng, config.height_limit)[0]
    if rng.random() < config.mutation_prob:
        child = mutate(child, rng, config.height_limit)
    return child


def run_mehh(
    config: EvolutionConfig,
    grid: GridConfig,
    training: PreparedSet,
    seed: int,
) -> MehhResult:
    """Quality-diversity search: fill the grid, then breed from occupied cells.

    Generation 0 evaluates `population` random trees; each later generation
    draws parent pairs uniformly from the occupied cells, varies them, and
    inserts the whole batch in order.
    """
    rng = random.Random(seed)
    archive = Archive(grid)
    evaluate = _Evaluator(training, want_slack=True)
    trace: list[TraceRow] = []
    best = math.inf
    for gen in range(config.generations + 1):
        if gen == 0:
            batch = [random_individual(rng, config.init_heights) for _ in range(config.population)]
        else:
            cells = archive.cells()
            batch = []
            for _ in range(config.population):
                pa = archive[cells[rng.randrange(len(cells))]].expr
                pb = archive[cells[rng.randrange(len(cells))]].expr
                batch.append(_vary(pa, pb, rng, config))
        for expr in batch:
            archive.insert(evaluate(expr))
        best = min(best, archive.best().fitness)
        trace.append(
            TraceRow(
                generation=gen,
                unique_fraction=unique_fraction(archive.individuals(), archive.occupancy),
                best_fitness=best,
                occupancy=archive.occupancy,
            )
        )
    return MehhResult(archive=archive, trace=tuple(trace), evaluations=evaluate.evaluations)


def _tournament(population: list[Individual], rng: random.Random, size: int) -> Individual:
    best = population[rng.randrange(len(population))]
    for _ in range(size - 1):
        other = population[rng.randrange(len(population))]
        if other.fitness < best.fitness:
            best = other
    return best


def run_gphh(config: EvolutionConfig, training: PreparedSet, seed: int) -> GphhResult:
    """Generational GP baseline: tournament selection, full replacement."""
    rng = random.Random(seed)
    evaluate = _Evaluator(training, want_slack=False)
    population = [
        evaluate(random_individual(rng, config.init_heights))
        for _ in range(config.population)
    ]
    best = min(ind.fitness for ind in population)
    trace = [
        TraceRow(0, unique_fraction(population, config.population), best, config.population)
    ]
    for gen in range(1, config.generations + 1):
        offspring: list[Expr] = []
        while len(offspring) < config.population:
            pa = _tournament(population, rng, config.tournament_size)
            pb = _tournament(population, rng, config.tournament_size)
            ca, cb = pa.expr, pb.expr
            if rng.random() < config.crossover_prob:
                ca, cb = crossover(ca, cb, rng, config.height_limit)
            if rng.random() < config.mutation_prob:
                ca = mutate(ca, rng, config.height_limit)
            if rng.random() < config.mutation_prob:
                cb = mutate(cb, rng, config.height_limit)
            offspring.extend((ca, cb))
        population = [evaluate(expr) for expr in offspring[: config.population]]
        best = min(best, min(ind.fitness for ind in population))
        trace.append(
            TraceRow(gen, unique_fraction(population, config.population), best, config.population)
        )
    return GphhResult(
        population=tuple(population), trace=tuple(trace), evaluations=evaluate.evaluations
    )


def select_representative(pool, validation: PreparedSet, seed: int = 0) -> Individual:
    """Best individual on the validation set; ties prefer smaller, then
    lexicographically earlier, rules.
    """
    if isinstance(pool, Archive):
        individuals = pool.individuals()
    else:
        individuals = tuple(pool)
    if not individuals:
        raise ValueError("cannot select a representative from an empty pool")
    distinct: dict[str, Individual] = {}
    for ind in individuals:
        distinct.setdefault(ind.canonical, ind)
    scored = [
        (evaluate_rule(ind.expr, validation, seed=seed).mean_deviation, ind)
        for ind in distinct.values()
    ]
    return min(scored, key=lambda pair: (pair[0], pair[1].node_count, pair[1].canonical))[1]


def diversity_trace(result) -> tuple[TraceRow, ...]:
    """Per-generation diversity/fitness trace of a finished run."""
    return result.trace
