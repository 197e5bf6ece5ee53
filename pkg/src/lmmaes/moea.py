"""Indicator-based multi-objective engine for two objectives.

The engine maintains a population of mu independent (1+1) strategy
instances.  Each generation clones parents, samples one offspring per
selected parent, ranks parents and offspring by non-dominated sorting with
hypervolume contributions as the secondary criterion, feeds the success
signal (offspring selected among the best mu) back into the step-size and
metric updates of both parent and offspring, and keeps the best mu.

The generational loop is strategy-agnostic: it only calls ``clone``,
``sample`` and ``update_on_success`` on the individuals' strategy objects,
so the low-rank and full-rank variants share every line of engine code.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .strategies import CholeskyEs, ElitistLmmaEs, NonFiniteObjectiveError


def dominates(a, b) -> bool:
    """Weak dominance with strict improvement somewhere (minimization)."""
    return a[0] <= b[0] and a[1] <= b[1] and (a[0] < b[0] or a[1] < b[1])


def nondominated_sort(points) -> np.ndarray:
    """Non-dominance ranks: 0 for the non-dominated set, then layer by layer."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 2)
    n = len(pts)
    ranks = np.full(n, -1, dtype=int)
    if n == 0:
        return ranks
    weakly = (pts[:, None, :] <= pts[None, :, :]).all(axis=2)
    strictly = (pts[:, None, :] < pts[None, :, :]).any(axis=2)
    dom = weakly & strictly  # dom[i, j]: i dominates j
    active = np.ones(n, dtype=bool)
    rank = 0
    while active.any():
        dominated = (dom & active[:, None]).any(axis=0)
        front = active & ~dominated
        ranks[front] = rank
        active &= ~front
        rank += 1
    return ranks


def hypervolume_2d(points, reference) -> float:
    """Area dominated by ``points`` within the box below ``reference``.

    Dominated points and points outside the reference box contribute
    nothing.  Sort-and-sweep, O(N log N).
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if pts.size == 0:
        return 0.0
    rx, ry = float(reference[0]), float(reference[1])
    pts = pts[(pts[:, 0] < rx) & (pts[:, 1] < ry)]
    if len(pts) == 0:
        return 0.0
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    total = 0.0
    best_y = ry
    for x, y in pts[order]:
        if y < best_y:
            total += (rx - x) * (best_y - y)
            best_y = y
    return total


def hv_contributions_2d(points, reference) -> np.ndarray:
    """Per-point hypervolume loss when that point is removed.

    Exact leave-one-out values for arbitrary inputs: dominated points,
    duplicates and points outside the reference box all get 0 (removing
    them changes nothing), and a point backed up by points it dominates
    only gets the area those backups do not re-cover.  For a mutually
    non-dominated front this reduces to the sorted-neighbor rectangles in
    O(N log N).
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    out = np.zeros(len(pts))
    if pts.size == 0:
        return out
    rx, ry = float(reference[0]), float(reference[1])
    inside = np.flatnonzero((pts[:, 0] < rx) & (pts[:, 1] < ry))
    if inside.size == 0:
        return out
    sub = pts[inside]
    order = np.lexsort((sub[:, 1], sub[:, 0]))
    sorted_idx = inside[order]
    xs = pts[sorted_idx, 0]
    ys = pts[sorted_idx, 1]

    stair: list[int] = []  # positions into the sorted arrays
    best_y = ry
    for pos in range(len(sorted_idx)):
        if ys[pos] < best_y:
            stair.append(pos)
            best_y = ys[pos]
    stair_x = xs[stair]
    stair_y = ys[stair]
    next_x = np.append(stair_x[1:], rx)
    prev_y = np.concatenate(([ry], stair_y[:-1]))

    # points not on the staircase back up the cell of the staircase point
    # that dominates them; collect them per cell
    backups: dict[int, list[tuple[float, float]]] = {}
    on_stair = set(stair)
    for pos in range(len(sorted_idx)):
        if pos in on_stair:
            continue
        cell = int(np.searchsorted(stair_x, xs[pos], side="right")) - 1
        if ys[pos] < prev_y[cell]:
            backups.setdefault(cell, []).append((xs[pos], ys[pos]))
    for cell, pos in enumerate(stair):
        rect = (next_x[cell] - stair_x[cell]) * (prev_y[cell] - stair_y[cell])
        covered = backups.get(cell)
        if covered:
            rect -= hypervolume_2d(covered, (next_x[cell], prev_y[cell]))
        out[sorted_idx[pos]] = rect
    return out


# ---------------------------------------------------------------------------
# populations
# ---------------------------------------------------------------------------

@dataclass
class Individual:
    """One member: a (1+1) strategy instance plus its objective values."""

    strategy: object
    objectives: tuple[float, float]
    id: int


@dataclass
class RankedPopulation:
    """Members with non-dominance ranks, contributions and a total order.

    The order sorts by rank ascending, contribution descending, then by
    ascending objective sum and ascending id (keeps zero-contribution
    members -- duplicates or points outside the reference box -- pressed
    toward the region of interest, deterministically).
    """

    members: list[Individual]
    ranks: np.ndarray
    contributions: np.ndarray
    order: list[int]

    def best(self, count: int) -> list[Individual]:
        return [self.members[i] for i in self.order[:count]]


def rank_population(members, reference) -> RankedPopulation:
    members = list(members)
    if not members:
        raise ValueError("population must not be empty")
    objs = np.array([m.objectives for m in members], dtype=float)
    ranks = nondominated_sort(objs)
    contributions = np.zeros(len(members))
    for rank in np.unique(ranks):
        idx = np.flatnonzero(ranks == rank)
        contributions[idx] = hv_contributions_2d(objs[idx], reference)
    sums = objs.sum(axis=1)
    order = sorted(
        range(len(members)),
        key=lambda i: (ranks[i], -contributions[i], sums[i], members[i].id),
    )
    return RankedPopulation(members, ranks, contributions, order)


# ---------------------------------------------------------------------------
# the generational engine
# ---------------------------------------------------------------------------

class SelectionScheme(enum.Enum):
    PLUS_PLUS = "plus-plus"      # (mu + mu): one offspring per parent
    STEADY_STATE = "steady-state"  # (mu + 1): one offspring per generation


class StrategyKind(enum.Enum):
    LOW_RANK = "low-rank"
    FULL_RANK = "full-rank"


@dataclass(frozen=True)
class EngineConfig:
    mu: int
    scheme: SelectionScheme = SelectionScheme.PLUS_PLUS
    reference_point: tuple[float, float] = (10.0, 10.0)
    strategy: StrategyKind = StrategyKind.LOW_RANK

    def __post_init__(self) -> None:
        if self.mu < 2:
            raise ValueError("population size mu must be at least 2")


def make_strategy(kind: StrategyKind, x0, sigma0: float = 1.0):
    if kind is StrategyKind.LOW_RANK:
        return ElitistLmmaEs(x0, sigma0)
    if kind is StrategyKind.FULL_RANK:
        return CholeskyEs(x0, sigma0)
    raise ValueError(f"unknown strategy kind {kind!r}")


def _evaluate_pair(problem, x) -> tuple[float, float]:
    f1, f2 = problem.evaluate(x)
    if not (math.isfinite(f1) and math.isfinite(f2)):
        raise NonFiniteObjectiveError("objective returned a non-finite value")
    return float(f1), float(f2)


def init_population(problem, config: EngineConfig, rng: np.random.Generator) -> list[Individual]:
    """mu fresh individuals with standard-normal starting points, sigma 1."""
    population = []
    for i in range(config.mu):
        x0 = rng.standard_normal(problem.dimension)
        strategy = make_strategy(config.strategy, x0)
        population.append(Individual(strategy, _evaluate_pair(problem, x0), i))
    return population


def engine_generation(
    population: list[Individual],
    config: EngineConfig,
    problem,
    rng: np.random.Generator,
) -> list[Individual]:
    """One elitist generation; returns the mu survivors in ranking order.

    All objective evaluations happen before any state is mutated, so a
    failing evaluation leaves the population untouched.
    """
    mu = config.mu
    if len(population) != mu:
        raise ValueError(f"expected a population of size {mu}, got {len(population)}")
    if config.scheme is SelectionScheme.PLUS_PLUS:
        parent_indices = list(range(mu))
    else:
        parent_indices = [int(rng.integers(mu))]

    next_id = max(ind.id for ind in population) + 1
    offspring: list[Individual] = []
    draws: list[np.ndarray] = []
    for j, pi in enumerate(parent_indices):
        child = population[pi].strategy.clone()
        y, z = child.sample(rng)
        child.x = y
        child.fitness = math.nan
        offspring.append(Individual(child, _evaluate_pair(problem, y), next_id + j))
        draws.append(z)

    combined = list(population) + offspring
    ranked = rank_population(combined, config.reference_point)
    selected = set(ranked.order[:mu])
    for j, pi in enumerate(parent_indices):
        success = (mu + j) in selected
        population[pi].strategy.update_on_success(draws[j], success)
        offspring[j].strategy.update_on_success(draws[j], success)
    return ranked.best(mu)
