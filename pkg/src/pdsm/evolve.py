"""Constrained MAP-Elites over dungeon levels.

The archive is a bucket^3 grid keyed by the behaviour characteristic.  Each
cell keeps a bounded feasible population (fully connected levels, ranked by
fitness) and a bounded infeasible one (ranked by connectivity); the fittest
feasible member of a cell is its elite.  Fitness rewards simplicity: the
negated entropy of the tile mix, so an emptier level scores higher.
"""

from __future__ import annotations

import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .config import ExperimentConfig
from .level import Level, Tile, path_distance, reachable_tiles
from .personas import PlayResult, behavior_characteristic, default_personas, hp_bucket, play_level

# Kinds drawn when seeding a board: everything except empty, wall and exit
# (repair is responsible for the exit).
INIT_KINDS = (
    Tile.HERO, Tile.POTION, Tile.TREASURE, Tile.TRAP, Tile.PORTAL,
    Tile.GOBLIN, Tile.WIZARD, Tile.BLOB, Tile.OGRE, Tile.MINITAUR,
)
# Kinds a mutating tile may turn into besides empty.
MUTATION_KINDS = (Tile.WALL,) + INIT_KINDS


@dataclass
class Chromosome:
    level: Level
    fitness: float
    constraint: float
    bc: tuple[int, int, int]
    persona_hp: tuple[int, int, int]  # remaining hp in (R, TC, MK) order
    plays: Optional[tuple[PlayResult, PlayResult, PlayResult]] = None


@dataclass
class Cell:
    feasible: list[Chromosome] = field(default_factory=list)
    infeasible: list[Chromosome] = field(default_factory=list)

    @property
    def elite(self) -> Optional[Chromosome]:
        if not self.feasible:
            return None
        return max(self.feasible, key=lambda ch: ch.fitness)


class EliteArchive:
    """The behaviour grid.  Cells appear lazily as chromosomes arrive."""

    def __init__(self, cell_capacity: int = 5):
        self.cell_capacity = cell_capacity
        self.cells: dict[tuple[int, int, int], Cell] = {}

    def __len__(self):
        return len(self.cells)

    def sorted_keys(self):
        return sorted(self.cells)

    def filled_keys(self):
        return [k for k in self.sorted_keys() if self.cells[k].feasible]

    def filled_count(self) -> int:
        return sum(1 for c in self.cells.values() if c.feasible)

    def elites(self) -> list[Chromosome]:
        return [self.cells[k].elite for k in self.filled_keys()]

    def insert(self, ch: Chromosome):
        """Route a chromosome to its cell and apply the replacement rules.

        A feasible arrival that beats the weakest feasible member displaces
        it into the infeasible list rather than deleting it; a feasible
        arrival that does not gets the same second chance itself.
        """
        cell = self.cells.setdefault(ch.bc, Cell())
        if ch.constraint >= 1.0:
            feas = cell.feasible
            if len(feas) < self.cell_capacity:
                feas.append(ch)
                return
            least = min(feas, key=lambda c: c.fitness)
            if ch.fitness > least.fitness:
                feas.remove(least)
                feas.append(ch)
                self._insert_infeasible(cell, least)
            else:
                self._insert_infeasible(cell, ch)
        else:
            self._insert_infeasible(cell, ch)

    def _insert_infeasible(self, cell: Cell, ch: Chromosome):
        infeas = cell.infeasible
        if len(infeas) < self.cell_capacity:
            infeas.append(ch)
            return
        least = min(infeas, key=lambda c: (c.constraint, c.fitness))
        if (ch.constraint, ch.fitness) > (least.constraint, least.fitness):
            infeas.remove(least)
            infeas.append(ch)

    def check_invariants(self):
        """Sweep the structural rules; raises AssertionError on violation."""
        for key, cell in self.cells.items():
            assert len(cell.feasible) <= self.cell_capacity
            assert len(cell.infeasible) <= self.cell_capacity
            for ch in cell.feasible:
                assert ch.constraint >= 1.0
                assert ch.bc == key
            for ch in cell.infeasible:
                assert ch.bc == key
            if cell.feasible:
                elite = cell.elite
                assert all(elite.fitness >= c.fitness for c in cell.feasible)


def random_interior(config: ExperimentConfig, rng: random.Random) -> Level:
    """A bordered board with every interior tile drawn independently: empty,
    wall, or uniformly one of the ten object kinds.  Not yet repaired."""
    w, h = config.level_width, config.level_height
    empty_rate = config.empty_init_rate
    wall_cut = empty_rate + config.wall_init_rate
    cells = []
    for y in range(h):
        for x in range(w):
            if x == 0 or y == 0 or x == w - 1 or y == h - 1:
                cells.append(Tile.WALL)
                continue
            r = rng.random()
            if r < empty_rate:
                cells.append(Tile.EMPTY)
            elif r < wall_cut:
                cells.append(Tile.WALL)
            else:
                cells.append(INIT_KINDS[rng.randrange(len(INIT_KINDS))])
    return Level(w, h, tuple(cells))


def repair(level: Level, rng: random.Random) -> Level:
    """Normalize special tile counts: one hero start, one exit, and either
    zero or two portals.  Victims and placements are drawn uniformly."""
    w, h = level.width, level.height
    cells = list(level.grid)

    def positions(kind):
        return [(i % w, i // w) for i, t in enumerate(cells) if t is kind]

    def interior(pred):
        out = []
        for y in range(1, h - 1):
            for x in range(1, w - 1):
                if pred(cells[y * w + x]):
                    out.append((x, y))
        return out

    def set_tile(pos, kind):
        cells[pos[1] * w + pos[0]] = kind

    def enforce_single(kind):
        found = positions(kind)
        if len(found) > 1:
            keep = found[rng.randrange(len(found))]
            for pos in found:
                if pos != keep:
                    set_tile(pos, Tile.EMPTY)
        elif not found:
            empties = interior(lambda t: t is Tile.EMPTY)
            if empties:
                set_tile(empties[rng.randrange(len(empties))], kind)
            else:
                # Board is packed solid: sacrifice a random interior wall.
                spots = interior(lambda t: t is Tile.WALL)
                set_tile(spots[rng.randrange(len(spots))], kind)

    enforce_single(Tile.HERO)
    enforce_single(Tile.EXIT)

    portals = positions(Tile.PORTAL)
    if len(portals) == 1:
        set_tile(portals[0], Tile.EMPTY)
    elif len(portals) > 2:
        keep = set(rng.sample(range(len(portals)), 2))
        for i, pos in enumerate(portals):
            if i not in keep:
                set_tile(pos, Tile.EMPTY)

    return Level(w, h, tuple(cells))


def random_level(config: ExperimentConfig, rng: random.Random,
                 repair_rng: random.Random) -> Level:
    return repair(random_interior(config, rng), repair_rng)


def mutate_interior(level: Level, config: ExperimentConfig, rng: random.Random) -> Level:
    """Give every non-border tile its independent chance to change."""
    w, h = level.width, level.height
    rate = config.mutation_rate
    empty_rate = config.empty_mut_rate
    cells = list(level.grid)
    for y in range(1, h - 1):
        base = y * w
        for x in range(1, w - 1):
            if rng.random() < rate:
                if rng.random() < empty_rate:
                    cells[base + x] = Tile.EMPTY
                else:
                    cells[base + x] = MUTATION_KINDS[rng.randrange(len(MUTATION_KINDS))]
    return Level(w, h, tuple(cells))


def is_playable(level: Level) -> bool:
    geo = level.geo
    if geo.hero_start is None or geo.exit is None:
        return False
    return geo.component.get(geo.exit) == geo.component.get(geo.hero_start)


def mutate(level: Level, config: ExperimentConfig, rng: random.Random,
           repair_rng: random.Random) -> Optional[Level]:
    """Mutated and repaired copy, or None when the child's exit ends up
    unreachable (such children are dropped, shrinking the generation)."""
    child = repair(mutate_interior(level, config, rng), repair_rng)
    if not is_playable(child):
        return None
    return child


def constraint(level: Level) -> float:
    """Connectivity ratio: reachable non-wall tiles over all non-wall tiles."""
    reached, total = reachable_tiles(level)
    return reached / total


def fitness(level: Level) -> float:
    """Negated entropy of the tile-kind mix; 0 is best (a one-kind board)."""
    counts: dict[Tile, int] = {}
    for t in level.grid:
        counts[t] = counts.get(t, 0) + 1
    total = len(level.grid)
    return sum(c / total * math.log(c / total) for c in counts.values())


def evaluate(level: Level, config: ExperimentConfig) -> Optional[Chromosome]:
    """Score one level; None when it cannot be played to the exit."""
    if not is_playable(level):
        return None
    personas = default_personas(config.c, config.k,
                                negative_steps=config.runner_negative_steps)
    plays = tuple(play_level(p, level, config.starting_hp) for p in personas)
    hp = tuple(r.remaining_hp for r in plays)
    bc = tuple(hp_bucket(v, config.bucket) for v in hp)
    return Chromosome(
        level=level,
        fitness=fitness(level),
        constraint=constraint(level),
        bc=bc,
        persona_hp=hp,
        plays=plays,
    )


_POOL_WEIGHTS = ("elite", "feasible", "infeasible")


def selection_pools(archive: EliteArchive) -> dict[str, list[Chromosome]]:
    elites = []
    feasible = []
    infeasible = []
    for key in archive.sorted_keys():
        cell = archive.cells[key]
        if cell.feasible:
            elites.append(cell.elite)
        feasible.extend(cell.feasible)
        infeasible.extend(cell.infeasible)
    return {"elite": elites, "feasible": feasible, "infeasible": infeasible}


def select_with_pool(archive: EliteArchive, rng: random.Random,
                     config: ExperimentConfig) -> tuple[str, Chromosome]:
    """Hierarchical pool choice (elites first, then feasible, then
    infeasible), then a uniform member of the chosen pool.  Empty pools
    drop out and the remaining weights renormalize."""
    pools = selection_pools(archive)
    e, f = config.elite_prob, config.feas_prob
    if config.flat_selection:
        # Alternative reading: the raw probabilities renormalized flat, with
        # the (negative) infeasible remainder clamped to zero.
        weights = {"elite": e, "feasible": f, "infeasible": max(0.0, 1.0 - e - f)}
    else:
        weights = {"elite": e, "feasible": (1.0 - e) * f,
                   "infeasible": (1.0 - e) * (1.0 - f)}
    live = [(name, weights[name]) for name in _POOL_WEIGHTS if pools[name]]
    if not live:
        raise ValueError("cannot select from an empty archive")
    total = sum(w for _, w in live)
    r = rng.random() * total
    acc = 0.0
    chosen = live[-1][0]
    for name, w in live:
        acc += w
        if r < acc:
            chosen = name
            break
    pool = pools[chosen]
    return chosen, pool[rng.randrange(len(pool))]


def select(archive: EliteArchive, rng: random.Random,
           config: ExperimentConfig) -> Chromosome:
    return select_with_pool(archive, rng, config)[1]


class IterationLog(NamedTuple):
    iteration: int
    filled_cells: int
    mean_elite_fitness: Optional[float]
    rejections: int
    evaluated: int


class RunResult(NamedTuple):
    archive: EliteArchive
    log: list[IterationLog]


def _rng_stream(seed: int, label: str) -> random.Random:
    # String seeding is stable across processes and platforms.
    return random.Random(f"{seed}/{label}")


def _evaluate_batch(levels, config, executor):
    if executor is None:
        return [evaluate(lv, config) for lv in levels]
    return list(executor.map(_evaluate_star, [(lv, config) for lv in levels], chunksize=4))


def _evaluate_star(args):
    return evaluate(*args)


def run(config: ExperimentConfig, jobs: int = 1, progress=None) -> RunResult:
    """One full evolution: seed a population, then iterate evaluate /
    insert / breed.  Deterministic for a fixed config (including the seed),
    regardless of the worker count."""
    seed = config.rng_seed
    rng_init = _rng_stream(seed, "init")
    rng_repair = _rng_stream(seed, "repair")
    rng_mut = _rng_stream(seed, "mutation")
    rng_sel = _rng_stream(seed, "selection")

    archive = EliteArchive(config.map_cell_size)
    log: list[IterationLog] = []
    executor = ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        population = [random_level(config, rng_init, rng_repair)
                      for _ in range(config.pop_size)]
        rejected = 0
        for iteration in range(config.iterations + 1):
            if iteration > 0:
                population = []
                rejected = 0
                if archive.cells:
                    for _ in range(config.pop_size):
                        parent = select(archive, rng_sel, config)
                        child = mutate(parent.level, config, rng_mut, rng_repair)
                        if child is None:
                            rejected += 1
                        else:
                            population.append(child)
                else:
                    rejected = config.pop_size
            evaluated = _evaluate_batch(population, config, executor)
            kept = [ch for ch in evaluated if ch is not None]
            rejected += len(evaluated) - len(kept)
            for ch in kept:
                archive.insert(ch)
            elites = archive.elites()
            mean_fit = sum(c.fitness for c in elites) / len(elites) if elites else None
            entry = IterationLog(iteration, len(elites), mean_fit, rejected, len(kept))
            log.append(entry)
            if progress is not None:
                progress(entry)
    finally:
        if executor is not None:
            executor.shutdown()
    return RunResult(archive, log)


def exit_path_length(level: Level) -> Optional[int]:
    geo = level.geo
    if geo.hero_start is None or geo.exit is None:
        return None
    return path_distance(level, geo.hero_start, geo.exit)
