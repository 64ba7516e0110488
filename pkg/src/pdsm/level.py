"""Static level geometry: tile kinds, the level grid, sight and path queries.

The level grid never changes during play, so everything derived from it
(adjacency, line of sight, shortest-path distances, connectivity) is cached
on the level and shared by all game states simulated on it.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import IntEnum
from functools import cached_property

Pos = tuple[int, int]

UNREACHABLE = 10**6


class Tile(IntEnum):
    EMPTY = 0
    WALL = 1
    HERO = 2
    EXIT = 3
    POTION = 4
    TREASURE = 5
    TRAP = 6
    PORTAL = 7
    GOBLIN = 8
    WIZARD = 9
    BLOB = 10
    OGRE = 11
    MINITAUR = 12


MONSTER_TILES = (Tile.GOBLIN, Tile.WIZARD, Tile.BLOB, Tile.OGRE, Tile.MINITAUR)

# Cardinal directions in the canonical tie-break order.
DIRS = (("N", 0, -1), ("S", 0, 1), ("E", 1, 0), ("W", -1, 0))
DIR_DELTAS = {name: (dx, dy) for name, dx, dy in DIRS}


@dataclass(frozen=True)
class Level:
    """A rectangular tile grid, stored row-major."""

    width: int
    height: int
    grid: tuple[Tile, ...]

    def __post_init__(self):
        if len(self.grid) != self.width * self.height:
            raise ValueError("grid size does not match width*height")

    def __reduce__(self):
        # Drop the cached geometry when pickling (workers rebuild it).
        return (Level, (self.width, self.height, self.grid))

    def tile(self, x: int, y: int) -> Tile:
        return self.grid[y * self.width + x]

    def in_bounds(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height

    def positions(self, kind: Tile) -> list[Pos]:
        w = self.width
        return [(i % w, i // w) for i, t in enumerate(self.grid) if t is kind]

    def count(self, kind: Tile) -> int:
        return sum(1 for t in self.grid if t is kind)

    def replace(self, changes: dict[Pos, Tile]) -> "Level":
        cells = list(self.grid)
        for (x, y), kind in changes.items():
            cells[y * self.width + x] = kind
        return Level(self.width, self.height, tuple(cells))

    @cached_property
    def geo(self) -> "Geometry":
        return Geometry(self)


class Geometry:
    """Derived movement data for one level; built once, queried constantly."""

    def __init__(self, level: Level):
        w, h, grid = level.width, level.height, level.grid
        self.level = level
        walls = set()
        heroes: list[Pos] = []
        exits: list[Pos] = []
        portals: list[Pos] = []
        traps = set()
        for i, t in enumerate(grid):
            pos = (i % w, i // w)
            if t is Tile.WALL:
                walls.add(pos)
            elif t is Tile.HERO:
                heroes.append(pos)
            elif t is Tile.EXIT:
                exits.append(pos)
            elif t is Tile.PORTAL:
                portals.append(pos)
            elif t is Tile.TRAP:
                traps.add(pos)
        self.walls = walls
        self.traps = traps
        self.hero_start: Pos | None = heroes[0] if len(heroes) == 1 else None
        self.exit: Pos | None = exits[0] if len(exits) == 1 else None
        # Portal hops only exist for a proper pair; repair guarantees 0 or 2.
        if len(portals) == 2:
            a, b = portals
            self.portal_jump = {a: b, b: a}
        else:
            self.portal_jump = {}

        # steps[pos]: the four cardinal moves as (direction, entered tile),
        # walls removed, in N/S/E/W order.
        steps: dict[Pos, tuple[tuple[str, Pos], ...]] = {}
        # graph[pos]: neighbors for path/connectivity queries; a portal tile
        # additionally connects to its twin at cost 1.
        graph: dict[Pos, tuple[Pos, ...]] = {}
        for y in range(h):
            for x in range(w):
                pos = (x, y)
                if pos in walls:
                    continue
                out = []
                for name, dx, dy in DIRS:
                    nx, ny = x + dx, y + dy
                    if 0 <= nx < w and 0 <= ny < h and (nx, ny) not in walls:
                        out.append((name, (nx, ny)))
                steps[pos] = tuple(out)
                adj = [p for _, p in out]
                twin = self.portal_jump.get(pos)
                if twin is not None:
                    adj.append(twin)
                graph[pos] = tuple(adj)
        self.steps = steps
        self.graph = graph

        # Connected components over the movement graph (portal hops count).
        comp: dict[Pos, int] = {}
        cid = 0
        for start in graph:
            if start in comp:
                continue
            comp[start] = cid
            queue = deque([start])
            while queue:
                cur = queue.popleft()
                for nb in graph[cur]:
                    if nb not in comp:
                        comp[nb] = cid
                        queue.append(nb)
            cid += 1
        self.component = comp

        self._dist: dict[Pos, dict[Pos, int]] = {}
        self._los: dict[tuple[Pos, Pos], bool] = {}

    def dist_from(self, src: Pos) -> dict[Pos, int]:
        """Shortest-path tile distances from src (breadth-first, cached)."""
        cached = self._dist.get(src)
        if cached is not None:
            return cached
        dist = {src: 0}
        queue = deque([src])
        graph = self.graph
        while queue:
            cur = queue.popleft()
            d = dist[cur] + 1
            for nb in graph[cur]:
                if nb not in dist:
                    dist[nb] = d
                    queue.append(nb)
        self._dist[src] = dist
        return dist

    def sees(self, a: Pos, b: Pos) -> bool:
        """Line of sight between two tiles (cached, symmetric)."""
        key = (a, b) if a <= b else (b, a)
        cached = self._los.get(key)
        if cached is None:
            cached = _ray_clear(self.walls, a, b)
            self._los[key] = cached
        return cached


def ray_tiles(a: Pos, b: Pos) -> list[Pos]:
    """Every tile whose closed unit square the segment between the two tile
    centers touches (a square counts even if only its corner is grazed).

    Integer-exact: centers sit at integer coordinates and square borders at
    half-integers, so border crossings are compared by cross-multiplication
    and a corner is hit only when an x- and a y-crossing coincide.
    """
    ax, ay = a
    bx, by = b
    tiles = [(ax, ay)]
    dx = bx - ax
    dy = by - ay
    if dx == 0 and dy == 0:
        return tiles
    sx = 1 if dx > 0 else -1
    sy = 1 if dy > 0 else -1
    if dx == 0:
        tiles.extend((ax, y) for y in range(ay + sy, by + sy, sy))
        return tiles
    if dy == 0:
        tiles.extend((x, ay) for x in range(ax + sx, bx + sx, sx))
        return tiles
    adx = abs(dx)
    ady = abs(dy)
    cx, cy = ax, ay
    kx = ky = 1
    while cx != bx or cy != by:
        # k-th x border crossing at parameter (2k-1)/(2*adx); likewise for y.
        tx = (2 * kx - 1) * ady
        ty = (2 * ky - 1) * adx
        if tx < ty:
            cx += sx
            kx += 1
        elif tx > ty:
            cy += sy
            ky += 1
        else:
            # Exact corner hit: all four squares around the corner are touched.
            tiles.append((cx + sx, cy))
            tiles.append((cx, cy + sy))
            cx += sx
            cy += sy
            kx += 1
            ky += 1
        tiles.append((cx, cy))
    return tiles


def _ray_clear(walls: set[Pos], a: Pos, b: Pos) -> bool:
    for t in ray_tiles(a, b):
        if t in walls and t != a and t != b:
            return False
    return True


def line_of_sight(level: Level, a: Pos, b: Pos) -> bool:
    """True when no wall interrupts the ray between the two tiles.

    Endpoints are never counted as blockers.
    """
    if not (level.in_bounds(*a) and level.in_bounds(*b)):
        raise ValueError("line_of_sight endpoints must lie inside the grid")
    return level.geo.sees(a, b)


def reachable_tiles(level: Level) -> tuple[int, int]:
    """(tiles reachable from the hero start, all non-wall tiles)."""
    geo = level.geo
    if geo.hero_start is None:
        raise ValueError("level must have exactly one hero start")
    total = len(geo.graph)
    hero_comp = geo.component[geo.hero_start]
    reached = sum(1 for c in geo.component.values() if c == hero_comp)
    return reached, total


def path_distance(level: Level, a: Pos, b: Pos) -> int | None:
    """Shortest cardinal-move path length over non-wall tiles, or None.

    A portal pair is traversable as a single cost-1 hop.
    """
    geo = level.geo
    if a in geo.walls or b in geo.walls:
        raise ValueError("path endpoints must be non-wall tiles")
    return geo.dist_from(a).get(b)
