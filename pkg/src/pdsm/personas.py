"""Automated play personas: runner, monster killer, treasure collector.

Each persona replans from scratch every turn with a budgeted best-first
search over simulated game states, then commits the first action on the path
to the most promising node found.  Game and search are both deterministic, so
a persona always plays a given level the same way.
"""

from __future__ import annotations

from dataclasses import dataclass
from heapq import heappop, heappush
from typing import NamedTuple, Optional

from .level import Level, Pos, UNREACHABLE
from .sim import (
    DEAD,
    HERO_MAX_HP,
    ONGOING,
    TURN_LIMIT,
    WON,
    Action,
    GameState,
    Species,
    apply_action,
    initial_state,
    legal_actions,
    step,
)

RUNNER = "runner"
MONSTER_KILLER = "monster-killer"
TREASURE_COLLECTOR = "treasure-collector"

DEFAULT_NODE_BUDGET = 500
DEFAULT_C = 45
DEFAULT_K = 1

BUCKETS = 5


@dataclass(frozen=True)
class Persona:
    kind: str
    c: int = DEFAULT_C
    k: int = DEFAULT_K
    node_budget: int = DEFAULT_NODE_BUDGET
    # Cost-sign variant for the runner: reward long paths instead of short
    # ones.  Kept only for comparison runs; the default plays sensibly.
    negative_steps: bool = False

    def __post_init__(self):
        if self.kind not in (RUNNER, MONSTER_KILLER, TREASURE_COLLECTOR):
            raise ValueError(f"unknown persona kind {self.kind!r}")
        if self.c <= 0 or self.k < 0 or self.node_budget < 1:
            raise ValueError("persona constants out of range")


def default_personas(c: int = DEFAULT_C, k: int = DEFAULT_K,
                     node_budget: int = DEFAULT_NODE_BUDGET,
                     negative_steps: bool = False) -> tuple[Persona, Persona, Persona]:
    """The three personas in behaviour-characteristic order (R, TC, MK)."""
    return (
        Persona(RUNNER, c, k, node_budget, negative_steps),
        Persona(TREASURE_COLLECTOR, c, k, node_budget),
        Persona(MONSTER_KILLER, c, k, node_budget),
    )


class PlayResult(NamedTuple):
    persona: str
    won: bool
    remaining_hp: int  # 0 unless the level was completed
    turns: int
    trace: tuple[Action, ...]
    kills: int
    treasures_collected: int


class PlanNode(NamedTuple):
    state: GameState
    g: int
    h: int
    f: int
    steps: int
    parent: Optional["PlanNode"]
    action: Optional[Action]


def _killable(m) -> bool:
    # The minitaur cannot die, so it never counts as an objective.
    return m.species != Species.MINITAUR


def heuristic(persona: Persona, state: GameState) -> int:
    """Distance to the persona's current objective (its exit once no
    objectives remain, or none were ever reachable)."""
    geo = state.level.geo
    hero = state.hero
    dist = geo.dist_from((hero.x, hero.y))
    kind = persona.kind
    if kind == MONSTER_KILLER:
        best = None
        for m in state.monsters:
            if _killable(m):
                d = dist.get((m.x, m.y))
                if d is not None and (best is None or d < best):
                    best = d
        if best is not None:
            return best
    elif kind == TREASURE_COLLECTOR:
        best = None
        for t in state.treasures:
            d = dist.get(t)
            if d is not None and (best is None or d < best):
                best = d
        if best is not None:
            return best
    d = dist.get(geo.exit)
    return d if d is not None else UNREACHABLE


def cost(persona: Persona, state: GameState, steps: int) -> int:
    """State cost: path length for the runner, weighted remaining objectives
    plus a death penalty for the other two."""
    kind = persona.kind
    if kind == RUNNER:
        return -steps if persona.negative_steps else steps
    dead = 1 if state.outcome == DEAD else 0
    if kind == MONSTER_KILLER:
        n = sum(1 for m in state.monsters if _killable(m))
    else:
        n = len(state.treasures)
    return persona.c * n + persona.k * dead


def _is_goal(persona: Persona, state: GameState, hero_comp: int) -> bool:
    """A node the search may stop at: a win, with every objective the hero
    could ever reach already dealt with.  Objectives sealed in other wall
    components can never be completed, so they do not block the goal."""
    if state.outcome != WON:
        return False
    kind = persona.kind
    comp = state.level.geo.component
    if kind == MONSTER_KILLER:
        return not any(
            _killable(m) and comp.get((m.x, m.y)) == hero_comp for m in state.monsters
        )
    if kind == TREASURE_COLLECTOR:
        return not any(comp.get(t) == hero_comp for t in state.treasures)
    return True


def plan_action(persona: Persona, state: GameState) -> Action:
    """Pick the hero's next action by budgeted best-first search.

    Children are expanded in (f, h, creation order) order until the node
    budget is spent or a goal node comes up for expansion; the returned
    action is the first move on the path to the best node ever created
    (goal nodes outrank everything else).
    """
    root_actions = legal_actions(state)
    if not root_actions:
        raise ValueError("no legal actions to plan from")
    geo = state.level.geo
    hero_comp = geo.component[(state.hero.x, state.hero.y)]

    g0 = cost(persona, state, 0)
    h0 = heuristic(persona, state)
    root = PlanNode(state, g0, h0, g0 + h0, 0, None, None)
    heap = [(root.f, root.h, 0, root)]
    seen = {state.key()}
    created = 0
    budget = persona.node_budget
    best = None
    best_key = None
    out_of_budget = False

    while heap and not out_of_budget:
        _, _, _, node = heappop(heap)
        nstate = node.state
        if _is_goal(persona, nstate, hero_comp):
            break
        if nstate.outcome != ONGOING:
            continue
        steps = node.steps + 1
        for act in (root_actions if node is root else legal_actions(nstate)):
            child_state = apply_action(nstate, act)
            created += 1
            g = cost(persona, child_state, steps)
            h = heuristic(persona, child_state)
            child = PlanNode(child_state, g, h, g + h, steps, node, act)
            goal = _is_goal(persona, child_state, hero_comp)
            key = (0 if goal else 1, child.f, h, created)
            if best_key is None or key < best_key:
                best_key = key
                best = child
            skey = child_state.key()
            if skey not in seen:
                seen.add(skey)
                heappush(heap, (child.f, h, created, child))
            if created >= budget:
                out_of_budget = True
                break

    node = best
    while node.parent is not root:
        node = node.parent
    return node.action


def play_level(persona: Persona, level: Level, starting_hp: int = HERO_MAX_HP) -> PlayResult:
    """Play a level until it is won, lost, or the turn cap fires.

    A run that is still going after TURN_LIMIT turns counts as a death.
    Nothing in the game or the planner reads the turn counter, so a repeated
    state proves the run is locked in a cycle; the remaining turns are then
    the cycle's actions repeated, which lets long futile runs finish without
    replanning every lap.
    """
    state = initial_state(level, starting_hp)
    geo = level.geo
    if geo.component.get(geo.exit) != geo.component.get(geo.hero_start):
        raise ValueError("level is unplayable: exit not reachable from hero start")
    trace: list = []
    seen: dict = {}
    turns = 0
    while state.outcome == ONGOING and turns < TURN_LIMIT:
        lk = state.loop_key()
        first = seen.get(lk)
        if first is not None:
            cycle = trace[first:]
            remaining = TURN_LIMIT - turns
            full, part = divmod(remaining, len(cycle))
            trace.extend(cycle * full + cycle[:part])
            turns = TURN_LIMIT
            break
        seen[lk] = len(trace)
        if not legal_actions(state):
            # Entombed (e.g. sealed in by stunned minitaurs): the run cannot
            # continue, which counts as a death.
            break
        act = plan_action(persona, state)
        state = apply_action(state, act)
        trace.append(act)
        turns = state.turn
    won = state.outcome == WON
    return PlayResult(
        persona=persona.kind,
        won=won,
        remaining_hp=state.hero.hp if won else 0,
        turns=turns,
        trace=tuple(trace),
        kills=state.kills,
        treasures_collected=state.score,
    )


def replay(level: Level, trace, starting_hp: int = HERO_MAX_HP) -> GameState:
    """Re-run a recorded action sequence through the simulator."""
    state = initial_state(level, starting_hp)
    for act in trace:
        state = step(state, act)
    return state


def hp_bucket(hp: int, buckets: int = BUCKETS) -> int:
    """Map remaining health 0..10 onto 0..buckets-1."""
    return min(hp // (HERO_MAX_HP // buckets), buckets - 1)


def behavior_characteristic(level: Level, personas=None, starting_hp: int = HERO_MAX_HP,
                            buckets: int = BUCKETS) -> tuple[int, int, int]:
    """Bucketed remaining health per persona, ordered (runner, treasure
    collector, monster killer)."""
    if personas is None:
        personas = default_personas()
    results = [play_level(p, level, starting_hp) for p in personas]
    return tuple(hp_bucket(r.remaining_hp, buckets) for r in results)
