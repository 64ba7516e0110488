"""Turn-based dungeon simulation: one hero action, then every monster acts.

States are immutable values; ``step`` returns a fresh state and never touches
its input, so simulations can run in parallel without sharing anything.
Nothing in the rules reads the turn counter, which play_level exploits to
fast-forward provably periodic games.
"""

from __future__ import annotations

from enum import IntEnum
from typing import NamedTuple, Optional

from .level import DIR_DELTAS, DIRS, Level, Pos, Tile

HERO_MAX_HP = 10
HERO_MELEE = 1
POTION_HEAL = 2
WIZARD_SPELL_RANGE_SQ = 25  # Euclidean radius 5, compared squared
MINITAUR_STUN_TURNS = 5
BLOB_MAX_LEVEL = 3
TURN_LIMIT = 1000


class Outcome(IntEnum):
    ONGOING = 0
    WON = 1
    DEAD = 2


ONGOING = Outcome.ONGOING
WON = Outcome.WON
DEAD = Outcome.DEAD


class Species(IntEnum):
    GOBLIN = 0
    WIZARD = 1
    BLOB = 2
    OGRE = 3
    MINITAUR = 4


GOBLIN = Species.GOBLIN
WIZARD = Species.WIZARD
BLOB = Species.BLOB
OGRE = Species.OGRE
MINITAUR = Species.MINITAUR

_TILE_SPECIES = {
    Tile.GOBLIN: GOBLIN,
    Tile.WIZARD: WIZARD,
    Tile.BLOB: BLOB,
    Tile.OGRE: OGRE,
    Tile.MINITAUR: MINITAUR,
}

_START_HP = {
    GOBLIN: 1,
    WIZARD: 1,
    BLOB: 1,  # a blob's hp doubles as its level and its damage
    OGRE: 2,
    MINITAUR: 0,  # immortal; hp is never consulted
}


class Monster(NamedTuple):
    species: Species
    x: int
    y: int
    hp: int
    stun: int


class Hero(NamedTuple):
    x: int
    y: int
    hp: int


class Action(NamedTuple):
    """A cardinal move ("N", "S", "E", "W") or a javelin throw ("J") at a
    monster's tile."""

    kind: str
    target: Optional[Pos] = None


class IllegalActionError(Exception):
    """Raised when an action outside legal_actions() is applied."""


class GameState(NamedTuple):
    level: Level
    hero: Hero
    monsters: tuple[Monster, ...]
    potions: tuple[Pos, ...]  # sorted row-major
    treasures: tuple[Pos, ...]  # sorted row-major
    javelin_at: Optional[Pos]  # None while the hero carries it
    turn: int
    score: int
    kills: int
    outcome: Outcome

    def key(self):
        """Canonical identity of the state (the level is fixed per game)."""
        return self[1:]

    def loop_key(self):
        """Identity without the turn counter; equal loop keys mean the game
        has entered an exact cycle (no rule reads the turn)."""
        return self[1:6] + self[7:]


def collision_damage(m: Monster) -> int:
    s = m.species
    if s == GOBLIN:
        return 1
    if s == WIZARD:
        return 0
    if s == BLOB:
        return m.hp
    if s == OGRE:
        return 2
    return 1  # minitaur


def initial_state(level: Level, starting_hp: int = HERO_MAX_HP) -> GameState:
    """Extract characters and items from the grid; monsters keep the
    row-major order they were found in, which fixes their acting order."""
    geo = level.geo
    if geo.hero_start is None:
        raise ValueError("level must have exactly one hero start")
    if geo.exit is None:
        raise ValueError("level must have exactly one exit")
    monsters = []
    potions = []
    treasures = []
    w = level.width
    for i, t in enumerate(level.grid):
        species = _TILE_SPECIES.get(t)
        if species is not None:
            monsters.append(Monster(species, i % w, i // w, _START_HP[species], 0))
        elif t is Tile.POTION:
            potions.append((i % w, i // w))
        elif t is Tile.TREASURE:
            treasures.append((i % w, i // w))
    hx, hy = geo.hero_start
    return GameState(
        level=level,
        hero=Hero(hx, hy, starting_hp),
        monsters=tuple(monsters),
        potions=tuple(sorted(potions, key=lambda p: (p[1], p[0]))),
        treasures=tuple(sorted(treasures, key=lambda p: (p[1], p[0]))),
        javelin_at=None,
        turn=0,
        score=0,
        kills=0,
        outcome=ONGOING,
    )


def legal_actions(state: GameState) -> list[Action]:
    """All actions the hero may take, in a fixed order: the cardinal moves
    N/S/E/W whose target is not a wall, then javelin throws at visible
    monsters sorted row-major by target tile."""
    if state.outcome != ONGOING:
        return []
    geo = state.level.geo
    hero = state.hero
    hpos = (hero.x, hero.y)
    monsters = state.monsters
    occ = {}
    for m in monsters:
        occ[(m.x, m.y)] = m
    actions: list[Action] = []
    for name, entered in geo.steps[hpos]:
        occupant = occ.get(entered)
        if occupant is not None and occupant.species == MINITAUR and occupant.stun > 0:
            # A stunned minitaur can be moved through, never stopped on: the
            # hero must be able to come out the far side.
            dx, dy = DIR_DELTAS[name]
            landing = (entered[0] + dx, entered[1] + dy)
            if landing in geo.walls or not state.level.in_bounds(*landing):
                continue
            if landing in occ:
                continue
        actions.append(Action(name))
    if state.javelin_at is None and monsters:
        sees = geo.sees
        for m in sorted(monsters, key=lambda m: (m.y, m.x)):
            mpos = (m.x, m.y)
            if sees(hpos, mpos):
                actions.append(Action("J", mpos))
    return actions


def step(state: GameState, action: Action) -> GameState:
    """Advance the game by one full turn. Rejects illegal actions."""
    if state.outcome != ONGOING:
        raise IllegalActionError("game is over")
    if action not in legal_actions(state):
        raise IllegalActionError(f"illegal action {action!r}")
    return apply_action(state, action)


def apply_action(state: GameState, action: Action) -> GameState:
    """Like step(), but trusts that the action is legal (planner fast path)."""
    level = state.level
    geo = level.geo
    traps = geo.traps
    portal_jump = geo.portal_jump
    exit_pos = geo.exit
    hx, hy, hhp = state.hero
    monsters = list(state.monsters)
    potions = state.potions
    treasures = state.treasures
    javelin_at = state.javelin_at
    score = state.score
    kills = state.kills
    outcome = ONGOING

    occ = {}
    for i, m in enumerate(monsters):
        occ[(m.x, m.y)] = i

    # --- hero phase ---------------------------------------------------
    if action.kind == "J":
        target = action.target
        idx = occ.get(target)
        if idx is None:
            raise IllegalActionError(f"no monster at {target!r}")
        m = monsters[idx]
        if m.species != MINITAUR:
            if m.hp <= 1:
                monsters[idx] = None
                del occ[target]
                kills += 1
            else:
                monsters[idx] = Monster(m.species, m.x, m.y, m.hp - 1, m.stun)
        javelin_at = target
    else:
        dx, dy = DIR_DELTAS[action.kind]
        ex, ey = hx + dx, hy + dy
        entered = (ex, ey)
        idx = occ.get(entered)
        if idx is not None:
            m = monsters[idx]
            if m.species == MINITAUR:
                if m.stun > 0:
                    # Pass through the stunned body: its tile's trap and any
                    # items on it apply, a portal under it does not, and the
                    # hero lands one tile further on.
                    if entered in traps:
                        hhp -= 1
                    if hhp <= 0:
                        hx, hy, hhp = ex, ey, 0
                        outcome = DEAD
                    else:
                        if entered in potions:
                            hhp = min(hhp + POTION_HEAL, HERO_MAX_HP)
                            potions = tuple(p for p in potions if p != entered)
                        if entered in treasures:
                            score += 1
                            treasures = tuple(t for t in treasures if t != entered)
                        if javelin_at == entered:
                            javelin_at = None
                        hx, hy = ex + dx, ey + dy
                        entered = (hx, hy)
                        idx = None  # fall through to normal entry below
                else:
                    hhp -= 1
                    monsters[idx] = Monster(MINITAUR, m.x, m.y, m.hp, MINITAUR_STUN_TURNS)
                    if hhp <= 0:
                        hhp = 0
                        outcome = DEAD
            else:
                # Bump combat: both sides strike at once and the hero holds
                # its ground even if the monster dies.
                hhp -= collision_damage(m)
                if m.hp <= HERO_MELEE:
                    monsters[idx] = None
                    del occ[entered]
                    kills += 1
                else:
                    monsters[idx] = Monster(m.species, m.x, m.y, m.hp - HERO_MELEE, m.stun)
                if hhp <= 0:
                    hhp = 0
                    outcome = DEAD
        if idx is None and outcome == ONGOING:
            # Plain entry: trap damage first, then pickups, then the portal
            # hop (whose far side is entered in turn, minus the portal).
            hx, hy = entered
            for _hop in (0, 1):
                pos = (hx, hy)
                if pos in traps:
                    hhp -= 1
                    if hhp <= 0:
                        hhp = 0
                        outcome = DEAD
                        break
                if pos in potions:
                    hhp = min(hhp + POTION_HEAL, HERO_MAX_HP)
                    potions = tuple(p for p in potions if p != pos)
                if pos in treasures:
                    score += 1
                    treasures = tuple(t for t in treasures if t != pos)
                if javelin_at == pos:
                    javelin_at = None
                if _hop == 0:
                    twin = portal_jump.get(pos)
                    if twin is not None and twin not in occ:
                        hx, hy = twin
                        continue
                if pos == exit_pos:
                    outcome = WON
                break

    # --- monster phase --------------------------------------------------
    if outcome == ONGOING:
        sees = geo.sees
        steps_map = geo.steps
        hpos = (hx, hy)  # fixed for the phase: monsters never push the hero

        for i in range(len(monsters)):
            m = monsters[i]
            if m is None:
                continue
            mpos = (m.x, m.y)
            species = m.species
            dest = None

            if species == MINITAUR:
                if m.stun > 0:
                    monsters[i] = Monster(MINITAUR, m.x, m.y, m.hp, m.stun - 1)
                    continue
                dist = geo.dist_from(hpos)
                best_key = None
                for order, (name, npos) in enumerate(steps_map[mpos]):
                    if npos == hpos:
                        d = 0
                    elif npos in occ:
                        continue
                    else:
                        d = dist.get(npos, 10**6)
                    key = (d, order)
                    if best_key is None or key < best_key:
                        best_key = key
                        dest = npos
                if dest is None or (dest != hpos and best_key[0] >= 10**6):
                    continue
                if dest == hpos:
                    hhp -= 1
                    monsters[i] = Monster(MINITAUR, m.x, m.y, m.hp, MINITAUR_STUN_TURNS)
                    dest = None

            elif species == GOBLIN:
                if sees(mpos, hpos):
                    dest = _greedy_step(steps_map[mpos], occ, hpos, hpos)
                    if dest == hpos:
                        hhp -= 1
                        dest = None

            elif species == WIZARD:
                if sees(mpos, hpos):
                    if (m.x - hx) ** 2 + (m.y - hy) ** 2 <= WIZARD_SPELL_RANGE_SQ:
                        hhp -= 1
                    else:
                        dest = _greedy_step(steps_map[mpos], occ, hpos, hpos)
                        if dest == hpos:
                            dest = None

            elif species == BLOB:
                target = None
                best_d = None
                for p in potions:
                    if sees(mpos, p):
                        d2 = (m.x - p[0]) ** 2 + (m.y - p[1]) ** 2
                        if best_d is None or d2 < best_d:
                            best_d = d2
                            target = p
                if sees(mpos, hpos):
                    d2 = (m.x - hx) ** 2 + (m.y - hy) ** 2
                    # An equally close potion wins over the hero.
                    if best_d is None or d2 < best_d:
                        best_d = d2
                        target = hpos
                if target is None:
                    continue
                dest = _greedy_step(steps_map[mpos], occ, hpos, target,
                                    monsters=monsters, merge=True)
                if dest is None:
                    continue
                if dest == hpos:
                    hhp -= m.hp
                    dest = None
                else:
                    oidx = occ.get(dest)
                    if oidx is not None:
                        # Blob merge: the mover vanishes, the resident grows.
                        other = monsters[oidx]
                        grown = other.hp + 1 if other.hp < BLOB_MAX_LEVEL else other.hp
                        monsters[oidx] = Monster(BLOB, other.x, other.y, grown, other.stun)
                        monsters[i] = None
                        del occ[mpos]
                        continue

            elif species == OGRE:
                target = None
                best_d = None
                for t in treasures:
                    if sees(mpos, t):
                        d2 = (m.x - t[0]) ** 2 + (m.y - t[1]) ** 2
                        if best_d is None or d2 < best_d:
                            best_d = d2
                            target = t
                if sees(mpos, hpos):
                    d2 = (m.x - hx) ** 2 + (m.y - hy) ** 2
                    # An equally close treasure wins over the hero.
                    if best_d is None or d2 < best_d:
                        best_d = d2
                        target = hpos
                if target is None:
                    continue
                dest = _greedy_step(steps_map[mpos], occ, hpos, target)
                if dest == hpos:
                    hhp -= 2
                    dest = None

            if dest is not None:
                # Shared movement bookkeeping: trap damage (minitaurs shrug
                # it off), the portal hop when its far side is free, then
                # any potion/treasure the mover feeds on.
                del occ[mpos]
                dead = False
                if dest in traps and species != MINITAUR:
                    if m.hp <= 1:
                        monsters[i] = None
                        dead = True
                    else:
                        m = Monster(species, m.x, m.y, m.hp - 1, m.stun)
                if not dead:
                    twin = portal_jump.get(dest)
                    if twin is not None and twin not in occ and twin != hpos:
                        dest = twin
                    m = Monster(species, dest[0], dest[1], m.hp, m.stun)
                    if species == BLOB and dest in potions:
                        potions = tuple(p for p in potions if p != dest)
                        if m.hp < BLOB_MAX_LEVEL:
                            m = Monster(BLOB, dest[0], dest[1], m.hp + 1, m.stun)
                    elif species == OGRE and dest in treasures:
                        treasures = tuple(t for t in treasures if t != dest)
                    monsters[i] = m
                    occ[dest] = i

            if hhp <= 0:
                hhp = 0
                outcome = DEAD
                break

    return GameState(
        level,
        Hero(hx, hy, hhp),
        tuple(m for m in monsters if m is not None),
        potions,
        treasures,
        javelin_at,
        state.turn + 1,
        score,
        kills,
        outcome,
    )


def _greedy_step(steps, occ, hpos, target, monsters=None, merge=False):
    """One tile "towards": the legal step minimizing straight-line distance
    to the target, ties broken in N/S/E/W order.  The hero's tile is always
    a legal (attacking) step; other monsters block, except that a blob may
    step onto a fellow blob to merge."""
    best = None
    best_key = None
    tx, ty = target
    for order, (name, npos) in enumerate(steps):
        if npos != hpos:
            oidx = occ.get(npos)
            if oidx is not None:
                if not (merge and monsters[oidx].species == BLOB):
                    continue
        d2 = (npos[0] - tx) ** 2 + (npos[1] - ty) ** 2
        key = (d2, order)
        if best_key is None or key < best_key:
            best_key = key
            best = npos
    return best
