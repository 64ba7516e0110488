"""Text interchange formats: level grids, action traces, archive directories.

Every encoding is canonical: equal values serialize to identical bytes, so
whole archive directories can be compared byte for byte.
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path
from typing import Optional

from .evolve import Cell, Chromosome, EliteArchive, constraint, exit_path_length, fitness
from .level import MONSTER_TILES, Level, Tile
from .sim import Action

ARCHIVE_FORMAT = "pdsm-archive"
ARCHIVE_VERSION = 1

TILE_GLYPHS = {
    Tile.EMPTY: ".",
    Tile.WALL: "#",
    Tile.HERO: "H",
    Tile.EXIT: "E",
    Tile.POTION: "p",
    Tile.TREASURE: "T",
    Tile.TRAP: "^",
    Tile.PORTAL: "O",
    Tile.GOBLIN: "g",
    Tile.WIZARD: "w",
    Tile.BLOB: "b",
    Tile.OGRE: "o",
    Tile.MINITAUR: "m",
}
GLYPH_TILES = {g: t for t, g in TILE_GLYPHS.items()}


class LevelParseError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None, col: Optional[int] = None):
        self.line = line
        self.col = col
        if line is not None and col is not None:
            message = f"line {line}, column {col}: {message}"
        elif line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ArchiveLoadError(Exception):
    """Archive directory missing pieces or failing verification."""


def encode_level(level: Level) -> str:
    w = level.width
    rows = []
    for y in range(level.height):
        rows.append("".join(TILE_GLYPHS[t] for t in level.grid[y * w:(y + 1) * w]))
    return "\n".join(rows) + "\n"


def decode_level(text: str) -> Level:
    """Parse a glyph grid and validate it is a playable-shaped level:
    rectangular, walled border, one hero start, one exit, 0 or 2 portals."""
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise LevelParseError("empty level text")
    width = len(lines[0])
    height = len(lines)
    cells = []
    heroes = []
    exits = []
    portals = 0
    for y, line in enumerate(lines):
        if len(line) != width:
            raise LevelParseError(
                f"ragged row: expected {width} glyphs, got {len(line)}", y + 1, len(line) + 1)
        for x, ch in enumerate(line):
            tile = GLYPH_TILES.get(ch)
            if tile is None:
                raise LevelParseError(f"unknown glyph {ch!r}", y + 1, x + 1)
            border = x == 0 or y == 0 or x == width - 1 or y == height - 1
            if border and tile is not Tile.WALL:
                raise LevelParseError("border tile must be a wall", y + 1, x + 1)
            if tile is Tile.HERO:
                heroes.append((y + 1, x + 1))
            elif tile is Tile.EXIT:
                exits.append((y + 1, x + 1))
            elif tile is Tile.PORTAL:
                portals += 1
            cells.append(tile)
    if len(heroes) > 1:
        raise LevelParseError("more than one hero start", *heroes[1])
    if len(exits) > 1:
        raise LevelParseError("more than one exit", *exits[1])
    if not heroes:
        raise LevelParseError("level has no hero start")
    if not exits:
        raise LevelParseError("level has no exit")
    if portals not in (0, 2):
        raise LevelParseError(f"portal count must be 0 or 2, got {portals}")
    return Level(width, height, tuple(cells))


def load_level(path) -> Level:
    with open(path, encoding="utf-8") as fh:
        return decode_level(fh.read())


def encode_action(action: Action) -> str:
    if action.kind == "J":
        x, y = action.target
        return f"J {x} {y}"
    return action.kind


def decode_action(line: str) -> Action:
    parts = line.split()
    if len(parts) == 1 and parts[0] in ("N", "S", "E", "W"):
        return Action(parts[0])
    if len(parts) == 3 and parts[0] == "J":
        try:
            return Action("J", (int(parts[1]), int(parts[2])))
        except ValueError:
            pass
    raise ValueError(f"bad action line {line!r}")


def encode_trace(trace) -> str:
    return "".join(encode_action(a) + "\n" for a in trace)


def decode_trace(text: str) -> tuple[Action, ...]:
    return tuple(decode_action(line) for line in text.splitlines() if line.strip())


def _fmt(value: float) -> str:
    return format(value, ".6g")


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _cell_stem(key) -> str:
    return f"cell_{key[0]}_{key[1]}_{key[2]}"


def level_features(level: Level) -> tuple[int, int, Optional[int]]:
    monsters = sum(level.count(t) for t in MONSTER_TILES)
    treasures = level.count(Tile.TREASURE)
    return monsters, treasures, exit_path_length(level)


MANIFEST_HEADER = ("cell_r,cell_tc,cell_mk,fitness,constraint,"
                   "hp_runner,hp_treasure_collector,hp_monster_killer,"
                   "file,monsters,treasures,exit_path_length,sha256")
MEMBERS_HEADER = ("cell_r,cell_tc,cell_mk,role,index,fitness,constraint,"
                  "hp_runner,hp_treasure_collector,hp_monster_killer,file,sha256")
RUN_LOG_HEADER = "iteration,filled_cells,mean_elite_fitness,rejections,evaluated"


def write_archive(archive: EliteArchive, directory, run_log=None, meta: Optional[dict] = None):
    """Persist every member as a level file plus CSV manifests.

    Elites get the bare ``cell_<r>_<tc>_<mk>.txt`` name; other members keep
    their list position as an ``_f<i>`` / ``_i<i>`` suffix.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    header = {"format": ARCHIVE_FORMAT, "version": ARCHIVE_VERSION,
              "cell_capacity": archive.cell_capacity}
    if meta:
        header.update(meta)
    (directory / "archive.json").write_text(
        json.dumps(header, sort_keys=True) + "\n", encoding="utf-8")

    manifest_rows = []
    member_rows = []
    for key in archive.sorted_keys():
        cell = archive.cells[key]
        elite = cell.elite
        for role, members in (("f", cell.feasible), ("i", cell.infeasible)):
            for i, ch in enumerate(members):
                if role == "f" and ch is elite:
                    name = f"{_cell_stem(key)}.txt"
                else:
                    name = f"{_cell_stem(key)}_{role}{i}.txt"
                text = encode_level(ch.level)
                (directory / name).write_text(text, encoding="utf-8")
                digest = _sha256(text)
                hp = ch.persona_hp
                member_rows.append(
                    f"{key[0]},{key[1]},{key[2]},{role},{i},{_fmt(ch.fitness)},"
                    f"{_fmt(ch.constraint)},{hp[0]},{hp[1]},{hp[2]},{name},{digest}")
                if role == "f" and ch is elite:
                    monsters, treasures, epl = level_features(ch.level)
                    manifest_rows.append(
                        f"{key[0]},{key[1]},{key[2]},{_fmt(ch.fitness)},"
                        f"{_fmt(ch.constraint)},{hp[0]},{hp[1]},{hp[2]},{name},"
                        f"{monsters},{treasures},{epl},{digest}")

    (directory / "manifest.csv").write_text(
        "\n".join([MANIFEST_HEADER] + manifest_rows) + "\n", encoding="utf-8")
    (directory / "members.csv").write_text(
        "\n".join([MEMBERS_HEADER] + member_rows) + "\n", encoding="utf-8")
    if run_log is not None:
        rows = [RUN_LOG_HEADER]
        for entry in run_log:
            mean = "" if entry.mean_elite_fitness is None else _fmt(entry.mean_elite_fitness)
            rows.append(f"{entry.iteration},{entry.filled_cells},{mean},"
                        f"{entry.rejections},{entry.evaluated}")
        (directory / "run_log.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")


def read_archive(directory) -> EliteArchive:
    """Rebuild an archive from disk, verifying checksums and re-deriving
    fitness and constraint from the level text itself."""
    directory = Path(directory)
    header_path = directory / "archive.json"
    manifest_path = directory / "manifest.csv"
    members_path = directory / "members.csv"
    if not header_path.exists():
        raise ArchiveLoadError(f"{directory}: missing archive.json")
    if not manifest_path.exists() or not members_path.exists():
        raise ArchiveLoadError(f"{directory}: missing manifest")
    try:
        header = json.loads(header_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ArchiveLoadError(f"{directory}: bad archive.json: {exc}") from exc
    if header.get("format") != ARCHIVE_FORMAT or header.get("version") != ARCHIVE_VERSION:
        raise ArchiveLoadError(
            f"{directory}: unsupported archive format "
            f"{header.get('format')!r} v{header.get('version')!r}")

    archive = EliteArchive(int(header.get("cell_capacity", 5)))
    lines = members_path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != MEMBERS_HEADER:
        raise ArchiveLoadError(f"{directory}: unrecognized members.csv header")
    for line in lines[1:]:
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 12:
            raise ArchiveLoadError(f"{directory}: malformed members row {line!r}")
        key = (int(parts[0]), int(parts[1]), int(parts[2]))
        role = parts[3]
        stored_fitness = parts[5]
        stored_constraint = parts[6]
        hp = (int(parts[7]), int(parts[8]), int(parts[9]))
        name, digest = parts[10], parts[11]
        level_path = directory / name
        if not level_path.exists():
            raise ArchiveLoadError(f"{directory}: missing level file {name}")
        text = level_path.read_text(encoding="utf-8")
        if _sha256(text) != digest:
            raise ArchiveLoadError(f"{directory}: checksum mismatch for {name}")
        try:
            level = decode_level(text)
        except LevelParseError as exc:
            raise ArchiveLoadError(f"{directory}: {name}: {exc}") from exc
        fit = fitness(level)
        con = constraint(level)
        if _fmt(fit) != stored_fitness or _fmt(con) != stored_constraint:
            raise ArchiveLoadError(
                f"{directory}: {name}: stored scores disagree with the level")
        ch = Chromosome(level=level, fitness=fit, constraint=con, bc=key, persona_hp=hp)
        cell = archive.cells.setdefault(key, Cell())
        (cell.feasible if role == "f" else cell.infeasible).append(ch)
    return archive


def archives_equal_on_elites(a: EliteArchive, b: EliteArchive) -> bool:
    if a.filled_keys() != b.filled_keys():
        return False
    for key in a.filled_keys():
        ea, eb = a.cells[key].elite, b.cells[key].elite
        if ea.level != eb.level or _fmt(ea.fitness) != _fmt(eb.fitness) \
                or _fmt(ea.constraint) != _fmt(eb.constraint):
            return False
    return True


def directory_fingerprint(directory) -> dict[str, str]:
    """Relative path -> sha256 for every file under a directory."""
    directory = Path(directory)
    out = {}
    for root, _dirs, files in os.walk(directory):
        for name in sorted(files):
            path = Path(root) / name
            rel = str(path.relative_to(directory))
            out[rel] = hashlib.sha256(path.read_bytes()).hexdigest()
    return out
