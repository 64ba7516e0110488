"""Experiment configuration and its flat ``key = value`` file format."""

from __future__ import annotations

from dataclasses import dataclass, fields


class ConfigError(Exception):
    """Bad key, value or syntax in a configuration file."""


@dataclass(frozen=True)
class ExperimentConfig:
    bucket: int = 5
    personas: int = 3
    map_cell_size: int = 5
    level_width: int = 10
    level_height: int = 10
    iterations: int = 500
    pop_size: int = 60
    empty_init_rate: float = 0.5
    wall_init_rate: float = 0.3
    empty_mut_rate: float = 0.5
    mutation_rate: float = 0.1
    elite_prob: float = 0.8
    feas_prob: float = 0.6
    c: int = 45
    k: int = 1
    rng_seed: int = 0
    starting_hp: int = 10
    # Documented alternatives kept behind flags; both default off.
    runner_negative_steps: bool = False
    flat_selection: bool = False

    def __post_init__(self):
        for name in ("empty_init_rate", "wall_init_rate", "empty_mut_rate",
                     "mutation_rate", "elite_prob", "feas_prob"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name.replace('_', '-')} must be in [0, 1], got {v}")
        if self.bucket < 1 or self.bucket > self.starting_hp:
            raise ConfigError(f"bucket must be in 1..{self.starting_hp}, got {self.bucket}")
        if self.personas != 3:
            raise ConfigError("personas must be 3 (runner, treasure collector, monster killer)")
        if self.pop_size < 1:
            raise ConfigError("pop-size must be at least 1")
        if self.map_cell_size < 1:
            raise ConfigError("map-cell-size must be at least 1")
        if self.level_width < 3 or self.level_height < 3:
            raise ConfigError("levels need at least a 3x3 grid")
        if self.iterations < 0:
            raise ConfigError("iterations must not be negative")
        if not 1 <= self.starting_hp <= 10:
            raise ConfigError("starting-hp must be in 1..10")
        if self.c <= 0 or self.k < 0:
            raise ConfigError("c must be positive and k non-negative")


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _parse_value(key: str, raw: str):
    ftype = _FIELD_TYPES[key]
    raw = raw.strip()
    if ftype == "bool":
        if raw.lower() in ("true", "1", "yes", "on"):
            return True
        if raw.lower() in ("false", "0", "no", "off"):
            return False
        raise ConfigError(f"{key.replace('_', '-')}: expected a boolean, got {raw!r}")
    try:
        if ftype == "int":
            return int(raw)
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key.replace('_', '-')}: expected a number, got {raw!r}") from None


def parse_config(text: str) -> ExperimentConfig:
    """Parse ``key = value`` lines; unknown keys are rejected by name.

    Blank lines and ``#`` comments are ignored.  Keys use the hyphenated
    spelling (``pop-size``, ``empty-init-rate``, ...).
    """
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {stripped!r}")
        key_part, _, value_part = stripped.partition("=")
        key = key_part.strip().replace("-", "_")
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key_part.strip()!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key_part.strip()!r}")
        values[key] = _parse_value(key, value_part)
    return ExperimentConfig(**values)


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def format_config(config: ExperimentConfig) -> str:
    lines = []
    for f in fields(ExperimentConfig):
        value = getattr(config, f.name)
        if isinstance(value, bool):
            value = "true" if value else "false"
        lines.append(f"{f.name.replace('_', '-')} = {value}")
    return "\n".join(lines) + "\n"
