"""Quality-diversity dungeon level generation with automated play personas."""

from .analysis import CoverageReport, ExpressiveRange, classify, coverage, expressive_range
from .codec import (
    ArchiveLoadError,
    LevelParseError,
    decode_level,
    decode_trace,
    encode_level,
    encode_trace,
    read_archive,
    write_archive,
)
from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .evolve import (
    Chromosome,
    EliteArchive,
    RunResult,
    constraint,
    evaluate,
    fitness,
    mutate,
    random_level,
    repair,
    run,
    select,
)
from .level import Level, Tile, line_of_sight, path_distance, reachable_tiles
from .personas import (
    Persona,
    PlayResult,
    behavior_characteristic,
    default_personas,
    heuristic,
    plan_action,
    play_level,
    replay,
)
from .sim import Action, GameState, IllegalActionError, Outcome, initial_state, legal_actions, step

__version__ = "0.1.0"
