"""Command-line front end: generate archives, play levels, analyze results.

Progress and diagnostics go to stderr; data only ever goes to files, so runs
can be piped and diffed.  Set PDSM_LOG=1 for per-iteration progress lines.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

from . import analysis, codec, evolve
from .config import ConfigError, load_config
from .personas import default_personas, play_level
from .codec import ArchiveLoadError, LevelParseError


PERSONA_ALIASES = {
    "runner": "runner",
    "mk": "monster-killer",
    "tc": "treasure-collector",
}


def _parse_seeds(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pdsm",
        description="Evolve small dungeon levels with a behaviour-grid "
                    "search and three automated play personas.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="run the evolutionary search")
    gen.add_argument("--config", required=True, help="experiment config file")
    gen.add_argument("--out", required=True, help="output directory")
    gen.add_argument("--seeds", type=_parse_seeds,
                     help="comma-separated seeds, one archive per seed")
    gen.add_argument("--runs", type=int,
                     help="number of runs; seeds count up from the config seed")
    gen.add_argument("--jobs", type=int, default=1,
                     help="parallel evaluation workers (default 1)")

    play = sub.add_parser("play", help="have one persona play a level")
    play.add_argument("level", help="level text file")
    play.add_argument("--persona", required=True, choices=sorted(PERSONA_ALIASES),
                      help="runner, mk or tc")
    play.add_argument("--trace", help="write the action trace here")

    ana = sub.add_parser("analyze", help="summarize one or more archives")
    ana.add_argument("archives", nargs="+", help="archive directories")
    ana.add_argument("--out", required=True, help="report directory")

    val = sub.add_parser("validate", help="check that a level file is playable")
    val.add_argument("level", help="level text file")
    return parser


def _cmd_generate(args) -> int:
    config = load_config(args.config)
    if args.seeds is not None:
        seeds = args.seeds
    elif args.runs is not None:
        seeds = [config.rng_seed + i for i in range(args.runs)]
    else:
        seeds = [config.rng_seed]
    out_root = Path(args.out)
    verbose = bool(os.environ.get("PDSM_LOG"))
    import dataclasses

    for seed in seeds:
        run_config = dataclasses.replace(config, rng_seed=seed)
        progress = None
        if verbose:
            def progress(entry, seed=seed):
                mean = "-" if entry.mean_elite_fitness is None \
                    else format(entry.mean_elite_fitness, ".4f")
                print(f"seed {seed} iter {entry.iteration}: "
                      f"filled={entry.filled_cells} mean_fitness={mean} "
                      f"rejected={entry.rejections}", file=sys.stderr)
        started = time.monotonic()
        result = evolve.run(run_config, jobs=args.jobs, progress=progress)
        elapsed = time.monotonic() - started
        run_dir = out_root / f"run-{seed}"
        codec.write_archive(result.archive, run_dir, run_log=result.log,
                            meta={"seed": seed, "iterations": run_config.iterations,
                                  "pop_size": run_config.pop_size})
        print(f"run-{seed}: filled {result.archive.filled_count()} cells "
              f"in {elapsed:.1f}s", file=sys.stderr)
    return 0


def _cmd_play(args) -> int:
    level = codec.load_level(args.level)
    if not evolve.is_playable(level):
        print("level is unplayable: exit not reachable from hero start",
              file=sys.stderr)
        return 1
    kind = PERSONA_ALIASES[args.persona]
    persona = next(p for p in default_personas() if p.kind == kind)
    result = play_level(persona, level)
    if args.trace:
        Path(args.trace).write_text(codec.encode_trace(result.trace), encoding="utf-8")
    print(f"persona={result.persona} won={'true' if result.won else 'false'} "
          f"hp={result.remaining_hp} turns={result.turns} "
          f"kills={result.kills} treasures={result.treasures_collected}")
    return 0


def _cmd_analyze(args) -> int:
    archives = []
    labels = []
    for path in args.archives:
        archives.append(codec.read_archive(path))
        labels.append(Path(path).name)
    analysis.write_reports(args.out, archives, labels)
    print(f"wrote reports for {len(archives)} archive(s) to {args.out}",
          file=sys.stderr)
    return 0


def _cmd_validate(args) -> int:
    level = codec.load_level(args.level)
    if not evolve.is_playable(level):
        print("level is unplayable: exit not reachable from hero start",
              file=sys.stderr)
        return 1
    print("ok")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "generate": _cmd_generate,
        "play": _cmd_play,
        "analyze": _cmd_analyze,
        "validate": _cmd_validate,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, LevelParseError, ArchiveLoadError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
