"""Classification and reporting over finished archives.

Levels are typed by how the three personas fared: balanced (same bucket for
all), dominant (one persona strictly above both others) and submissive (one
strictly below both).  A level can be dominant for one persona and
submissive for another at the same time.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .codec import _fmt
from .evolve import EliteArchive, exit_path_length
from .level import MONSTER_TILES, Level, Tile

PERSONA_NAMES = ("runner", "treasure-collector", "monster-killer")

BALANCED = "balanced"
OTHER = "other"

CLASS_NAMES = (
    BALANCED,
    "runner-dominant", "treasure-collector-dominant", "monster-killer-dominant",
    "runner-submissive", "treasure-collector-submissive", "monster-killer-submissive",
    OTHER,
)


def classify(bc) -> frozenset[str]:
    """Every label the bucket triple earns; ``other`` when none apply."""
    labels = set()
    if bc[0] == bc[1] == bc[2]:
        labels.add(BALANCED)
    for i, name in enumerate(PERSONA_NAMES):
        others = [bc[j] for j in range(3) if j != i]
        if bc[i] > max(others):
            labels.add(f"{name}-dominant")
        if bc[i] < min(others):
            labels.add(f"{name}-submissive")
    if not labels:
        labels.add(OTHER)
    return frozenset(labels)


def _sample_stddev(values) -> float:
    if len(values) < 2:
        return 0.0
    return statistics.stdev(values)


@dataclass
class RunCoverage:
    label: str
    filled: int
    class_counts: dict[str, int]
    multi_label: int  # cells tagged both dominant and submissive


@dataclass
class CoverageReport:
    runs: list[RunCoverage]
    mean_filled: float
    stddev_filled: float
    class_means: dict[str, float]
    class_stddevs: dict[str, float]
    presence: dict[tuple[int, int, int], float]  # fraction of runs per cell


def coverage(archives: list[EliteArchive], labels=None) -> CoverageReport:
    if not archives:
        raise ValueError("coverage needs at least one archive")
    if labels is None:
        labels = [f"run-{i}" for i in range(len(archives))]
    runs = []
    presence_counts: dict[tuple[int, int, int], int] = {}
    for label, archive in zip(labels, archives):
        counts = {name: 0 for name in CLASS_NAMES}
        multi = 0
        filled = archive.filled_keys()
        for key in filled:
            presence_counts[key] = presence_counts.get(key, 0) + 1
            tags = classify(key)
            for tag in tags:
                counts[tag] += 1
            if any(t.endswith("-dominant") for t in tags) and \
                    any(t.endswith("-submissive") for t in tags):
                multi += 1
        runs.append(RunCoverage(label, len(filled), counts, multi))
    filled_values = [r.filled for r in runs]
    n = len(archives)
    return CoverageReport(
        runs=runs,
        mean_filled=statistics.mean(filled_values),
        stddev_filled=_sample_stddev(filled_values),
        class_means={name: statistics.mean([r.class_counts[name] for r in runs])
                     for name in CLASS_NAMES},
        class_stddevs={name: _sample_stddev([r.class_counts[name] for r in runs])
                       for name in CLASS_NAMES},
        presence={key: count / n for key, count in sorted(presence_counts.items())},
    )


FEATURES = ("monsters", "treasures", "exit-path")


def level_feature(level: Level, feature: str) -> Optional[int]:
    if feature == "monsters":
        return sum(level.count(t) for t in MONSTER_TILES)
    if feature == "treasures":
        return level.count(Tile.TREASURE)
    if feature == "exit-path":
        return exit_path_length(level)
    raise ValueError(f"unknown feature {feature!r}")


@dataclass
class ExpressiveRange:
    feature_x: str
    feature_y: str
    bins: dict[tuple[int, int], int]

    @property
    def total(self) -> int:
        return sum(self.bins.values())


def expressive_range(levels, feature_x: str, feature_y: str) -> ExpressiveRange:
    """Unit-bin 2D histogram of two level features."""
    bins: dict[tuple[int, int], int] = {}
    for level in levels:
        x = level_feature(level, feature_x)
        y = level_feature(level, feature_y)
        bins[(x, y)] = bins.get((x, y), 0) + 1
    return ExpressiveRange(feature_x, feature_y, bins)


def write_reports(report_dir, archives: list[EliteArchive], labels=None):
    """Emit the CSV surface: coverage, class tallies, per-cell elite
    presence, and expressive-range histograms over all elites."""
    report_dir = Path(report_dir)
    report_dir.mkdir(parents=True, exist_ok=True)
    report = coverage(archives, labels)

    rows = ["run,filled_cells,mean,stddev"]
    for rc in report.runs:
        rows.append(f"{rc.label},{rc.filled},,")
    rows.append(f"aggregate,,{_fmt(report.mean_filled)},{_fmt(report.stddev_filled)}")
    (report_dir / "coverage.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")

    class_cols = ",".join(name.replace("-", "_") for name in CLASS_NAMES)
    rows = [f"run,{class_cols},multi_label,filled"]
    for rc in report.runs:
        counts = ",".join(str(rc.class_counts[name]) for name in CLASS_NAMES)
        rows.append(f"{rc.label},{counts},{rc.multi_label},{rc.filled}")
    means = ",".join(_fmt(report.class_means[name]) for name in CLASS_NAMES)
    stds = ",".join(_fmt(report.class_stddevs[name]) for name in CLASS_NAMES)
    rows.append(f"mean,{means},,{_fmt(report.mean_filled)}")
    rows.append(f"stddev,{stds},,{_fmt(report.stddev_filled)}")
    (report_dir / "classes.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")

    bucket_range = range(5)
    rows = ["cell_r,cell_tc,cell_mk,elite_frequency"]
    for r in bucket_range:
        for tc in bucket_range:
            for mk in bucket_range:
                freq = report.presence.get((r, tc, mk), 0.0)
                rows.append(f"{r},{tc},{mk},{_fmt(freq)}")
    (report_dir / "elite_presence.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")

    elite_levels = [ch.level for archive in archives for ch in archive.elites()]
    pairs = (("monsters", "treasures"), ("monsters", "exit-path"), ("treasures", "exit-path"))
    for fx, fy in pairs:
        er = expressive_range(elite_levels, fx, fy)
        name = f"expressive_{fx.replace('-', '_')}_{fy.replace('-', '_')}.csv"
        rows = [f"{fx.replace('-', '_')},{fy.replace('-', '_')},count"]
        for (x, y), count in sorted(er.bins.items()):
            rows.append(f"{x},{y},{count}")
        (report_dir / name).write_text("\n".join(rows) + "\n", encoding="utf-8")
    return report
