"""Descriptive statistics: yearly frequencies, RI events by category, split summary."""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .besttrack import Cyclone, DatasetSplit
from .windowing import WindowingConfig, build_all_windows, class_stats, ri_onsets


@dataclass(frozen=True)
class CategoryScale:
    """Lower wind bounds (kt) of categories 1..k; below the first is category 0."""

    thresholds: tuple[float, ...] = (64, 83, 96, 113, 137)  # Saffir-Simpson

    def __post_init__(self):
        t = self.thresholds
        if not t or any(b <= a for a, b in zip(t, t[1:])):
            raise ValueError(f"category thresholds must be strictly increasing: {t}")

    def category(self, wind: float) -> int:
        cat = 0
        for k, lo in enumerate(self.thresholds, start=1):
            if wind >= lo:
                cat = k
        return cat


@dataclass(frozen=True)
class RIEvent:
    cyclone_id: str
    onset_index: int
    onset_wind: int
    end_wind: int
    year: int


def ri_events(c: Cyclone, config: WindowingConfig = WindowingConfig()) -> list[RIEvent]:
    """Runs of consecutive qualifying 24-h onsets, one event per run."""
    onsets = ri_onsets(c.winds, config)
    events = []
    prev = None
    for i in onsets:
        if prev is None or i != prev + 1:
            w = c.winds
            events.append(RIEvent(c.id, i, w[i], w[i + config.ri_span], c.start.year))
        prev = i
    return events


def yearly_cyclone_counts(cyclones: Sequence[Cyclone]) -> dict[int, int]:
    return dict(sorted(Counter(c.start.year for c in cyclones).items()))


def yearly_ri_counts(cyclones: Sequence[Cyclone], config: WindowingConfig = WindowingConfig()) -> dict[int, int]:
    counts: Counter = Counter()
    for c in cyclones:
        counts[c.start.year] += len(ri_events(c, config))
    return {y: n for y, n in sorted(counts.items()) if n > 0}


def ri_by_category(cyclones: Sequence[Cyclone], scale: CategoryScale = CategoryScale(),
                   config: WindowingConfig = WindowingConfig()) -> dict[int, int]:
    """RI events counted under the category of the wind at onset."""
    counts: Counter = Counter()
    for c in cyclones:
        for ev in ri_events(c, config):
            counts[scale.category(ev.onset_wind)] += 1
    return {k: counts.get(k, 0) for k in range(len(scale.thresholds) + 1)}


def split_summary(split: DatasetSplit, config: WindowingConfig = WindowingConfig()) -> list[dict]:
    rows = []
    for part, cyclones in (("Train", split.train), ("Test", split.test)):
        windows = build_all_windows(cyclones, config)
        years = [c.start.year for c in cyclones]
        stats = class_stats(windows) if windows else None
        rows.append({
            "description": part,
            "cyclones": len(cyclones),
            "first_year": min(years) if years else "",
            "last_year": max(years) if years else "",
            "instances": stats.total if stats else 0,
            "ri_instances": stats.ri if stats else 0,
            "minority_pct": f"{stats.minority_pct:.2f}" if stats else "",
        })
    return rows


def table_csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()
