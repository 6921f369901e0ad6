"""Deterministic fixture corpus of synthetic-but-realistic b-deck storms.

Tracks drift poleward with a recurving zonal motion; intensity follows a
genesis / growth / peak / decay life cycle with 5-kt rounding. Fast-developing
storms produce the rapid-intensification cases, and a handful of edge
cases (pre-1980 storm, 12-h gap, off-synoptic fixes, short storm,
per-radius duplicate lines) exercise the cleaning rules.

The files under ``cyclone_ri/data/fixture`` were written by
:func:`write_fixture_corpus` and are checked against it in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from importlib import resources
from pathlib import Path

import numpy as np

FIXTURE_SEED = 20240607
DEFAULT_STORMS = 64


@dataclass
class _Fix:
    time: datetime
    lat: float
    lon: float
    wind: int


def _lat_token(lat: float) -> str:
    v = int(round(abs(lat) * 10))
    return f"{v}{'S' if lat < 0 else 'N'}"


def _lon_token(lon: float) -> str:
    lon = lon % 360.0
    if lon > 180.0:
        return f"{int(round((360.0 - lon) * 10))}W"
    return f"{int(round(lon * 10))}E"


def bdeck_line(number: int, fix: _Fix, radius: int = 34, name: str = "") -> str:
    minutes = f"{fix.time.minute:02d}" if fix.time.minute else ""
    fields = [
        "SH", f"{number:2d}", fix.time.strftime("%Y%m%d%H"), minutes, "BEST", "  0",
        f"{_lat_token(fix.lat):>4}", f"{_lon_token(fix.lon):>5}", f"{fix.wind:3d}",
        f"{max(900, 1010 - fix.wind):4d}", "TS" if fix.wind < 64 else "TY", f"{radius:3d}", "NEQ",
        "  40", "  40", "  30", "  30", "1004", " 150", "  20", "   0", "   0", "  S",
        "  0", "   ", "  0", "  0", f"{name:>10}",
    ]
    return ", ".join(fields)


def _intensity(rng: np.random.Generator, length: int) -> list[int]:
    # Per-storm intensification rate (kt / 6 h) plus step noise, so 24-h
    # changes spread continuously across the 30-kt RI threshold.
    rate = rng.gamma(2.0, 2.0)
    growth_len = int(rng.integers(5, 14))
    peak_len = int(rng.integers(1, 4))
    winds = [float(rng.choice([25, 30, 35]))]
    k = 0
    while len(winds) < length:
        if k < growth_len:
            step = rate + rng.normal(0.0, 2.5)
        elif k < growth_len + peak_len:
            step = rng.normal(0.0, 2.5)
        else:
            step = -rng.uniform(2.0, 9.0)
        winds.append(min(160.0, max(15.0, winds[-1] + step)))
        k += 1
    return [int(5 * round(w / 5)) for w in winds]


def _track(rng: np.random.Generator, length: int, basin: str) -> list[tuple[float, float]]:
    if basin == "SP":
        lat, lon = rng.uniform(-15.0, -9.0), rng.uniform(160.0, 188.0)
    else:
        lat, lon = rng.uniform(-16.0, -8.0), rng.uniform(50.0, 110.0)
    u = rng.uniform(-0.8, -0.2)
    du = rng.uniform(0.03, 0.09)
    v = rng.uniform(-0.45, -0.15)
    pts = []
    for _ in range(length):
        pts.append((round(lat, 1), round(lon % 360.0, 1)))
        lat += v + rng.normal(0, 0.08)
        lon += u + rng.normal(0, 0.1)
        u += du
        v -= rng.uniform(0.0, 0.02)
    return pts


def generate_fixture_lines(basin: str = "SP", storms: int = DEFAULT_STORMS, seed: int = FIXTURE_SEED) -> dict[str, list[str]]:
    """File name -> b-deck lines for one basin."""
    rng = np.random.default_rng([seed, 0 if basin == "SP" else 1])
    years = np.sort(rng.integers(1980, 2021, storms))
    files: dict[str, list[str]] = {}
    counters: dict[int, int] = {}
    for s, year in enumerate(years):
        season = int(year)
        counters[season] = counters.get(season, 0) + 1
        number = counters[season]
        start = datetime(int(year), int(rng.integers(1, 4)), int(rng.integers(1, 28)),
                         int(rng.choice([0, 6, 12, 18])), tzinfo=timezone.utc)
        length = int(rng.integers(18, 40))
        winds = _intensity(rng, length)
        track = _track(rng, length, basin)
        fixes = [_Fix(start + timedelta(hours=6 * k), lat, lon, w) for k, ((lat, lon), w) in enumerate(zip(track, winds))]
        lines = []
        multi_radius = s % 5 == 0
        for fx in fixes:
            lines.append(bdeck_line(number, fx))
            if multi_radius and fx.wind >= 50:
                lines.append(bdeck_line(number, fx, radius=50))
            if multi_radius and fx.wind >= 64:
                lines.append(bdeck_line(number, fx, radius=64))
        files[f"b{basin.lower()}{number:02d}{season}.dat"] = lines

    files.update(_edge_cases(rng, basin))
    return files


def _edge_cases(rng: np.random.Generator, basin: str) -> dict[str, list[str]]:
    out = {}
    lon0 = 170.0 if basin == "SP" else 80.0

    def simple(number, start, n, wind0=30, step=5):
        return [_Fix(start + timedelta(hours=6 * k), -12.0 - 0.3 * k, lon0 - 0.4 * k, min(140, wind0 + step * k))
                for k in range(n)]

    old = simple(90, datetime(1975, 2, 1, tzinfo=timezone.utc), 12)
    out["bsh901975.dat"] = ["# pre-1980 storm: rejected by the year filter"] + [bdeck_line(90, f) for f in old]

    gap = simple(91, datetime(1999, 3, 2, tzinfo=timezone.utc), 14)
    gap = gap[:8] + gap[9:]  # 12-h gap after the 8th fix
    out["bsh911999.dat"] = [bdeck_line(91, f) for f in gap]

    off = simple(92, datetime(2003, 1, 10, tzinfo=timezone.utc), 12)
    extra = [_Fix(off[3].time + timedelta(hours=3), off[3].lat - 0.1, off[3].lon, off[3].wind),
             _Fix(off[6].time + timedelta(minutes=30), off[6].lat, off[6].lon, off[6].wind)]
    merged = sorted(off + extra, key=lambda f: f.time)
    out["bsh922003.dat"] = [bdeck_line(92, f) for f in merged]

    short = simple(93, datetime(2010, 2, 5, tzinfo=timezone.utc), 4)
    out["bsh932010.dat"] = ["", *(bdeck_line(93, f) for f in short)]
    return out


def write_fixture_corpus(root, basins=("SP", "SI"), storms: int = DEFAULT_STORMS, seed: int = FIXTURE_SEED) -> list[Path]:
    written = []
    for basin in basins:
        d = Path(root) / basin
        d.mkdir(parents=True, exist_ok=True)
        for fname, lines in sorted(generate_fixture_lines(basin, storms, seed).items()):
            p = d / fname
            p.write_text("\n".join(lines) + "\n")
            written.append(p)
    return written


def fixture_dir() -> Path:
    """Directory of the bundled corpus (has SP/ and SI/ subdirectories)."""
    return Path(str(resources.files("cyclone_ri") / "data" / "fixture"))


if __name__ == "__main__":
    for path in write_fixture_corpus(fixture_dir()):
        print(path)
