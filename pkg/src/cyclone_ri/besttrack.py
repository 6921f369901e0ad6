"""ATCF b-deck best-track ingest.

Decodes JTWC b-deck lines into raw records, assembles them into storms,
cleans each storm to a gap-free 6-hourly track and splits a basin's storms
chronologically into train and test sets.

Coordinates are kept as signed latitude and longitude in degrees east on
[0, 360) so South Pacific tracks crossing the antimeridian stay contiguous.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Iterable, Iterator

from .errors import BestTrackParseError, DataError, DataQualityError

KNOT_KMH = 1.852
SYNOPTIC_HOURS = (0, 6, 12, 18)
STEP = timedelta(hours=6)
DEFAULT_YEAR_RANGE = (1980, 2020)
POSITION_TOLERANCE_DEG = 0.5

# JTWC numbers southern-hemisphere storms with an "S" suffix west of 135E
# and "P" east of it.
SH_BASIN_BOUNDARY_LON = 135.0

ATCF_BASINS = frozenset({"AL", "EP", "CP", "WP", "IO", "SH", "SL", "LS", "BB", "AS", "SP", "SI"})

CSV_HEADER = ("cyclone_id", "timestamp_iso8601", "lat_deg", "lon_deg_east", "wind_kt")


class Basin(enum.Enum):
    SOUTH_PACIFIC = "SP"
    SOUTH_INDIAN = "SI"

    @property
    def label(self) -> str:
        return {"SP": "South Pacific", "SI": "South Indian"}[self.value]

    @classmethod
    def parse(cls, text: str) -> "Basin":
        key = text.strip().upper().replace("_", "").replace("-", "").replace(" ", "")
        aliases = {
            "SP": cls.SOUTH_PACIFIC, "SOUTHPACIFIC": cls.SOUTH_PACIFIC,
            "SI": cls.SOUTH_INDIAN, "SOUTHINDIAN": cls.SOUTH_INDIAN,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown basin {text!r}; expected SP or SI") from None


@dataclass(frozen=True)
class TrackPoint:
    timestamp: datetime
    latitude: float
    longitude: float
    wind: int

    def __post_init__(self):
        if self.wind < 0:
            raise ValueError(f"negative wind {self.wind}")
        if not -90.0 <= self.latitude <= 90.0:
            raise ValueError(f"latitude {self.latitude} out of range")
        if not 0.0 <= self.longitude < 360.0:
            raise ValueError(f"longitude {self.longitude} outside [0, 360)")

    @property
    def is_synoptic(self) -> bool:
        t = self.timestamp
        return t.hour in SYNOPTIC_HOURS and t.minute == 0 and t.second == 0


@dataclass(frozen=True)
class Cyclone:
    id: str
    points: tuple[TrackPoint, ...]
    name: str | None = field(default=None, compare=False)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def start(self) -> datetime:
        return self.points[0].timestamp

    @property
    def winds(self) -> list[int]:
        return [p.wind for p in self.points]


@dataclass
class BasinDataset:
    basin: Basin
    cyclones: list[Cyclone]
    year_range: tuple[int, int] = DEFAULT_YEAR_RANGE

    def __post_init__(self):
        lo, hi = self.year_range
        for c in self.cyclones:
            if not lo <= c.start.year <= hi:
                raise DataError(f"{c.id} starts in {c.start.year}, outside {lo}-{hi}")


@dataclass
class DatasetSplit:
    train: list[Cyclone]
    test: list[Cyclone]
    train_fraction: float = 0.75


@dataclass(frozen=True)
class RawRecord:
    basin: str
    number: int
    timestamp: datetime
    latitude: float
    longitude: float
    wind: int
    name: str | None = None
    lineno: int | None = None

    @property
    def season(self) -> int:
        # Southern-hemisphere seasons run July-June and are named by the later year.
        if self.basin in ("SH", "SP", "SI") and self.timestamp.month >= 7:
            return self.timestamp.year + 1
        return self.timestamp.year

    @property
    def storm_key(self) -> tuple[str, int, int]:
        return (self.basin, self.number, self.season)


def _decode_coord(token: str, positive: str, negative: str, lineno, source) -> float:
    tok = token.strip().upper()
    if len(tok) < 2 or tok[-1] not in (positive, negative) or not tok[:-1].isdigit():
        raise BestTrackParseError(f"malformed coordinate {token.strip()!r}", lineno, source)
    value = int(tok[:-1]) / 10.0
    return -value if tok[-1] == negative else value


def parse_latitude(token: str, lineno=None, source=None) -> float:
    lat = _decode_coord(token, "N", "S", lineno, source)
    if not -90.0 <= lat <= 90.0:
        raise BestTrackParseError(f"latitude {lat} out of range", lineno, source)
    return lat + 0.0  # avoids -0.0 for "0S"


def parse_longitude(token: str, lineno=None, source=None) -> float:
    """Decode e.g. ``1700E`` -> 170.0 and ``1700W`` -> 190.0 (degrees east)."""
    lon = _decode_coord(token, "E", "W", lineno, source)
    if not -360.0 <= lon <= 360.0:
        raise BestTrackParseError(f"longitude {lon} out of range", lineno, source)
    lon = lon % 360.0
    return lon + 0.0


def _parse_timestamp(token: str, minutes: str, lineno, source) -> datetime:
    tok = token.strip()
    if len(tok) != 10 or not tok.isdigit():
        raise BestTrackParseError(f"malformed timestamp {tok!r}", lineno, source)
    try:
        ts = datetime.strptime(tok, "%Y%m%d%H").replace(tzinfo=timezone.utc)
    except ValueError:
        raise BestTrackParseError(f"invalid timestamp {tok!r}", lineno, source) from None
    minutes = minutes.strip()
    if minutes.isdigit() and len(minutes) <= 2:
        if int(minutes) >= 60:
            raise BestTrackParseError(f"invalid minutes {minutes!r}", lineno, source)
        ts = ts.replace(minute=int(minutes))
    return ts


def parse_bdeck_line(line: str, lineno: int | None = None, source=None) -> RawRecord | None:
    """Decode one b-deck line. Blank and ``#`` comment lines return ``None``."""
    stripped = line.strip()
    if not stripped or stripped.startswith("#"):
        return None
    tokens = [t.strip() for t in stripped.split(",")]
    if len(tokens) < 9:
        raise BestTrackParseError(f"expected at least 9 fields, got {len(tokens)}", lineno, source)

    basin = tokens[0].upper()
    if basin not in ATCF_BASINS:
        raise BestTrackParseError(f"unknown basin code {tokens[0]!r}", lineno, source)
    if not tokens[1].isdigit():
        raise BestTrackParseError(f"malformed storm number {tokens[1]!r}", lineno, source)

    timestamp = _parse_timestamp(tokens[2], tokens[3], lineno, source)
    lat = parse_latitude(tokens[6], lineno, source)
    lon = parse_longitude(tokens[7], lineno, source)
    wind_tok = tokens[8]
    if not wind_tok.isdigit():
        raise BestTrackParseError(f"malformed wind {wind_tok!r}", lineno, source)
    name = tokens[27] if len(tokens) > 27 and tokens[27] else None
    return RawRecord(basin, int(tokens[1]), timestamp, lat, lon, int(wind_tok), name, lineno)


def parse_bdeck(lines: Iterable[str], source=None) -> Iterator[RawRecord]:
    for lineno, line in enumerate(lines, start=1):
        rec = parse_bdeck_line(line, lineno, source)
        if rec is not None:
            yield rec


def read_bdeck_file(path) -> list[RawRecord]:
    path = Path(path)
    with open(path, encoding="ascii", errors="replace") as fh:
        return list(parse_bdeck(fh, source=path.name))


def _lon_diff(a: float, b: float) -> float:
    d = abs(a - b) % 360.0
    return min(d, 360.0 - d)


def assemble_cyclones(records: Iterable[RawRecord]) -> list[Cyclone]:
    """Group records into storms, collapsing per-wind-radius duplicate lines."""
    storms: dict[tuple, dict[datetime, RawRecord]] = defaultdict(dict)
    names: dict[tuple, str] = {}
    for rec in records:
        key = rec.storm_key
        seen = storms[key].get(rec.timestamp)
        if rec.name and rec.name.upper() not in ("", "INVEST", "NONAME"):
            names[key] = rec.name
        if seen is None:
            storms[key][rec.timestamp] = rec
            continue
        if (abs(seen.latitude - rec.latitude) > POSITION_TOLERANCE_DEG
                or _lon_diff(seen.longitude, rec.longitude) > POSITION_TOLERANCE_DEG):
            raise DataQualityError(
                f"storm {storm_id(*key)} has conflicting positions at {rec.timestamp:%Y-%m-%d %H:%M}Z "
                f"({seen.latitude}, {seen.longitude}) vs ({rec.latitude}, {rec.longitude})"
            )
        if rec.wind > seen.wind:
            storms[key][rec.timestamp] = rec

    cyclones = []
    for key in sorted(storms):
        recs = [storms[key][t] for t in sorted(storms[key])]
        points = tuple(TrackPoint(r.timestamp, r.latitude, r.longitude, r.wind) for r in recs)
        cyclones.append(Cyclone(storm_id(*key), points, names.get(key)))
    cyclones.sort(key=lambda c: (c.start, c.id))
    return cyclones


def storm_id(basin: str, number: int, season: int) -> str:
    return f"{basin}{number:02d}{season:04d}"


@dataclass(frozen=True)
class CleaningConfig:
    min_points: int = 6
    year_range: tuple[int, int] = DEFAULT_YEAR_RANGE


@dataclass(frozen=True)
class CleaningOutcome:
    """Result of cleaning one storm; ``cyclone`` is None when rejected."""

    cyclone: Cyclone | None
    status: str  # accepted | truncated | rejected_year | rejected_short | rejected_empty
    dropped_offsynoptic: int = 0

    @property
    def accepted(self) -> bool:
        return self.cyclone is not None


def clean_cyclone(c: Cyclone, config: CleaningConfig = CleaningConfig()) -> CleaningOutcome:
    points = [p for p in c.points if p.is_synoptic]
    dropped = len(c.points) - len(points)
    if not points:
        return CleaningOutcome(None, "rejected_empty", dropped)
    lo, hi = config.year_range
    if not lo <= points[0].timestamp.year <= hi:
        return CleaningOutcome(None, "rejected_year", dropped)

    keep = len(points)
    for i in range(1, len(points)):
        if points[i].timestamp - points[i - 1].timestamp != STEP:
            keep = i
            break
    truncated = keep < len(points)
    points = points[:keep]
    if len(points) < config.min_points:
        return CleaningOutcome(None, "rejected_short", dropped)
    status = "truncated" if truncated else "accepted"
    return CleaningOutcome(Cyclone(c.id, tuple(points), c.name), status, dropped)


def basin_of(c: Cyclone) -> Basin | None:
    """Southern-hemisphere basin by genesis longitude; None for northern storms."""
    first = c.points[0]
    if first.latitude > 0 and not c.id.startswith(("SH", "SP", "SI")):
        return None
    if c.id.startswith("SP"):
        return Basin.SOUTH_PACIFIC
    if c.id.startswith("SI"):
        return Basin.SOUTH_INDIAN
    return Basin.SOUTH_INDIAN if first.longitude < SH_BASIN_BOUNDARY_LON else Basin.SOUTH_PACIFIC


@dataclass
class IngestReport:
    files: int = 0
    records: int = 0
    storms: int = 0
    accepted: int = 0
    truncated: int = 0
    rejected: dict[str, int] = field(default_factory=dict)
    other_basin: int = 0
    dropped_offsynoptic_points: int = 0

    def to_dict(self) -> dict:
        return {
            "files": self.files,
            "records": self.records,
            "storms": self.storms,
            "accepted": self.accepted,
            "truncated": self.truncated,
            "rejected": dict(sorted(self.rejected.items())),
            "rejected_total": sum(self.rejected.values()),
            "other_basin": self.other_basin,
            "dropped_offsynoptic_points": self.dropped_offsynoptic_points,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def bdeck_files(directory) -> list[Path]:
    directory = Path(directory)
    files = [p for p in directory.iterdir() if p.is_file() and p.suffix.lower() in (".dat", ".txt", ".bdeck")]
    return sorted(files)


def load_basin(directory, basin: Basin, config: CleaningConfig = CleaningConfig()) -> tuple[BasinDataset, IngestReport]:
    """Read every b-deck file under ``directory`` and build a cleaned basin dataset.

    If ``directory/<basin code>`` exists it is used instead of ``directory``.
    Storms whose genesis lies in the other southern basin are skipped.
    """
    directory = Path(directory)
    sub = directory / basin.value
    if sub.is_dir():
        directory = sub
    files = bdeck_files(directory)
    if not files:
        raise DataError(f"no b-deck files found in {directory}")

    report = IngestReport(files=len(files))
    records: list[RawRecord] = []
    for path in files:
        recs = read_bdeck_file(path)
        report.records += len(recs)
        records.extend(recs)

    cyclones = []
    for c in assemble_cyclones(records):
        report.storms += 1
        if basin_of(c) is not basin:
            report.other_basin += 1
            continue
        out = clean_cyclone(c, config)
        report.dropped_offsynoptic_points += out.dropped_offsynoptic
        if out.cyclone is None:
            report.rejected[out.status] = report.rejected.get(out.status, 0) + 1
            continue
        if out.status == "truncated":
            report.truncated += 1
        report.accepted += 1
        cyclones.append(out.cyclone)
    cyclones.sort(key=lambda c: (c.start, c.id))
    return BasinDataset(basin, cyclones, config.year_range), report


def split_by_period(dataset: BasinDataset | list[Cyclone], fraction: float = 0.75) -> DatasetSplit:
    cyclones = dataset.cyclones if isinstance(dataset, BasinDataset) else list(dataset)
    if len(cyclones) < 2:
        raise DataError(f"need at least 2 cyclones to split, got {len(cyclones)}")
    if not 0.0 < fraction < 1.0:
        raise DataError(f"train fraction must lie in (0, 1), got {fraction}")
    ordered = sorted(cyclones, key=lambda c: (c.start, c.id))
    k = math.ceil(fraction * len(ordered))
    if k >= len(ordered):
        raise DataError(f"fraction {fraction} leaves an empty test set for {len(ordered)} cyclones")
    return DatasetSplit(ordered[:k], ordered[k:], fraction)


def _format_float(x: float) -> str:
    return repr(float(x))


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_timestamp_iso(text: str) -> datetime:
    return datetime.strptime(text, "%Y-%m-%dT%H:%M:%SZ").replace(tzinfo=timezone.utc)


def cyclones_to_csv(cyclones: Iterable[Cyclone], extra: dict[str, str] | None = None) -> str:
    """Canonical track CSV; ``extra`` maps cyclone id to a provenance value."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = list(CSV_HEADER) + (["provenance"] if extra is not None else [])
    w.writerow(header)
    for c in cyclones:
        for p in c.points:
            row = [c.id, format_timestamp(p.timestamp), _format_float(p.latitude),
                   _format_float(p.longitude), str(p.wind)]
            if extra is not None:
                row.append(extra.get(c.id, ""))
            w.writerow(row)
    return buf.getvalue()


def write_cyclones_csv(path, cyclones: Iterable[Cyclone]) -> None:
    Path(path).write_text(cyclones_to_csv(cyclones))


def read_cyclones_csv(path) -> list[Cyclone]:
    return parse_cyclones_csv(Path(path).read_text())


def parse_cyclones_csv(text: str) -> list[Cyclone]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header[:5]) != CSV_HEADER:
        raise DataError(f"unexpected track CSV header {header}")
    grouped: dict[str, list[TrackPoint]] = {}
    for row in reader:
        if not row:
            continue
        cid, ts, lat, lon, wind = row[:5]
        grouped.setdefault(cid, []).append(
            TrackPoint(parse_timestamp_iso(ts), float(lat), float(lon), int(wind))
        )
    return [Cyclone(cid, tuple(pts)) for cid, pts in grouped.items()]
