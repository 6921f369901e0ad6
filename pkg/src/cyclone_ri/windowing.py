"""Sliding RI windows, class statistics and min-max feature scaling."""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, replace
from datetime import datetime
from typing import Sequence

import numpy as np

from .besttrack import Cyclone
from .errors import ConfigError, DataError

FEATURES = ("lat", "lon", "wind")
LAT, LON, WIND = 0, 1, 2


class Label(enum.IntEnum):
    NON_RI = 0
    RI = 1

    def __str__(self) -> str:
        return "RI" if self is Label.RI else "NonRI"


class LabelRule(str, enum.Enum):
    ANY_SPAN = "any_span"
    LAST_ANCHORED = "last_anchored"

    @classmethod
    def parse(cls, text: str) -> "LabelRule":
        key = text.strip().lower().replace("-", "_")
        aliases = {"anyspan": cls.ANY_SPAN, "any_span": cls.ANY_SPAN, "any": cls.ANY_SPAN,
                   "lastanchored": cls.LAST_ANCHORED, "last_anchored": cls.LAST_ANCHORED, "last": cls.LAST_ANCHORED}
        try:
            return aliases[key]
        except KeyError:
            raise ConfigError(f"unknown label rule {text!r}") from None


@dataclass(frozen=True)
class WindowingConfig:
    n: int = 6
    stride: int = 1
    ri_threshold: float = 30.0
    ri_span: int = 4
    label_rule: LabelRule = LabelRule.ANY_SPAN
    strict: bool = False  # use > instead of >= against the threshold

    def __post_init__(self):
        if self.ri_span < 1:
            raise ConfigError("ri_span must be positive")
        if self.n < self.ri_span + 1:
            raise ConfigError(f"window length n={self.n} cannot hold a {self.ri_span}-interval span")
        if self.stride < 1:
            raise ConfigError("stride must be positive")
        if not self.ri_threshold > 0:
            raise ConfigError("ri_threshold must be positive")


@dataclass(frozen=True, eq=False)
class LabeledWindow:
    cyclone_id: str
    start_index: int
    features: np.ndarray  # (n, 3): lat, lon, wind
    label: Label
    start_time: datetime | None = None
    synthetic: bool = False

    @property
    def window_id(self) -> str:
        return f"{self.cyclone_id}:{self.start_index}"


def _rises(winds: np.ndarray, span: int) -> np.ndarray:
    return winds[span:] - winds[:-span]


def label_window(winds: Sequence[float], config: WindowingConfig = WindowingConfig()) -> Label:
    w = np.asarray(winds, dtype=float)
    if len(w) < config.ri_span + 1:
        raise ConfigError(f"window of {len(w)} points is shorter than the {config.ri_span}-interval RI span")
    if config.label_rule is LabelRule.ANY_SPAN:
        rise = _rises(w, config.ri_span).max()
    else:
        rise = w[-1] - w[-1 - config.ri_span]
    hit = rise > config.ri_threshold if config.strict else rise >= config.ri_threshold
    return Label.RI if hit else Label.NON_RI


def ri_onsets(winds: Sequence[float], config: WindowingConfig = WindowingConfig()) -> list[int]:
    """Indices i where winds[i + span] - winds[i] meets the RI threshold."""
    w = np.asarray(winds, dtype=float)
    if len(w) <= config.ri_span:
        return []
    rise = _rises(w, config.ri_span)
    hit = rise > config.ri_threshold if config.strict else rise >= config.ri_threshold
    return [int(i) for i in np.flatnonzero(hit)]


def cyclone_features(c: Cyclone) -> np.ndarray:
    return np.array([(p.latitude, p.longitude, p.wind) for p in c.points], dtype=float)


def window_count(length: int, n: int, stride: int = 1) -> int:
    if length < n:
        return 0
    return (length - n) // stride + 1


def windows_from_array(cyclone_id: str, feats: np.ndarray, config: WindowingConfig,
                       times: Sequence[datetime] | None = None, synthetic: bool = False) -> list[LabeledWindow]:
    out = []
    for k in range(window_count(len(feats), config.n, config.stride)):
        s = k * config.stride
        block = feats[s:s + config.n].copy()
        out.append(LabeledWindow(
            cyclone_id, s, block, label_window(block[:, WIND], config),
            times[s] if times is not None else None, synthetic,
        ))
    return out


def build_windows(c: Cyclone, config: WindowingConfig = WindowingConfig(),
                  scaler: "FeatureScaler | None" = None) -> list[LabeledWindow]:
    """All stride-spaced windows of a cyclone, labeled on raw knots.

    Cyclones shorter than ``n`` produce no windows.
    """
    feats = cyclone_features(c) if len(c.points) else np.zeros((0, 3))
    windows = windows_from_array(c.id, feats, config, [p.timestamp for p in c.points])
    if scaler is not None:
        windows = apply_scaler(scaler, windows)
    return windows


def build_all_windows(cyclones: Sequence[Cyclone], config: WindowingConfig = WindowingConfig()) -> list[LabeledWindow]:
    out: list[LabeledWindow] = []
    for c in cyclones:
        out.extend(build_windows(c, config))
    return out


@dataclass(frozen=True)
class ClassStats:
    total: int
    ri: int

    @property
    def non_ri(self) -> int:
        return self.total - self.ri

    @property
    def minority_pct(self) -> float:
        return 100.0 * self.ri / self.total


def class_stats(windows: Sequence[LabeledWindow]) -> ClassStats:
    if not windows:
        raise DataError("class statistics need at least one window")
    ri = sum(1 for w in windows if w.label == Label.RI)
    return ClassStats(len(windows), ri)


@dataclass(frozen=True)
class FeatureScaler:
    mins: np.ndarray
    maxs: np.ndarray

    @property
    def ranges(self) -> np.ndarray:
        return self.maxs - self.mins

    def transform(self, x: np.ndarray) -> np.ndarray:
        rng = self.ranges
        safe = np.where(rng > 0, rng, 1.0)
        out = (np.asarray(x, dtype=float) - self.mins) / safe
        return np.where(rng > 0, out, 0.0)

    def inverse_transform(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=float) * self.ranges + self.mins

    def to_dict(self) -> dict:
        return {"mins": self.mins.tolist(), "maxs": self.maxs.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureScaler":
        return cls(np.asarray(d["mins"], dtype=float), np.asarray(d["maxs"], dtype=float))


def fit_scaler_array(rows: np.ndarray) -> FeatureScaler:
    rows = np.asarray(rows, dtype=float).reshape(-1, np.shape(rows)[-1])
    if rows.size == 0:
        raise DataError("cannot fit a scaler on no data")
    return FeatureScaler(rows.min(axis=0), rows.max(axis=0))


def fit_scaler(train_windows: Sequence[LabeledWindow]) -> FeatureScaler:
    if not train_windows:
        raise DataError("cannot fit a scaler on no windows")
    return fit_scaler_array(np.concatenate([w.features for w in train_windows]))


def apply_scaler(scaler: FeatureScaler, windows: Sequence[LabeledWindow]) -> list[LabeledWindow]:
    return [replace(w, features=scaler.transform(w.features)) for w in windows]


def stack(windows: Sequence[LabeledWindow]) -> tuple[np.ndarray, np.ndarray]:
    """(N, n, 3) features and (N,) integer labels."""
    if not windows:
        raise DataError("no windows to stack")
    x = np.stack([w.features for w in windows])
    y = np.array([int(w.label) for w in windows], dtype=np.int64)
    return x, y


def windows_to_csv(windows: Sequence[LabeledWindow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    n = len(windows[0].features) if windows else 0
    header = ["cyclone_id", "start_index", "label"]
    for k in range(n):
        header += [f"f_{k}_{name}" for name in FEATURES]
    w.writerow(header)
    for win in windows:
        w.writerow([win.cyclone_id, win.start_index, str(win.label)]
                   + [repr(float(v)) for v in win.features.ravel()])
    return buf.getvalue()
