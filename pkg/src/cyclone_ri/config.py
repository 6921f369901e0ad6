"""Experiment configuration: a plain ``key = value`` file plus flag overrides.

Grammar::

    # comment
    key = value            # lists are comma-separated; seeds accept ranges

Recognised keys (defaults in brackets)::

    basin [SI]              data_dir [bundled fixture]   out_dir [results]
    n [6]                   n_values [5,6,7,8]           stride [1]
    label_rule [any_span]   ri_threshold [30]            strict_threshold [false]
    strategies [U,M,E,HE]   seeds [0-29]                 train_fraction [0.75]
    epochs [100]            hidden [50]                  batch_size [32]
    learning_rate [0.001]   generator_epochs [100]       multiplier [1]
    relabel [keep_only_ri]  augment_seed [0]             workers [1]
    category_thresholds [64,83,96,113,137]               deterministic_svg [true]

A bare integer for ``seeds`` means that many seeds starting at 0.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path

from .augmentation import AugmentationConfig, RelabelPolicy, generator_spec
from .besttrack import Basin, CleaningConfig
from .climatology import CategoryScale
from .errors import ConfigError
from .nn.network import classifier_spec
from .strategies import StrategyKind, StrategySpec
from .windowing import LabelRule, WindowingConfig


def parse_seeds(text: str) -> tuple[int, ...]:
    text = str(text).strip()
    if not text:
        raise ConfigError("empty seed list")
    if text.isdigit() and "," not in text:
        count = int(text)
        if count < 1:
            raise ConfigError("seed count must be positive")
        return tuple(range(count))
    seeds: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            seeds.extend(range(int(lo), int(hi) + 1))
        else:
            seeds.append(int(part))
    return tuple(seeds)


def _bool(text: str) -> bool:
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in str(text).split(",") if x.strip())


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in str(text).split(",") if x.strip())


@dataclass
class ExperimentConfig:
    basin: Basin = Basin.SOUTH_INDIAN
    data_dir: Path | None = None
    out_dir: Path = Path("results")
    n: int = 6
    n_values: tuple[int, ...] = (5, 6, 7, 8)
    stride: int = 1
    label_rule: LabelRule = LabelRule.ANY_SPAN
    ri_threshold: float = 30.0
    strict_threshold: bool = False
    strategies: tuple[StrategyKind, ...] = (StrategyKind.U, StrategyKind.M, StrategyKind.E, StrategyKind.HE)
    seeds: tuple[int, ...] = tuple(range(30))
    train_fraction: float = 0.75
    epochs: int = 100
    hidden: int = 50
    batch_size: int = 32
    learning_rate: float = 1e-3
    generator_epochs: int = 100
    multiplier: int = 1
    relabel: RelabelPolicy = RelabelPolicy.KEEP_ONLY_RI
    augment_seed: int = 0
    workers: int = 1
    category_thresholds: tuple[float, ...] = (64, 83, 96, 113, 137)
    deterministic_svg: bool = True

    _PARSERS = {
        "basin": Basin.parse,
        "data_dir": Path,
        "out_dir": Path,
        "n": int,
        "n_values": _ints,
        "stride": int,
        "label_rule": LabelRule.parse,
        "ri_threshold": float,
        "strict_threshold": _bool,
        "strategies": lambda s: tuple(StrategyKind.parse(x) for x in str(s).split(",") if x.strip()),
        "seeds": parse_seeds,
        "train_fraction": float,
        "epochs": int,
        "hidden": int,
        "batch_size": int,
        "learning_rate": float,
        "generator_epochs": int,
        "multiplier": int,
        "relabel": RelabelPolicy,
        "augment_seed": int,
        "workers": int,
        "category_thresholds": _floats,
        "deterministic_svg": _bool,
    }

    def updated(self, **values) -> "ExperimentConfig":
        """Copy with string or typed overrides applied; None values are ignored."""
        known = {f.name for f in fields(self)}
        typed = {}
        for key, value in values.items():
            if value is None:
                continue
            if key not in known:
                raise ConfigError(f"unknown configuration key {key!r}")
            if isinstance(value, str):
                try:
                    value = self._PARSERS[key](value)
                except ConfigError:
                    raise
                except (ValueError, KeyError) as exc:
                    raise ConfigError(f"bad value for {key}: {exc}") from None
            typed[key] = value
        cfg = replace(self, **typed)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if not self.seeds:
            raise ConfigError("seed list is empty")
        if self.multiplier < 1:
            raise ConfigError(f"multiplier must be >= 1, got {self.multiplier}")
        if not 0 < self.train_fraction < 1:
            raise ConfigError("train_fraction must lie in (0, 1)")
        if self.workers < 1:
            raise ConfigError("workers must be positive")
        try:
            self.windowing()
            CategoryScale(tuple(self.category_thresholds))
            for n in self.n_values:
                self.windowing(n)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def windowing(self, n: int | None = None) -> WindowingConfig:
        return WindowingConfig(n=self.n if n is None else n, stride=self.stride, ri_threshold=self.ri_threshold,
                               label_rule=self.label_rule, strict=self.strict_threshold)

    def cleaning(self, sweep: bool = False) -> CleaningConfig:
        # a sweep keeps one storm set for every n so the splits match
        return CleaningConfig(min_points=min(self.n_values) if sweep else self.n)

    def category_scale(self) -> CategoryScale:
        return CategoryScale(tuple(self.category_thresholds))

    def augmentation(self) -> AugmentationConfig:
        return AugmentationConfig(
            multiplier=self.multiplier, relabel=self.relabel, seed=self.augment_seed,
            generator=generator_spec(epochs=self.generator_epochs, hidden_size=self.hidden,
                                     batch_size=self.batch_size, learning_rate=self.learning_rate),
        )

    def strategy(self, kind: StrategyKind, n: int | None = None) -> StrategySpec:
        net = classifier_spec(3, hidden_size=self.hidden, epochs=self.epochs, batch_size=self.batch_size,
                              learning_rate=self.learning_rate)
        return StrategySpec(kind, self.windowing(n), net, seeds=self.seeds,
                            augmentation=self.augmentation() if kind is StrategyKind.DA_M else None)


def parse_config_text(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"config line {lineno}: missing key")
        out[key] = value
    return out


def load_config(path=None, **overrides) -> ExperimentConfig:
    values: dict = {}
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file {p} does not exist")
        values.update(parse_config_text(p.read_text()))
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig().updated(**values)
