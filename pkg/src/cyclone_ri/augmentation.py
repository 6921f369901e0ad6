"""LSTM-generated synthetic RI sequences for minority oversampling.

A multivariate LSTM learns to forecast the next four 6-hourly
(lat, lon, wind) points from the previous four. Each real training RI window
then seeds one synthetic track: its first four observed points followed by
four generated ones. Synthetic tracks are windowed like real storms and
their RI windows are appended to the classifier's training set.
"""

from __future__ import annotations

import csv
import enum
import io
import logging
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta, timezone
from typing import Protocol, Sequence

import numpy as np

from .besttrack import Cyclone, format_timestamp
from .errors import ConfigError, DataError
from .nn.lstm import Activation
from .nn.network import Loss, NetworkSpec, predict, train
from .windowing import (
    LAT, LON, WIND, ClassStats, FeatureScaler, Label, LabeledWindow, LabelRule,
    WindowingConfig, build_windows, class_stats, cyclone_features, fit_scaler_array,
    label_window, windows_from_array,
)

log = logging.getLogger(__name__)

IN_STEPS = 4
OUT_STEPS = 4
N_FEATURES = 3
SEQ_LEN = IN_STEPS + OUT_STEPS


class RelabelPolicy(str, enum.Enum):
    KEEP_ONLY_RI = "keep_only_ri"
    TRUST_CONSTRUCTION = "trust_construction"


def generator_spec(**overrides) -> NetworkSpec:
    kw = dict(input_size=N_FEATURES, output_size=OUT_STEPS * N_FEATURES, hidden_size=50,
              loss=Loss.MSE, activation=Activation.TANH, epochs=100, batch_size=32)
    kw.update(overrides)
    return NetworkSpec(**kw)


@dataclass(frozen=True)
class AugmentationConfig:
    multiplier: int = 1
    relabel: RelabelPolicy = RelabelPolicy.KEEP_ONLY_RI
    generator: NetworkSpec = field(default_factory=generator_spec)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "relabel", RelabelPolicy(self.relabel))
        if self.multiplier < 1:
            raise ConfigError(f"multiplier must be >= 1, got {self.multiplier}")


@dataclass(frozen=True, eq=False)
class GeneratorSample:
    input: np.ndarray   # (4, 3) scaled
    target: np.ndarray  # (4, 3) scaled
    source_id: str
    offset: int


@dataclass
class GeneratorDataset:
    train: list[GeneratorSample]
    holdout: list[GeneratorSample]
    scaler: FeatureScaler


def generator_samples(cyclone_id: str, scaled: np.ndarray) -> list[GeneratorSample]:
    return [
        GeneratorSample(scaled[o:o + IN_STEPS].copy(), scaled[o + IN_STEPS:o + SEQ_LEN].copy(), cyclone_id, o)
        for o in range(max(0, len(scaled) - SEQ_LEN + 1))
    ]


def build_generator_dataset(train_cyclones: Sequence[Cyclone], windowing: WindowingConfig = WindowingConfig(),
                            scaler: FeatureScaler | None = None) -> GeneratorDataset:
    """Sliding (4 in, 4 out) samples from every training cyclone.

    The holdout keeps only samples from cyclones with at least one RI window.
    Only training-period storms are used, so nothing here touches the test set.
    """
    cyclones = [c for c in train_cyclones if len(c.points)]
    if not cyclones:
        raise DataError("no cyclones for the generator")
    feats = {c.id: cyclone_features(c) for c in cyclones}
    if scaler is None:
        scaler = fit_scaler_array(np.concatenate(list(feats.values())))
    train_samples, holdout = [], []
    for c in cyclones:
        samples = generator_samples(c.id, scaler.transform(feats[c.id]))
        train_samples.extend(samples)
        if any(w.label == Label.RI for w in build_windows(c, windowing)):
            holdout.extend(samples)
    if not holdout:
        raise DataError("no RI cyclones in the training split; nothing to augment")
    return GeneratorDataset(train_samples, holdout, scaler)


def _stack(samples: Sequence[GeneratorSample]) -> tuple[np.ndarray, np.ndarray]:
    x = np.stack([s.input for s in samples])
    y = np.stack([s.target for s in samples]).reshape(len(samples), -1)
    return x, y


class Forecaster(Protocol):
    def forecast(self, history: np.ndarray) -> np.ndarray: ...


@dataclass
class Generator:
    spec: NetworkSpec
    params: dict
    scaler: FeatureScaler

    def forecast_scaled(self, x: np.ndarray) -> np.ndarray:
        out = predict(self.spec, self.params, x)
        return out.reshape(len(x), OUT_STEPS, N_FEATURES)

    def forecast(self, history: np.ndarray) -> np.ndarray:
        """Next four raw (lat, lon, wind) rows for each (4, 3) raw history."""
        history = np.asarray(history, dtype=float)
        scaled = self.scaler.transform(history)
        return self.scaler.inverse_transform(self.forecast_scaled(scaled))


@dataclass
class GeneratorReport:
    holdout_mse: float
    holdout_mse_per_feature: dict[str, float]
    train_losses: list[float]
    train_samples: int
    holdout_samples: int

    def to_dict(self) -> dict:
        return {
            "holdout_mse": self.holdout_mse,
            "holdout_mse_per_feature": self.holdout_mse_per_feature,
            "final_train_loss": self.train_losses[-1] if self.train_losses else None,
            "train_samples": self.train_samples,
            "holdout_samples": self.holdout_samples,
        }


def holdout_mse(generator: Generator, samples: Sequence[GeneratorSample]) -> tuple[float, dict[str, float]]:
    x, y = _stack(samples)
    pred = generator.forecast_scaled(x)
    err = (pred - y.reshape(pred.shape)) ** 2
    per = {name: float(err[..., k].mean()) for k, name in enumerate(("lat", "lon", "wind"))}
    return float(err.mean()), per


def train_generator(config: AugmentationConfig, dataset: GeneratorDataset, seed=None) -> tuple[Generator, GeneratorReport]:
    if not dataset.train:
        raise DataError("generator training set is empty")
    seed = config.seed if seed is None else seed
    x, y = _stack(dataset.train)
    result = train(config.generator, x, y, seed=seed)
    gen = Generator(config.generator, result.params, dataset.scaler)
    mse_all, per = holdout_mse(gen, dataset.holdout)
    log.info("generator holdout MSE %.5f (scaled units)", mse_all)
    return gen, GeneratorReport(mse_all, per, result.losses, len(dataset.train), len(dataset.holdout))


@dataclass(frozen=True, eq=False)
class SyntheticSequence:
    rows: np.ndarray  # (8, 3) raw lat, lon, wind
    source_window_id: str
    source_cyclone_id: str
    copy: int
    label: Label
    start_time: datetime | None = None

    @property
    def id(self) -> str:
        return f"syn:{self.source_window_id}#{self.copy}"


@dataclass
class SynthesisResult:
    sequences: list[SyntheticSequence]
    attempted: int
    discarded: int


def clamp_rows(rows: np.ndarray) -> np.ndarray:
    out = np.array(rows, dtype=float)
    out[:, WIND] = np.maximum(out[:, WIND], 0.0)
    out[:, LAT] = np.clip(out[:, LAT], -90.0, 90.0)
    out[:, LON] = np.mod(out[:, LON], 360.0)
    out[:, LON] = np.where(out[:, LON] >= 360.0, 0.0, out[:, LON])
    return out


def synthesize(generator: Forecaster, ri_windows: Sequence[LabeledWindow], config: AugmentationConfig = AugmentationConfig(),
               windowing: WindowingConfig = WindowingConfig()) -> SynthesisResult:
    """One synthetic 8-point track per real RI window and copy.

    ``ri_windows`` carry raw (unscaled) features and must come from the
    training split. The generator is deterministic, so extra copies are
    replicas that only reweight the minority class.
    """
    sources = [w for w in ri_windows if w.label == Label.RI and not w.synthetic]
    if not sources:
        return SynthesisResult([], 0, 0)
    history = np.stack([w.features[:IN_STEPS] for w in sources])
    generated = np.asarray(generator.forecast(history), dtype=float).reshape(len(sources), OUT_STEPS, N_FEATURES)
    check = replace(windowing, n=SEQ_LEN, stride=1, label_rule=LabelRule.ANY_SPAN)

    out, discarded, attempted = [], 0, 0
    for w, gen_rows in zip(sources, generated):
        rows = np.concatenate([w.features[:IN_STEPS], clamp_rows(gen_rows)])
        label = label_window(rows[:, WIND], check)
        for k in range(config.multiplier):
            attempted += 1
            if config.relabel is RelabelPolicy.KEEP_ONLY_RI and label != Label.RI:
                discarded += 1
                continue
            seq_label = label if config.relabel is RelabelPolicy.KEEP_ONLY_RI else Label.RI
            out.append(SyntheticSequence(rows.copy(), w.window_id, w.cyclone_id, k, seq_label, w.start_time))
    return SynthesisResult(out, attempted, discarded)


@dataclass
class AssimilationResult:
    windows: list[LabeledWindow]
    before: ClassStats
    after: ClassStats
    appended: int

    def to_dict(self) -> dict:
        return {
            "before": {"total": self.before.total, "ri": self.before.ri, "minority_pct": self.before.minority_pct},
            "after": {"total": self.after.total, "ri": self.after.ri, "minority_pct": self.after.minority_pct},
            "appended_windows": self.appended,
        }


def synthetic_windows(seq: SyntheticSequence, windowing: WindowingConfig) -> list[LabeledWindow]:
    times = None
    if seq.start_time is not None:
        times = [seq.start_time + timedelta(hours=6 * k) for k in range(SEQ_LEN)]
    return windows_from_array(seq.id, seq.rows, replace(windowing, stride=1), times, synthetic=True)


def assimilate(train_windows: Sequence[LabeledWindow], synthetics: Sequence[SyntheticSequence],
               windowing: WindowingConfig = WindowingConfig()) -> AssimilationResult:
    """Append the RI windows of every synthetic track to the training windows.

    Synthetic tracks only ever add minority-class examples; their NonRI
    windows are dropped, so the minority share strictly grows whenever
    anything is appended. Under ``TRUST_CONSTRUCTION`` a kept sequence may
    have no RI window at all and then contributes nothing.
    """
    before = class_stats(train_windows)
    extra: list[LabeledWindow] = []
    for seq in synthetics:
        extra.extend(w for w in synthetic_windows(seq, windowing) if w.label == Label.RI)
    windows = list(train_windows) + extra
    return AssimilationResult(windows, before, class_stats(windows), len(extra))


def synthetics_to_csv(synthetics: Sequence[SyntheticSequence]) -> str:
    """Track CSV of synthetic sequences; provenance marks observed vs generated rows."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["cyclone_id", "timestamp_iso8601", "lat_deg", "lon_deg_east", "wind_kt", "provenance"])
    epoch = datetime(1970, 1, 1, tzinfo=timezone.utc)
    for seq in synthetics:
        t0 = seq.start_time or epoch
        for k, (lat, lon, wind) in enumerate(seq.rows):
            prov = "observed" if k < IN_STEPS else "generated"
            w.writerow([seq.id, format_timestamp(t0 + timedelta(hours=6 * k)), repr(float(lat)),
                        repr(float(lon)), str(int(round(wind))), f"{prov}:{seq.source_window_id}"])
    return buf.getvalue()


@dataclass
class AugmentationOutcome:
    windows: list[LabeledWindow]
    synthesis: SynthesisResult
    assimilation: AssimilationResult
    generator_report: GeneratorReport
    generator: Generator

    def report(self) -> dict:
        return {
            "generator": self.generator_report.to_dict(),
            "synthesis": {
                "attempted": self.synthesis.attempted,
                "kept": len(self.synthesis.sequences),
                "discarded": self.synthesis.discarded,
            },
            "assimilation": self.assimilation.to_dict(),
        }


def augment_training_set(train_cyclones: Sequence[Cyclone], train_windows: Sequence[LabeledWindow],
                         config: AugmentationConfig, windowing: WindowingConfig) -> AugmentationOutcome:
    """Generator training, synthesis and assimilation in one call."""
    dataset = build_generator_dataset(train_cyclones, windowing)
    generator, report = train_generator(config, dataset)
    train_ids = {c.id for c in train_cyclones}
    sources = [w for w in train_windows if w.label == Label.RI and w.cyclone_id in train_ids]
    synth = synthesize(generator, sources, config, windowing)
    assim = assimilate(train_windows, synth.sequences, windowing)
    log.info("augmentation: %d/%d synthetic sequences kept, %d windows appended",
             len(synth.sequences), synth.attempted, assim.appended)
    return AugmentationOutcome(assim.windows, synth, assim, report, generator)
