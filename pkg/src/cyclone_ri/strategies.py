"""Classifier strategies and the repeated-runs benchmark protocol.

=======  ==========================================  =======
kind     members (feature sets)                      fusion
=======  ==========================================  =======
U        {wind}                                      -
M        {lat, lon, wind}                            -
E        {wind}, {lat}, {lon}                        mean
HE       {wind}, {lat, lon}                          mean
DA_M     {lat, lon, wind} on the augmented train set -
=======  ==========================================  =======
"""

from __future__ import annotations

import csv
import enum
import io
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .augmentation import AugmentationConfig, AugmentationOutcome, augment_training_set
from .besttrack import DatasetSplit
from .errors import BenchmarkError, ConfigError, DataError, TrainingDivergedError
from .metrics import EvaluationReport, Summary, evaluate, summarize_runs
from .nn.network import NetworkSpec, classifier_spec, predict as net_predict, train
from .windowing import (
    LAT, LON, WIND, FeatureScaler, Label, LabeledWindow, WindowingConfig,
    build_all_windows, fit_scaler, stack,
)

log = logging.getLogger(__name__)

MAX_DIVERGED_FRACTION = 0.2
DEFAULT_SEEDS = tuple(range(30))
ROW_ORDER = ("NonRI", "RI", "macro", "weighted")
METRICS = ("precision", "recall", "f1", "f1_classmean")


class StrategyKind(str, enum.Enum):
    U = "U"
    M = "M"
    E = "E"
    HE = "HE"
    DA_M = "DA_M"

    @property
    def display(self) -> str:
        return {"U": "U-LSTM", "M": "M-LSTM", "E": "E-LSTM", "HE": "HE-LSTM", "DA_M": "DA-M-LSTM"}[self.value]

    @property
    def members(self) -> tuple[tuple[int, ...], ...]:
        return MEMBER_FEATURES[self]

    @classmethod
    def parse(cls, text: str) -> "StrategyKind":
        key = text.strip().upper().replace("-LSTM", "").replace("-", "_")
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown strategy {text!r}") from None


MEMBER_FEATURES = {
    StrategyKind.U: ((WIND,),),
    StrategyKind.M: ((LAT, LON, WIND),),
    StrategyKind.DA_M: ((LAT, LON, WIND),),
    StrategyKind.E: ((WIND,), (LAT,), (LON,)),
    StrategyKind.HE: ((WIND,), (LAT, LON)),
}


@dataclass(frozen=True)
class StrategySpec:
    kind: StrategyKind
    windowing: WindowingConfig = WindowingConfig()
    network: NetworkSpec = field(default_factory=lambda: classifier_spec(3))
    fusion: str = "mean_probability"
    seeds: tuple[int, ...] = DEFAULT_SEEDS
    augmentation: AugmentationConfig | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", StrategyKind(self.kind))
        if self.fusion != "mean_probability":
            raise ValueError(f"unsupported fusion rule {self.fusion!r}")

    def member_spec(self, features: tuple[int, ...]) -> NetworkSpec:
        return replace(self.network, input_size=len(features))


@dataclass
class Member:
    features: tuple[int, ...]
    spec: NetworkSpec
    params: dict

    def predict_proba(self, x_scaled: np.ndarray) -> np.ndarray:
        return net_predict(self.spec, self.params, x_scaled[:, :, list(self.features)])


@dataclass
class TrainedClassifier:
    kind: StrategyKind
    members: list[Member]
    scaler: FeatureScaler
    seed: int | None


def train_strategy(spec: StrategySpec, train_windows: Sequence[LabeledWindow], seed: int) -> TrainedClassifier:
    """Train each member on its feature projection of the same scaled windows."""
    x_raw, y = stack(train_windows)
    if len(np.unique(y)) < 2:
        raise DataError("training windows contain a single class; check RI labeling")
    scaler = fit_scaler(train_windows)
    x = scaler.transform(x_raw)
    members = []
    for j, feats in enumerate(spec.kind.members):
        mspec = spec.member_spec(feats)
        result = train(mspec, x[:, :, list(feats)], y, seed=[seed, j])
        members.append(Member(feats, mspec, result.params))
    return TrainedClassifier(spec.kind, members, scaler, seed)


def fuse(member_probs: Sequence[np.ndarray]) -> np.ndarray:
    """Arithmetic mean of member class-probability vectors."""
    return np.mean(np.stack(member_probs), axis=0)


def predict_proba(classifier: TrainedClassifier, windows_or_x) -> np.ndarray:
    if isinstance(windows_or_x, np.ndarray):
        x_raw = windows_or_x
    else:
        x_raw = stack(windows_or_x)[0]
    x = classifier.scaler.transform(x_raw)
    probs = [m.predict_proba(x) for m in classifier.members]
    return probs[0] if len(probs) == 1 else fuse(probs)


def predicted_class(probs: np.ndarray) -> np.ndarray:
    """Argmax with ties going to NonRI."""
    return (probs[:, Label.RI] > probs[:, Label.NON_RI]).astype(np.int64)


def predict(classifier: TrainedClassifier, windows_or_x) -> np.ndarray:
    return predicted_class(predict_proba(classifier, windows_or_x))


@dataclass
class RunResult:
    seed: int
    report: EvaluationReport
    predictions: np.ndarray | None = None

    @property
    def confusion(self):
        return self.report.confusion


def evaluate_classifier(classifier: TrainedClassifier, test_windows: Sequence[LabeledWindow]) -> RunResult:
    x, y = stack(test_windows)
    pred = predict(classifier, x)
    return RunResult(classifier.seed, evaluate(pred, y), pred)


def _one_run(args):
    spec, train_windows, test_windows, seed = args
    try:
        clf = train_strategy(spec, train_windows, seed)
    except TrainingDivergedError as exc:
        return seed, exc
    return seed, evaluate_classifier(clf, test_windows)


@dataclass
class BenchmarkResult:
    kind: StrategyKind
    n: int
    runs: list[RunResult]
    diverged: list[int]
    summary: dict[str, dict[str, Summary]]
    augmentation: AugmentationOutcome | None = None

    @property
    def ri_f1(self) -> Summary:
        return self.summary["RI"]["f1"]


def summarize(runs: Sequence[RunResult]) -> dict[str, dict[str, Summary]]:
    tables = [r.report.rows() for r in runs]
    return {
        row: {m: summarize_runs([t[row][m] for t in tables]) for m in METRICS}
        for row in ROW_ORDER
    }


def training_windows(spec: StrategySpec, split: DatasetSplit) -> tuple[list[LabeledWindow], AugmentationOutcome | None]:
    train_windows = build_all_windows(split.train, spec.windowing)
    if spec.kind is not StrategyKind.DA_M:
        return train_windows, None
    outcome = augment_training_set(split.train, train_windows, spec.augmentation or AugmentationConfig(), spec.windowing)
    return outcome.windows, outcome


def run_benchmark(spec: StrategySpec, split: DatasetSplit, seeds: Sequence[int] | None = None,
                  workers: int = 1, prepared: tuple | None = None) -> BenchmarkResult:
    """Train and evaluate once per seed; summarize each metric as mean and 95% CI.

    For DA_M the generator is trained once (with the augmentation seed) and
    the augmented training set is shared by all classifier seeds.
    ``prepared`` may pass precomputed (train_windows, augmentation_outcome).
    """
    seeds = list(spec.seeds if seeds is None else seeds)
    if len(seeds) < 2:
        raise ConfigError("a benchmark needs at least 2 seeds")
    train_windows, outcome = prepared if prepared is not None else training_windows(spec, split)
    test_windows = build_all_windows(split.test, spec.windowing)
    if not test_windows:
        raise DataError("test split yields no windows")

    jobs = [(spec, train_windows, test_windows, s) for s in seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outputs = list(pool.map(_one_run, jobs))
    else:
        outputs = [_one_run(j) for j in jobs]

    runs, diverged = [], []
    for seed, out in outputs:
        if isinstance(out, TrainingDivergedError):
            log.warning("%s seed %s diverged: %s; excluded", spec.kind.display, seed, out)
            diverged.append(seed)
        else:
            runs.append(out)
    if len(diverged) > MAX_DIVERGED_FRACTION * len(seeds):
        raise BenchmarkError(f"{len(diverged)} of {len(seeds)} runs diverged")
    if len(runs) < 2:
        raise BenchmarkError("fewer than 2 successful runs")
    return BenchmarkResult(spec.kind, spec.windowing.n, runs, diverged, summarize(runs), outcome)


BENCHMARK_HEADER = ["strategy", "n", "class_or_aggregate", "precision_mean", "precision_ci",
                    "recall_mean", "recall_ci", "f1_mean", "f1_ci", "f1_classmean_mean", "f1_classmean_ci"]


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def benchmark_rows(result: BenchmarkResult, rows: Sequence[str] = ROW_ORDER) -> list[list[str]]:
    out = []
    for row in rows:
        cells = [result.kind.display, str(result.n), row]
        for m in METRICS:
            s = result.summary[row][m]
            cells += [_fmt(s.mean), _fmt(s.half_width)]
        out.append(cells)
    return out


def benchmark_csv(results: Sequence[BenchmarkResult], rows: Sequence[str] = ROW_ORDER,
                  basin: str | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    prefix = ["basin"] if basin is not None else []
    w.writerow(prefix + BENCHMARK_HEADER)
    for r in results:
        for cells in benchmark_rows(r, rows):
            w.writerow(([basin] if basin is not None else []) + cells)
    return buf.getvalue()


def runs_csv(results: Sequence[BenchmarkResult]) -> str:
    """Per-seed confusion matrices and RI/macro F1, for re-deriving every summary."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["strategy", "n", "seed", "tp", "fp", "tn", "fn", "ri_f1", "macro_f1"])
    for r in results:
        for run in r.runs:
            cm = run.confusion
            rows = run.report.rows()
            w.writerow([r.kind.display, r.n, run.seed, cm.tp, cm.fp, cm.tn, cm.fn,
                        _fmt(rows["RI"]["f1"]), _fmt(rows["macro"]["f1"])])
    return buf.getvalue()
