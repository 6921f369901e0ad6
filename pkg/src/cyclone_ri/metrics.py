"""Confusion-matrix metrics for the binary RI task and run aggregation.

RI is the positive class. Macro and weighted F1 are the harmonic mean of
the corresponding aggregate precision and recall; the more common
mean-of-class-F1 variants are reported alongside as ``*_f1_classmean``.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

Z_95 = 1.96


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def swapped(self) -> "ConfusionMatrix":
        """The same matrix with NonRI treated as positive."""
        return ConfusionMatrix(tp=self.tn, fp=self.fn, tn=self.tp, fn=self.fp)

    def to_dict(self) -> dict:
        return asdict(self)


def confusion(predictions: Sequence[int], labels: Sequence[int]) -> ConfusionMatrix:
    p = np.asarray(predictions).astype(bool)
    t = np.asarray(labels).astype(bool)
    if p.shape != t.shape:
        raise ValueError(f"{len(p)} predictions vs {len(t)} labels")
    if p.size == 0:
        raise ValueError("confusion matrix needs at least one prediction")
    return ConfusionMatrix(
        tp=int(np.sum(p & t)), fp=int(np.sum(p & ~t)),
        tn=int(np.sum(~p & ~t)), fn=int(np.sum(~p & t)),
    )


def _ratio(num: float, den: float) -> tuple[float, bool]:
    return (num / den, False) if den > 0 else (0.0, True)


def harmonic(a: float, b: float) -> float:
    return 2.0 * a * b / (a + b) if a + b > 0 else 0.0


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    degenerate: bool = False


@dataclass(frozen=True)
class PerClassMetrics:
    ri: ClassMetrics
    non_ri: ClassMetrics


def positive_metrics(cm: ConfusionMatrix) -> ClassMetrics:
    p, dp = _ratio(cm.tp, cm.tp + cm.fp)
    r, dr = _ratio(cm.tp, cm.tp + cm.fn)
    return ClassMetrics(p, r, harmonic(p, r), dp or dr)


def class_metrics(cm: ConfusionMatrix) -> PerClassMetrics:
    return PerClassMetrics(ri=positive_metrics(cm), non_ri=positive_metrics(cm.swapped()))


@dataclass(frozen=True)
class AggregateMetrics:
    macro_precision: float
    macro_recall: float
    macro_f1: float
    macro_f1_classmean: float
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float
    weighted_f1_classmean: float


def aggregate(cls: PerClassMetrics, w_ri: float, w_non_ri: float) -> AggregateMetrics:
    if abs(w_ri + w_non_ri - 1.0) > 1e-9:
        raise ValueError(f"class weights sum to {w_ri + w_non_ri}, not 1")
    a, b = cls.ri, cls.non_ri
    mp = (a.precision + b.precision) / 2
    mr = (a.recall + b.recall) / 2
    wp = w_ri * a.precision + w_non_ri * b.precision
    wr = w_ri * a.recall + w_non_ri * b.recall
    return AggregateMetrics(
        macro_precision=mp, macro_recall=mr, macro_f1=harmonic(mp, mr),
        macro_f1_classmean=(a.f1 + b.f1) / 2,
        weighted_precision=wp, weighted_recall=wr, weighted_f1=harmonic(wp, wr),
        weighted_f1_classmean=w_ri * a.f1 + w_non_ri * b.f1,
    )


@dataclass(frozen=True)
class EvaluationReport:
    confusion: ConfusionMatrix
    per_class: PerClassMetrics
    aggregate: AggregateMetrics

    def rows(self) -> dict[str, dict[str, float]]:
        """Flat metric table keyed by row name (RI, NonRI, macro, weighted)."""
        ag = self.aggregate
        return {
            "NonRI": _row(self.per_class.non_ri.precision, self.per_class.non_ri.recall,
                          self.per_class.non_ri.f1, self.per_class.non_ri.f1),
            "RI": _row(self.per_class.ri.precision, self.per_class.ri.recall,
                       self.per_class.ri.f1, self.per_class.ri.f1),
            "macro": _row(ag.macro_precision, ag.macro_recall, ag.macro_f1, ag.macro_f1_classmean),
            "weighted": _row(ag.weighted_precision, ag.weighted_recall, ag.weighted_f1,
                             ag.weighted_f1_classmean),
        }


def _row(p, r, f1, f1c):
    return {"precision": p, "recall": r, "f1": f1, "f1_classmean": f1c}


def evaluate_cm(cm: ConfusionMatrix) -> EvaluationReport:
    """Metrics with weights equal to the class proportions of the evaluated set."""
    per = class_metrics(cm)
    pos = cm.tp + cm.fn
    w_ri = pos / cm.total
    return EvaluationReport(cm, per, aggregate(per, w_ri, 1.0 - w_ri))


def evaluate(predictions, labels) -> EvaluationReport:
    return evaluate_cm(confusion(predictions, labels))


@dataclass(frozen=True)
class Summary:
    mean: float
    half_width: float
    runs: int

    def __str__(self) -> str:
        return f"{self.mean:.4f}±{self.half_width:.4f}"


def summarize_runs(values: Sequence[float]) -> Summary:
    """Mean and normal-approximation 95% CI half-width 1.96 * s / sqrt(R)."""
    vals = [float(v) for v in values]
    if len(vals) < 2:
        raise ValueError(f"need at least 2 runs to summarize, got {len(vals)}")
    s = statistics.stdev(vals)
    return Summary(statistics.fmean(vals), Z_95 * s / math.sqrt(len(vals)), len(vals))
