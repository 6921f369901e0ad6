import math

import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_force_confusion, brute_force_report
from cyclone_ri.metrics import (
    ClassMetrics, ConfusionMatrix, PerClassMetrics, aggregate, class_metrics, confusion, evaluate,
    positive_metrics, summarize_runs,
)


class TestConfusion:
    def test_example(self):
        assert confusion([1, 1, 0, 0], [1, 0, 0, 1]) == ConfusionMatrix(tp=1, fp=1, tn=1, fn=1)

    def test_all_correct(self):
        cm = confusion([1, 0, 0, 1, 0], [1, 0, 0, 1, 0])
        assert cm.fp == cm.fn == 0 and cm.total == 5

    def test_brute_force(self, rng):
        for _ in range(1000):
            k = int(rng.integers(1, 60))
            p, t = rng.integers(0, 2, k), rng.integers(0, 2, k)
            cm = confusion(p, t)
            assert (cm.tp, cm.fp, cm.tn, cm.fn) == brute_force_confusion(p.tolist(), t.tolist())

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            confusion([1, 0], [1])
        with pytest.raises(ValueError):
            confusion([], [])


class TestClassMetrics:
    def test_two_thirds(self):
        m = positive_metrics(ConfusionMatrix(tp=2, fp=1, tn=0, fn=1))
        assert m.precision == m.recall == m.f1 == 2 / 3

    def test_degenerate(self):
        m = positive_metrics(ConfusionMatrix(tp=0, fp=0, tn=5, fn=2))
        assert m.precision == 0.0 and m.degenerate and m.f1 == 0.0

    def test_perfect(self):
        m = positive_metrics(ConfusionMatrix(tp=3, fp=0, tn=4, fn=0))
        assert (m.precision, m.recall, m.f1, m.degenerate) == (1.0, 1.0, 1.0, False)

    def test_swap(self):
        cm = ConfusionMatrix(tp=3, fp=2, tn=7, fn=1)
        a, b = class_metrics(cm), class_metrics(cm.swapped())
        assert a.ri == b.non_ri and a.non_ri == b.ri
        ea, eb = aggregate(a, 0.5, 0.5), aggregate(b, 0.5, 0.5)
        assert (ea.macro_precision, ea.macro_recall, ea.macro_f1) == (eb.macro_precision, eb.macro_recall, eb.macro_f1)


class TestAggregate:
    def per(self, p1, r1, p2, r2):
        f = lambda p, r: 2 * p * r / (p + r)
        return PerClassMetrics(ClassMetrics(p1, r1, f(p1, r1)), ClassMetrics(p2, r2, f(p2, r2)))

    def test_macro_precision(self):
        assert aggregate(self.per(0.99, 0.5, 0.55, 0.5), 0.5, 0.5).macro_precision == pytest.approx(0.77, abs=1e-15)

    def test_weighted_recall(self):
        ag = aggregate(self.per(0.5, 0.99, 0.5, 0.40), 0.9, 0.1)
        assert ag.weighted_recall == pytest.approx(0.931, abs=1e-15)

    def test_identical_classes(self):
        ag = aggregate(self.per(0.7, 0.6, 0.7, 0.6), 0.3, 0.7)
        f = 2 * 0.7 * 0.6 / 1.3
        assert ag.macro_precision == ag.weighted_precision == 0.7
        assert ag.macro_f1 == pytest.approx(f, abs=1e-15)
        assert ag.macro_f1 == pytest.approx(ag.macro_f1_classmean, abs=1e-15)
        assert ag.weighted_f1 == pytest.approx(ag.weighted_f1_classmean, abs=1e-15)

    def test_bad_weights(self):
        with pytest.raises(ValueError):
            aggregate(self.per(0.5, 0.5, 0.5, 0.5), 0.6, 0.6)


class TestOracle:
    def test_brute_force_reports(self, rng):
        for _ in range(1000):
            k = int(rng.integers(1, 80))
            bias = rng.uniform(0.02, 0.6)
            t = (rng.random(k) < bias).astype(int)
            p = (rng.random(k) < bias).astype(int)
            got = evaluate(p, t)
            ref = brute_force_report(p.tolist(), t.tolist())
            pc = got.per_class
            ag = got.aggregate
            pairs = [
                ((pc.ri.precision, pc.ri.recall, pc.ri.f1), ref["ri"]),
                ((pc.non_ri.precision, pc.non_ri.recall, pc.non_ri.f1), ref["non_ri"]),
                ((ag.macro_precision, ag.macro_recall, ag.macro_f1), ref["macro"]),
                ((ag.weighted_precision, ag.weighted_recall, ag.weighted_f1), ref["weighted"]),
            ]
            for mine, theirs in pairs:
                assert max(abs(a - b) for a, b in zip(mine, theirs)) <= 1e-12

    @settings(max_examples=300, deadline=None)
    @given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=50))
    def test_ranges_and_betweenness(self, pairs):
        p, t = zip(*pairs)
        rep = evaluate(list(p), list(t))
        for row in rep.rows().values():
            assert all(0.0 <= v <= 1.0 for v in row.values())
        ri, non = rep.per_class.ri, rep.per_class.non_ri
        ag = rep.aggregate
        for w, a, b in [(ag.weighted_precision, ri.precision, non.precision),
                        (ag.weighted_recall, ri.recall, non.recall),
                        (ag.weighted_f1_classmean, ri.f1, non.f1)]:
            assert min(a, b) - 1e-12 <= w <= max(a, b) + 1e-12

    def test_rows_layout(self):
        rows = evaluate([1, 0, 0, 1], [1, 0, 1, 1]).rows()
        assert list(rows) == ["NonRI", "RI", "macro", "weighted"]
        assert list(rows["RI"]) == ["precision", "recall", "f1", "f1_classmean"]

    def test_weights_are_test_proportions(self):
        rep = evaluate([0, 0, 0, 1], [0, 0, 0, 1])
        assert rep.aggregate.weighted_precision == 1.0
        rep = evaluate([1, 1, 1, 1], [0, 0, 0, 1])
        assert rep.aggregate.weighted_precision == pytest.approx(0.25 * 0.25 + 0.75 * 0.0)


class TestSummaries:
    def test_constant(self):
        s = summarize_runs([0.4] * 5)
        assert s.mean == pytest.approx(0.4) and s.half_width == 0.0 and s.runs == 5

    def test_two_values(self):
        s = summarize_runs([0, 1])
        assert s.mean == 0.5
        assert s.half_width == pytest.approx(1.96 * math.sqrt(0.5) / math.sqrt(2), abs=1e-15)
        assert s.half_width == pytest.approx(0.98, abs=1e-12)

    def test_scaling(self, rng):
        v = rng.random(12)
        a, b = summarize_runs(v), summarize_runs(3.5 * v)
        assert b.mean == pytest.approx(3.5 * a.mean, rel=1e-12)
        assert b.half_width == pytest.approx(3.5 * a.half_width, rel=1e-12)

    def test_too_few(self):
        with pytest.raises(ValueError):
            summarize_runs([0.3])
