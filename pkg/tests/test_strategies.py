import itertools

import numpy as np
import pytest

from conftest import make_cyclone
from cyclone_ri import strategies as strat
from cyclone_ri.metrics import evaluate_cm
from cyclone_ri.errors import BenchmarkError, ConfigError, DataError, TrainingDivergedError
from cyclone_ri.nn.network import classifier_spec
from cyclone_ri.strategies import (
    BENCHMARK_HEADER, StrategyKind, StrategySpec, benchmark_csv, evaluate_classifier, fuse, predict_proba,
    predicted_class, run_benchmark, runs_csv, train_strategy,
)
from cyclone_ri.windowing import LAT, LON, build_all_windows

FAST = classifier_spec(3, hidden_size=6, epochs=3)


def spec(kind, **kw):
    return StrategySpec(kind, network=FAST, **kw)


@pytest.fixture(scope="module")
def windows(si_split):
    return build_all_windows(si_split.train), build_all_windows(si_split.test)


class TestMembers:
    @pytest.mark.parametrize("kind,sizes,features", [
        (StrategyKind.U, (1,), ((2,),)),
        (StrategyKind.M, (3,), ((0, 1, 2),)),
        (StrategyKind.DA_M, (3,), ((0, 1, 2),)),
        (StrategyKind.E, (1, 1, 1), ((2,), (0,), (1,))),
        (StrategyKind.HE, (1, 2), ((2,), (0, 1))),
    ])
    def test_member_layout(self, kind, sizes, features, windows):
        clf = train_strategy(spec(kind), windows[0], seed=0)
        assert tuple(m.spec.input_size for m in clf.members) == sizes
        assert tuple(m.features for m in clf.members) == features
        assert tuple(m.params["W_x"].shape[0] for m in clf.members) == sizes

    def test_parse(self):
        assert StrategyKind.parse("da-m-lstm") is StrategyKind.DA_M
        assert StrategyKind.parse(" he ") is StrategyKind.HE
        with pytest.raises(ValueError):
            StrategyKind.parse("X")

    def test_single_class_rejected(self):
        ws = build_all_windows([make_cyclone([40] * 10)])
        with pytest.raises(DataError):
            train_strategy(spec(StrategyKind.M), ws, seed=0)

    def test_unknown_fusion(self):
        with pytest.raises(ValueError):
            StrategySpec(StrategyKind.E, fusion="vote")


class TestFusion:
    def test_mean(self):
        np.testing.assert_allclose(fuse([np.array([[0.8, 0.2]]), np.array([[0.6, 0.4]])]), [[0.7, 0.3]])

    def test_idempotent(self, rng):
        p = rng.dirichlet([1, 1], 10)
        np.testing.assert_allclose(fuse([p, p, p]), p, rtol=0, atol=1e-15)

    def test_sums_to_one_and_permutation_invariant(self, rng):
        members = [rng.dirichlet([1, 1], 50) for _ in range(3)]
        ref = fuse(members)
        assert np.all(np.abs(ref.sum(axis=1) - 1) < 1e-12)
        for perm in itertools.permutations(members):
            np.testing.assert_allclose(fuse(list(perm)), ref, rtol=0, atol=1e-15)

    def test_duplicated_members_keep_argmax(self, rng):
        a, b = rng.dirichlet([1, 1], 100), rng.dirichlet([1, 1], 100)
        np.testing.assert_array_equal(predicted_class(fuse([a, b])), predicted_class(fuse([a, a, b, b])))

    def test_tie_goes_to_nonri(self):
        assert predicted_class(np.array([[0.5, 0.5], [0.4, 0.6], [0.6, 0.4]])).tolist() == [0, 1, 0]


class TestPrediction:
    def test_u_ignores_position(self, windows):
        train, test = windows
        clf = train_strategy(spec(StrategyKind.U), train, seed=1)
        x = np.stack([w.features for w in test])
        zeroed = x.copy()
        zeroed[:, :, [LAT, LON]] = 0.0
        np.testing.assert_array_equal(predict_proba(clf, x), predict_proba(clf, zeroed))

    def test_window_order_irrelevant(self, windows):
        train, test = windows
        clf = train_strategy(spec(StrategyKind.HE), train, seed=1)
        p = predict_proba(clf, test)
        order = np.random.default_rng(0).permutation(len(test))
        np.testing.assert_allclose(predict_proba(clf, [test[i] for i in order]), p[order], rtol=0, atol=1e-14)

    def test_reproducible(self, windows):
        train, test = windows
        a = evaluate_classifier(train_strategy(spec(StrategyKind.E), train, seed=3), test)
        b = evaluate_classifier(train_strategy(spec(StrategyKind.E), train, seed=3), test)
        assert a.report == b.report
        np.testing.assert_array_equal(a.predictions, b.predictions)

    def test_scaler_train_only(self, windows):
        train, _ = windows
        clf = train_strategy(spec(StrategyKind.M), train, seed=0)
        np.testing.assert_array_equal(clf.scaler.maxs, np.concatenate([w.features for w in train]).max(axis=0))


class TestBenchmark:
    def test_runs_and_csv(self, si_split):
        res = run_benchmark(spec(StrategyKind.M), si_split, seeds=[0, 1, 2])
        assert [r.seed for r in res.runs] == [0, 1, 2] and not res.diverged
        again = run_benchmark(spec(StrategyKind.M), si_split, seeds=[0, 1, 2])
        assert [r.report for r in res.runs] == [r.report for r in again.runs]
        for run in res.runs:
            assert evaluate_cm(run.confusion) == run.report
        text = benchmark_csv([res])
        lines = text.splitlines()
        assert lines[0].split(",") == BENCHMARK_HEADER
        assert lines[0].startswith("strategy,n,class_or_aggregate,precision_mean,precision_ci,recall_mean,recall_ci,f1_mean,f1_ci")
        assert [l.split(",")[2] for l in lines[1:]] == ["NonRI", "RI", "macro", "weighted"]
        assert len(runs_csv([res]).splitlines()) == 4

    def test_parallel_matches_serial(self, si_split):
        a = run_benchmark(spec(StrategyKind.U), si_split, seeds=[0, 1])
        b = run_benchmark(spec(StrategyKind.U), si_split, seeds=[0, 1], workers=2)
        assert [r.report for r in a.runs] == [r.report for r in b.runs]

    def test_constant_metric_zero_ci(self, si_split):
        res = run_benchmark(spec(StrategyKind.M), si_split, seeds=[5, 5])
        assert all(s.half_width == 0.0 for row in res.summary.values() for s in row.values())

    def test_needs_two_seeds(self, si_split):
        with pytest.raises(ConfigError):
            run_benchmark(spec(StrategyKind.M), si_split, seeds=[0])

    def test_divergence_budget(self, si_split, monkeypatch):
        real = strat.train_strategy

        def flaky(s, w, seed):
            if seed in bad:
                raise TrainingDivergedError(4)
            return real(s, w, seed)

        monkeypatch.setattr(strat, "train_strategy", flaky)
        bad = {3}
        res = run_benchmark(spec(StrategyKind.U), si_split, seeds=range(5))
        assert res.diverged == [3] and len(res.runs) == 4
        bad = {0, 1}
        with pytest.raises(BenchmarkError):
            run_benchmark(spec(StrategyKind.U), si_split, seeds=range(5))

    def test_basin_column(self, si_split):
        res = run_benchmark(spec(StrategyKind.U), si_split, seeds=[0, 1])
        lines = benchmark_csv([res], rows=("RI", "macro"), basin="South Indian").splitlines()
        assert lines[0].startswith("basin,strategy") and lines[1].startswith("South Indian,U-LSTM,6,RI")
