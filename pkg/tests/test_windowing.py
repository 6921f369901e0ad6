import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_cyclone
from oracles import brute_force_label, brute_force_windows
from cyclone_ri.besttrack import split_by_period
from cyclone_ri.errors import ConfigError, DataError
from cyclone_ri.windowing import (
    Label, LabelRule, WindowingConfig, apply_scaler, build_all_windows, build_windows, class_stats,
    fit_scaler, fit_scaler_array, label_window, ri_onsets, stack, window_count, windows_to_csv,
)

LAST = WindowingConfig(label_rule=LabelRule.LAST_ANCHORED)


class TestLabel:
    def test_any_span_rise(self):
        assert label_window([45, 50, 55, 60, 75, 90]) is Label.RI

    def test_flat(self):
        assert label_window([40] * 6) is Label.NON_RI

    def test_rules_diverge(self):
        w = [50, 60, 70, 80, 81, 79]
        assert label_window(w) is Label.RI
        assert label_window(w, LAST) is Label.NON_RI

    def test_exact_threshold_inclusive(self):
        assert label_window([40, 40, 40, 40, 70]) is Label.RI
        assert label_window([40, 40, 40, 40, 70], WindowingConfig(n=5, strict=True)) is Label.NON_RI

    def test_short_window_rejected(self):
        with pytest.raises(ConfigError):
            label_window([40, 50, 60, 70])
        with pytest.raises(ConfigError):
            WindowingConfig(n=4)

    def test_label_strings(self):
        assert str(Label.RI) == "RI" and str(Label.NON_RI) == "NonRI"

    def test_onsets(self):
        assert ri_onsets([30, 35, 40, 50, 60, 70, 75]) == [0, 1, 2]


class TestOracle:
    @settings(max_examples=300, deadline=None)
    @given(st.lists(st.integers(15, 160), min_size=5, max_size=30), st.integers(5, 9),
           st.sampled_from(list(LabelRule)), st.booleans(), st.integers(1, 3))
    def test_matches_brute_force(self, winds, n, rule, strict, stride):
        cfg = WindowingConfig(n=n, label_rule=rule, strict=strict, stride=stride)
        got = [int(w.label) for w in build_windows(make_cyclone(winds), cfg)]
        assert got == brute_force_windows(winds, n, stride, rule=rule.value, strict=strict)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(1, 60), st.integers(5, 10), st.integers(1, 5))
    def test_count_formula(self, length, n, stride):
        c = make_cyclone([40] * length)
        got = len(build_windows(c, WindowingConfig(n=n, stride=stride)))
        assert got == window_count(length, n, stride)
        assert got == (0 if length < n else (length - n) // stride + 1)


class TestBuild:
    @pytest.mark.parametrize("length,expected", [(10, 5), (6, 1), (5, 0)])
    def test_counts(self, length, expected):
        assert len(build_windows(make_cyclone([40] * length))) == expected

    def test_window_contents(self):
        c = make_cyclone([30, 35, 40, 45, 50, 55, 60])
        ws = build_windows(c)
        assert ws[1].features.shape == (6, 3)
        assert ws[1].features[:, 2].tolist() == [35, 40, 45, 50, 55, 60]
        assert ws[1].window_id == "SH011995:1"
        assert ws[1].start_time == c.points[1].timestamp

    def test_labels_invariant_under_scaling(self):
        c = make_cyclone([30, 35, 45, 60, 75, 80, 80, 70])
        scaler = fit_scaler(build_windows(c))
        raw = build_windows(c)
        scaled = build_windows(c, scaler=scaler)
        assert [w.label for w in raw] == [w.label for w in scaled]
        assert scaled[0].features.max() <= 1.0

    def test_class_stats(self):
        c_ri = make_cyclone([30, 30, 30, 30, 70, 70])
        c_non = make_cyclone([40] * 6)
        ws = build_all_windows([c_ri] + [c_non] * 19)
        s = class_stats(ws)
        assert (s.total, s.ri, s.minority_pct) == (20, 1, 5.0)
        assert class_stats(ws * 5).minority_pct == 5.0

    def test_class_stats_empty(self):
        with pytest.raises(DataError):
            class_stats([])

    def test_csv(self):
        text = windows_to_csv(build_windows(make_cyclone([40] * 6)))
        header, row = text.splitlines()
        assert header.split(",")[:6] == ["cyclone_id", "start_index", "label", "f_0_lat", "f_0_lon", "f_0_wind"]
        assert len(row.split(",")) == 3 + 18


class TestScaler:
    def test_wind_range(self):
        s = fit_scaler_array(np.array([[0.0, 0.0, 30.0], [1.0, 1.0, 130.0]]))
        out = s.transform(np.array([[0.5, 0.5, 30.0], [0.5, 0.5, 130.0], [0.5, 0.5, 80.0]]))
        assert out[:, 2].tolist() == [0.0, 1.0, 0.5]

    def test_constant_column(self):
        s = fit_scaler_array(np.array([[1.0, 170.0, 30.0], [2.0, 170.0, 40.0]]))
        assert s.transform(np.array([[1.5, 170.0, 35.0]]))[0, 1] == 0.0

    def test_round_trip(self, rng):
        x = rng.uniform([-40, 0, 15], [-5, 359, 160], size=(200, 3))
        s = fit_scaler_array(x)
        back = s.inverse_transform(s.transform(x))
        np.testing.assert_allclose(back, x, rtol=1e-9)

    def test_train_only(self, si_split):
        cfg = WindowingConfig()
        train = build_all_windows(si_split.train, cfg)
        test = build_all_windows(si_split.test, cfg)
        joint = np.concatenate([w.features for w in train + test])
        train_max = np.concatenate([w.features for w in train]).max(axis=0)
        s = fit_scaler(train)
        np.testing.assert_array_equal(s.maxs, train_max)
        # the detection only means something if test pushes past the train range somewhere
        assert (joint.max(axis=0) > train_max).any() or (joint.min(axis=0) < s.mins).any()

    def test_train_only_synthetic(self):
        train = [make_cyclone([30, 40, 50, 60, 70, 80])]
        test = [make_cyclone([30, 60, 90, 120, 150, 155], cid="SH021996")]
        s = fit_scaler(build_all_windows(train))
        assert s.maxs[2] == 80.0
        scaled = apply_scaler(s, build_all_windows(test))
        assert scaled[0].features[:, 2].max() > 1.0

    def test_serialization(self):
        s = fit_scaler(build_windows(make_cyclone([30, 40, 50, 60, 70, 80])))
        from cyclone_ri.windowing import FeatureScaler
        back = FeatureScaler.from_dict(s.to_dict())
        np.testing.assert_array_equal(back.mins, s.mins)
        np.testing.assert_array_equal(back.maxs, s.maxs)


def test_stack_shapes():
    x, y = stack(build_windows(make_cyclone([30, 30, 30, 30, 70, 70, 70])))
    assert x.shape == (2, 6, 3) and y.tolist() == [1, 1]


def test_split_windows_no_shared_cyclones(si_split):
    train = {w.cyclone_id for w in build_all_windows(si_split.train)}
    test = {w.cyclone_id for w in build_all_windows(si_split.test)}
    assert not train & test


def test_brute_force_oracle_self_check():
    # frozen hand-computed values anchor the oracle itself
    assert brute_force_label([45, 50, 55, 60, 75, 90]) == 1
    assert brute_force_label([50, 60, 70, 80, 81, 79], rule="last_anchored") == 0
    assert brute_force_label([40, 40, 40, 40, 70], strict=True) == 0


def test_split_by_period_on_fixture(si_split):
    assert len(si_split.train) == 50 and len(si_split.test) == 16
    assert split_by_period(si_split.train + si_split.test).train == si_split.train
