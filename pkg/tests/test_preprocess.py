import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from grace_acc.exceptions import DegenerateScale, EmptyInput, TooShort
from grace_acc.ingest import AxisSeries
from grace_acc.preprocess import (
    SplitSpec, create_dataset, downsample, fit_scaler, inverse_transform, parse_order,
    prepare, remove_outliers, split, transform,
)

from oracles import iqr_filter, percentile_exact


def series(values, axis="x"):
    return AxisSeries("A", axis, np.asarray(values, dtype=float))


def test_percentile_oracle_by_hand():
    # sorted [1,2,3,4,100]: positions 1.0 and 3.0 land on order statistics
    assert percentile_exact([1, 2, 3, 4, 100], 25) == 2
    assert percentile_exact([1, 2, 3, 4, 100], 75) == 4
    # [1,2,3,4]: position 0.75 -> 1 + 0.75
    assert percentile_exact([4, 1, 3, 2], 25) == Fraction(7, 4)


def test_remove_outliers_example():
    kept, rep = remove_outliers(series([1, 2, 3, 4, 100]))
    assert list(kept.values) == [1, 2, 3, 4]
    assert (rep.q1, rep.q3, rep.min_limit, rep.max_limit) == (2.0, 4.0, -1.0, 7.0)
    assert list(rep.removed_indices) == [4]
    assert rep.retained_count == 4
    assert kept.stage == "cleaned" and kept.provenance == ("raw", "cleaned")


def test_constant_series_kept():
    kept, rep = remove_outliers(series([5, 5, 5, 5]))
    assert list(kept.values) == [5, 5, 5, 5]
    assert rep.iqr == 0


def test_remove_outliers_empty():
    with pytest.raises(EmptyInput):
        remove_outliers(np.array([]))


def test_order_preserved():
    vals = [9, -50, 1, 2, 3, 80, 4, 5]
    kept, _ = remove_outliers(np.array(vals, float))
    expected, _ = iqr_filter(vals)
    assert list(kept) == expected


float_arrays = arrays(np.float64, st.integers(1, 300),
                      elements=st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False))


@settings(max_examples=150, deadline=None)
@given(float_arrays)
def test_remove_outliers_matches_oracle(values):
    kept, rep = remove_outliers(values)
    expected, (q1, q3, lo, hi) = iqr_filter(list(values))
    assert list(kept) == expected
    assert rep.retained_count + len(rep.removed_indices) == len(values)
    assert rep.iqr == rep.q3 - rep.q1 >= 0
    assert rep.max_limit == rep.q3 + 1.5 * rep.iqr
    assert rep.min_limit == rep.q1 - 1.5 * rep.iqr
    assert np.all((kept >= rep.min_limit) & (kept <= rep.max_limit))


def test_fit_scaler_minmax():
    p = fit_scaler(series([2, 4, 6]), "minmax")
    assert (p.data_min, p.data_max) == (2, 6) and not p.degenerate


def test_fit_scaler_robust():
    p = fit_scaler(series([1, 2, 3, 4, 5]), "robust")
    assert (p.center, p.scale) == (3, 2)


def test_degenerate_flag_and_error():
    p = fit_scaler(series([7, 7, 7]), "minmax")
    assert p.degenerate
    with pytest.raises(DegenerateScale):
        transform(series([7, 7, 7]), p)
    r = fit_scaler(series([1, 1, 1, 1, 5]), "robust")
    assert r.degenerate
    with pytest.raises(DegenerateScale):
        inverse_transform(np.zeros(2), r)


def test_fit_scaler_rejects():
    with pytest.raises(EmptyInput):
        fit_scaler(np.array([]))
    with pytest.raises(ValueError):
        fit_scaler(series([1, 2]), "zscore")


def test_transform_examples():
    s = series([2, 4, 6])
    assert list(transform(s, fit_scaler(s, "minmax")).values) == [0, 0.5, 1]
    r = series([1, 2, 3, 4, 5])
    assert list(transform(r, fit_scaler(r, "robust")).values) == [-1, -0.5, 0, 0.5, 1]


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, st.integers(2, 200),
              elements=st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)),
       st.sampled_from(["minmax", "robust"]))
def test_scaler_round_trip(values, kind):
    p = fit_scaler(values, kind)
    if p.degenerate:
        return
    scaled = transform(values, p)
    if kind == "minmax":
        assert scaled.min() >= 0 and scaled.max() <= 1
    back = inverse_transform(scaled, p)
    assert np.max(np.abs(back - values)) <= 1e-12 * np.max(np.abs(values))


def test_downsample_examples():
    assert list(downsample(np.arange(6.0), 2)) == [0, 2, 4]
    x = np.arange(10.0)
    assert np.array_equal(downsample(x, 1), x)
    assert len(downsample(np.zeros(86400), 10)) == 8640


def test_downsample_series_metadata():
    s = downsample(series(np.arange(25.0)), 10)
    assert list(s.values) == [0, 10, 20]
    assert s.sample_interval_s == 10 and s.stage == "downsampled"


def test_downsample_mean():
    assert list(downsample(np.arange(7.0), 3, method="mean")) == [1, 4, 6]


@given(st.integers(1, 500), st.integers(1, 40))
def test_downsample_length(n, f):
    assert len(downsample(np.zeros(n), f)) == math.ceil(n / f)
    assert len(downsample(np.zeros(n), f, method="mean")) == math.ceil(n / f)


def test_downsample_bad_factor():
    with pytest.raises(ValueError):
        downsample(np.arange(4.0), 0)


@pytest.mark.parametrize("n,frac,expected", [
    (100, 0.7, (70, 30)),
    (10, 0.7, (7, 3)),
    # floor(0.7 * 8548) = floor(5983.6)
    (8548, 0.7, (5983, 2565)),
])
def test_split_sizes(n, frac, expected):
    tr, te = split(np.arange(float(n)), SplitSpec(frac))
    assert (len(tr), len(te)) == expected
    assert np.array_equal(np.concatenate([tr, te]), np.arange(float(n)))


def test_split_too_short():
    with pytest.raises(TooShort):
        split(np.array([1.0]))


def test_create_dataset_example():
    ds = create_dataset(np.array([10, 20, 30, 40, 50.0]), look_back=2)
    assert ds.X.tolist() == [[10, 20], [20, 30], [30, 40]]
    assert ds.Y.tolist() == [30, 40, 50]


@pytest.mark.parametrize("n,pairs", [(15, 0), (16, 1), (3, 0)])
def test_create_dataset_boundaries(n, pairs):
    ds = create_dataset(np.arange(float(n)), 15)
    assert len(ds) == pairs and ds.X.shape == (pairs, 15)


@given(st.integers(0, 80), st.integers(1, 20))
def test_window_invariant(n, look_back):
    src = np.arange(float(n)) * 3 + 1
    ds = create_dataset(src, look_back)
    assert len(ds) == max(0, n - look_back)
    for i in range(len(ds)):
        for j in range(look_back):
            assert ds.X[i, j] == src[i + j]
        assert ds.Y[i] == src[i + look_back]


def test_parse_order():
    assert parse_order("downsample, clean,scale") == ("downsample", "clean", "scale")
    with pytest.raises(ValueError):
        parse_order("clean,scale")
    with pytest.raises(ValueError):
        parse_order("clean,scale,scale")


def test_prepare_chain(rng):
    raw = AxisSeries("B", "y", np.concatenate([rng.normal(0, 1, 2000), [40.0, -40.0]]))
    prep = prepare(raw)
    assert prep.outliers.retained_count <= 2000
    assert prep.series.provenance == ("raw", "cleaned", "scaled", "downsampled")
    assert prep.series.sample_interval_s == 10
    assert len(prep.series) == math.ceil(prep.outliers.retained_count / 10)
    assert len(prep.train) == math.floor(0.7 * len(prep.series))
    assert prep.series.values.min() == 0.0 or prep.series.values.min() > 0
    # test windows start fresh at the split
    assert prep.test_ds.X[0].tolist() == prep.test.values[:15].tolist()
    assert prep.test_ds.target_index()[0] == len(prep.train) + 15


def test_prepare_downsample_first(rng):
    raw = AxisSeries("A", "x", rng.normal(0, 1, 86400))
    prep = prepare(raw, order="downsample,clean,scale")
    assert len(prep.stages["downsample"]) == 8640
    assert prep.retained_count == prep.outliers.retained_count <= 8640
