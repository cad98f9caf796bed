import datetime as dt

import numpy as np
import pytest

from grace_acc.exceptions import BadWindowLength, ScalerMismatch, ShapeMismatch
from grace_acc.forecast import (
    DISPLAY_SCALE, evaluate, persistence_baseline, recursive_forecast, rmse,
)
from grace_acc.lstm import LAYOUTS, TrainConfig, init_params, predict
from grace_acc.preprocess import (
    ScalerParams, create_dataset, fit_scaler, split, transform,
)


def make_data(rng, n=300, look_back=15):
    raw = 1e-6 * (np.sin(np.arange(n) / 7.0) + 0.1 * rng.normal(size=n))
    scaler = fit_scaler(raw, "minmax")
    scaled = transform(raw, scaler)
    tr, te = split(scaled)
    return (raw, scaler,
            create_dataset(tr, look_back, "train", scaler, 0),
            create_dataset(te, look_back, "test", scaler, len(tr)))


def test_rmse_basic():
    assert rmse([1, 2, 3], [1, 2, 3]) == 0
    assert rmse([0, 0], [3, 4]) == pytest.approx(np.sqrt(12.5))


def test_persistence_constant():
    ds = create_dataset(np.full(30, 0.4), 15)
    assert persistence_baseline(ds) == 0


def test_persistence_alternating():
    ds = create_dataset(np.tile([0.0, 1.0], 20), 15)
    assert persistence_baseline(ds) == 1.0


def test_persistence_units(rng):
    _, scaler, train_ds, _ = make_data(rng)
    scaled = persistence_baseline(train_ds)
    assert persistence_baseline(train_ds, scaler) == pytest.approx(scaled * scaler.span,
                                                                  rel=1e-12)


def test_evaluate_units_and_linearity(rng):
    _, scaler, train_ds, test_ds = make_data(rng)
    params = init_params(TrainConfig(), 0)
    rep = evaluate(params, train_ds, test_ds, scaler, sat_id="B", axis="y",
                   date=dt.date(2005, 5, 30))
    assert rep.tag == "B_2005-05-30_y"
    assert rep.train_rmse == pytest.approx(rep.train_rmse_scaled * (scaler.data_max - scaler.data_min),
                                           rel=1e-12)
    assert rep.test_rmse == pytest.approx(rep.test_rmse_scaled * (scaler.data_max - scaler.data_min),
                                          rel=1e-12)
    assert rep.scores_1e6()["test"] == pytest.approx(rep.test_rmse / DISPLAY_SCALE)
    # model and baseline share target indices
    assert np.array_equal(rep.test_trace.index, test_ds.target_index())
    assert rep.baseline_rmse == persistence_baseline(test_ds, scaler)


def test_evaluate_perfect_predictor(rng, monkeypatch):
    _, scaler, train_ds, test_ds = make_data(rng)
    lookup = {tuple(x): y for ds in (train_ds, test_ds) for x, y in zip(ds.X, ds.Y)}
    import grace_acc.forecast as fc
    monkeypatch.setattr(fc, "predict", lambda p, X: np.array([lookup[tuple(x)] for x in X]))
    rep = evaluate(None, train_ds, test_ds, scaler)
    assert rep.train_rmse == 0 and rep.test_rmse == 0


def test_evaluate_scaler_mismatch(rng):
    _, scaler, train_ds, test_ds = make_data(rng)
    other = ScalerParams("minmax", data_min=0.0, data_max=1.0)
    params = init_params(TrainConfig(), 0)
    with pytest.raises(ScalerMismatch):
        evaluate(params, train_ds, test_ds, other)
    with pytest.raises(ShapeMismatch):
        evaluate(params, train_ds, test_ds, scaler, config=TrainConfig(look_back=10))


@pytest.mark.parametrize("layout", LAYOUTS)
def test_recursive_forecast_chaining(layout, rng):
    params = init_params(TrainConfig(input_layout=layout), 4)
    seed = rng.uniform(size=15)
    assert recursive_forecast(params, seed, 0, look_back=15).predicted.size == 0
    one = recursive_forecast(params, seed, 1, look_back=15)
    assert one.predicted[0] == predict(params, seed[None, :])[0]
    # chain three single-step predictions by hand
    w = list(seed)
    manual = []
    for _ in range(3):
        y = predict(params, np.array([w]))[0]
        manual.append(y)
        w = w[1:] + [y]
    three = recursive_forecast(params, seed, 3, look_back=15)
    assert three.predicted.tolist() == manual
    longer = recursive_forecast(params, seed, 8, look_back=15)
    assert longer.predicted[:3].tolist() == manual


def test_recursive_forecast_unscales(rng):
    params = init_params(TrainConfig(), 4)
    scaler = ScalerParams("minmax", data_min=-2e-6, data_max=3e-6)
    res = recursive_forecast(params, rng.uniform(size=15), 5, scaler)
    assert np.allclose(res.predicted, res.predicted_scaled * 5e-6 - 2e-6, rtol=1e-12, atol=0)


def test_recursive_forecast_bad_window(rng):
    params = init_params(TrainConfig(), 0)
    with pytest.raises(BadWindowLength):
        recursive_forecast(params, np.zeros(14), 3)
    steps = init_params(TrainConfig(input_layout=LAYOUTS[1]), 0)
    with pytest.raises(BadWindowLength):
        recursive_forecast(steps, np.zeros(14), 3, look_back=15)
