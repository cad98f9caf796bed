"""Evaluation in physical units, a persistence baseline and gap filling."""
from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field

import numpy as np

from .exceptions import BadWindowLength, EmptyInput, ScalerMismatch, ShapeMismatch
from .lstm import ModelParams, TrainConfig, TrainHistory, predict
from .preprocess import ScalerParams, WindowedDataset, unscale_values

DISPLAY_SCALE = 1e-6  # RMSE values are shown in units of 1e-6 m/s^2


def rmse(pred, truth) -> float:
    pred = np.ravel(pred)
    truth = np.ravel(truth)
    if pred.shape != truth.shape:
        raise ShapeMismatch(f"{pred.shape} predictions vs {truth.shape} truths")
    if pred.size == 0:
        raise EmptyInput("RMSE of nothing")
    return float(np.sqrt(np.mean((pred - truth) ** 2)))


@dataclass(eq=False)
class Trace:
    """Predictions and truth for one windowed dataset, in original units."""

    index: np.ndarray
    truth: np.ndarray
    prediction: np.ndarray


@dataclass(eq=False)
class EvalReport:
    sat_id: str
    axis: str
    retained_count: int
    train_rmse: float
    test_rmse: float
    baseline_rmse: float
    history: TrainHistory | None = None
    date: dt.date | None = None
    train_rmse_scaled: float | None = None
    test_rmse_scaled: float | None = None
    train_trace: Trace | None = None
    test_trace: Trace | None = None
    series: np.ndarray | None = field(default=None, repr=False)

    @property
    def tag(self) -> str:
        day = self.date.isoformat() if self.date else "nodate"
        return f"{self.sat_id}_{day}_{self.axis}"

    def scores_1e6(self) -> dict:
        return {
            "train": self.train_rmse / DISPLAY_SCALE,
            "test": self.test_rmse / DISPLAY_SCALE,
            "persistence": self.baseline_rmse / DISPLAY_SCALE,
        }


def _check_scaler(ds: WindowedDataset, scaler: ScalerParams):
    if scaler is None:
        raise ScalerMismatch("a fitted scaler is required")
    if ds.scaler is not None and ds.scaler != scaler:
        raise ScalerMismatch(f"{ds.origin} dataset was scaled with {ds.scaler}, got {scaler}")


def _trace(params, ds: WindowedDataset, scaler) -> tuple[Trace, float]:
    pred_scaled = predict(params, ds.X)
    scaled_rmse = rmse(pred_scaled, ds.Y)
    trace = Trace(ds.target_index(), unscale_values(ds.Y, scaler),
                  unscale_values(pred_scaled, scaler))
    return trace, scaled_rmse


def persistence_baseline(dataset: WindowedDataset, scaler: ScalerParams | None = None) -> float:
    """RMSE of predicting each target by the last value of its window.

    Returned in original units when ``scaler`` is given, else in scaled units.
    """
    if len(dataset) == 0:
        raise EmptyInput("persistence baseline needs at least one pair")
    last = dataset.X[:, -1]
    if scaler is None:
        return rmse(last, dataset.Y)
    return rmse(unscale_values(last, scaler), unscale_values(dataset.Y, scaler))


def evaluate(params: ModelParams, train_ds: WindowedDataset, test_ds: WindowedDataset,
             scaler: ScalerParams, *, config: TrainConfig | None = None, sat_id="A",
             axis="x", retained_count=None, history=None, date=None, series=None
             ) -> EvalReport:
    """Train/test RMSE in original units (m/s^2) plus the persistence baseline.

    Predictions are inverse-transformed before the error is taken.  The
    baseline uses the test pairs, i.e. the same targets as ``test_rmse``.
    """
    for ds in (train_ds, test_ds):
        _check_scaler(ds, scaler)
        if config is not None and ds.look_back != config.look_back:
            raise ShapeMismatch(
                f"{ds.origin} windows use look_back {ds.look_back}, model {config.look_back}")
    train_trace, train_scaled = _trace(params, train_ds, scaler)
    test_trace, test_scaled = _trace(params, test_ds, scaler)
    if retained_count is None:
        retained_count = len(series) if series is not None else (
            len(train_ds) + len(test_ds) + 2 * train_ds.look_back)
    return EvalReport(
        sat_id=sat_id, axis=axis, retained_count=int(retained_count),
        train_rmse=rmse(train_trace.prediction, train_trace.truth),
        test_rmse=rmse(test_trace.prediction, test_trace.truth),
        baseline_rmse=persistence_baseline(test_ds, scaler),
        history=history, date=date,
        train_rmse_scaled=train_scaled, test_rmse_scaled=test_scaled,
        train_trace=train_trace, test_trace=test_trace, series=series,
    )


@dataclass(eq=False)
class ForecastResult:
    seed_window: np.ndarray
    steps: int
    predicted: np.ndarray
    predicted_scaled: np.ndarray


def recursive_forecast(params: ModelParams, seed_window, steps: int,
                       scaler: ScalerParams | None = None, look_back: int | None = None
                       ) -> ForecastResult:
    """Roll the model forward ``steps`` times, feeding each output back in.

    ``seed_window`` holds the last ``look_back`` scaled observations before
    the gap.  Intermediate values are not clipped; the trajectory is
    inverse-transformed once at the end (left scaled if ``scaler`` is None).
    """
    window = np.array(seed_window, dtype=np.float64).ravel()
    if look_back is None:
        look_back = params.input_dim if params.input_dim > 1 else window.size
    if window.size == 0 or window.size != look_back or params.input_dim not in (1, look_back):
        raise BadWindowLength(
            f"window of {window.size} values does not fit model input width {params.input_dim}")
    if steps < 0:
        raise ValueError("steps must be >= 0")
    seed = window.copy()
    out = np.empty(steps)
    for k in range(steps):
        out[k] = predict(params, window[None, :])[0]
        window[:-1] = window[1:]
        window[-1] = out[k]
    physical = out if scaler is None else unscale_values(out, scaler)
    return ForecastResult(seed, steps, physical, out)
