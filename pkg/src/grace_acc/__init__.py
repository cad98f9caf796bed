"""LSTM forecasting of GRACE accelerometer (ACC1B) data.

Parse daily 1 Hz accelerometer files, clean/scale/downsample/window each
axis, train a small numpy LSTM and report RMSE in physical units.
"""
from .exceptions import (
    DataError, DegenerateScale, EmptyInput, GraceAccError, MalformedRecord,
    MissingHeaderTerminator, NonMonotonicTime, NumericFailure, ShapeMismatch,
)
from .forecast import EvalReport, evaluate, persistence_baseline, recursive_forecast, rmse
from .ingest import AxisSeries, DailyAccFile, RecordSchema, extract_axis, parse_acc1b
from .lstm import ModelParams, TrainConfig, TrainHistory, fit, init_params, predict
from .preprocess import (
    ScalerParams, SplitSpec, WindowedDataset, create_dataset, downsample, fit_scaler,
    inverse_transform, prepare, remove_outliers, split, transform,
)

__version__ = "0.1.0"
