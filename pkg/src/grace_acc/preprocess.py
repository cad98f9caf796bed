"""Cleaning, scaling, decimation, splitting and windowing of axis series."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exceptions import DegenerateScale, EmptyInput, ScalerMismatch, TooShort
from .ingest import AxisSeries

IQR_MULTIPLIER = 1.5
PIPELINE_STEPS = ("clean", "scale", "downsample")
DEFAULT_ORDER = ("clean", "scale", "downsample")


@dataclass(frozen=True, eq=False)
class OutlierReport:
    q1: float
    q3: float
    iqr: float
    min_limit: float
    max_limit: float
    removed_indices: np.ndarray
    retained_count: int

    @property
    def removed_count(self) -> int:
        return len(self.removed_indices)

    def as_dict(self) -> dict:
        return {
            "q1": self.q1,
            "q3": self.q3,
            "iqr": self.iqr,
            "min_limit": self.min_limit,
            "max_limit": self.max_limit,
            "removed_count": self.removed_count,
            "retained_count": self.retained_count,
        }


def _values(series) -> np.ndarray:
    if isinstance(series, AxisSeries):
        return series.values
    return np.asarray(series, dtype=np.float64)


def outlier_mask(values, multiplier: float = IQR_MULTIPLIER):
    """Boolean mask of points outside the Tukey fences, plus the fence stats."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise EmptyInput("cannot compute quartiles of an empty series")
    q1 = np.percentile(values, 25)
    q3 = np.percentile(values, 75)
    iqr = q3 - q1
    max_limit = q3 + multiplier * iqr
    min_limit = q1 - multiplier * iqr
    mask = np.logical_or(values > max_limit, values < min_limit)
    return mask, (float(q1), float(q3), float(iqr), float(min_limit), float(max_limit))


def remove_outliers(series, multiplier: float = IQR_MULTIPLIER):
    """Drop points strictly outside ``[q1 - 1.5 IQR, q3 + 1.5 IQR]``.

    Quartiles use linear interpolation between order statistics.  Returns the
    cleaned series (same type as the input) and an :class:`OutlierReport`.
    """
    values = _values(series)
    mask, (q1, q3, iqr, lo, hi) = outlier_mask(values, multiplier)
    kept = values[~mask]
    report = OutlierReport(
        q1=q1, q3=q3, iqr=iqr, min_limit=lo, max_limit=hi,
        removed_indices=np.flatnonzero(mask), retained_count=int(kept.size),
    )
    if isinstance(series, AxisSeries):
        return series.derive(kept, "cleaned"), report
    return kept, report


@dataclass(frozen=True)
class ScalerParams:
    """Fitted parameters of a min-max or robust (median/IQR) scaler."""

    kind: str
    data_min: float | None = None
    data_max: float | None = None
    center: float | None = None
    scale: float | None = None

    @property
    def degenerate(self) -> bool:
        if self.kind == "minmax":
            return self.data_max == self.data_min
        return self.scale == 0.0

    @property
    def offset(self) -> float:
        return self.data_min if self.kind == "minmax" else self.center

    @property
    def span(self) -> float:
        """Multiplier taking a scaled difference back to original units."""
        return self.data_max - self.data_min if self.kind == "minmax" else self.scale

    def as_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}

    @classmethod
    def from_dict(cls, d: dict) -> "ScalerParams":
        return cls(**d)


def fit_scaler(series, kind: str = "minmax") -> ScalerParams:
    values = _values(series)
    if values.size == 0:
        raise EmptyInput("cannot fit a scaler to an empty series")
    if kind == "minmax":
        return ScalerParams("minmax", data_min=float(values.min()), data_max=float(values.max()))
    if kind == "robust":
        q1, med, q3 = np.percentile(values, [25, 50, 75])
        return ScalerParams("robust", center=float(med), scale=float(q3 - q1))
    raise ValueError(f"unknown scaler kind {kind!r}")


def _check(params: ScalerParams):
    if params.kind not in ("minmax", "robust"):
        raise ScalerMismatch(f"unknown scaler kind {params.kind!r}")
    if params.degenerate:
        what = "max == min" if params.kind == "minmax" else "zero IQR"
        raise DegenerateScale(f"{params.kind} scaler is degenerate ({what})")


def scale_values(values, params: ScalerParams) -> np.ndarray:
    _check(params)
    return (np.asarray(values, dtype=np.float64) - params.offset) / params.span


def unscale_values(values, params: ScalerParams) -> np.ndarray:
    _check(params)
    return np.asarray(values, dtype=np.float64) * params.span + params.offset


def transform(series, params: ScalerParams):
    if isinstance(series, AxisSeries):
        return series.derive(scale_values(series.values, params), "scaled")
    return scale_values(series, params)


def inverse_transform(series, params: ScalerParams):
    if isinstance(series, AxisSeries):
        # back in physical units; the stage label keeps the last real step
        prior = series.provenance[-2] if len(series.provenance) > 1 else "raw"
        return series.derive(unscale_values(series.values, params), prior)
    return unscale_values(series, params)


def downsample(series, factor: int = 10, method: str = "stride"):
    """Keep every ``factor``-th sample, starting with the first.

    ``method="mean"`` averages consecutive blocks instead (the last block may
    be short).  Either way the result has ``ceil(n / factor)`` samples.
    """
    if int(factor) != factor or factor < 1:
        raise ValueError(f"factor must be a positive integer, got {factor!r}")
    factor = int(factor)
    values = _values(series)
    if method == "stride":
        out = values[::factor].copy()
    elif method == "mean":
        starts = np.arange(0, values.size, factor)
        out = np.add.reduceat(values, starts) / np.diff(np.append(starts, values.size))
    else:
        raise ValueError(f"unknown downsample method {method!r}")
    if isinstance(series, AxisSeries):
        return series.derive(out, "downsampled",
                             sample_interval_s=series.sample_interval_s * factor)
    return out


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.70

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")

    def index(self, length: int) -> int:
        return math.floor(self.train_fraction * length)


def split(series, spec: SplitSpec = SplitSpec()):
    """Contiguous split: the first ``floor(f * n)`` values train, the rest test."""
    values = _values(series)
    n = values.size
    if n < 2:
        raise TooShort(f"need at least 2 values to split, got {n}")
    k = spec.index(n)
    if k == 0 or k == n:
        raise TooShort(f"train fraction {spec.train_fraction} leaves an empty side of {n}")
    if isinstance(series, AxisSeries):
        return (
            AxisSeries(**{**series.__dict__, "values": values[:k]}),
            AxisSeries(**{**series.__dict__, "values": values[k:]}),
        )
    return values[:k].copy(), values[k:].copy()


@dataclass(frozen=True, eq=False)
class WindowedDataset:
    """Sliding-window pairs: ``X[i] = s[i:i+look_back]``, ``Y[i] = s[i+look_back]``."""

    look_back: int
    X: np.ndarray
    Y: np.ndarray
    origin: str = "train"
    scaler: ScalerParams | None = None
    offset: int = 0

    def __len__(self):
        return len(self.Y)

    def target_index(self) -> np.ndarray:
        """Position of each target within the series the split was taken from."""
        return self.offset + self.look_back + np.arange(len(self.Y))


def create_dataset(series, look_back: int = 15, origin: str = "train",
                   scaler: ScalerParams | None = None, offset: int = 0) -> WindowedDataset:
    if look_back < 1:
        raise ValueError("look_back must be >= 1")
    values = _values(series)
    n_pairs = max(0, values.size - look_back)
    if n_pairs:
        X = np.lib.stride_tricks.sliding_window_view(values, look_back)[:n_pairs].copy()
    else:
        X = np.empty((0, look_back))
    Y = values[look_back:].copy()
    return WindowedDataset(look_back, X, Y, origin, scaler, offset)


@dataclass(frozen=True, eq=False)
class Prepared:
    """Everything the chain produced for one axis."""

    raw: AxisSeries
    stages: dict
    series: AxisSeries
    outliers: OutlierReport | None
    scaler: ScalerParams
    train: AxisSeries
    test: AxisSeries
    train_ds: WindowedDataset
    test_ds: WindowedDataset

    @property
    def retained_count(self) -> int:
        return len(self.series)


def parse_order(order) -> tuple[str, ...]:
    """Accept ``"clean,scale,downsample"`` or a sequence; must be a permutation."""
    if isinstance(order, str):
        steps = tuple(s.strip() for s in order.split(",") if s.strip())
    else:
        steps = tuple(order)
    if sorted(steps) != sorted(PIPELINE_STEPS):
        raise ValueError(
            f"order must be a permutation of {','.join(PIPELINE_STEPS)}, got {order!r}"
        )
    return steps


def prepare(raw: AxisSeries, order: Sequence[str] = DEFAULT_ORDER, scaler_kind="minmax",
            factor: int = 10, split_spec: SplitSpec = SplitSpec(), look_back: int = 15,
            downsample_method: str = "stride", iqr_multiplier: float = IQR_MULTIPLIER
            ) -> Prepared:
    """Run the whole chain for one axis.

    The scaler is fitted on the full series as it stands when the scale step
    runs, before the train/test split.  Train and test are windowed
    independently, so the first test target has only test history.
    """
    order = parse_order(order)
    series = raw
    stages = {}
    report = None
    scaler = None
    for step in order:
        if step == "clean":
            series, report = remove_outliers(series, iqr_multiplier)
        elif step == "scale":
            scaler = fit_scaler(series, scaler_kind)
            series = transform(series, scaler)
        else:
            series = downsample(series, factor, downsample_method)
        stages[step] = series
    train, test = split(series, split_spec)
    k = len(train)
    return Prepared(
        raw=raw, stages=stages, series=series, outliers=report, scaler=scaler,
        train=train, test=test,
        train_ds=create_dataset(train, look_back, "train", scaler, 0),
        test_ds=create_dataset(test, look_back, "test", scaler, k),
    )
