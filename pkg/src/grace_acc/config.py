"""Pipeline configuration: an INI file whose keys can each be overridden by a flag.

Example::

    [data]
    inputs = ACC1B_2005-05-30_A_02.asc, ACC1B_2005-05-30_B_02.asc
    axes = x, y, z

    [train]
    epochs = 300
    seed = 7
"""
from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

from .ingest import AXES, DEFAULT_TERMINATOR, RecordSchema
from .lstm import LAYOUTS, TrainConfig
from .preprocess import SplitSpec, parse_order


def _list(text) -> tuple[str, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(text)
    return tuple(p.strip() for p in str(text).replace("\n", ",").split(",") if p.strip())


def _optional_int(text):
    if text is None or str(text).strip().lower() in ("", "none"):
        return None
    return int(text)


@dataclass(frozen=True)
class Key:
    section: str
    name: str
    parse: Callable[[str], Any]
    default: Any
    help: str
    choices: tuple | None = None

    @property
    def flag(self) -> str:
        return "--" + self.name.replace("_", "-")


KEYS = (
    Key("data", "inputs", _list, (), "comma separated ACC1B day files"),
    Key("data", "axes", _list, AXES, "axes to process, subset of x,y,z"),
    Key("data", "header_terminator", str, DEFAULT_TERMINATOR, "line that ends the file header"),
    Key("data", "qual_col", _optional_int, None,
        "column of the quality flag string, or none"),
    Key("preprocess", "order", str, "clean,scale,downsample",
        "permutation of clean,scale,downsample"),
    Key("preprocess", "scaler", str, "minmax", "scaler kind", ("minmax", "robust")),
    Key("preprocess", "downsample_factor", int, 10, "keep one sample in this many"),
    Key("preprocess", "downsample_method", str, "stride", "decimation rule",
        ("stride", "mean")),
    Key("preprocess", "iqr_multiplier", float, 1.5, "outlier fence width in IQRs"),
    Key("preprocess", "train_fraction", float, 0.70, "leading share of the series used to train"),
    Key("train", "look_back", int, 15, "window length fed to the model"),
    Key("train", "epochs", int, 300, "training epochs"),
    Key("train", "batch_size", int, 8, "minibatch size"),
    Key("train", "learning_rate", float, 0.001, "Adam step size"),
    Key("train", "validation_fraction", float, 0.15, "trailing share of pairs held out"),
    Key("train", "adam_beta1", float, 0.9, "Adam first-moment decay"),
    Key("train", "adam_beta2", float, 0.999, "Adam second-moment decay"),
    Key("train", "adam_epsilon", float, 1e-7, "Adam denominator offset"),
    Key("train", "input_layout", str, LAYOUTS[0], "how a window is presented to the LSTM",
        LAYOUTS),
    Key("train", "seed", int, 0, "random seed for initialization and shuffling"),
    Key("forecast", "steps", int, 100, "number of samples to forecast"),
    Key("forecast", "forecast_from", str, "end",
        "seed window: end of the series, or the end of the training part", ("end", "split")),
    Key("output", "out_dir", str, "grace_acc_out", "directory for every stage's files"),
    Key("output", "jobs", int, 1, "parallel worker processes across satellite/axis"),
)
KEYS_BY_NAME = {k.name: k for k in KEYS}


@dataclass(frozen=True)
class PipelineConfig:
    inputs: tuple[str, ...] = ()
    axes: tuple[str, ...] = AXES
    header_terminator: str = DEFAULT_TERMINATOR
    qual_col: int | None = None
    order: str = "clean,scale,downsample"
    scaler: str = "minmax"
    downsample_factor: int = 10
    downsample_method: str = "stride"
    iqr_multiplier: float = 1.5
    train_fraction: float = 0.70
    look_back: int = 15
    epochs: int = 300
    batch_size: int = 8
    learning_rate: float = 0.001
    validation_fraction: float = 0.15
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-7
    input_layout: str = LAYOUTS[0]
    seed: int = 0
    steps: int = 100
    forecast_from: str = "end"
    out_dir: str = "grace_acc_out"
    jobs: int = 1

    def __post_init__(self):
        for key in KEYS:
            value = getattr(self, key.name)
            if key.choices and value not in key.choices:
                raise ValueError(f"{key.name} must be one of {key.choices}, got {value!r}")
        bad = [a for a in self.axes if a not in AXES]
        if bad or not self.axes:
            raise ValueError(f"axes must be a non-empty subset of {AXES}, got {self.axes}")
        parse_order(self.order)
        if self.downsample_factor < 1:
            raise ValueError("downsample_factor must be >= 1")
        if self.iqr_multiplier < 0:
            raise ValueError("iqr_multiplier must be >= 0")
        if self.steps < 0:
            raise ValueError("steps must be >= 0")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")
        self.split_spec()
        self.train_config()

    def split_spec(self) -> SplitSpec:
        return SplitSpec(self.train_fraction)

    def schema(self) -> RecordSchema:
        return RecordSchema(qual_col=self.qual_col, terminator=self.header_terminator)

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            look_back=self.look_back, epochs=self.epochs, batch_size=self.batch_size,
            learning_rate=self.learning_rate, validation_fraction=self.validation_fraction,
            adam_beta1=self.adam_beta1, adam_beta2=self.adam_beta2,
            adam_epsilon=self.adam_epsilon, rng_seed=self.seed, input_layout=self.input_layout,
        )

    @property
    def out_path(self) -> Path:
        return Path(self.out_dir)

    def replace(self, **changes) -> "PipelineConfig":
        return dataclasses.replace(self, **changes)


def read_ini(path) -> dict:
    """Parse an INI file into ``{key: parsed value}``; unknown keys are errors."""
    parser = configparser.ConfigParser(interpolation=None)
    with open(path) as fh:
        parser.read_file(fh)
    values = {}
    for section in parser.sections():
        for name, raw in parser.items(section):
            key = KEYS_BY_NAME.get(name)
            if key is None or key.section != section:
                raise ValueError(f"{path}: unknown key [{section}] {name}")
            values[name] = key.parse(raw)
    return values


def load_config(path=None, **overrides) -> PipelineConfig:
    """Defaults, then the INI file, then ``overrides`` (``None`` values ignored)."""
    values = read_ini(path) if path else {}
    values.update({k: v for k, v in overrides.items() if v is not None})
    return PipelineConfig(**values)


def to_ini(config: PipelineConfig) -> str:
    parser = configparser.ConfigParser(interpolation=None)
    for key in KEYS:
        if not parser.has_section(key.section):
            parser.add_section(key.section)
        value = getattr(config, key.name)
        if isinstance(value, tuple):
            value = ", ".join(value)
        parser.set(key.section, key.name, "none" if value is None else str(value))
    lines = []
    for section in parser.sections():
        lines.append(f"[{section}]")
        lines += [f"{k} = {v}" for k, v in parser.items(section)]
        lines.append("")
    return "\n".join(lines)
