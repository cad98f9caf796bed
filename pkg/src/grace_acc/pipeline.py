"""File-backed pipeline stages.

Each stage reads what the previous one wrote under ``out_dir`` so any stage
can be rerun on its own::

    out_dir/ingest/<sat>_<date>.csv
    out_dir/preprocess/<tag>/{cleaned,scaled,downsampled,series}.csv + json
    out_dir/train/<tag>/{checkpoint.json,history.csv}
    out_dir/evaluate/...          (see report.emit_report) + rmse_scores.csv
    out_dir/forecast/forecast_<tag>.csv

``<tag>`` is ``<sat>_<date>_<axis>``.
"""
from __future__ import annotations

import datetime as dt
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import PipelineConfig
from .exceptions import DataError, ShapeMismatch
from .forecast import EvalReport, evaluate, recursive_forecast
from .ingest import AxisSeries, extract_axis, parse_acc1b, read_csv, write_csv
from .lstm import fit, load_checkpoint, read_history_csv, save_checkpoint, write_history_csv
from .preprocess import ScalerParams, create_dataset, prepare
from .report import emit_report, write_forecast_csv, write_scores_csv

log = logging.getLogger(__name__)

STEP_FILES = {"clean": "cleaned.csv", "scale": "scaled.csv", "downsample": "downsampled.csv"}


def _dump_json(obj, path: Path):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_series_csv(values, path) -> Path:
    path = Path(path)
    lines = ["index,value"] + [f"{i},{float(v)!r}" for i, v in enumerate(values)]
    path.write_text("\n".join(lines) + "\n")
    return path


def read_series_csv(path) -> np.ndarray:
    rows = Path(path).read_text().splitlines()
    if not rows or rows[0] != "index,value":
        raise DataError(f"{path}: expected an index,value CSV")
    try:
        return np.array([float(r.split(",")[1]) for r in rows[1:]], dtype=np.float64)
    except (IndexError, ValueError) as exc:
        raise DataError(f"{path}: {exc}") from None


def _map(fn, items, jobs: int):
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


# -- ingest ---------------------------------------------------------------

def run_ingest(cfg: PipelineConfig) -> list[Path]:
    if not cfg.inputs:
        raise DataError("no input files configured")
    out = cfg.out_path / "ingest"
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name in cfg.inputs:
        path = Path(name)
        if not path.is_file():
            raise DataError(f"input file not found: {path}")
        day = parse_acc1b(path, cfg.schema())
        target = out / f"{day.sat_id}_{day.date.isoformat() if day.date else 'nodate'}.csv"
        if target in written:
            raise DataError(f"two inputs map to {target.name}")
        written.append(write_csv(day, target))
        log.info("%s: %d samples -> %s", path, len(day), target)
    return written


def ingested_days(cfg: PipelineConfig):
    files = sorted((cfg.out_path / "ingest").glob("*.csv"))
    if not files:
        raise DataError(f"nothing ingested under {cfg.out_path / 'ingest'}; run ingest first")
    return [read_csv(f) for f in files]


# -- preprocess -----------------------------------------------------------

def preprocess_axis(cfg: PipelineConfig, raw: AxisSeries) -> dict:
    prep = prepare(
        raw, order=cfg.order, scaler_kind=cfg.scaler, factor=cfg.downsample_factor,
        split_spec=cfg.split_spec(), look_back=cfg.look_back,
        downsample_method=cfg.downsample_method, iqr_multiplier=cfg.iqr_multiplier,
    )
    out = cfg.out_path / "preprocess" / raw.tag
    out.mkdir(parents=True, exist_ok=True)
    for step, series in prep.stages.items():
        write_series_csv(series.values, out / STEP_FILES[step])
    write_series_csv(prep.series.values, out / "series.csv")
    _dump_json(prep.outliers.as_dict(), out / "outliers.json")
    _dump_json(prep.scaler.as_dict(), out / "scaler.json")
    meta = {
        "sat_id": raw.sat_id,
        "axis": raw.axis,
        "date": raw.date.isoformat() if raw.date else None,
        "order": list(prep.stages),
        "raw_count": len(raw),
        "cleaned_count": prep.outliers.retained_count,
        "final_length": len(prep.series),
        "split_index": len(prep.train),
        "sample_interval_s": prep.series.sample_interval_s,
    }
    _dump_json(meta, out / "meta.json")
    return {"tag": raw.tag, **meta}


def run_preprocess(cfg: PipelineConfig) -> list[dict]:
    summaries = []
    for day in ingested_days(cfg):
        for axis in cfg.axes:
            summaries.append(preprocess_axis(cfg, extract_axis(day, axis)))
    _dump_json(summaries, cfg.out_path / "preprocess" / "summary.json")
    return summaries


class StagedAxis:
    """Preprocessed artifacts for one tag, loaded back from disk."""

    def __init__(self, cfg: PipelineConfig, tag: str):
        base = cfg.out_path / "preprocess" / tag
        if not (base / "meta.json").is_file():
            raise DataError(f"no preprocessed data for {tag}; run preprocess first")
        self.tag = tag
        self.meta = json.loads((base / "meta.json").read_text())
        self.scaler = ScalerParams.from_dict(json.loads((base / "scaler.json").read_text()))
        self.series = read_series_csv(base / "series.csv")
        k = self.meta["split_index"]
        self.train, self.test = self.series[:k], self.series[k:]

    @property
    def date(self):
        d = self.meta["date"]
        return dt.date.fromisoformat(d) if d else None

    def datasets(self, look_back: int):
        k = self.meta["split_index"]
        return (create_dataset(self.train, look_back, "train", self.scaler, 0),
                create_dataset(self.test, look_back, "test", self.scaler, k))


def preprocessed_tags(cfg: PipelineConfig) -> list[str]:
    base = cfg.out_path / "preprocess"
    tags = sorted(p.name for p in base.glob("*") if (p / "meta.json").is_file())
    tags = [t for t in tags if t.rsplit("_", 1)[-1] in cfg.axes]
    if not tags:
        raise DataError(f"no preprocessed series under {base}; run preprocess first")
    return tags


# -- train ----------------------------------------------------------------

def _train_one(job) -> dict:
    cfg, tag = job
    prep = StagedAxis(cfg, tag)
    tcfg = cfg.train_config()
    train_ds, _ = prep.datasets(tcfg.look_back)
    params, history = fit(train_ds.X, train_ds.Y, tcfg)
    out = cfg.out_path / "train" / tag
    out.mkdir(parents=True, exist_ok=True)
    save_checkpoint(params, tcfg, out / "checkpoint.json")
    write_history_csv(history, out / "history.csv")
    return {"tag": tag, "epochs": len(history), "loss": history.loss[-1],
            "val_loss": history.val_loss[-1]}


def run_train(cfg: PipelineConfig) -> list[dict]:
    return _map(_train_one, [(cfg, t) for t in preprocessed_tags(cfg)], cfg.jobs)


def load_trained(cfg: PipelineConfig, tag: str):
    path = cfg.out_path / "train" / tag / "checkpoint.json"
    if not path.is_file():
        raise DataError(f"no checkpoint for {tag}; run train first")
    return load_checkpoint(path)


# -- evaluate -------------------------------------------------------------

def evaluate_tag(cfg: PipelineConfig, tag: str) -> EvalReport:
    prep = StagedAxis(cfg, tag)
    params, tcfg = load_trained(cfg, tag)
    if cfg.look_back != tcfg.look_back:
        raise ShapeMismatch(
            f"{tag}: configured look_back {cfg.look_back} but checkpoint uses {tcfg.look_back}")
    train_ds, test_ds = prep.datasets(cfg.look_back)
    history = read_history_csv(cfg.out_path / "train" / tag / "history.csv")
    return evaluate(
        params, train_ds, test_ds, prep.scaler, config=tcfg,
        sat_id=prep.meta["sat_id"], axis=prep.meta["axis"], date=prep.date,
        retained_count=prep.meta["cleaned_count"], history=history,
        series=prep.series,
    )


def run_evaluate(cfg: PipelineConfig) -> list[EvalReport]:
    reports = [evaluate_tag(cfg, t) for t in preprocessed_tags(cfg)]
    out = cfg.out_path / "evaluate"
    emit_report(reports, out)
    write_scores_csv(reports, out / "rmse_scores.csv")
    return reports


# -- forecast -------------------------------------------------------------

def forecast_tag(cfg: PipelineConfig, tag: str):
    prep = StagedAxis(cfg, tag)
    params, tcfg = load_trained(cfg, tag)
    if cfg.look_back != tcfg.look_back:
        raise ShapeMismatch(
            f"{tag}: configured look_back {cfg.look_back} but checkpoint uses {tcfg.look_back}")
    source = prep.series if cfg.forecast_from == "end" else prep.train
    if len(source) < tcfg.look_back:
        raise DataError(f"{tag}: fewer than {tcfg.look_back} samples to seed the forecast")
    result = recursive_forecast(params, source[-tcfg.look_back:], cfg.steps, prep.scaler,
                                look_back=tcfg.look_back)
    out = cfg.out_path / "forecast"
    out.mkdir(parents=True, exist_ok=True)
    write_forecast_csv(result, out / f"forecast_{tag}.csv")
    return result


def run_forecast(cfg: PipelineConfig):
    return {t: forecast_tag(cfg, t) for t in preprocessed_tags(cfg)}


def run_all(cfg: PipelineConfig):
    run_ingest(cfg)
    run_preprocess(cfg)
    run_train(cfg)
    reports = run_evaluate(cfg)
    run_forecast(cfg)
    return reports
