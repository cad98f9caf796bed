"""CSV tables and static SVG charts for evaluation reports.

Charts are drawn with matplotlib's object API (no pyplot state) and saved
with a fixed hash salt and no timestamp, so identical inputs give identical
bytes.  Text stays as ``<text>`` elements, which keeps the numbers on the
RMSE bar chart machine-readable.
"""
from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Sequence

import matplotlib

matplotlib.use("Agg")

from matplotlib.backends.backend_svg import FigureCanvasSVG  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402

from .forecast import DISPLAY_SCALE, EvalReport, ForecastResult  # noqa: E402
from .lstm import write_history_csv  # noqa: E402

SVG_RC = {
    "svg.hashsalt": "grace-acc",
    "svg.fonttype": "none",
    "path.simplify": False,
}
BAR_CHART = "rmse_bar.svg"


def _save(fig: Figure, path: Path) -> Path:
    with matplotlib.rc_context(SVG_RC):
        FigureCanvasSVG(fig).print_svg(path, metadata={"Date": None, "Creator": None})
    return path


def _label(sat_id: str, axis: str) -> str:
    return f"GRACE {sat_id} {axis}"


def write_predictions_csv(report: EvalReport, path) -> Path:
    """``index,truth,prediction`` for train then test targets (m/s^2)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "truth", "prediction"])
        for trace in (report.train_trace, report.test_trace):
            for i, t, p in zip(trace.index, trace.truth, trace.prediction):
                w.writerow([int(i), repr(float(t)), repr(float(p))])
    return path


def write_scores_csv(reports: Sequence[EvalReport], path) -> Path:
    """``satellite,axis,split,rmse_1e6`` with train, test and persistence rows."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["satellite", "axis", "split", "rmse_1e6"])
        for r in reports:
            for split, value in r.scores_1e6().items():
                w.writerow([r.sat_id, r.axis, split, repr(float(value))])
    return path


def write_forecast_csv(result: ForecastResult, path) -> Path:
    path = Path(path)
    lines = ["step,value"] + [f"{k + 1},{float(v)!r}" for k, v in enumerate(result.predicted)]
    path.write_text("\n".join(lines) + "\n" if result.steps else "")
    return path


def plot_loss(report: EvalReport, path) -> Path:
    h = report.history
    epochs = range(1, len(h) + 1)
    fig = Figure(figsize=(8, 3.2))
    ax1, ax2 = fig.subplots(1, 2)
    ax1.plot(epochs, h.loss, label="train")
    ax1.plot(epochs, h.val_loss, label="validation")
    ax1.set_title("MSE loss")
    ax1.set_yscale("log")
    ax2.plot(epochs, h.mae, label="train")
    ax2.plot(epochs, h.val_mae, label="validation")
    ax2.set_title("MAE")
    ax2.set_yscale("log")
    for ax in (ax1, ax2):
        ax.set_xlabel("epoch")
        ax.legend()
    fig.suptitle(_label(report.sat_id, report.axis))
    fig.tight_layout()
    return _save(fig, Path(path))


def plot_predictions(report: EvalReport, path) -> Path:
    fig = Figure(figsize=(9, 3.5))
    ax = fig.subplots()
    tr, te = report.train_trace, report.test_trace
    ax.plot(tr.index, tr.truth / DISPLAY_SCALE, color="0.6", lw=0.8, label="data")
    ax.plot(te.index, te.truth / DISPLAY_SCALE, color="0.6", lw=0.8)
    ax.plot(tr.index, tr.prediction / DISPLAY_SCALE, lw=0.8, label="train prediction")
    ax.plot(te.index, te.prediction / DISPLAY_SCALE, lw=0.8, label="test prediction")
    ax.set_xlabel("sample")
    ax.set_ylabel("acceleration [1e-6 m/s$^2$]")
    ax.set_title(_label(report.sat_id, report.axis))
    ax.legend(loc="upper right", fontsize="small")
    fig.tight_layout()
    return _save(fig, Path(path))


def plot_rmse_bars(rows: Iterable[tuple[str, str, float, float]], path) -> Path:
    """Grouped train/test bars per satellite.

    ``rows`` are ``(satellite, axis, train_rmse_1e6, test_rmse_1e6)``.  Each bar
    carries its value as a text label and an element id of the form
    ``bar_<sat>_<axis>_<split>``.
    """
    rows = list(rows)
    sats = sorted({r[0] for r in rows})
    fig = Figure(figsize=(4.5 * len(sats), 3.5))
    axes = fig.subplots(1, len(sats), squeeze=False, sharey=True)[0]
    width = 0.38
    for ax, sat in zip(axes, sats):
        mine = [r for r in rows if r[0] == sat]
        for k, (_, axis, train, test) in enumerate(mine):
            for offset, split, value, color in ((-width / 2, "train", train, "C0"),
                                                (width / 2, "test", test, "C1")):
                bar = ax.bar(k + offset, value, width, color=color,
                             label=split if k == 0 else None)[0]
                bar.set_gid(f"bar_{sat}_{axis}_{split}")
                ax.annotate(f"{value:.3g}", (k + offset, value), ha="center", va="bottom",
                            fontsize="small", xytext=(0, 2), textcoords="offset points")
        ax.set_xticks(range(len(mine)), [r[1] for r in mine])
        ax.set_title(f"GRACE {sat}")
        ax.set_ylabel("RMSE [1e-6 m/s$^2$]")
        ax.margins(y=0.15)
        ax.legend(fontsize="small")
    fig.tight_layout()
    return _save(fig, Path(path))


def report_files(report: EvalReport) -> dict[str, str]:
    t = report.tag
    return {
        "history": f"history_{t}.csv",
        "predictions": f"predictions_{t}.csv",
        "loss_svg": f"loss_{t}.svg",
        "prediction_svg": f"prediction_{t}.svg",
    }


def emit_report(reports: Sequence[EvalReport], out_dir) -> list[Path]:
    """Write per-report CSVs and SVGs plus one RMSE bar chart.

    For each report: ``history_<tag>.csv``, ``predictions_<tag>.csv``,
    ``loss_<tag>.svg`` and ``prediction_<tag>.svg``; then ``rmse_bar.svg``.
    Returns the written paths in that order.
    """
    reports = list(reports)
    if not reports:
        raise ValueError("emit_report needs at least one report")
    tags = [r.tag for r in reports]
    if len(set(tags)) != len(tags):
        raise ValueError(f"duplicate report tags in {tags}")
    for r in reports:
        if r.history is None or r.train_trace is None or r.test_trace is None:
            raise ValueError(f"report {r.tag} lacks history or prediction traces")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for r in reports:
        names = report_files(r)
        written.append(write_history_csv(r.history, out / names["history"]))
        written.append(write_predictions_csv(r, out / names["predictions"]))
        written.append(plot_loss(r, out / names["loss_svg"]))
        written.append(plot_predictions(r, out / names["prediction_svg"]))
    rows = [(r.sat_id, r.axis, r.train_rmse / DISPLAY_SCALE, r.test_rmse / DISPLAY_SCALE)
            for r in reports]
    written.append(plot_rmse_bars(rows, out / BAR_CHART))
    return written
