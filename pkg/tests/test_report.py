import datetime as dt

import numpy as np
import pytest

from grace_acc.forecast import EvalReport, Trace
from grace_acc.lstm import TrainHistory
from grace_acc.report import (
    BAR_CHART, emit_report, plot_rmse_bars, write_forecast_csv, write_scores_csv,
)
from grace_acc.forecast import ForecastResult

from svgtools import bar_heights, text_labels


def fake_report(sat, axis, train=1e-6, test=1.2e-6, epochs=5):
    h = TrainHistory()
    for e in range(epochs):
        h.append(1.0 / (e + 1), 0.5 / (e + 1), 1.1 / (e + 1), 0.6 / (e + 1))
    idx = np.arange(15, 40)
    truth = np.sin(idx / 5.0) * 1e-6
    return EvalReport(
        sat_id=sat, axis=axis, retained_count=8600, train_rmse=train, test_rmse=test,
        baseline_rmse=2e-6, history=h, date=dt.date(2005, 5, 30),
        train_trace=Trace(idx, truth, truth + 1e-8),
        test_trace=Trace(idx + 40, truth, truth - 1e-8),
    )


def test_emit_report_inventory(tmp_path):
    reports = [fake_report(s, a) for s in "AB" for a in "xyz"]
    written = emit_report(reports, tmp_path)
    names = sorted(p.name for p in tmp_path.iterdir())
    assert sorted(p.name for p in written) == names
    assert len([n for n in names if n.startswith("history_") and n.endswith(".csv")]) == 6
    assert len([n for n in names if n.startswith("predictions_") and n.endswith(".csv")]) == 6
    assert len([n for n in names if n.endswith(".svg")]) == 13
    assert len(names) == 25
    assert (tmp_path / "history_A_2005-05-30_x.csv").read_text().splitlines()[0] == \
        "epoch,loss,mae,val_loss,val_mae"
    pred = (tmp_path / "predictions_B_2005-05-30_z.csv").read_text().splitlines()
    assert pred[0] == "index,truth,prediction" and len(pred) == 1 + 50


def test_emit_report_is_byte_stable(tmp_path):
    reports = [fake_report("A", "x")]
    a = emit_report(reports, tmp_path / "a")
    b = emit_report(reports, tmp_path / "b")
    for pa, pb in zip(a, b):
        assert pa.read_bytes() == pb.read_bytes(), pa.name


def test_emit_report_rejects(tmp_path):
    with pytest.raises(ValueError):
        emit_report([], tmp_path)
    with pytest.raises(ValueError):
        emit_report([fake_report("A", "x"), fake_report("A", "x")], tmp_path)


def test_bar_chart_values(tmp_path):
    rows = [("A", "x", 2.0, 1.0), ("A", "y", 0.5, 4.0)]
    svg = plot_rmse_bars(rows, tmp_path / BAR_CHART).read_text()
    heights = bar_heights(svg)
    assert heights[("A", "x", "train")] == pytest.approx(2 * heights[("A", "x", "test")], rel=1e-4)
    assert heights[("A", "y", "test")] == pytest.approx(8 * heights[("A", "y", "train")], rel=1e-4)
    assert {"2", "1", "0.5", "4"} <= set(text_labels(svg))


def test_scores_csv(tmp_path):
    path = write_scores_csv([fake_report("B", "x", 0.53e-6, 0.50e-6)], tmp_path / "s.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "satellite,axis,split,rmse_1e6"
    rows = {tuple(l.split(",")[:3]): float(l.split(",")[3]) for l in lines[1:]}
    assert rows[("B", "x", "train")] == pytest.approx(0.53)
    assert rows[("B", "x", "test")] == pytest.approx(0.50)
    assert rows[("B", "x", "persistence")] == pytest.approx(2.0)


def test_forecast_csv(tmp_path):
    empty = ForecastResult(np.zeros(15), 0, np.empty(0), np.empty(0))
    assert write_forecast_csv(empty, tmp_path / "e.csv").read_text() == ""
    two = ForecastResult(np.zeros(15), 2, np.array([1e-6, 2e-6]), np.array([0.1, 0.2]))
    assert write_forecast_csv(two, tmp_path / "t.csv").read_text().splitlines() == \
        ["step,value", "1,1e-06", "2,2e-06"]
