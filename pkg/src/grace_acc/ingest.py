"""Reading daily Level-1B style accelerometer files.

A day file is an opaque text header closed by a terminator line, followed by
whitespace separated records, one per 1 Hz sample::

    170208000 A -1.123e-06 2.345e-07 -4.5e-07 ...

Column positions are configurable through :class:`RecordSchema`; the defaults
follow the ACC1B convention (gps_time, GRACE id, lin_accl x/y/z, ...).
"""
from __future__ import annotations

import csv
import dataclasses
import datetime as dt
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .exceptions import (
    DataError,
    EmptyInput,
    MalformedRecord,
    MissingHeaderTerminator,
    NonMonotonicTime,
)

GPS_EPOCH = dt.datetime(2000, 1, 1, 12, 0, 0)
SECONDS_PER_DAY = 86400
SATELLITES = ("A", "B")
AXES = ("x", "y", "z")
STAGES = ("raw", "cleaned", "scaled", "downsampled")
DEFAULT_TERMINATOR = "END OF HEADER"
CSV_COLUMNS = ("gps_time", "sat_id", "acc_x", "acc_y", "acc_z")

_DATE_IN_NAME = re.compile(r"(\d{4})-(\d{2})-(\d{2})")


@dataclass(frozen=True)
class RecordSchema:
    """Column indices of the fields used from each data record.

    ``qual_col`` is optional; when set, a record whose flag token contains
    anything other than ``'0'`` is marked bad (ACC1B packs quality bits as a
    string of 0/1 characters).
    """

    time_col: int = 0
    sat_col: int = 1
    acc_cols: tuple[int, int, int] = (2, 3, 4)
    qual_col: int | None = None
    terminator: str = DEFAULT_TERMINATOR

    @property
    def min_columns(self) -> int:
        cols = [self.time_col, self.sat_col, *self.acc_cols]
        if self.qual_col is not None:
            cols.append(self.qual_col)
        return max(cols) + 1


class AccSample(NamedTuple):
    gps_time: int
    sat_id: str
    lin_acc: tuple[float, float, float]
    flagged: bool = False


@dataclass(frozen=True, eq=False)
class DailyAccFile:
    """One satellite-day of three-axis linear accelerations (m/s^2).

    Data are held column-wise: ``gps_time`` (n,), ``lin_acc`` (n, 3) and
    ``flagged`` (n,).  :attr:`samples` gives the row view.
    """

    sat_id: str
    date: dt.date | None
    gps_time: np.ndarray
    lin_acc: np.ndarray
    flagged: np.ndarray
    header_lines: tuple[str, ...] = ()
    qual_flags: tuple[str, ...] | None = None

    def __post_init__(self):
        n = len(self.gps_time)
        if self.lin_acc.shape != (n, 3) or self.flagged.shape != (n,):
            raise ValueError("gps_time, lin_acc and flagged disagree in length")
        if n > SECONDS_PER_DAY:
            raise DataError(f"{n} samples exceed one day at 1 Hz")
        if n and np.any(np.diff(self.gps_time) <= 0):
            raise DataError("gps_time is not strictly increasing")
        if n and self.gps_time[0] < 0:
            raise DataError("negative gps_time")
        if not np.all(np.isfinite(self.lin_acc)):
            raise DataError("non-finite acceleration")

    def __len__(self):
        return len(self.gps_time)

    def __eq__(self, other):
        if not isinstance(other, DailyAccFile):
            return NotImplemented
        return (
            self.sat_id == other.sat_id
            and self.date == other.date
            and self.header_lines == other.header_lines
            and self.qual_flags == other.qual_flags
            and np.array_equal(self.gps_time, other.gps_time)
            and np.array_equal(self.lin_acc, other.lin_acc)
            and np.array_equal(self.flagged, other.flagged)
        )

    @property
    def samples(self) -> list[AccSample]:
        return [
            AccSample(int(t), self.sat_id, (float(a[0]), float(a[1]), float(a[2])), bool(f))
            for t, a, f in zip(self.gps_time, self.lin_acc, self.flagged)
        ]


@dataclass(frozen=True, eq=False)
class AxisSeries:
    """A single axis of one satellite-day at some stage of preprocessing.

    ``provenance`` lists every stage the values went through, oldest first;
    ``stage`` is always its last entry.
    """

    sat_id: str
    axis: str
    values: np.ndarray
    stage: str = "raw"
    sample_interval_s: float = 1.0
    date: dt.date | None = None
    provenance: tuple[str, ...] = field(default=("raw",))

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"unknown axis {self.axis!r}")
        if self.stage not in STAGES:
            raise ValueError(f"unknown stage {self.stage!r}")
        if not self.provenance or self.provenance[-1] != self.stage:
            raise ValueError("stage must be the last provenance entry")
        if self.sample_interval_s <= 0:
            raise ValueError("sample_interval_s must be positive")
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise ValueError("values must be one-dimensional")
        if values.size == 0:
            raise EmptyInput(f"{self.sat_id}/{self.axis}: empty series")
        if not np.all(np.isfinite(values)):
            raise DataError(f"{self.sat_id}/{self.axis}: non-finite values")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def __len__(self):
        return len(self.values)

    @property
    def tag(self) -> str:
        day = self.date.isoformat() if self.date else "nodate"
        return f"{self.sat_id}_{day}_{self.axis}"

    def derive(self, values, stage, **changes) -> "AxisSeries":
        """Return a new series at ``stage`` with provenance extended."""
        return dataclasses.replace(
            self, values=values, stage=stage, provenance=self.provenance + (stage,), **changes
        )


def gps_to_datetime(seconds: float) -> dt.datetime:
    return GPS_EPOCH + dt.timedelta(seconds=float(seconds))


def datetime_to_gps(when: dt.datetime) -> int:
    return int(round((when - GPS_EPOCH).total_seconds()))


def _parse_float(token: str) -> float:
    return float(token.replace("D", "E").replace("d", "e"))


def _parse_record(tokens: Sequence[str], line_no: int, schema: RecordSchema):
    if len(tokens) < schema.min_columns:
        raise MalformedRecord(
            line_no, f"expected at least {schema.min_columns} columns, got {len(tokens)}"
        )
    try:
        gps_time = int(tokens[schema.time_col])
        acc = tuple(_parse_float(tokens[c]) for c in schema.acc_cols)
    except ValueError as exc:
        raise MalformedRecord(line_no, str(exc)) from None
    if not all(math.isfinite(a) for a in acc):
        raise MalformedRecord(line_no, "non-finite acceleration")
    sat = tokens[schema.sat_col]
    if sat not in SATELLITES:
        raise MalformedRecord(line_no, f"unknown satellite id {sat!r}")
    flag = tokens[schema.qual_col] if schema.qual_col is not None else None
    return gps_time, sat, acc, flag


def _date_from_name(path: Path) -> dt.date | None:
    m = _DATE_IN_NAME.search(path.name)
    if m is None:
        return None
    try:
        return dt.date(int(m[1]), int(m[2]), int(m[3]))
    except ValueError:
        return None


def parse_lines(lines: Iterable[str], schema: RecordSchema = RecordSchema(), source="<lines>",
                date: dt.date | None = None) -> DailyAccFile:
    header: list[str] = []
    times: list[int] = []
    accs: list[tuple[float, float, float]] = []
    flags: list[str] = []
    sat_id = None
    in_header = True
    last_line = None
    for line_no, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if in_header:
            header.append(line)
            if line.strip() == schema.terminator:
                in_header = False
            continue
        tokens = line.split()
        if not tokens:
            continue
        gps_time, sat, acc, flag = _parse_record(tokens, line_no, schema)
        if sat_id is None:
            sat_id = sat
        elif sat != sat_id:
            raise MalformedRecord(line_no, f"satellite id {sat!r} differs from {sat_id!r}")
        if gps_time < 0:
            raise MalformedRecord(line_no, "negative gps_time")
        if times and gps_time <= times[-1]:
            raise NonMonotonicTime(line_no, times[-1], gps_time)
        times.append(gps_time)
        accs.append(acc)
        if flag is not None:
            flags.append(flag)
        last_line = line_no
    if in_header:
        raise MissingHeaderTerminator(source, schema.terminator)
    if len(times) > SECONDS_PER_DAY:
        raise MalformedRecord(last_line, f"{len(times)} samples exceed one day at 1 Hz")

    if times and date is None:
        date = gps_to_datetime(times[0]).date()
    qual = tuple(flags) if schema.qual_col is not None else None
    flagged = np.array([any(ch != "0" for ch in f) for f in flags], dtype=bool)
    if qual is None:
        flagged = np.zeros(len(times), dtype=bool)
    return DailyAccFile(
        sat_id=sat_id or "A",
        date=date,
        gps_time=np.array(times, dtype=np.int64),
        lin_acc=np.array(accs, dtype=np.float64).reshape(-1, 3),
        flagged=flagged,
        header_lines=tuple(header),
        qual_flags=qual,
    )


def parse_acc1b(file_path, schema: RecordSchema = RecordSchema()) -> DailyAccFile:
    """Parse one ACC1B-style ASCII day file.

    Raises
    ------
    MissingHeaderTerminator
        No line equal to ``schema.terminator`` (surrounding whitespace ignored).
    MalformedRecord
        A record has too few columns or an unparseable field.
    NonMonotonicTime
        ``gps_time`` fails to increase strictly.
    """
    path = Path(file_path)
    with path.open("r", encoding="ascii", errors="replace") as fh:
        day = parse_lines(fh, schema, source=str(path))
    if day.date is None:
        day = dataclasses.replace(day, date=_date_from_name(path))
    return day


def format_records(day: DailyAccFile) -> list[str]:
    """Serialize ``day`` back into record lines (header included)."""
    lines = list(day.header_lines)
    for i in range(len(day)):
        x, y, z = (repr(float(v)) for v in day.lin_acc[i])
        parts = [str(int(day.gps_time[i])), day.sat_id, x, y, z]
        if day.qual_flags is not None:
            parts.append(day.qual_flags[i])
        lines.append(" ".join(parts))
    return lines


def write_acc1b(day: DailyAccFile, file_path) -> Path:
    path = Path(file_path)
    path.write_text("\n".join(format_records(day)) + "\n", encoding="ascii")
    return path


def extract_axis(day: DailyAccFile, axis: str) -> AxisSeries:
    if axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}, got {axis!r}")
    if len(day) == 0:
        raise EmptyInput("day file has no samples")
    return AxisSeries(
        sat_id=day.sat_id,
        axis=axis,
        values=day.lin_acc[:, AXES.index(axis)].copy(),
        date=day.date,
    )


def write_csv(day: DailyAccFile, file_path) -> Path:
    """Dump ``day`` as ``gps_time,sat_id,acc_x,acc_y,acc_z``."""
    path = Path(file_path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for t, a in zip(day.gps_time, day.lin_acc):
            w.writerow([int(t), day.sat_id, *(repr(float(v)) for v in a)])
    return path


def read_csv(file_path) -> DailyAccFile:
    path = Path(file_path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != CSV_COLUMNS:
        raise DataError(f"{path}: expected header {','.join(CSV_COLUMNS)}")
    body = rows[1:]
    try:
        times = np.array([int(r[0]) for r in body], dtype=np.int64)
        acc = np.array([[float(v) for v in r[2:5]] for r in body], dtype=np.float64)
    except (ValueError, IndexError) as exc:
        raise DataError(f"{path}: {exc}") from None
    sats = {r[1] for r in body}
    if len(sats) > 1:
        raise DataError(f"{path}: mixed satellite ids {sorted(sats)}")
    sat_id = sats.pop() if sats else "A"
    date = gps_to_datetime(times[0]).date() if len(times) else _date_from_name(path)
    return DailyAccFile(sat_id, date, times, acc.reshape(-1, 3), np.zeros(len(times), bool))
