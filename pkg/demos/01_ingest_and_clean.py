"""
Reading a day of accelerometer data and cleaning it
====================================================

A synthetic ACC1B-style day file is written to disk, parsed back, and one
axis is pushed through outlier removal, min-max scaling and decimation.
"""
from pathlib import Path

import numpy as np

from grace_acc import ingest, preprocess
from grace_acc.synthetic import synthetic_day

out = Path("demo_out")
out.mkdir(exist_ok=True)

# A full day at 1 Hz, with a few spike bursts mixed into the smooth signal.
day = synthetic_day("A", seed=1)
path = ingest.write_acc1b(day, out / "ACC1B_2005-05-30_A_02.asc")
print(path.read_text().splitlines()[:6])

# Parsing skips everything up to the header terminator.
day = ingest.parse_acc1b(path)
print(len(day), "samples from", ingest.gps_to_datetime(day.gps_time[0]))

x = ingest.extract_axis(day, "x")

# Points outside Q1 - 1.5 IQR and Q3 + 1.5 IQR are dropped.
cleaned, report = preprocess.remove_outliers(x)
print(report.as_dict())

# The scaler keeps its parameters so predictions can be mapped back to m/s^2.
scaler = preprocess.fit_scaler(cleaned, "minmax")
scaled = preprocess.transform(cleaned, scaler)
print("scaled range", scaled.values.min(), scaled.values.max())

# Keep one sample in ten: roughly 8640 per day.
short = preprocess.downsample(scaled, 10)
print(len(short), "samples after decimation")

# The same chain in one call, with the step order as a parameter.
prep = preprocess.prepare(x, order="downsample,clean,scale")
print({step: len(s) for step, s in prep.stages.items()})
print("windows:", prep.train_ds.X.shape, prep.test_ds.X.shape)
assert np.all(prep.train_ds.X[1, :-1] == prep.train_ds.X[0, 1:])
