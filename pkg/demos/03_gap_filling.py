"""
Filling a gap by recursive forecasting
======================================

A block of samples is cut out of a day.  A model trained on the data before
the gap predicts one step at a time, feeding each output back as input.
"""
import numpy as np

from grace_acc import forecast, ingest, lstm, preprocess
from grace_acc.synthetic import synthetic_day

full = synthetic_day("A", seed=4, spike_bursts=0)
x = ingest.extract_axis(full, "z")
prep = preprocess.prepare(x, order="clean,scale,downsample")

# Pretend the 60 decimated samples after the split point are missing.
series = prep.series.values
k = len(prep.train)
gap = 60
truth = series[k:k + gap]

params, _ = lstm.fit(prep.train_ds.X, prep.train_ds.Y, lstm.TrainConfig(epochs=30, rng_seed=1))
filled = forecast.recursive_forecast(params, series[k - 15:k], gap, prep.scaler)

err = forecast.rmse(filled.predicted_scaled, truth)
print(f"gap of {gap} samples ({gap * prep.series.sample_interval_s / 60:.0f} min)")
print(f"scaled RMSE {err:.4f}, in m/s^2 {err * prep.scaler.span:.3e}")

# Errors grow with the horizon because each step reuses earlier predictions.
for h in (5, 20, 60):
    print(h, np.abs(filled.predicted_scaled[:h] - truth[:h]).max())
