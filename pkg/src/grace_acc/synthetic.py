"""Synthetic ACC1B-like day files for demos and tests.

The signal is an orbital-period harmonic series per axis with white noise and
short spike bursts, at magnitudes typical of GRACE linear accelerations
(1e-7 to 1e-6 m/s^2).  It is not a physical model.
"""
from __future__ import annotations

import datetime as dt

import numpy as np

from .ingest import DEFAULT_TERMINATOR, DailyAccFile, datetime_to_gps

ORBIT_PERIOD_S = 5640.0

# per axis: bias, first and second harmonic amplitudes, noise sigma
_AXIS_MODEL = {
    "A": [(-2.0e-7, 1.5e-7, 4.0e-8, 5e-9), (1.2e-6, 2.0e-7, 6.0e-8, 2e-8), (-6.0e-6, 3.0e-7, 1.0e-7, 2e-8)],
    "B": [(-2.5e-7, 1.4e-7, 3.5e-8, 4e-9), (8.0e-7, 2.5e-7, 7.0e-8, 3e-8), (-5.0e-6, 3.5e-7, 1.2e-7, 3e-8)],
}


def synthetic_day(sat_id: str = "A", date: dt.date = dt.date(2005, 5, 30), seed: int = 0,
                  n_samples: int = 86400, spike_bursts: int = 40, gap: slice | None = None
                  ) -> DailyAccFile:
    """Build a :class:`DailyAccFile` of 1 Hz samples starting at midnight.

    ``gap`` removes a block of samples, mimicking missing data in a raw file.
    """
    rng = np.random.default_rng(seed)
    t0 = datetime_to_gps(dt.datetime.combine(date, dt.time()))
    t = np.arange(n_samples, dtype=np.float64)
    phase = 2 * np.pi * t / ORBIT_PERIOD_S
    acc = np.empty((n_samples, 3))
    for k, (bias, a1, a2, sigma) in enumerate(_AXIS_MODEL[sat_id]):
        shift = rng.uniform(0, 2 * np.pi)
        acc[:, k] = (bias + a1 * np.sin(phase + shift) + a2 * np.sin(2 * phase + 0.5 * shift)
                     + rng.normal(0, sigma, n_samples))
        for _ in range(spike_bursts):
            start = int(rng.integers(0, n_samples - 60))
            length = int(rng.integers(5, 60))
            acc[start:start + length, k] += rng.choice([-1, 1]) * rng.uniform(5, 20) * a1
    times = t0 + np.arange(n_samples, dtype=np.int64)
    if gap is not None:
        keep = np.ones(n_samples, dtype=bool)
        keep[gap] = False
        times, acc = times[keep], acc[keep]
    header = (
        "PRODUCER AGENCY               : synthetic",
        f"SATELLITE NAME                : GRACE {sat_id}",
        f"TIME FIRST OBS(SEC PAST EPOCH): {int(times[0])}",
        f"NUMBER OF DATA RECORDS        : {len(times)}",
        DEFAULT_TERMINATOR,
    )
    return DailyAccFile(sat_id, date, times, acc, np.zeros(len(times), dtype=bool), header)
