"""Synthetic stand-in for a daily inflation-expectation series.

Trend + annual cycle + five injected Morse elements + white noise, daily from
July 2018 to July 2022, with a handful of missing-value rows.
"""

from __future__ import annotations

import datetime as _dt

import numpy as np

from .detection import ElementEvent, synthesize
from .preprocess import RawSeries
from .theory import ElementParams

START = _dt.datetime(2018, 7, 2)
END = _dt.datetime(2022, 7, 1)
NOISE_SIGMA = 0.01

#: (date, |c|, phase, rho in days)
INJECTED = (
    (_dt.datetime(2018, 12, 20), 0.10, 0.0, 10.0),
    (_dt.datetime(2019, 7, 15), 0.08, np.pi / 3, 8.0),
    (_dt.datetime(2020, 3, 16), 0.14, -np.pi / 2, 12.0),
    (_dt.datetime(2021, 3, 15), 0.10, np.pi, 9.0),
    (_dt.datetime(2022, 3, 14), 0.09, np.pi / 4, 7.0),
)


def injected_samples() -> list[int]:
    return [(d - START).days for d, *_ in INJECTED]


def make_proxy(seed: int = 0, p: ElementParams | None = None, n_missing: int = 12) -> RawSeries:
    """Daily synthetic series with events at :data:`INJECTED` dates."""
    p = p or ElementParams(3.0, 3.0, 1.0)
    n = (END - START).days + 1
    t = np.arange(n, dtype=float)
    rng = np.random.default_rng(seed)
    events = [
        ElementEvent.from_element(p, (d - START).days, amp * np.exp(1j * phase), rho)
        for d, amp, phase, rho in INJECTED
    ]
    elements = synthesize(events, p, n).values
    trend = 2.1 + 0.35 * (t / n) - 0.4 * np.exp(-(((t - 640) / 150) ** 2)) + 0.6 * (t / n) ** 3
    seasonal = 0.05 * np.sin(2 * np.pi * t / 365.25 + 0.4)
    values = trend + seasonal + elements + NOISE_SIGMA * rng.standard_normal(n)
    stamps = [START + _dt.timedelta(days=int(i)) for i in range(n)]
    # isolated missing days, never at the ends
    missing = set(rng.choice(np.arange(5, n - 5, 3), size=n_missing, replace=False).tolist())
    keep = [i for i in range(n) if i not in missing]
    return RawSeries(tuple(stamps[i] for i in keep), values[keep], 0)


def write_proxy_csv(path, seed: int = 0) -> None:
    raw = make_proxy(seed)
    present = {s: v for s, v in zip(raw.timestamps, raw.values)}
    with open(path, "w") as fh:
        fh.write("date,value\n")
        day = START
        while day <= END:
            v = present.get(day)
            fh.write(f"{day.date().isoformat()},{'.' if v is None else f'{v:.4f}'}\n")
            day += _dt.timedelta(days=1)
