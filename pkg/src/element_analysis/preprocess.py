"""Resampling and Butterworth high-pass filtering of raw observations."""

from __future__ import annotations

import datetime as _dt
import math
from dataclasses import dataclass

import numpy as np
from scipy import signal

from .cwt import TimeSeries


@dataclass(frozen=True)
class RawSeries:
    """Dated observations as read from disk, possibly irregular.

    ``dropped`` counts rows discarded as missing while reading.
    """

    timestamps: tuple[_dt.datetime, ...]
    values: np.ndarray
    dropped: int = 0

    def __post_init__(self):
        ts = tuple(self.timestamps)
        values = np.asarray(self.values, dtype=float)
        if len(ts) != len(values):
            raise ValueError(f"{len(ts)} timestamps but {len(values)} values")
        for i in range(1, len(ts)):
            if not ts[i] > ts[i - 1]:
                raise ValueError(f"timestamps not strictly increasing at position {i} ({ts[i - 1]} -> {ts[i]})")
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)


def resample_uniform(raw: RawSeries, dt: float = 1.0, max_gap: float = 5.0) -> TimeSeries:
    """Linear interpolation onto a uniform grid of ``dt`` days.

    The grid starts at the first timestamp and stops at or before the last.
    Gaps between observations longer than ``max_gap * dt`` raise instead of
    being bridged.
    """
    if len(raw) < 16:
        raise ValueError(f"need at least 16 observations, got {len(raw)}")
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    epoch = raw.timestamps[0]
    days = np.array([(t - epoch).total_seconds() / 86400.0 for t in raw.timestamps])
    gaps = np.diff(days)
    worst = int(np.argmax(gaps))
    if gaps[worst] > max_gap * dt + 1e-9:
        raise ValueError(
            f"gap of {gaps[worst]:g} days after {raw.timestamps[worst].date()} exceeds max_gap={max_gap:g} samples"
        )
    grid = np.arange(int(math.floor(days[-1] / dt + 1e-9)) + 1) * dt
    return TimeSeries(np.interp(grid, days, raw.values), dt, 0.0, epoch)


@dataclass(frozen=True)
class FilterSpec:
    """High-pass Butterworth design; ``cutoff_freq`` in cycles per time unit."""

    cutoff_freq: float
    order: int = 3
    kind: str = "highpass"

    def __post_init__(self):
        if self.kind != "highpass":
            raise ValueError(f"only high-pass filters are supported, got {self.kind!r}")
        if int(self.order) != self.order or self.order < 1:
            raise ValueError(f"filter order must be a positive integer, got {self.order}")
        if not self.cutoff_freq > 0:
            raise ValueError(f"cutoff frequency must be positive, got {self.cutoff_freq}")

    @classmethod
    def from_period(cls, cutoff_period: float, order: int = 3) -> FilterSpec:
        if not cutoff_period > 0:
            raise ValueError(f"cutoff period must be positive, got {cutoff_period}")
        return cls(1.0 / cutoff_period, order)


def butterworth_zpk(order: int, cutoff: float, fs: float = 1.0):
    """Digital high-pass Butterworth poles, zeros and gain.

    The analog prototype poles ``exp(i pi (2k + n - 1) / 2n)`` are mapped to
    a high-pass at the prewarped edge ``2 fs tan(pi fc / fs)`` and through the
    bilinear transform, so the gain at ``cutoff`` is exactly 1/sqrt(2).
    """
    if not 0 < cutoff < fs / 2:
        raise ValueError(f"cutoff {cutoff:g} must lie strictly between 0 and Nyquist {fs / 2:g}")
    k = np.arange(1, order + 1)
    proto = np.exp(1j * np.pi * (2 * k + order - 1) / (2 * order))
    warped = 2 * fs * math.tan(math.pi * cutoff / fs)
    analog_poles = warped / proto
    # high-pass: n zeros at s = 0 map to z = 1
    zeros = np.ones(order)
    poles = (2 * fs + analog_poles) / (2 * fs - analog_poles)
    gain = float(np.real((2 * fs) ** order / np.prod(2 * fs - analog_poles)))
    return zeros, poles, gain


def butterworth_sos(spec: FilterSpec, dt: float = 1.0) -> np.ndarray:
    z, p, k = butterworth_zpk(spec.order, spec.cutoff_freq, 1.0 / dt)
    return signal.zpk2sos(z, p, k)


def impulse_length(sos: np.ndarray, fraction: float = 0.999) -> int:
    """Samples holding ``fraction`` of the filter's impulse-response energy."""
    z, p, _ = signal.sos2zpk(sos)
    radius = float(np.max(np.abs(p)))
    span = int(min(1e7, max(64, 40 / max(1e-12, -math.log(radius)))))
    h = signal.sosfilt(sos, np.r_[1.0, np.zeros(span - 1)])
    energy = np.cumsum(h**2)
    return int(np.searchsorted(energy, fraction * energy[-1]) + 1)


def butterworth_highpass(x: TimeSeries, spec: FilterSpec) -> TimeSeries:
    """Zero-phase (forward-backward) high-pass filtering.

    The series is extended by odd reflection over three effective impulse
    lengths on each side before filtering and trimmed afterwards. The
    magnitude response is the square of a single pass.
    """
    sos = butterworth_sos(spec, x.dt)
    pad = 3 * impulse_length(sos)
    padded = np.pad(x.values, pad, mode="reflect", reflect_type="odd")
    y = signal.sosfilt(sos, padded)
    y = signal.sosfilt(sos, y[::-1])[::-1]
    return x.replace(y[pad:pad + len(x)])


def single_pass(x: np.ndarray, spec: FilterSpec, dt: float = 1.0) -> np.ndarray:
    """Causal one-direction filtering, for response measurements."""
    return signal.sosfilt(butterworth_sos(spec, dt), np.asarray(x, dtype=float))
