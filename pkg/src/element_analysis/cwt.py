"""Continuous wavelet transform with Morse wavelets.

Coefficients use the 1/s normalization

    W(tau, s) = sum_t (1/s) conj(psi((t - tau)/s)) x(t)

so a unit-amplitude sinusoid has modulus ``Psi(s omega)/2`` at every scale.
The FFT path is circular; :func:`edge_mask` marks the samples that boundary
wrap-around cannot reach.
"""

from __future__ import annotations

import datetime as _dt
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .morse import (
    MorseParams,
    dft_frequencies,
    envelope_std,
    kernel_energy,
    morse_freq,
    morse_table,
    morse_time,
    peak_frequency,
)


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled real series.

    ``dt`` and ``t0`` are in the series' time unit (days for dated input);
    ``epoch`` anchors ``t0`` to a calendar date when the data carry one.
    """

    values: np.ndarray
    dt: float = 1.0
    t0: float = 0.0
    epoch: _dt.datetime | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or len(values) < 16:
            raise ValueError(f"a time series needs at least 16 samples, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("time series contains non-finite values")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self))

    def timestamp(self, sample: float) -> _dt.datetime | float:
        t = self.t0 + self.dt * sample
        if self.epoch is None:
            return t
        return self.epoch + _dt.timedelta(days=t)

    def replace(self, values) -> TimeSeries:
        return TimeSeries(values, self.dt, self.t0, self.epoch)


@dataclass(frozen=True)
class ScaleGrid:
    """Log-spaced scales (in samples), finest first."""

    scales: np.ndarray
    voxels_per_octave: int
    params: MorseParams

    def __post_init__(self):
        scales = np.asarray(self.scales, dtype=float)
        if scales.ndim != 1 or len(scales) < 1 or np.any(scales <= 0):
            raise ValueError("scales must be a non-empty vector of positive numbers")
        if np.any(np.diff(scales) <= 0):
            raise ValueError("scales must be strictly increasing")
        scales.setflags(write=False)
        object.__setattr__(self, "scales", scales)

    def __len__(self) -> int:
        return len(self.scales)

    @property
    def scale_frequencies(self) -> np.ndarray:
        """Radian frequency (per sample) at which each scaled wavelet peaks."""
        return peak_frequency(self.params) / self.scales

    @property
    def periods(self) -> np.ndarray:
        """Periods in samples, ``2 pi / scale_frequency``."""
        return 2 * np.pi / self.scale_frequencies

    @property
    def log2_step(self) -> float:
        return 1.0 / self.voxels_per_octave


def make_scale_grid(
    params: MorseParams, min_period: float, max_period: float, voxels_per_octave: int = 16
) -> ScaleGrid:
    """Scales whose peak periods run from ``min_period`` to ``max_period`` samples.

    Periods are spaced by ``2**(1/voxels_per_octave)``; the last one is the
    largest such period not exceeding ``max_period``.
    """
    if not (2 <= min_period < max_period):
        raise ValueError(f"need 2 <= min_period < max_period, got {min_period}, {max_period}")
    if int(voxels_per_octave) != voxels_per_octave or voxels_per_octave < 1:
        raise ValueError(f"voxels_per_octave must be a positive integer, got {voxels_per_octave}")
    vpo = int(voxels_per_octave)
    count = int(np.floor(np.log2(max_period / min_period) * vpo + 1e-9)) + 1
    periods = min_period * 2.0 ** (np.arange(count) / vpo)
    scales = peak_frequency(params) * periods / (2 * np.pi)
    return ScaleGrid(scales, vpo, params)


@dataclass(frozen=True)
class Scalogram:
    """Complex CWT coefficients, one row per scale of ``grid``."""

    coeffs: np.ndarray
    grid: ScaleGrid
    params: MorseParams
    dt: float = 1.0
    t0: float = 0.0
    epoch: _dt.datetime | None = None
    valid: np.ndarray = field(default=None)

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=complex)
        if coeffs.ndim != 2 or coeffs.shape[0] != len(self.grid):
            raise ValueError(f"coefficient shape {coeffs.shape} does not match {len(self.grid)} scales")
        valid = self.valid
        if valid is None:
            valid = edge_mask(self.grid, coeffs.shape[1])
        valid = np.asarray(valid, dtype=bool)
        if valid.shape != coeffs.shape:
            raise ValueError("valid mask shape differs from coefficients")
        coeffs.setflags(write=False)
        valid.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "valid", valid)

    @property
    def shape(self) -> tuple[int, int]:
        return self.coeffs.shape

    @property
    def n(self) -> int:
        return self.coeffs.shape[1]

    @property
    def modulus(self) -> np.ndarray:
        return np.abs(self.coeffs)


def _validate(x: TimeSeries, params: MorseParams, grid: ScaleGrid) -> np.ndarray:
    if grid.params != params:
        raise ValueError(f"scale grid was built for {grid.params}, not {params}")
    return x.values - x.values.mean()


def _responses(params: MorseParams, scales: np.ndarray, n: int) -> np.ndarray:
    omega = dft_frequencies(n)
    return morse_freq(params, np.outer(scales, omega))


def cwt_fft(x: TimeSeries, params: MorseParams, grid: ScaleGrid, *, workers: int | None = None) -> Scalogram:
    """Frequency-domain CWT: one forward FFT, one inverse FFT per scale.

    The response is real, so conjugating it is a no-op. ``workers`` > 1
    spreads the per-scale inverse transforms over a thread pool.
    """
    values = _validate(x, params, grid)
    n = len(values)
    spectrum = np.fft.fft(values)
    omega = dft_frequencies(n)

    def row(s):
        return np.fft.ifft(spectrum * morse_freq(params, s * omega))

    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            coeffs = np.array(list(pool.map(row, grid.scales)))
    else:
        coeffs = np.fft.ifft(spectrum[None, :] * _responses(params, grid.scales, n), axis=1)
    return Scalogram(coeffs, grid, params, x.dt, x.t0, x.epoch)


def cwt_direct(x: TimeSeries, params: MorseParams, grid: ScaleGrid, *, max_length: int = 8192) -> Scalogram:
    """Time-domain CWT by explicit summation, used to check :func:`cwt_fft`.

    Each kernel comes from :func:`morse_time` on a window that is a multiple
    of the series length and long enough to hold the kernel's energy. The
    series is treated as periodic, matching the FFT path's boundary.
    Cost is O(N**2) per scale.
    """
    values = _validate(x, params, grid)
    n = len(values)
    if n > max_length:
        raise ValueError(f"series of {n} samples exceeds the direct-summation limit of {max_length}")
    radius = morse_table(params, 1 << 15).energy_radius()
    t = np.arange(n)
    coeffs = np.empty((len(grid), n), dtype=complex)
    for k, s in enumerate(grid.scales):
        reps = 1
        while reps * n < 2 * radius * s:
            reps *= 2
        window = reps * n
        kernel = morse_time(params, window, s)  # kernel[window//2 + m] = (1/s) psi(m/s)
        # wrap every window lag m onto the circle of length n
        wrapped = np.zeros(n, dtype=complex)
        np.add.at(wrapped, (np.arange(window) - window // 2) % n, kernel)
        conj = np.conj(wrapped)
        for lo in range(0, n, 512):
            tau = t[lo:lo + 512]
            coeffs[k, lo:lo + 512] = conj[(t[None, :] - tau[:, None]) % n] @ values
    return Scalogram(coeffs, grid, params, x.dt, x.t0, x.epoch)


def edge_mask(grid: ScaleGrid, n: int, decay_multiplier: float = 2.0) -> np.ndarray:
    """Boolean (scales x n) mask of samples clear of boundary effects.

    Sample ``i`` is valid at scale ``s`` when it lies more than
    ``decay_multiplier * envelope_std(params) * s`` samples from both ends.
    """
    if not decay_multiplier > 0:
        raise ValueError("decay_multiplier must be positive")
    reach = decay_multiplier * envelope_std(grid.params) * grid.scales
    i = np.arange(n)
    dist = np.minimum(i, n - 1 - i)
    return dist[None, :] > reach[:, None]


def white_noise_variance(params: MorseParams, scales, n: int | None = None) -> np.ndarray:
    """Per-scale ``E|W|**2`` for unit-variance white noise.

    With ``n`` the exact value for a length-``n`` circular transform,
    ``(1/n) sum_k Psi(s omega_k)**2``; otherwise the continuum limit
    ``a**2 Gamma((2b+1)/g) / (2 pi g 2**((2b+1)/g) s)``.
    """
    scales = np.atleast_1d(np.asarray(scales, dtype=float))
    if n is None:
        return np.array([kernel_energy(params, s) for s in scales])
    return np.mean(_responses(params, scales, n) ** 2, axis=1)
