"""Generalized Morse wavelets.

The frequency response is

    Psi(omega) = a * omega**beta * exp(-omega**gamma),  omega > 0

and zero for negative frequencies. ``a`` is chosen so the peak value is 2.
Time-domain samples are obtained numerically by inverse DFT; there is no
closed form for general (beta, gamma).
"""

from __future__ import annotations

import logging
import math
import threading
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq
from scipy.special import gammaln

log = logging.getLogger(__name__)

#: fraction of kernel energy a time window must hold before we call it truncated
ENERGY_FRACTION = 0.999


@dataclass(frozen=True)
class MorseParams:
    """Order ``beta`` and family ``gamma`` of a generalized Morse wavelet."""

    beta: float = 3.0
    gamma: float = 1.0

    def __post_init__(self):
        for name in ("beta", "gamma"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")
            object.__setattr__(self, name, float(value))


def _check(params: MorseParams) -> MorseParams:
    if not isinstance(params, MorseParams):
        return MorseParams(*params)
    return params


def log_morse_norm(params: MorseParams) -> float:
    b, g = params.beta, params.gamma
    return math.log(2.0) + (b / g) * (1.0 + math.log(g) - math.log(b))


def morse_norm(params: MorseParams) -> float:
    """Normalizing constant ``2 (e gamma / beta)**(beta / gamma)``."""
    return math.exp(log_morse_norm(_check(params)))


def peak_frequency(params: MorseParams) -> float:
    """Radian frequency at which the response peaks, ``(beta/gamma)**(1/gamma)``."""
    params = _check(params)
    return (params.beta / params.gamma) ** (1.0 / params.gamma)


def morse_freq(params: MorseParams, omega) -> np.ndarray:
    """Evaluate the frequency response on ``omega`` (radians per unit time).

    Negative frequencies and ``omega == 0`` map to exactly zero.
    """
    params = _check(params)
    omega = np.asarray(omega, dtype=float)
    out = np.zeros(omega.shape)
    pos = omega > 0
    w = omega[pos]
    # log space keeps large beta from overflowing before the exponential decay wins
    out[pos] = np.exp(log_morse_norm(params) + params.beta * np.log(w) - w**params.gamma)
    return out


def dft_frequencies(n: int, d: float = 1.0) -> np.ndarray:
    """Radian frequencies of a length-``n`` DFT; the Nyquist bin counts as negative."""
    return 2.0 * np.pi * np.fft.fftfreq(n, d)


def morse_time(params: MorseParams, n: int, s: float, *, center: bool = True) -> np.ndarray:
    """Sampled kernel ``(1/s) psi(t/s)`` on ``n`` points.

    Computed as the inverse DFT of the response at ``s * omega``. With
    ``center`` the kernel origin sits at index ``n // 2``; otherwise at 0.
    A warning is logged when less than ``ENERGY_FRACTION`` of the continuous
    kernel energy fits in the window.
    """
    params = _check(params)
    if n < 16:
        raise ValueError(f"n must be at least 16, got {n}")
    if not s > 0:
        raise ValueError(f"scale must be positive, got {s}")
    kernel = np.fft.ifft(morse_freq(params, s * dft_frequencies(n)))
    frac = energy_within(params, (n // 2) / s)
    if frac < ENERGY_FRACTION:
        log.warning(
            "Morse kernel (beta=%g, gamma=%g, s=%g) truncated: %.4f%% of its energy in %d samples",
            params.beta, params.gamma, s, 100 * frac, n,
        )
    if center:
        kernel = np.roll(kernel, n // 2)
    return kernel


def psi_at_zero(params: MorseParams) -> float:
    """Exact ``psi(0) = a Gamma((beta+1)/gamma) / (2 pi gamma)``."""
    params = _check(params)
    b, g = params.beta, params.gamma
    return math.exp(log_morse_norm(params) + gammaln((b + 1) / g)) / (2 * np.pi * g)


def cutoff_frequency(params: MorseParams, rel_tol: float = 1e-16) -> float:
    """Frequency above the peak where the response drops to ``2 * rel_tol``."""
    params = _check(params)
    b, g = params.beta, params.gamma
    target = math.log(2 * rel_tol) - log_morse_norm(params)

    def f(w):
        return b * math.log(w) - w**g - target

    lo = peak_frequency(params)
    hi = 2 * lo + 1
    while f(hi) > 0:
        hi *= 2
    return brentq(f, lo, hi)


class MorseTable:
    """Dense time-domain tabulation of ``psi(t)`` at unit scale.

    ``psi(t) = (1/2pi) int Psi(omega) exp(i omega t) d omega`` is sampled by
    inverse FFT and interpolated with a cubic spline. The table is rescaled so
    the centre value matches the closed form exactly. Outside the tabulated
    span the wavelet is taken to be zero.
    """

    def __init__(self, params: MorseParams, n: int = 8192, oversample: float = 16.0):
        self.params = params = _check(params)
        self.n = n
        w_top = max(cutoff_frequency(params), oversample * peak_frequency(params))
        self.dt = np.pi / w_top
        omega = dft_frequencies(n, self.dt)
        values = np.fft.ifft(morse_freq(params, omega)) / self.dt
        values = np.fft.fftshift(values)
        self.t = (np.arange(n) - n // 2) * self.dt
        values *= psi_at_zero(params) / values[n // 2].real
        self.values = values
        self._spline = CubicSpline(self.t, values)

    @property
    def half_span(self) -> float:
        return self.t[-1]

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape, dtype=complex)
        inside = np.abs(t) <= self.half_span
        out[inside] = self._spline(t[inside])
        return out

    @cached_property
    def _cumulative_energy(self) -> tuple[np.ndarray, np.ndarray]:
        # energy inside |t| <= r as a function of r, from the centre outwards
        e = np.abs(self.values) ** 2 * self.dt
        c = self.n // 2
        radii = np.arange(c) * self.dt
        inner = np.cumsum(e[c:c + c]) + np.concatenate(([0.0], np.cumsum(e[c - 1:0:-1])))
        return radii, inner / e.sum()

    def energy_within(self, half_width: float) -> float:
        radii, frac = self._cumulative_energy
        return float(np.interp(half_width, radii, frac, right=1.0))

    def energy_radius(self, fraction: float = ENERGY_FRACTION) -> float:
        """Smallest half-width containing ``fraction`` of the energy."""
        radii, frac = self._cumulative_energy
        idx = int(np.searchsorted(frac, fraction))
        return float(radii[min(idx, len(radii) - 1)])

    @cached_property
    def envelope_std(self) -> float:
        """Standard deviation of ``|psi|`` treated as a weight over time.

        The moment is taken over the window holding ``ENERGY_FRACTION`` of the
        energy; for heavy-tailed members (gamma = 1, small beta) the untruncated
        moment diverges.
        """
        r = self.energy_radius()
        inside = np.abs(self.t) <= r
        w = np.abs(self.values[inside])
        t = self.t[inside]
        return float(np.sqrt(np.sum(w * t**2) / np.sum(w)))


_tables: dict[tuple[float, float, int], MorseTable] = {}
_tables_lock = threading.Lock()


def morse_table(params: MorseParams, n: int = 8192) -> MorseTable:
    """Shared, lazily built tabulation for ``params``."""
    params = _check(params)
    key = (params.beta, params.gamma, n)
    table = _tables.get(key)
    if table is None:
        with _tables_lock:
            table = _tables.get(key)
            if table is None:
                table = _tables[key] = MorseTable(params, n)
    return table


def energy_within(params: MorseParams, half_width: float) -> float:
    """Fraction of the unit-scale kernel energy inside ``|t| <= half_width``."""
    return morse_table(params, 1 << 15).energy_within(half_width)


def envelope_std(params: MorseParams) -> float:
    """Time spread of the unit-scale envelope; scales linearly with ``s``."""
    return morse_table(params, 1 << 15).envelope_std


def kernel_energy(params: MorseParams, s: float = 1.0) -> float:
    """Continuous energy ``int |(1/s) psi(t/s)|**2 dt``."""
    params = _check(params)
    b, g = params.beta, params.gamma
    r = (2 * b + 1) / g
    return math.exp(2 * log_morse_norm(params) + gammaln(r) - r * math.log(2)) / (2 * np.pi * g * s)
