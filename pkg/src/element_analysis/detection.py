"""Element detection: transform maxima, noise thresholds and estimates.

A noisy series is modelled as a sum of isolated Morse elements,
``x(t) = sum Re{c_n psi_mu((t - t_n)/rho_n)} + noise``. Each element leaves a
single modulus maximum in the scalogram at ``(t_n, rho_n * s_tilde_max)``
with value ``c_n * zeta_max / 2``; inverting that gives the estimates.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import math
import threading
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.fft import next_fast_len

from .cwt import Scalogram, ScaleGrid, TimeSeries, edge_mask, white_noise_variance
from .morse import dft_frequencies, envelope_std, morse_freq, morse_table, peak_frequency
from .theory import ElementParams, element_frequency, s_tilde_max, zeta, zeta_max

#: maxima below this fraction of the largest modulus are treated as round-off
RELATIVE_FLOOR = 1e-6
#: events closer than this many envelope widths are flagged as overlapping
OVERLAP_WIDTHS = 2.0


@dataclass(frozen=True)
class MaxPoint:
    scale_index: int
    time_index: int
    t_hat: float
    s_hat: float
    w_value: complex
    modulus: float


@dataclass(frozen=True)
class ElementEvent:
    """One recovered (or prescribed) element.

    ``t_sample`` and ``rho`` are in samples, ``omega_rho`` in radians per
    sample, ``t`` and ``period`` in the series' time unit.
    """

    t_sample: float
    c_abs: float
    c_phase: float
    rho: float
    omega_rho: float
    period: float
    t: float = 0.0
    t_iso: str | None = None
    significance: float = math.inf
    overlap_flag: bool = False

    @property
    def c(self) -> complex:
        return self.c_abs * np.exp(1j * self.c_phase)

    @classmethod
    def from_element(
        cls, p: ElementParams, t_sample: float, c: complex, rho: float, series: TimeSeries | None = None, **kw
    ) -> ElementEvent:
        if not rho > 0:
            raise ValueError(f"element scale must be positive, got {rho}")
        if c == 0:
            raise ValueError("element amplitude must be nonzero")
        dt = series.dt if series is not None else 1.0
        omega = peak_frequency(p.element) / rho
        t, iso = float(t_sample) * dt, None
        if series is not None:
            t = series.t0 + t
            stamp = series.timestamp(t_sample)
            if isinstance(stamp, _dt.datetime):
                iso = stamp.isoformat()
        return cls(
            t_sample=float(t_sample),
            c_abs=float(abs(c)),
            c_phase=float(np.angle(c)),
            rho=float(rho),
            omega_rho=float(omega),
            period=float(2 * np.pi * dt / omega),
            t=t,
            t_iso=iso,
            **kw,
        )


@dataclass(frozen=True)
class NoiseModel:
    """Per-scale modulus thresholds for a given false-alarm level.

    ``quantile`` is the threshold in units of ``sigma_hat * unit_std``;
    ``unit_std`` is the per-scale transform spread of unit white noise.
    """

    sigma_hat: float
    per_scale_threshold: np.ndarray
    alpha: float
    method: str
    quantile: float
    unit_std: np.ndarray
    null_statistics: np.ndarray | None = field(default=None, repr=False)


# --------------------------------------------------------------------------
# maxima


def _local_maxima(modulus: np.ndarray, valid: np.ndarray, floor: float) -> np.ndarray:
    m = modulus
    core = m[1:-1, 1:-1]
    keep = core > floor
    for dk in (-1, 0, 1):
        for di in (-1, 0, 1):
            if dk == 0 and di == 0:
                continue
            keep &= core > m[1 + dk:m.shape[0] - 1 + dk, 1 + di:m.shape[1] - 1 + di]
    keep &= valid[1:-1, 1:-1]
    ks, iss = np.nonzero(keep)
    return np.stack([ks + 1, iss + 1], axis=1)


def _vertex(l, c, r):
    """Offset and height correction of the parabola through three points."""
    den = l - 2 * c + r
    with np.errstate(divide="ignore", invalid="ignore"):
        d = np.where(den < 0, 0.5 * (l - r) / den, 0.0)
    d = np.clip(d, -0.5, 0.5)
    return d, -0.25 * (l - r) * d


def _phase_at(wl, wc, wr, d):
    dl = np.angle(wl / wc)
    dr = np.angle(wr / wc)
    return 0.5 * (dr - dl) * d + 0.5 * (dr + dl) * d**2


def find_maxima(scalogram: Scalogram, floor: float = 0.0) -> list[MaxPoint]:
    """Strict 8-neighbour maxima of ``|W|`` inside the valid region.

    Positions are refined by fitting a parabola to ``log|W|`` along time and
    log-scale separately; the phase is interpolated the same way. Sorted by
    decreasing modulus.
    """
    w = scalogram.coeffs
    m = np.abs(w)
    if m.shape[0] < 3 or m.shape[1] < 3:
        return []
    idx = _local_maxima(m, scalogram.valid, floor)
    if len(idx) == 0:
        return []
    k, i = idx[:, 0], idx[:, 1]
    with np.errstate(divide="ignore"):
        logm = np.log(m)
    dt, ht = _vertex(logm[k, i - 1], logm[k, i], logm[k, i + 1])
    ds, hs = _vertex(logm[k - 1, i], logm[k, i], logm[k + 1, i])
    phase = (
        np.angle(w[k, i])
        + _phase_at(w[k, i - 1], w[k, i], w[k, i + 1], dt)
        + _phase_at(w[k - 1, i], w[k, i], w[k + 1, i], ds)
    )
    modulus = np.exp(logm[k, i] + ht + hs)
    log_scales = np.log(scalogram.grid.scales)
    s_hat = np.exp(np.interp(k + ds, np.arange(len(log_scales)), log_scales))
    points = [
        MaxPoint(int(k[j]), int(i[j]), float(i[j] + dt[j]), float(s_hat[j]),
                 complex(modulus[j] * np.exp(1j * phase[j])), float(modulus[j]))
        for j in range(len(k))
    ]
    points.sort(key=lambda mp: -mp.modulus)
    return points


# --------------------------------------------------------------------------
# noise


def robust_sigma(values: np.ndarray) -> float:
    """Gaussian-consistent median absolute deviation."""
    values = np.asarray(values, dtype=float)
    return float(1.4826 * np.median(np.abs(values - np.median(values))))


def estimate_sigma(scalogram: Scalogram, min_samples: int = 64) -> float:
    """Noise standard deviation from the finest-scale row.

    For white noise the real and imaginary parts of an analytic transform are
    independent with variance ``E|W|**2 / 2``; the MAD of both, pooled, is
    rescaled by the unit-noise value.
    """
    row = scalogram.coeffs[0][scalogram.valid[0]]
    if len(row) < min_samples:
        raise ValueError(
            f"only {len(row)} valid samples at the finest scale; need at least {min_samples} to estimate noise"
        )
    unit = white_noise_variance(scalogram.params, scalogram.grid.scales[:1], scalogram.n)[0]
    return robust_sigma(np.concatenate([row.real, row.imag])) / math.sqrt(unit / 2)


def _null_statistic(scalogram: Scalogram, unit_std: np.ndarray, sigma: float) -> float:
    points = find_maxima(scalogram)
    if not points or sigma <= 0:
        return 0.0
    k = np.array([p.scale_index for p in points])
    mod = np.array([p.modulus for p in points])
    return float(np.max(mod / (sigma * unit_std[k])))


_null_cache: dict[str, np.ndarray] = {}
_null_lock = threading.Lock()


def null_distribution(grid: ScaleGrid, n: int, valid: np.ndarray, trials: int = 200, seed: int = 42) -> np.ndarray:
    """Largest studentized maximum per unit-white-noise trial.

    Each trial transforms fresh Gaussian noise, re-estimates sigma the same
    way real data are treated, and records ``max |W_n| / (sigma_hat * unit_std)``
    over valid maxima. Results are cached per configuration.
    """
    key = hashlib.sha1(
        repr((grid.params, grid.scales.tobytes(), n, trials, seed)).encode() + np.packbits(valid).tobytes()
    ).hexdigest()
    with _null_lock:
        cached = _null_cache.get(key)
    if cached is not None:
        return cached
    params = grid.params
    response = morse_freq(params, np.outer(grid.scales, dft_frequencies(n)))
    unit_std = np.sqrt(white_noise_variance(params, grid.scales, n))
    stats = np.empty(trials)
    for j in range(trials):
        noise = np.random.default_rng([seed, j]).standard_normal(n)
        noise -= noise.mean()
        coeffs = np.fft.ifft(np.fft.fft(noise)[None, :] * response, axis=1)
        sc = Scalogram(coeffs, grid, params, valid=valid)
        stats[j] = _null_statistic(sc, unit_std, estimate_sigma(sc))
    stats.setflags(write=False)
    with _null_lock:
        _null_cache[key] = stats
    return stats


def _order_statistic(stats: np.ndarray, alpha: float) -> float:
    # the ceil((1-alpha)(M+1))-th smallest keeps the exceedance probability <= alpha
    m = len(stats)
    rank = math.ceil((1 - alpha) * (m + 1))
    return float(np.sort(stats)[min(rank, m) - 1])


def _analytic_quantile(scalogram: Scalogram, alpha: float) -> float:
    # Rayleigh tail exp(-q**2) per independent cell, Bonferroni over the cells;
    # a cell spans two envelope widths in time and one octave in scale
    width = 2 * envelope_std(scalogram.params) * scalogram.grid.scales
    cells = np.sum(scalogram.valid.sum(axis=1) / width) / scalogram.grid.voxels_per_octave
    return math.sqrt(math.log(max(cells, 1.0) / alpha))


def estimate_noise(
    scalogram: Scalogram,
    p: ElementParams | None = None,
    alpha: float = 0.05,
    method: str = "monte-carlo",
    *,
    trials: int = 200,
    seed: int = 42,
) -> NoiseModel:
    """Noise level and per-scale significance thresholds.

    Thresholds control the chance that *any* valid maximum of a pure white
    noise scalogram of this size exceeds them at ``alpha``.
    ``method="monte-carlo"`` takes the empirical quantile over ``trials``
    seeded noise runs; ``"analytic-white"`` uses a Rayleigh tail with a
    Bonferroni correction over roughly independent time-scale cells.
    """
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if p is not None and p.analysis != scalogram.params:
        raise ValueError(f"element parameters {p} do not match the scalogram's wavelet {scalogram.params}")
    sigma = estimate_sigma(scalogram)
    unit_std = np.sqrt(white_noise_variance(scalogram.params, scalogram.grid.scales, scalogram.n))
    stats = None
    if method == "monte-carlo":
        stats = null_distribution(scalogram.grid, scalogram.n, scalogram.valid, trials, seed)
        q = _order_statistic(stats, alpha)
    elif method == "analytic-white":
        q = _analytic_quantile(scalogram, alpha)
    else:
        raise ValueError(f"unknown noise method {method!r}; use 'monte-carlo' or 'analytic-white'")
    return NoiseModel(sigma, q * sigma * unit_std, alpha, method, q, unit_std, stats)


# --------------------------------------------------------------------------
# estimation


def event_width(p: ElementParams, rho) -> np.ndarray:
    """Time spread (samples) of an element's transform at its maximizing scale."""
    k = (s_tilde_max(p) ** p.gamma + 1) ** (1 / p.gamma)
    return np.asarray(rho) * k * envelope_std(p.combined)


def flag_overlaps(events: list[ElementEvent], p: ElementParams, widths: float = OVERLAP_WIDTHS) -> list[ElementEvent]:
    if len(events) < 2:
        return list(events)
    t = np.array([e.t_sample for e in events])
    w = event_width(p, np.array([e.rho for e in events]))
    close = np.abs(t[:, None] - t[None, :]) < widths * np.maximum(w[:, None], w[None, :])
    np.fill_diagonal(close, False)
    flags = close.any(axis=1)
    return [replace(e, overlap_flag=bool(f)) for e, f in zip(events, flags)]


def estimate_elements(
    maxima: list[MaxPoint],
    noise: NoiseModel | None,
    p: ElementParams,
    scalogram: Scalogram,
) -> list[ElementEvent]:
    """Convert significant maxima into element estimates.

    ``c = 2 W_n / zeta_max``, ``rho = s_hat / s_tilde_max``, element frequency
    from the scale frequency of the maximum. Maxima at or below their scale's
    threshold are dropped; with ``noise=None`` all maxima are kept.
    """
    if p.analysis != scalogram.params:
        raise ValueError(f"element parameters {p} do not match the scalogram's wavelet {scalogram.params}")
    zmax = zeta_max(p)
    smax = s_tilde_max(p)
    wpeak = peak_frequency(p.analysis)
    series = TimeSeries(np.zeros(16), scalogram.dt, scalogram.t0, scalogram.epoch)
    events = []
    for mp in maxima:
        significance = math.inf
        if noise is not None:
            threshold = noise.per_scale_threshold[mp.scale_index]
            significance = mp.modulus / threshold if threshold > 0 else math.inf
            if not significance > 1:
                continue
        c = 2 * mp.w_value / zmax
        omega = float(element_frequency(wpeak / mp.s_hat, p))
        rho = mp.s_hat / smax
        event = ElementEvent.from_element(p, mp.t_hat, c, rho, series, significance=float(significance))
        # keep the frequency exactly as mapped from the maximum's scale frequency
        events.append(replace(event, omega_rho=omega, period=2 * np.pi * scalogram.dt / omega))
    events.sort(key=lambda e: e.t_sample)
    return flag_overlaps(events, p)


def detect(
    scalogram: Scalogram,
    p: ElementParams,
    alpha: float = 0.05,
    method: str = "monte-carlo",
    *,
    trials: int = 200,
    seed: int = 42,
) -> tuple[list[ElementEvent], NoiseModel, list[MaxPoint]]:
    """Maxima, noise model and significant element estimates in one call."""
    modulus = scalogram.modulus
    peak = modulus[scalogram.valid].max() if scalogram.valid.any() else 0.0
    maxima = find_maxima(scalogram, floor=RELATIVE_FLOOR * peak)
    noise = estimate_noise(scalogram, p, alpha, method, trials=trials, seed=seed)
    return estimate_elements(maxima, noise, p, scalogram), noise, maxima


# --------------------------------------------------------------------------
# synthesis


def synthesize(
    events: list[ElementEvent],
    p: ElementParams,
    n: int,
    dt: float = 1.0,
    noise_sigma: float = 0.0,
    seed: int | None = None,
    *,
    t0: float = 0.0,
    epoch: _dt.datetime | None = None,
    periodic: bool = False,
) -> TimeSeries:
    """Element-model series ``sum Re{c psi_mu((t - t_n)/rho)}`` plus white noise.

    Element samples come from the inverse DFT of ``rho Psi_mu(rho omega)``
    with a linear phase for the shift. Unless ``periodic``, the synthesis runs
    on a padded grid so tails do not wrap around the ends.
    """
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be non-negative")
    for e in events:
        if not 0 <= e.t_sample < n:
            raise ValueError(f"event time {e.t_sample} outside [0, {n})")
    pad = 0
    if events and not periodic:
        radius = morse_table(p.element, 1 << 15).energy_radius(1 - 1e-12)
        pad = int(math.ceil(radius * max(e.rho for e in events)))
    length = n if pad == 0 else next_fast_len(n + 2 * pad)
    omega = dft_frequencies(length)
    spectrum = np.zeros(length, dtype=complex)
    for e in events:
        spectrum += e.c * e.rho * morse_freq(p.element, e.rho * omega) * np.exp(-1j * omega * (e.t_sample + pad))
    values = np.fft.ifft(spectrum).real[pad:pad + n]
    if noise_sigma > 0:
        values = values + noise_sigma * np.random.default_rng(seed).standard_normal(n)
    return TimeSeries(values, dt, t0, epoch)


def reconstruct_scalogram(
    events: list[ElementEvent],
    p: ElementParams,
    grid: ScaleGrid,
    n: int,
    dt: float = 1.0,
    t0: float = 0.0,
    epoch: _dt.datetime | None = None,
) -> Scalogram:
    """Noise-free scalogram ``(1/2) sum c_n zeta((tau - t_n)/rho_n, s/rho_n)``."""
    if grid.params != p.analysis:
        raise ValueError(f"scale grid was built for {grid.params}, not {p.analysis}")
    coeffs = np.zeros((len(grid), n), dtype=complex)
    tau = np.arange(n, dtype=float)
    for e in events:
        coeffs += 0.5 * e.c * zeta(p, (tau[None, :] - e.t_sample) / e.rho, grid.scales[:, None] / e.rho)
    return Scalogram(coeffs, grid, p.analysis, dt, t0, epoch, edge_mask(grid, n))
