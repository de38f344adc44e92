"""Closed-form transform of a Morse element by a Morse wavelet.

An order-``mu`` element ``psi_mu(t/rho)`` analysed with an order-``beta``
wavelet of the same family gives

    W(tau, s) = (c/2) zeta(tau/rho, s/rho)

    zeta(tau, s) = (a_b a_m / a_{b+m}) s**b / k**(b+m+1) psi_{b+m}(tau / k),
    k = (s**g + 1)**(1/g)

i.e. another Morse wavelet, of order ``beta + mu``. Everything here follows
from that identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .morse import MorseParams, log_morse_norm, morse_table, peak_frequency


def log_gamma(x):
    """``log(Gamma(x))`` for positive arguments."""
    return gammaln(x)


@dataclass(frozen=True)
class ElementParams:
    """Analysis order ``beta``, element order ``mu`` and shared family ``gamma``."""

    beta: float = 3.0
    mu: float = 3.0
    gamma: float = 1.0

    def __post_init__(self):
        for name in ("beta", "mu", "gamma"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")
            object.__setattr__(self, name, float(value))

    @property
    def analysis(self) -> MorseParams:
        return MorseParams(self.beta, self.gamma)

    @property
    def element(self) -> MorseParams:
        return MorseParams(self.mu, self.gamma)

    @property
    def combined(self) -> MorseParams:
        return MorseParams(self.beta + self.mu, self.gamma)

    @property
    def log_amplitude(self) -> float:
        """``log(a_b a_m / a_{b+m})``."""
        return log_morse_norm(self.analysis) + log_morse_norm(self.element) - log_morse_norm(self.combined)


def _stretch(p: ElementParams, s):
    return (s**p.gamma + 1.0) ** (1.0 / p.gamma)


def zeta(p: ElementParams, tau, s, *, table_size: int = 8192):
    """Transform of a unit element, in element-scale units.

    ``tau`` and ``s`` are time offset and analysis scale divided by the
    element scale; they broadcast against each other.
    """
    tau = np.asarray(tau, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0):
        raise ValueError("zeta needs positive scale ratios")
    k = _stretch(p, s)
    amp = np.exp(p.log_amplitude + p.beta * np.log(s) - (p.beta + p.mu + 1) * np.log(k))
    psi = morse_table(p.combined, table_size)
    out = amp * psi(tau / k)
    return out[()] if out.ndim == 0 else out


def _log_zeta0_prefactor(p: ElementParams) -> float:
    b, m, g = p.beta, p.mu, p.gamma
    return (
        log_morse_norm(p.analysis)
        + log_morse_norm(p.element)
        + log_gamma((b + m + 1) / g)
        - math.log(2 * math.pi * g)
    )


def zeta_at_zero(p: ElementParams, s_tilde):
    """``zeta(0, s)``: real, positive, unimodal in ``s``."""
    s = np.asarray(s_tilde, dtype=float)
    if np.any(s <= 0):
        raise ValueError("zeta_at_zero needs positive scale ratios")
    b, m, g = p.beta, p.mu, p.gamma
    out = np.exp(_log_zeta0_prefactor(p) + b * np.log(s) - (b + m + 1) / g * np.log(s**g + 1))
    return out[()] if out.ndim == 0 else out


def s_tilde_max(p: ElementParams) -> float:
    """Scale ratio ``s/rho`` maximizing the transform, ``(beta/(mu+1))**(1/gamma)``."""
    return (p.beta / (p.mu + 1)) ** (1.0 / p.gamma)


def eta(p: ElementParams) -> float:
    """Scale weighting factor, ``zeta_at_zero`` at its peak without the prefactor."""
    r = p.beta / (p.mu + 1)
    return math.exp(p.beta / p.gamma * math.log(r) - (p.beta + p.mu + 1) / p.gamma * math.log(r + 1))


def zeta_max(p: ElementParams) -> float:
    """Peak modulus of the transform of a unit element; independent of ``rho``."""
    return math.exp(_log_zeta0_prefactor(p)) * eta(p)


def element_frequency_factor(p: ElementParams) -> float:
    """Ratio between element frequency and the scale frequency of its maximum."""
    return peak_frequency(p.element) / peak_frequency(p.analysis) * s_tilde_max(p)


def element_frequency(omega_s_hat, p: ElementParams):
    """Map the scale frequency of a maximum to the element's peak frequency."""
    omega = np.asarray(omega_s_hat, dtype=float)
    if np.any(omega <= 0):
        raise ValueError("scale frequency must be positive")
    out = omega * element_frequency_factor(p)
    return out[()] if out.ndim == 0 else out


def zeta_asymptotic(p: ElementParams, tau, s: float, rho: float):
    """Limiting forms of ``zeta(tau/rho, s/rho)`` for very large or small ``s/rho``.

    ``tau``, ``s`` and ``rho`` are in samples. For ``s >> rho`` the wavelet
    dominates: ``A (rho/s)**(mu+1) psi_{b+m}(tau/s)``; for ``s << rho`` the
    element does: ``A (s/rho)**beta psi_{b+m}(tau/rho)``.
    """
    ratio = s / rho
    if 0.1 <= ratio <= 10:
        raise ValueError(f"s/rho = {ratio:g} is outside both asymptotic regimes (< 0.1 or > 10)")
    tau = np.asarray(tau, dtype=float)
    psi = morse_table(p.combined)
    amp = math.exp(p.log_amplitude)
    if ratio > 10:
        return amp * (rho / s) ** (p.mu + 1) * psi(tau / s)
    return amp * ratio**p.beta * psi(tau / rho)
