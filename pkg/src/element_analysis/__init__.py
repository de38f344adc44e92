"""Element analysis of time series with generalized Morse wavelets."""

from .cwt import Scalogram, ScaleGrid, TimeSeries, cwt_direct, cwt_fft, edge_mask, make_scale_grid
from .detection import (
    ElementEvent,
    MaxPoint,
    NoiseModel,
    detect,
    estimate_elements,
    estimate_noise,
    find_maxima,
    reconstruct_scalogram,
    synthesize,
)
from .morse import MorseParams, morse_freq, morse_norm, morse_time, peak_frequency
from .preprocess import FilterSpec, RawSeries, butterworth_highpass, resample_uniform
from .theory import (
    ElementParams,
    element_frequency,
    eta,
    s_tilde_max,
    zeta,
    zeta_asymptotic,
    zeta_at_zero,
    zeta_max,
)

__version__ = "0.1.0"
