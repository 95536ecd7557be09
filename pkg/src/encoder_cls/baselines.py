"""
Conventional reference filters for wheel-speed signals.

These operate on uniformly resampled series:

* causal Butterworth low-pass,
* zero-phase (forward-backward) Butterworth low-pass, offline only,
* a bank of second-order notches tracking the harmonics of the rotation
  frequency sample by sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal

from .errors import BadCutoff, NotchAboveNyquist
from .spectral import UniformSeries

DEFAULT_LP_CUTOFF = 4.0
DEFAULT_LP_ORDER = 2


@dataclass(frozen=True)
class NotchBankConfig:
    """Notches at ``i * f_bar`` for ``i = 1..harmonics``.

    ``bandwidth`` is the -3 dB width of each notch in Hz and ``depth`` the
    attenuation at its center in dB.
    """

    harmonics: int = 3
    bandwidth: float = 0.1
    depth: float = 40.0

    def __post_init__(self):
        if self.harmonics < 1:
            raise ValueError("harmonics must be >= 1")
        if not self.bandwidth > 0:
            raise ValueError("bandwidth must be positive")
        if not self.depth > 0:
            raise ValueError("depth must be positive")


def _butter(series: UniformSeries, cutoff: float, order: int):
    if not 0 < cutoff < series.rate / 2:
        raise BadCutoff(f"cutoff {cutoff} Hz outside (0, {series.rate / 2}) Hz")
    if order < 1:
        raise BadCutoff(f"order must be >= 1, got {order}")
    return signal.butter(order, cutoff, btype="low", fs=series.rate, output="sos")


def lowpass(series: UniformSeries, cutoff: float = DEFAULT_LP_CUTOFF,
            order: int = DEFAULT_LP_ORDER) -> UniformSeries:
    """Causal Butterworth low-pass, initialized at steady state on the first sample."""
    sos = _butter(series, cutoff, order)
    x = series.values
    zi = signal.sosfilt_zi(sos) * x[0]
    y, _ = signal.sosfilt(sos, x, zi=zi)
    return UniformSeries(series.t0, series.rate, y)


def zero_phase_lowpass(series: UniformSeries, cutoff: float = DEFAULT_LP_CUTOFF,
                       order: int = DEFAULT_LP_ORDER) -> UniformSeries:
    """Forward-backward Butterworth low-pass (no phase shift, needs the whole record)."""
    sos = _butter(series, cutoff, order)
    return UniformSeries(series.t0, series.rate, signal.sosfiltfilt(sos, series.values))


def notch_bank(series: UniformSeries, f_bar_track, cfg: NotchBankConfig = NotchBankConfig()) -> UniformSeries:
    """Cascade of tracking notches at the first ``cfg.harmonics`` multiples of ``f_bar``.

    Each section is ``c*x + (1-c)*N(x)`` where ``N`` is an ideal second-order
    notch with unit DC gain and ``c = 10**(-depth/20)``, so the center
    attenuation is exactly ``depth``. Coefficients are recomputed every
    sample from ``f_bar_track``.
    """
    x = series.values
    f_bar = np.asarray(f_bar_track, dtype=float)
    if f_bar.shape != x.shape:
        raise ValueError("f_bar_track must match the series length")
    if np.any(f_bar <= 0):
        raise ValueError("f_bar_track must be positive")
    nyq = series.rate / 2
    if cfg.harmonics * f_bar.max() >= nyq:
        raise NotchAboveNyquist(f"notch at {cfg.harmonics * f_bar.max():.3f} Hz >= Nyquist {nyq} Hz")

    r = 1.0 - math.pi * cfg.bandwidth / series.rate
    c = 10.0 ** (-cfg.depth / 20.0)
    y = x
    for h in range(1, cfg.harmonics + 1):
        y = _tracking_notch(y, 2.0 * math.pi * h * f_bar / series.rate, r, c)
    return UniformSeries(series.t0, series.rate, y)


def _tracking_notch(x: np.ndarray, w0: np.ndarray, r: float, c: float) -> np.ndarray:
    # direct form I; state is in signal values so coefficient changes are benign
    cw = np.cos(w0)
    g = (1.0 - 2.0 * r * cw + r * r) / (2.0 - 2.0 * cw)
    y = np.empty_like(x)
    x1 = x2 = x[0]
    y1 = y2 = x[0]
    for i in range(len(x)):
        xi = x[i]
        b1 = -2.0 * cw[i]
        v = g[i] * (xi + b1 * x1 + x2) + 2.0 * r * cw[i] * y1 - r * r * y2
        x2, x1 = x1, xi
        y2, y1 = y1, v
        y[i] = v
    return c * x + (1.0 - c) * y
