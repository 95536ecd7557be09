"""
Spectral analysis of event-based speed samples.

Encoder speeds arrive at pulse events, so they are first interpolated onto a
uniform grid. The single-sided amplitude spectrum then shows the periodic
disturbance at multiples of the wheel rotation frequency and, on bicycles,
the pedaling ripple at ``k * f_bar`` where ``k`` is twice the gear gain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import FieldAbsent, InsufficientData, NoPeak, TooShort
from .speed import SpeedSample

TWO_PI = 2.0 * math.pi
DEFAULT_RATE = 100.0
MIN_LENGTH = 16
# a cadence peak must stand this far above the median amplitude
PEAK_SIGNIFICANCE = 3.0
# peaks below this fraction of the mean speed are numerical noise
_FLAT_FLOOR = 1e-9

_FIELDS = {"basic": "omega_basic", "filtered": "omega_filtered", "rev": "omega_rev"}


@dataclass(frozen=True)
class UniformSeries:
    t0: float
    rate: float
    values: np.ndarray

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError("rate must be positive")
        v = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(v)):
            raise ValueError("series values must be finite")
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.values)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(len(self.values)) / self.rate


@dataclass(frozen=True)
class Spectrum:
    freqs: np.ndarray
    amps: np.ndarray
    fundamental: float

    @property
    def resolution(self) -> float:
        return float(self.freqs[1] - self.freqs[0])

    def amplitude_at(self, f: float, tol_bins: int = 1) -> float:
        """Largest amplitude within ``tol_bins`` bins of ``f``."""
        k = int(round(f / self.resolution))
        lo, hi = max(k - tol_bins, 0), min(k + tol_bins + 1, len(self.amps))
        if lo >= hi:
            return 0.0
        return float(self.amps[lo:hi].max())


def resample(samples: list[SpeedSample], field: str = "basic", rate: float = DEFAULT_RATE) -> UniformSeries:
    """Linear interpolation of one speed field onto a uniform grid.

    Samples where the field is absent are skipped; the grid spans the first
    to the last sample that has it.
    """
    if field not in _FIELDS:
        raise FieldAbsent(f"unknown field {field!r}; expected one of {sorted(_FIELDS)}")
    if not rate > 0:
        raise ValueError("rate must be positive")
    attr = _FIELDS[field]
    pts = [(s.t, getattr(s, attr)) for s in samples if getattr(s, attr) is not None]
    if samples and not pts:
        raise FieldAbsent(f"no sample carries {field!r}")
    if len(pts) < 2:
        raise InsufficientData(f"need at least 2 samples with {field!r}, got {len(pts)}")
    t, v = np.array(pts).T
    return resample_arrays(t, v, rate)


def resample_arrays(t, v, rate: float = DEFAULT_RATE) -> UniformSeries:
    t = np.asarray(t, dtype=float)
    v = np.asarray(v, dtype=float)
    if len(t) < 2:
        raise InsufficientData("need at least 2 samples")
    n = int(math.floor((t[-1] - t[0]) * rate + 1e-9)) + 1
    grid = t[0] + np.arange(n) / rate
    return UniformSeries(float(t[0]), float(rate), np.interp(grid, t, v))


def amplitude_spectrum(series: UniformSeries, window: str = "hann",
                       fundamental: float | None = None) -> Spectrum:
    """Single-sided amplitude spectrum after mean removal.

    Amplitudes are normalized so a sinusoid of amplitude ``a`` centered on a
    bin reads ``a`` for either window. ``fundamental`` defaults to the mean
    of the series read as an angular speed, ``mean / (2*pi)``.
    """
    x = series.values
    n = len(x)
    if n < MIN_LENGTH:
        raise TooShort(f"need at least {MIN_LENGTH} samples, got {n}")
    if window == "rect":
        w = np.ones(n)
    elif window == "hann":
        w = np.hanning(n + 1)[:-1]  # periodic Hann
    else:
        raise ValueError(f"unknown window {window!r}")
    mean = float(x.mean())
    X = np.fft.rfft((x - mean) * w)
    amps = np.abs(X) / w.sum()
    amps[1:] *= 2.0
    if n % 2 == 0:
        amps[-1] /= 2.0
    freqs = np.fft.rfftfreq(n, d=1.0 / series.rate)
    if fundamental is None:
        fundamental = mean / TWO_PI
    return Spectrum(freqs, amps, float(fundamental))


def harmonic_marks(f_bar: float, count: int) -> list[float]:
    """``[f_bar, 2*f_bar, ..., count*f_bar]``."""
    if not f_bar > 0:
        raise ValueError("f_bar must be positive")
    if count < 1:
        raise ValueError("count must be at least 1")
    return [i * f_bar for i in range(1, count + 1)]


def harmonic_amplitudes(spec: Spectrum, count: int = 3, tol_bins: int = 1) -> list[float]:
    return [spec.amplitude_at(f, tol_bins) for f in harmonic_marks(spec.fundamental, count)]


def cadence_estimate(spec: Spectrum, gear_gain: float,
                     exclusion_halfwidth: float | None = None) -> tuple[float, float]:
    """Pedaling-ripple peak and the cadence it implies.

    The torque ripple sits at twice the crank rate, scaled by the gear gain
    (wheel revolutions per crank revolution), so ``cadence = f_peak /
    (2 * gear_gain)`` in crank revolutions per second. Bins within
    ``exclusion_halfwidth`` of any rotation harmonic, and the DC bin, are
    ignored. The half-width defaults to three bins.
    """
    if not spec.fundamental > 0:
        raise ValueError("spectrum has no valid fundamental")
    if not gear_gain > 0:
        raise ValueError("gear_gain must be positive")
    if exclusion_halfwidth is None:
        exclusion_halfwidth = 3 * spec.resolution

    f = spec.freqs
    keep = f > 0
    h = np.round(f / spec.fundamental)
    near = (h >= 1) & (np.abs(f - h * spec.fundamental) <= exclusion_halfwidth)
    keep &= ~near
    if not np.any(keep):
        raise NoPeak("every bin is excluded")
    amps = np.where(keep, spec.amps, 0.0)
    k = int(np.argmax(amps))
    peak = amps[k]
    if peak <= _FLAT_FLOOR * TWO_PI * spec.fundamental or peak < PEAK_SIGNIFICANCE * np.median(spec.amps[keep]):
        raise NoPeak("no significant peak outside the rotation harmonics")
    return float(f[k]), float(f[k] / (2.0 * gear_gain))
