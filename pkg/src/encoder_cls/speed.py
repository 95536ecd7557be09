"""
Event-based speed computation from encoder pulses.

Each pulse closes one sector. With ``L`` sectors per revolution the stream
gives, per pulse:

* the fixed-position speed ``alpha_nom / dt`` (assumes equal sectors),
* the mean revolution speed ``2*pi / dt_rev`` where ``dt_rev`` is the time
  since the previous visit of the same sector index,
* the regression target ``y = 2*pi * dt / dt_rev`` which equals the true
  sector width whenever the speed is constant over the revolution.

Sector labels are relative: sector 0 is the first pulse of the stream (or
the pulse at which labeling was restarted), since an encoder without an
index mark cannot tell sectors apart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NonMonotonicTimestamp, NonPositiveInput

TWO_PI = 2.0 * math.pi
KMH_PER_MS = 3.6


@dataclass(frozen=True)
class SectorObservation:
    """One regression datum for a sector, available from the second revolution."""

    sector: int
    revolution: int
    dt: float
    dt_rev: float
    y: float


@dataclass(frozen=True)
class SpeedSample:
    """Speeds computed at a pulse event (all rad/s)."""

    t: float
    sector: int
    omega_basic: float
    omega_rev: float | None = None
    omega_filtered: float | None = None


@dataclass
class IngestState:
    """Bookkeeping for the pulse stream of one encoder.

    ``revolution_counter`` is 1-based: the pulses labeled 0..L-1 after a
    (re)start form revolution 1, which yields no observations yet.
    """

    L: int
    next_sector: int = 0
    revolution_counter: int = 1
    last_pulse_t: float | None = None
    per_sector_last_t: list = field(default_factory=list)

    def __post_init__(self):
        if self.L < 2:
            raise ValueError("need at least 2 sectors")
        if not self.per_sector_last_t:
            self.per_sector_last_t = [None] * self.L

    @property
    def alpha_nom(self) -> float:
        return TWO_PI / self.L


def ingest_pulse(state: IngestState, t: float) -> tuple[SpeedSample | None, SectorObservation | None]:
    """Consume one pulse timestamp, updating ``state`` in place.

    Returns the speed sample (``None`` for the very first pulse) and the
    sector observation (``None`` until this sector index has been seen once
    before).
    """
    t = float(t)
    last = state.last_pulse_t
    if last is not None and not t > last:
        raise NonMonotonicTimestamp(f"pulse at t={t!r} not after previous pulse at t={last!r}")
    if not math.isfinite(t):
        raise NonMonotonicTimestamp(f"non-finite pulse time {t!r}")

    sector = state.next_sector
    sample = obs = None
    if last is not None:
        dt = t - last
        omega_rev = None
        prev = state.per_sector_last_t[sector]
        if prev is not None:
            dt_rev = t - prev
            omega_rev = TWO_PI / dt_rev
            obs = SectorObservation(sector, state.revolution_counter, dt, dt_rev, TWO_PI * dt / dt_rev)
        sample = SpeedSample(t, sector, state.alpha_nom / dt, omega_rev)

    state.per_sector_last_t[sector] = t
    state.last_pulse_t = t
    state.next_sector = (sector + 1) % state.L
    if state.next_sector == 0:
        state.revolution_counter += 1
    return sample, obs


def restart_labeling(state: IngestState) -> None:
    """Make the most recent pulse sector 0 of revolution 1 and forget history."""
    state.per_sector_last_t = [None] * state.L
    state.per_sector_last_t[0] = state.last_pulse_t
    state.next_sector = 1
    state.revolution_counter = 1


def linear_speed(omega: float, R: float) -> float:
    """Linear speed in km/h of a wheel of radius ``R`` (m) turning at ``omega`` (rad/s)."""
    if not (omega > 0 and R > 0):
        raise NonPositiveInput(f"omega and R must be positive, got omega={omega!r}, R={R!r}")
    return omega * R * KMH_PER_MS


def omega_from_kmh(v_kmh: float, R: float) -> float:
    """Inverse of :func:`linear_speed`."""
    if not (v_kmh > 0 and R > 0):
        raise NonPositiveInput(f"speed and R must be positive, got v={v_kmh!r}, R={R!r}")
    return v_kmh / (KMH_PER_MS * R)


def observation_matrix(timestamps, L: int) -> np.ndarray:
    """Regression targets of every complete revolution, vectorized.

    Row ``r`` holds ``y`` for sectors 0..L-1 of revolution ``r + 2`` in the
    labeling of :func:`ingest_pulse` started at ``timestamps[0]``. A trailing
    partial revolution is dropped.
    """
    t = np.asarray(timestamps, dtype=float)
    if t.ndim != 1:
        raise ValueError("timestamps must be one-dimensional")
    if np.any(np.diff(t) <= 0):
        raise NonMonotonicTimestamp("pulse timestamps must be strictly increasing")
    n_rows = len(t) // L - 1
    if n_rows <= 0:
        return np.empty((0, L))
    n = np.arange(L, L * (n_rows + 1))
    dt = t[n] - t[n - 1]
    dt_rev = t[n] - t[n - L]
    return (TWO_PI * dt / dt_rev).reshape(n_rows, L)
