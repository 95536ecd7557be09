"""
Synthetic magnetic-encoder pulse generator.

A :class:`MagneticWheel` holds the true sector widths of an encoder disk; a
:class:`SpeedProfile` describes the wheel's angular speed over time. The
generator integrates the speed into a wheel angle and emits one pulse per
crossing of a sector boundary, giving exact ground truth for every estimator
downstream.

The profile kinds all have closed-form angle antiderivatives, so boundary
crossings are solved by bracketing on a coarse grid followed by bisection on
the exact angle, not by numerical quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    BadSectorCount,
    NonMonotonicTimestamp,
    NonPositiveSector,
    NonPositiveSpeed,
    NonZeroErrorSum,
    OutOfHorizon,
)

TWO_PI = 2.0 * math.pi

# re-centering is allowed up to this residual; larger sums are rejected
THETA_SUM_TOL = 1e-9
# bisection stops once every bracket is narrower than this (seconds)
CROSSING_TOL = 1e-12
# bracketing grid step (seconds); bisection refines inside it
_BRACKET_STEP = 1e-3

PROFILE_KINDS = ("constant", "ramp", "sinusoid-modulated", "piecewise")


@dataclass(frozen=True)
class MagneticWheel:
    """True geometry of an encoder wheel with ``L`` sectors.

    Attributes:
        L: number of sectors (pulses per revolution)
        sector_angles: true sector widths in radians, summing to 2*pi
        alpha_nom: nominal sector width 2*pi/L
        theta: per-sector geometric error, ``sector_angles - alpha_nom``
    """

    L: int
    sector_angles: np.ndarray
    alpha_nom: float
    theta: np.ndarray


def make_wheel(L: int, theta: Sequence[float] | None = None) -> MagneticWheel:
    """Build a wheel whose sector ``i`` spans ``2*pi/L + theta[i]`` radians.

    ``theta`` is re-centered to an exact zero sum when its residual sum is
    within 1e-9; anything larger raises :class:`NonZeroErrorSum`.
    """
    if int(L) != L or L < 2:
        raise BadSectorCount(f"need at least 2 sectors, got {L!r}")
    L = int(L)
    if theta is None:
        theta = np.zeros(L)
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (L,):
        raise BadSectorCount(f"theta has shape {theta.shape}, expected ({L},)")
    residual = float(theta.sum())
    if not abs(residual) <= THETA_SUM_TOL:
        raise NonZeroErrorSum(f"sum(theta) = {residual:.3e}, must be 0")
    theta = theta - theta.mean()

    alpha_nom = TWO_PI / L
    angles = alpha_nom + theta
    if np.any(angles <= 0):
        bad = int(np.argmin(angles))
        raise NonPositiveSector(f"sector {bad} has width {angles[bad]:.3e} rad")
    angles.setflags(write=False)
    theta.setflags(write=False)
    return MagneticWheel(L=L, sector_angles=angles, alpha_nom=alpha_nom, theta=theta)


@dataclass(frozen=True)
class SpeedProfile:
    """Angular speed of the wheel as a function of time.

    kinds:
        ``constant``            omega(t) = base_omega
        ``ramp``                omega(t) = base_omega + slope * t
        ``sinusoid-modulated``  omega(t) = base_omega * (1 + a * sin(2*pi*f*t))
        ``piecewise``           linear interpolation through ``segments``
                                knots ``(t_start, omega)``, held flat outside

    ``horizon`` bounds the valid time range (``None`` means unbounded).
    """

    kind: str = "constant"
    base_omega: float = 0.0
    modulation_amplitude: float = 0.0
    modulation_freq: float = 0.0
    segments: tuple[tuple[float, float], ...] = ()
    slope: float = 0.0
    horizon: float | None = None
    _knot_t: np.ndarray = field(init=False, repr=False, compare=False)
    _knot_w: np.ndarray = field(init=False, repr=False, compare=False)
    _knot_angle: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise ValueError(f"unknown profile kind {self.kind!r}")
        if not abs(self.modulation_amplitude) < 1:
            raise ValueError("modulation_amplitude must be < 1 in magnitude")
        if self.modulation_freq < 0:
            raise ValueError("modulation_freq must be >= 0")
        if self.horizon is not None and self.horizon <= 0:
            raise ValueError("horizon must be positive")

        if self.kind == "piecewise":
            knots = sorted((float(t), float(w)) for t, w in self.segments)
            if not knots:
                raise ValueError("piecewise profile needs at least one knot")
            object.__setattr__(self, "segments", tuple(knots))
        else:
            knots = [(0.0, self.base_omega)]
        kt = np.array([k[0] for k in knots])
        kw = np.array([k[1] for k in knots])
        if np.any(np.diff(kt) <= 0):
            raise ValueError("piecewise knot times must be distinct")
        # angle swept from t=0 up to each knot; speed is flat before kt[0]
        seg = 0.5 * (kw[1:] + kw[:-1]) * np.diff(kt)
        ka = kw[0] * kt[0] + np.concatenate(([0.0], np.cumsum(seg)))
        object.__setattr__(self, "_knot_t", kt)
        object.__setattr__(self, "_knot_w", kw)
        object.__setattr__(self, "_knot_angle", ka)

    @classmethod
    def constant(cls, omega: float, **kw) -> SpeedProfile:
        return cls(kind="constant", base_omega=omega, **kw)

    @classmethod
    def sinusoid(cls, omega: float, amplitude: float, freq: float, **kw) -> SpeedProfile:
        return cls(kind="sinusoid-modulated", base_omega=omega,
                   modulation_amplitude=amplitude, modulation_freq=freq, **kw)

    @classmethod
    def ramp(cls, omega0: float, slope: float, **kw) -> SpeedProfile:
        return cls(kind="ramp", base_omega=omega0, slope=slope, **kw)

    @classmethod
    def piecewise(cls, knots: Sequence[tuple[float, float]], **kw) -> SpeedProfile:
        return cls(kind="piecewise", segments=tuple(knots), **kw)

    # -- evaluation --------------------------------------------------------

    def omega(self, t):
        """Vectorized angular speed; no horizon check."""
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            return np.full_like(t, self.base_omega)
        if self.kind == "ramp":
            return self.base_omega + self.slope * t
        if self.kind == "sinusoid-modulated":
            a, f = self.modulation_amplitude, self.modulation_freq
            return self.base_omega * (1.0 + a * np.sin(TWO_PI * f * t))
        return np.interp(t, self._knot_t, self._knot_w)

    def angle(self, t):
        """Angle swept since t=0, the exact integral of :meth:`omega`."""
        t = np.asarray(t, dtype=float)
        w0 = self.base_omega
        if self.kind == "constant":
            return w0 * t
        if self.kind == "ramp":
            return w0 * t + 0.5 * self.slope * t * t
        if self.kind == "sinusoid-modulated":
            a, f = self.modulation_amplitude, self.modulation_freq
            if f == 0 or a == 0:
                return w0 * t
            return w0 * t + w0 * a * (1.0 - np.cos(TWO_PI * f * t)) / (TWO_PI * f)
        return self._piecewise_angle(t)

    def _piecewise_angle(self, t):
        kt, kw, ka = self._knot_t, self._knot_w, self._knot_angle
        j = np.clip(np.searchsorted(kt, t, side="right") - 1, 0, len(kt) - 1)
        tau = t - kt[j]
        slope = np.zeros(len(kt))
        slope[:-1] = np.diff(kw) / np.diff(kt)
        out = ka[j] + kw[j] * tau + 0.5 * slope[j] * tau * tau
        return np.where(t <= kt[0], kw[0] * t, out)

    def min_speed(self, t_end: float) -> float:
        """Smallest speed reached on [0, t_end]."""
        if self.kind == "constant":
            return self.base_omega
        if self.kind == "ramp":
            return min(self.base_omega, self.base_omega + self.slope * t_end)
        if self.kind == "sinusoid-modulated":
            a, f = abs(self.modulation_amplitude), self.modulation_freq
            if a == 0 or f == 0:
                return self.base_omega
            if t_end * f >= 1.0:
                return self.base_omega * (1.0 - a)
            grid = np.linspace(0.0, t_end, 2001)
            return float(self.omega(grid).min())
        inside = self._knot_t[(self._knot_t > 0) & (self._knot_t < t_end)]
        pts = np.concatenate(([0.0, t_end], inside))
        return float(self.omega(pts).min())


def eval_profile(profile: SpeedProfile, t: float) -> float:
    """Angular speed of ``profile`` at time ``t`` in rad/s."""
    if t < 0 or (profile.horizon is not None and t > profile.horizon):
        raise OutOfHorizon(f"t={t} outside [0, {profile.horizon}]")
    return float(profile.omega(t))


@dataclass(frozen=True)
class PulseTrain:
    """Ordered pulse timestamps in seconds."""

    timestamps: np.ndarray
    start_phase: float = 0.0

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype=float)
        gaps = np.diff(ts)
        if not np.all(np.isfinite(ts)) or np.any(gaps <= 0):
            raise NonMonotonicTimestamp("pulse timestamps must be finite and strictly increasing")
        ts.setflags(write=False)
        object.__setattr__(self, "timestamps", ts)

    def __len__(self):
        return len(self.timestamps)


def _boundaries(wheel: MagneticWheel, start_phase: float, theta_end: float,
                swap: tuple[int, MagneticWheel] | None) -> np.ndarray:
    """Cumulative angles of every boundary crossed in (start_phase, theta_end]."""
    n_rev = int(math.floor(theta_end / TWO_PI)) + 2
    cum_a = np.cumsum(wheel.sector_angles)
    cum_a[-1] = TWO_PI
    rows = np.tile(cum_a, (n_rev, 1))
    if swap is not None:
        k_swap, new_wheel = swap
        if new_wheel.L != wheel.L:
            raise BadSectorCount("replacement wheel must have the same sector count")
        cum_b = np.cumsum(new_wheel.sector_angles)
        cum_b[-1] = TWO_PI
        rows[max(k_swap, 0):] = cum_b
    rows = rows + TWO_PI * np.arange(n_rev)[:, None]
    b = rows.ravel()
    tol = 1e-12 * max(1.0, abs(theta_end))
    return b[(b > start_phase) & (b <= theta_end + tol)]


def generate_pulses(wheel: MagneticWheel, profile: SpeedProfile, t_end: float,
                    start_phase: float = 0.0, *, jitter: float = 0.0,
                    rng: np.random.Generator | int | None = None,
                    swap: tuple[int, MagneticWheel] | None = None) -> PulseTrain:
    """Pulse timestamps produced by ``wheel`` spinning at ``profile`` until ``t_end``.

    Pulse ``n`` marks the end of sector ``n mod L``: the sensor starts at
    ``start_phase`` inside sector 0 and a pulse fires whenever the swept
    angle reaches a cumulative sector boundary.

    Args:
        jitter: standard deviation (s) of additive Gaussian timestamp noise;
            0 disables it.
        rng: generator or seed for the jitter.
        swap: ``(k, other_wheel)`` re-mounts the wheel so that revolutions
            ``k, k+1, ...`` (0-based, counted in sensor angle) use
            ``other_wheel``'s sector widths.
    """
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    if not 0.0 <= start_phase < TWO_PI:
        raise ValueError("start_phase must lie in [0, 2*pi)")
    if profile.horizon is not None and t_end > profile.horizon:
        raise OutOfHorizon(f"t_end={t_end} beyond profile horizon {profile.horizon}")
    w_min = profile.min_speed(t_end)
    if not w_min > 0:
        raise NonPositiveSpeed(f"profile reaches {w_min:.4g} rad/s on [0, {t_end}]")

    theta_end = start_phase + float(profile.angle(t_end))
    targets = _boundaries(wheel, start_phase, theta_end, swap) - start_phase

    if profile.kind == "constant":
        times = targets / profile.base_omega
    else:
        times = _solve_crossings(profile, targets, t_end)
    times = np.minimum(times, t_end)

    if jitter > 0:
        gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        times = times + gen.normal(0.0, jitter, size=times.shape)
    return PulseTrain(times, start_phase)


def _solve_crossings(profile: SpeedProfile, targets: np.ndarray, t_end: float) -> np.ndarray:
    """Times at which ``profile.angle`` reaches each target (monotone angle)."""
    n_grid = max(int(math.ceil(t_end / _BRACKET_STEP)), 1)
    grid = np.linspace(0.0, t_end, n_grid + 1)
    swept = profile.angle(grid)
    j = np.searchsorted(swept, targets, side="left")
    j = np.clip(j, 1, n_grid)
    lo, hi = grid[j - 1], grid[j]
    for _ in range(200):
        if np.all(hi - lo <= CROSSING_TOL):
            break
        mid = 0.5 * (lo + hi)
        below = profile.angle(mid) < targets
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def realistic_theta(L: int = 36, rng: np.random.Generator | int | None = None, *,
                     lo_deg: float = 0.05, hi_deg: float = 0.98,
                     mean_deg: float = 0.44) -> np.ndarray:
    """Random zero-sum geometric errors with magnitudes in ``[lo_deg, hi_deg]``.

    Half the sectors get positive errors and half negative, each half scaled
    so the magnitudes average ``mean_deg`` and the signed errors cancel.
    Returns radians.
    """
    if L < 2:
        raise BadSectorCount("need at least 2 sectors")
    if not lo_deg <= mean_deg <= hi_deg:
        raise ValueError("mean_deg must lie within [lo_deg, hi_deg]")
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    n_pos = L // 2
    n_neg = L - n_pos
    group_sum = L * mean_deg / 2.0

    def draw(n):
        target = group_sum / n
        if not lo_deg <= target <= hi_deg:
            raise ValueError("cannot balance signs for this L within the bounds")
        x = lo_deg + (hi_deg - lo_deg) * gen.random(n)
        m = x.mean()
        if m > target:
            x = lo_deg + (x - lo_deg) * (target - lo_deg) / (m - lo_deg)
        elif m < target:
            x = hi_deg - (hi_deg - x) * (hi_deg - target) / (hi_deg - m)
        return x

    mags = np.concatenate((draw(n_pos), -draw(n_neg)))
    gen.shuffle(mags)
    theta = np.deg2rad(mags)
    return theta - theta.mean()
