"""
Reproducible simulator scenarios for evaluating the estimator.

Defaults describe a racing bike: 36 magnets, 0.334 m wheel radius,
cruising at 17.64 rad/s with a pedaling ripple at 2.41 Hz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cls_filter import (
    GateConfig,
    WheelSpeedFilter,
    estimate_trajectory,
    forgetting_factor,
)
from .encoder_sim import (
    MagneticWheel,
    SpeedProfile,
    generate_pulses,
    make_wheel,
    realistic_theta,
)
from .speed import SpeedSample, observation_matrix, omega_from_kmh

TWO_PI = 2.0 * math.pi

BIKE_L = 36
BIKE_RADIUS = 0.334
BIKE_OMEGA = 17.64
BIKE_CADENCE_HZ = 2.41
# torque-ripple frequency over rotation frequency (twice the gear gain)
BIKE_K = 0.8607


def bike_wheel(rng=None, L: int = BIKE_L) -> MagneticWheel:
    """Wheel with errors in [0.05, 0.98] deg, mean magnitude 0.44 deg."""
    return make_wheel(L, realistic_theta(L, rng))


def run_filter(timestamps, L: int = BIKE_L, window_revolutions: float = 20,
               gate: GateConfig | None = None) -> tuple[list[SpeedSample], WheelSpeedFilter]:
    f = WheelSpeedFilter(L, window_revolutions, gate or GateConfig(wheel_radius=BIKE_RADIUS))
    return f.run(timestamps), f


def convergence_revolutions(traj: np.ndarray, truth: np.ndarray, step: float, frac: float = 0.05) -> int:
    """Updates after which the max-abs error stays below ``frac * step``.

    Returns ``len(traj)`` if it never settles.
    """
    err = np.abs(np.asarray(traj) - truth).max(axis=1)
    above = np.nonzero(err >= frac * step)[0]
    return 0 if len(above) == 0 else int(above[-1]) + 1


@dataclass(frozen=True)
class TradeoffPoint:
    window: float
    variance: float
    convergence_revs: int
    convergence_s: float


def tradeoff(windows=(5, 10, 20, 40, 80), *, omega: float = BIKE_OMEGA, L: int = BIKE_L,
             jitter: float = 10e-6, steady_revs: int = 2000, step_revs: int = 400,
             burn_in: int = 400, seed: int = 0) -> list[TradeoffPoint]:
    """Accuracy versus convergence time of the recursive estimator.

    One jittered constant-speed record is shared by all windows: the wheel is
    re-mounted with new errors after ``steady_revs`` revolutions. Accuracy is
    the per-sector variance of the estimate over the steady segment (after
    ``burn_in`` updates), averaged over sectors; convergence is measured from
    the re-mount to 5% of the largest sector change.
    """
    rng = np.random.default_rng(seed)
    wa, wb = bike_wheel(rng, L), bike_wheel(rng, L)
    step = float(np.abs(wb.sector_angles - wa.sector_angles).max())
    t_end = (steady_revs + step_revs + 1) * TWO_PI / omega
    pulses = generate_pulses(wa, SpeedProfile.constant(omega), t_end,
                             jitter=jitter, rng=rng, swap=(steady_revs, wb))
    Y = observation_matrix(pulses.timestamps, L)
    # row r holds sensor revolution r + 1
    first_new = steady_revs - 1
    out = []
    for nw in windows:
        traj = estimate_trajectory(Y, forgetting_factor(nw))
        var = float(traj[burn_in:first_new - 1].var(axis=0).mean())
        revs = convergence_revolutions(traj[first_new:], wb.sector_angles, step)
        out.append(TradeoffPoint(nw, var, revs, revs * TWO_PI / omega))
    return out


@dataclass(frozen=True)
class BrakingResult:
    steady_error: float
    braking_error: float
    unconstrained_violation: float
    constrained_violation: float


def braking_profile(v_from_kmh: float = 21.0, v_to_kmh: float = 6.0, revolutions: float = 5,
                    t_brake: float = 30.0, R: float = BIKE_RADIUS) -> SpeedProfile:
    """Cruise, then decelerate linearly over a given number of wheel revolutions."""
    w1, w2 = omega_from_kmh(v_from_kmh, R), omega_from_kmh(v_to_kmh, R)
    duration = revolutions * TWO_PI / (0.5 * (w1 + w2))
    return SpeedProfile.piecewise([(0.0, w1), (t_brake, w1), (t_brake + duration, w2)])


def braking_experiment(wheel: MagneticWheel, *, window_revolutions: float = 20, jitter: float = 10e-6,
                       t_brake: float = 30.0, t_after: float = 10.0, seed: int = 0,
                       v_from_kmh: float = 21.0, v_to_kmh: float = 6.0,
                       revolutions: float = 5) -> BrakingResult:
    """Estimator errors through a hard deceleration.

    ``steady_error`` is the largest max-abs angle error over the ten updates
    before braking; ``braking_error`` the largest from braking onset to the
    end of the record. Violations are the largest ``|sum - 2*pi|`` of the
    running unconstrained mean and of the constrained estimate over the
    whole record.
    """
    prof = braking_profile(v_from_kmh, v_to_kmh, revolutions, t_brake)
    horizon = prof.segments[-1][0] + t_after
    pulses = generate_pulses(wheel, prof, horizon, jitter=jitter, rng=seed)
    Y = observation_matrix(pulses.timestamps, wheel.L)
    mu = forgetting_factor(window_revolutions)
    con = estimate_trajectory(Y, mu)
    unc = estimate_trajectory(Y, mu, constrained=False)
    err = np.abs(con - wheel.sector_angles).max(axis=1)
    # first row whose revolution ends after braking starts
    row_end = pulses.timestamps[np.arange(2 * wheel.L - 1, len(pulses.timestamps), wheel.L)][:len(Y)]
    onset = int(np.searchsorted(row_end, t_brake))
    return BrakingResult(
        steady_error=float(err[max(onset - 10, 0):onset].max()),
        braking_error=float(err[onset:].max()),
        unconstrained_violation=float(np.abs(unc.sum(axis=1) - TWO_PI).max()),
        constrained_violation=float(np.abs(con.sum(axis=1) - TWO_PI).max()),
    )
