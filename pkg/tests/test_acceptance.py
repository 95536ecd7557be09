"""Acceptance suite.

Each criterion is one or more ``test_criterion_<n>_<part>`` functions; the
conftest prints a PASS/FAIL line per criterion at the end of the run. Run it
alone with ``pytest tests/test_acceptance.py``.
"""

import math
import time

import numpy as np
import pytest

from encoder_cls.baselines import NotchBankConfig, notch_bank
from encoder_cls.cls_filter import (
    EstimatorState,
    WheelSpeedFilter,
    batch_estimate,
    estimate_trajectory,
    forgetting_factor,
    recursive_update,
)
from encoder_cls.encoder_sim import SpeedProfile, generate_pulses
from encoder_cls.experiments import (
    BIKE_OMEGA,
    BIKE_RADIUS,
    braking_experiment,
    bike_wheel,
    run_filter,
    tradeoff,
)
from encoder_cls.spectral import (
    UniformSeries,
    amplitude_spectrum,
    cadence_estimate,
    harmonic_amplitudes,
    resample_arrays,
)
from encoder_cls.speed import linear_speed, observation_matrix

from oracles import kkt_constrained_ls

TWO_PI = 2.0 * math.pi
F_BAR = BIKE_OMEGA / TWO_PI
CADENCE_HZ = 2.41
GEAR_GAIN = 0.43035
RIDE_SECONDS = 60.0
WINDOW = (20.0, 60.0)


def db(ratio):
    return 20.0 * math.log10(ratio)


def _ride(wheel, profile):
    """Filter a simulated ride and resample basic, cLS and revolution speeds."""
    pulses = generate_pulses(wheel, profile, RIDE_SECONDS)
    samples, _ = run_filter(pulses.timestamps)
    samples = [s for s in samples if WINDOW[0] <= s.t <= WINDOW[1]]
    assert all(s.omega_filtered is not None and s.omega_rev is not None for s in samples)
    t = np.array([s.t for s in samples])
    basic = resample_arrays(t, [s.omega_basic for s in samples])
    cls = resample_arrays(t, [s.omega_filtered for s in samples])
    rev = resample_arrays(t, [s.omega_rev for s in samples])
    truth = UniformSeries(basic.t0, basic.rate, profile.omega(basic.times))
    return basic, cls, rev, truth


# -- 1 ----------------------------------------------------------------------


def test_criterion_1_batch_matches_kkt_oracle():
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        N, L = int(rng.integers(1, 51)), int(rng.integers(2, 41))
        Y = TWO_PI / L + rng.normal(0.0, 0.02, size=(N, L))
        worst = max(worst, np.abs(batch_estimate(Y) - kkt_constrained_ls(Y)).max())
    elapsed = time.perf_counter() - start
    assert worst <= 1e-10
    assert elapsed < 5.0


# -- 2 ----------------------------------------------------------------------


def test_criterion_2_recursive_equals_batch():
    rng = np.random.default_rng(2)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        L = int(rng.integers(2, 41))
        Y = TWO_PI / L + rng.normal(0.0, 0.02, size=(30, L))
        state = EstimatorState(L=L, mu=1.0, enabled=True)
        for k in range(30):
            state = recursive_update(state, Y[k])
            worst = max(worst, np.abs(state.alpha_hat - batch_estimate(Y[:k + 1])).max())
    elapsed = time.perf_counter() - start
    assert worst <= 1e-12
    assert elapsed < 5.0


# -- 3 ----------------------------------------------------------------------


def test_criterion_3_constraint_after_every_update():
    rng = np.random.default_rng(3)
    updates = 0
    worst = 0.0

    # random observation streams over a spread of windows and noise levels
    for _ in range(250):
        L = int(rng.integers(2, 41))
        mu = float(rng.choice([1.0, 0.99, 0.95, 0.8, 0.5]))
        noise = float(rng.choice([1e-4, 1e-2, 0.1]))
        state = EstimatorState(L=L, mu=mu, enabled=True)
        for _ in range(45):
            row = np.abs(TWO_PI / L * (1.0 + rng.normal(0.0, noise, L))) + 1e-6
            state = recursive_update(state, row)
            worst = max(worst, abs(state.alpha_hat.sum() - TWO_PI))
            updates += 1

    # streaming filter on simulator rides with speed variation and jitter
    for seed in range(4):
        wheel = bike_wheel(seed)
        prof = SpeedProfile.sinusoid(BIKE_OMEGA, 0.05, 1.3 + seed)
        pulses = generate_pulses(wheel, prof, 80.0, jitter=5e-6, rng=seed)
        f = WheelSpeedFilter(36, 20)
        f.run(pulses.timestamps)
        for rec in f.log:
            worst = max(worst, abs(rec.alpha_hat.sum() - TWO_PI))
        updates += f.estimator.updates

    assert updates >= 10_000
    assert worst <= 1e-10


# -- 4 ----------------------------------------------------------------------


def test_criterion_4_exact_recovery():
    start = time.perf_counter()
    wheel = bike_wheel(4)
    deg = np.rad2deg(np.abs(wheel.theta))
    assert deg.min() >= 0.05 - 1e-3 and deg.max() <= 0.98 + 1e-3
    assert abs(deg.mean() - 0.44) < 1e-2

    pulses = generate_pulses(wheel, SpeedProfile.constant(BIKE_OMEGA), 10.0)
    f = WheelSpeedFilter(36, 20)
    f.run(pulses.timestamps)
    assert len(f.log) > 1
    for rec in f.log:
        assert np.abs(rec.alpha_hat - wheel.sector_angles).max() <= 1e-9
    assert time.perf_counter() - start < 10.0


def test_criterion_4_step_within_20_revolutions():
    start = time.perf_counter()
    rng = np.random.default_rng(44)
    wa, wb = bike_wheel(rng), bike_wheel(rng)
    swap_rev, total_revs = 100, 140
    pulses = generate_pulses(wa, SpeedProfile.constant(BIKE_OMEGA), (total_revs + 1) * TWO_PI / BIKE_OMEGA,
                             swap=(swap_rev, wb))
    traj = estimate_trajectory(observation_matrix(pulses.timestamps, 36), forgetting_factor(20))
    step = np.abs(wb.sector_angles - wa.sector_angles).max()
    # row r of the observation matrix is sensor revolution r + 1 (0-based)
    first_new = swap_rev - 1
    err = np.abs(traj[first_new + 19] - wb.sector_angles).max()
    assert time.perf_counter() - start < 10.0
    assert err <= 0.05 * step, f"error after 20 revolutions is {err / step:.1%} of the step"


# -- 5 ----------------------------------------------------------------------


@pytest.fixture(scope="module")
def cadence_ride():
    start = time.perf_counter()
    basic, cls, _, _ = _ride(bike_wheel(2024), SpeedProfile.sinusoid(BIKE_OMEGA, 0.02, CADENCE_HZ))
    sb, sc = amplitude_spectrum(basic), amplitude_spectrum(cls)
    return sb, sc, time.perf_counter() - start


def test_criterion_5_harmonics_reduced_20db(cadence_ride):
    sb, sc, elapsed = cadence_ride
    for hb, hc in zip(harmonic_amplitudes(sb, 3), harmonic_amplitudes(sc, 3)):
        assert db(hb / hc) >= 20.0
    assert elapsed < 10.0


def test_criterion_5_cadence_amplitude_within_5pct(cadence_ride):
    sb, sc, _ = cadence_ride
    ratio = sc.amplitude_at(CADENCE_HZ) / sb.amplitude_at(CADENCE_HZ)
    assert abs(ratio - 1.0) <= 0.05


def test_criterion_5_cadence_peak_found(cadence_ride):
    _, sc, _ = cadence_ride
    peak, cadence = cadence_estimate(sc, GEAR_GAIN)
    assert abs(peak - CADENCE_HZ) <= sc.resolution
    assert cadence == pytest.approx(peak / (2 * GEAR_GAIN))


# -- 6 ----------------------------------------------------------------------


@pytest.fixture(scope="module")
def collision_ride():
    start = time.perf_counter()
    wheel = bike_wheel(2024)
    basic, cls, rev, truth = _ride(wheel, SpeedProfile.sinusoid(BIKE_OMEGA, 0.02, F_BAR))
    notch = notch_bank(basic, rev.values / TWO_PI, NotchBankConfig())
    tone = amplitude_spectrum(truth).amplitude_at(F_BAR)
    plain_basic, plain_cls, _, _ = _ride(wheel, SpeedProfile.constant(BIKE_OMEGA))
    return {
        "tone": tone,
        "cls": amplitude_spectrum(cls).amplitude_at(F_BAR),
        "notch": amplitude_spectrum(notch).amplitude_at(F_BAR),
        "geo_basic": amplitude_spectrum(plain_basic).amplitude_at(F_BAR),
        "geo_cls": amplitude_spectrum(plain_cls).amplitude_at(F_BAR),
        "elapsed": time.perf_counter() - start,
    }


def test_criterion_6_notch_removes_tone(collision_ride):
    r = collision_ride
    assert db(r["tone"] / r["notch"]) >= 20.0
    assert r["elapsed"] < 10.0


def test_criterion_6_cls_retains_tone(collision_ride):
    r = collision_ride
    retention = r["cls"] / r["tone"]
    assert retention >= 0.8, f"cLS keeps {retention:.3f} of the tone at f_bar"


def test_criterion_6_cls_removes_geometry(collision_ride):
    r = collision_ride
    assert db(r["geo_basic"] / max(r["geo_cls"], 1e-300)) >= 20.0


# -- 7 ----------------------------------------------------------------------


@pytest.fixture(scope="module")
def tradeoff_points():
    start = time.perf_counter()
    pts = tradeoff((5, 10, 20, 40, 80), jitter=10e-6)
    return pts, time.perf_counter() - start


def test_criterion_7_variance_nonincreasing(tradeoff_points):
    pts, elapsed = tradeoff_points
    var = [p.variance for p in pts]
    assert all(a >= b for a, b in zip(var, var[1:])), var
    assert elapsed < 30.0


def test_criterion_7_convergence_nondecreasing(tradeoff_points):
    pts, _ = tradeoff_points
    revs = [p.convergence_revs for p in pts]
    assert all(a <= b for a, b in zip(revs, revs[1:])), revs


# -- 8 ----------------------------------------------------------------------


@pytest.fixture(scope="module")
def braking():
    start = time.perf_counter()
    res = braking_experiment(bike_wheel(8), window_revolutions=20, jitter=10e-6)
    return res, time.perf_counter() - start


def test_criterion_8_error_below_5x_steady_state(braking):
    res, elapsed = braking
    assert elapsed < 10.0
    assert res.braking_error < 5.0 * res.steady_error, (
        f"braking error {res.braking_error:.3g} rad vs steady state {res.steady_error:.3g} rad")


def test_criterion_8_unconstrained_violation(braking):
    res, _ = braking
    assert res.constrained_violation <= 1e-10
    assert res.unconstrained_violation > 1e-3


# -- 9 ----------------------------------------------------------------------


def test_criterion_9_linear_speed():
    v = linear_speed(BIKE_OMEGA, BIKE_RADIUS)
    assert v == pytest.approx(21.2, abs=0.05)
    assert abs(v - 21.4) / 21.4 <= 0.015


def test_criterion_9_fundamental():
    assert F_BAR == pytest.approx(2.81, abs=0.005)
    assert abs(F_BAR - 2.8) / 2.8 <= 0.015


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
