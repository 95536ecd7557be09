"""
Constrained least-squares estimation of encoder sector widths.

Per revolution ``k`` every sector ``i`` yields an observation ``y_i(k)`` of
its true width. The sector widths must add up to a full turn, so the
estimate is the least-squares fit under ``sum(alpha) = 2*pi``:

* batch: the column mean of the observations, then the constraint violation
  split evenly over the ``L`` sectors and subtracted;
* recursive: an exponentially weighted running mean (forgetting factor
  ``mu``, effective window ``1/(1-mu)`` revolutions) projected onto the same
  hyperplane after every revolution.

The compensated speed for a pulse closing sector ``i`` is then the estimated
width of that sector divided by the measured gap.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    BadSector,
    EmptyData,
    EstimatorDisabled,
    IncompleteRevolution,
    NonFiniteObservation,
    NonPositiveAngleWarning,
    NonPositiveDt,
    OutOfRange,
)
from .speed import (
    IngestState,
    SectorObservation,
    SpeedSample,
    ingest_pulse,
    linear_speed,
    restart_labeling,
)

TWO_PI = 2.0 * math.pi
DEFAULT_WINDOW = 20
DEFAULT_THRESHOLD_KMH = 5.0
DEFAULT_WHEEL_RADIUS = 0.334


def project_to_circle(alpha: np.ndarray) -> np.ndarray:
    """Euclidean projection onto ``sum(alpha) = 2*pi``."""
    alpha = np.asarray(alpha, dtype=float)
    return alpha - (alpha.sum() - TWO_PI) / alpha.shape[-1]


def batch_estimate(Y) -> np.ndarray:
    """Constrained LS sector widths from an ``N x L`` observation matrix."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if Y.size == 0 or Y.shape[0] < 1:
        raise EmptyData("need at least one revolution of observations")
    if not np.all(np.isfinite(Y)):
        raise NonFiniteObservation("observation matrix contains NaN or inf")
    if np.any(Y <= 0):
        raise NonFiniteObservation("observations must be positive sector widths")
    return project_to_circle(Y.mean(axis=0))


def effective_window(mu: float) -> float:
    """Number of revolutions carrying significant weight, ``1/(1-mu)``."""
    if not 0 < mu < 1:
        raise OutOfRange(f"forgetting factor must lie in (0, 1), got {mu!r}")
    return 1.0 / (1.0 - mu)


def forgetting_factor(window_revolutions: float) -> float:
    """Forgetting factor giving an effective window of ``window_revolutions``."""
    if not window_revolutions >= 1:
        raise OutOfRange(f"window must be at least 1 revolution, got {window_revolutions!r}")
    return 1.0 - 1.0 / window_revolutions


@dataclass(frozen=True)
class EstimatorState:
    """Recursive constrained LS state for one wheel.

    ``n`` is the effective sample count; it starts at 0 so the first update
    takes the first revolution at full weight. ``pending_row`` collects the
    ``(sector, y)`` pairs of the revolution in progress.
    """

    L: int
    mu: float = 1.0 - 1.0 / DEFAULT_WINDOW
    n: float = 0.0
    alpha_unc: np.ndarray = None
    alpha_hat: np.ndarray = None
    enabled: bool = False
    pending_row: tuple = ()
    updates: int = 0

    def __post_init__(self):
        if self.L < 2:
            raise ValueError("need at least 2 sectors")
        if not 0 < self.mu <= 1:
            raise OutOfRange(f"forgetting factor must lie in (0, 1], got {self.mu!r}")
        nominal = np.full(self.L, TWO_PI / self.L)
        if self.alpha_unc is None:
            object.__setattr__(self, "alpha_unc", nominal)
        if self.alpha_hat is None:
            object.__setattr__(self, "alpha_hat", nominal.copy())

    @classmethod
    def initial(cls, L: int, window_revolutions: float | None = DEFAULT_WINDOW, *,
                mu: float | None = None, enabled: bool = False) -> EstimatorState:
        if mu is None:
            mu = forgetting_factor(window_revolutions)
        return cls(L=L, mu=mu, enabled=enabled)

    @property
    def alpha_nom(self) -> float:
        return TWO_PI / self.L

    @property
    def violation(self) -> float:
        """Constraint violation of the unconstrained running estimate."""
        return float(self.alpha_unc.sum() - TWO_PI)


def recursive_update(state: EstimatorState, Y_k) -> EstimatorState:
    """Fold one revolution of observations into the estimate."""
    if not state.enabled:
        raise EstimatorDisabled("estimator is gated off")
    Y_k = np.asarray(Y_k, dtype=float)
    if Y_k.shape != (state.L,):
        raise IncompleteRevolution(f"expected {state.L} observations, got shape {Y_k.shape}")
    if not np.all(np.isfinite(Y_k)):
        raise NonFiniteObservation("revolution contains NaN or inf")
    if np.any(Y_k <= 0):
        raise NonFiniteObservation("observations must be positive sector widths")

    n = state.mu * state.n + 1.0
    alpha_unc = state.alpha_unc + (Y_k - state.alpha_unc) / n
    alpha_hat = project_to_circle(alpha_unc)
    if np.any(alpha_hat <= 0):
        warnings.warn(f"non-positive sector estimate after update {state.updates + 1}",
                      NonPositiveAngleWarning, stacklevel=2)
    return replace(state, n=n, alpha_unc=alpha_unc, alpha_hat=alpha_hat,
                   pending_row=(), updates=state.updates + 1)


def reset(state: EstimatorState) -> EstimatorState:
    """Cold-start the estimator and disable it."""
    return EstimatorState(L=state.L, mu=state.mu, enabled=False)


@dataclass(frozen=True)
class GateConfig:
    """Speed gate: estimate only at or above ``enable_threshold`` km/h."""

    enable_threshold: float = DEFAULT_THRESHOLD_KMH
    wheel_radius: float = DEFAULT_WHEEL_RADIUS

    def __post_init__(self):
        if not self.enable_threshold > 0:
            raise ValueError("enable_threshold must be positive")
        if not self.wheel_radius > 0:
            raise ValueError("wheel_radius must be positive")


def apply_gate(state: EstimatorState, omega_rev: float, cfg: GateConfig) -> EstimatorState:
    """Enable the estimator at or above the threshold, reset it below."""
    # inclusive; the slack absorbs round-off from km/h <-> rad/s conversions
    if linear_speed(omega_rev, cfg.wheel_radius) >= cfg.enable_threshold * (1 - 1e-12):
        return state if state.enabled else replace(state, enabled=True)
    return reset(state)


def filtered_speed(state: EstimatorState, sector: int, dt: float) -> float:
    """Compensated speed for a pulse closing ``sector`` after a gap ``dt``."""
    if not 0 <= sector < state.L:
        raise BadSector(f"sector {sector} outside [0, {state.L})")
    if not dt > 0:
        raise NonPositiveDt(f"dt must be positive, got {dt!r}")
    return float(state.alpha_hat[sector] / dt)


def add_observation(state: EstimatorState, obs: SectorObservation) -> EstimatorState:
    """Buffer one observation; run the update once the revolution is complete."""
    row = state.pending_row
    if obs.sector != len(row):
        # broken revolution: drop it and wait for the next sector 0
        if obs.sector != 0:
            return replace(state, pending_row=())
        row = ()
    row = row + ((obs.sector, obs.y),)
    if len(row) < state.L:
        return replace(state, pending_row=row)
    return recursive_update(state, [y for _, y in row])


def estimate_trajectory(Y, mu: float = 1.0, *, constrained: bool = True) -> np.ndarray:
    """Estimates after each of the ``K`` rows of ``Y`` (``K x L``), from a cold start.

    With ``constrained=False`` the running means before projection are
    returned instead.
    """
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    state = EstimatorState(L=Y.shape[1], mu=mu, enabled=True)
    out = np.empty_like(Y)
    for k, row in enumerate(Y):
        state = recursive_update(state, row)
        out[k] = state.alpha_hat if constrained else state.alpha_unc
    return out


@dataclass
class AngleRecord:
    """Snapshot of the estimate logged after an update or a reset."""

    revolution: int
    alpha_hat: np.ndarray
    reset: bool = False


@dataclass
class WheelSpeedFilter:
    """Streaming pulse-to-speed filter: ingestion, gating, estimation, compensation.

    Feed timestamps one at a time with :meth:`push`. While the estimator is
    enabled each sample carries the compensated speed; a speed below the gate
    threshold resets the estimate and restarts sector labeling at that pulse.
    """

    L: int
    window_revolutions: float = DEFAULT_WINDOW
    gate: GateConfig = field(default_factory=GateConfig)
    ingest: IngestState = None
    estimator: EstimatorState = None
    log: list = field(default_factory=list)
    pulses_seen: int = 0

    def __post_init__(self):
        if self.ingest is None:
            self.ingest = IngestState(self.L)
        if self.estimator is None:
            self.estimator = EstimatorState.initial(self.L, self.window_revolutions)

    def push(self, t: float) -> SpeedSample | None:
        prev_t = self.ingest.last_pulse_t
        sample, obs = ingest_pulse(self.ingest, t)
        self.pulses_seen += 1
        if sample is None:
            return None

        gate_speed = sample.omega_rev if sample.omega_rev is not None else sample.omega_basic
        before = self.estimator
        self.estimator = apply_gate(before, gate_speed, self.gate)
        if not self.estimator.enabled:
            restart_labeling(self.ingest)
            if before.updates > 0:
                self.log.append(AngleRecord(self._revolution(), self.estimator.alpha_hat.copy(), reset=True))
            return sample

        if obs is not None:
            done = self.estimator.updates
            self.estimator = add_observation(self.estimator, obs)
            if self.estimator.updates > done:
                self.log.append(AngleRecord(self._revolution(), self.estimator.alpha_hat.copy()))
        return replace(sample, omega_filtered=filtered_speed(self.estimator, sample.sector, sample.t - prev_t))

    def run(self, timestamps) -> list[SpeedSample]:
        out = []
        for t in timestamps:
            s = self.push(t)
            if s is not None:
                out.append(s)
        return out

    def _revolution(self) -> int:
        # revolutions since stream start, counting the first pulse's as 1
        return (self.pulses_seen - 1) // self.L + 1
