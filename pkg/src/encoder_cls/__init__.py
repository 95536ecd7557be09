"""Model-based wheel-speed filtering for incremental encoders.

Sector widths of the encoder wheel are estimated online by constrained least
squares and used in place of the nominal width in the fixed-position speed
computation, removing the periodic disturbance they cause without touching
other narrow-band content of the speed signal.
"""

from .cls_filter import (
    EstimatorState,
    GateConfig,
    WheelSpeedFilter,
    apply_gate,
    batch_estimate,
    effective_window,
    estimate_trajectory,
    filtered_speed,
    forgetting_factor,
    recursive_update,
)
from .encoder_sim import (
    MagneticWheel,
    PulseTrain,
    SpeedProfile,
    eval_profile,
    generate_pulses,
    make_wheel,
    realistic_theta,
)
from .speed import (
    IngestState,
    SectorObservation,
    SpeedSample,
    ingest_pulse,
    linear_speed,
    observation_matrix,
)

__version__ = "0.1.0"
