"""Link-level simulator and closed-form bound calculator for an IRS-assisted
link with transceiver distortion noise and reflector phase noise."""

from .beamforming import (
    LinkDirection,
    NoisePlusDistortionMatrix,
    build_noise_matrices,
    optimal_beamformer,
    quadratic_form,
    rank_one_resolvent,
    snr,
)
from .capacity import (
    CapacityBounds,
    CapacityEstimate,
    UnboundedCapacityError,
    ergodic_capacity,
    high_power_capacity_bounds,
    high_power_quadratic_limit,
    instantaneous_se,
    large_system_capacity_bounds,
)
from .energy import (
    PowerModel,
    downlink_average_power,
    downlink_ee,
    ee_ceiling_fixed_antennas,
    energy_per_coherence,
    max_ee_bounds,
    max_ee_fixed_antennas,
)
from .harness import (
    Settings,
    SweepKind,
    SweepResult,
    SweepRow,
    SweepSpec,
    cli_main,
    ee_sweep_spec,
    load_settings,
    read_csv,
    reflector_sweep_spec,
    run_antenna_ee_sweep,
    run_reflector_sweep,
    run_snr_sweep,
    snr_sweep_spec,
    write_csv,
)
from .impairments import (
    DistortionCovariances,
    downlink_distortion,
    evm_from_kappa,
    uplink_distortion,
)
from .model import (
    ChannelRealization,
    InvalidConfigError,
    IrsState,
    PhaseNoiseModel,
    ProtocolTiming,
    SystemConfig,
    cascade_channel,
    effective_channel,
    generate_channels,
    realize_phase_noise,
)

__version__ = "0.1.0"
