"""Power consumption model and downlink energy-efficiency metrics.

Circuit power is M rho + zeta per channel use (no per-reflector term in this
model). Energy efficiency is capacity divided by the downlink share of the
average consumed power; in the transmit-power-neglect mode only the circuit
terms remain in the denominator.
"""

from __future__ import annotations

from dataclasses import dataclass

from .capacity import (
    CapacityBounds,
    high_power_capacity_bounds,
    large_system_capacity_bounds,
)
from .model import InvalidConfigError, ProtocolTiming


@dataclass(frozen=True)
class PowerModel:
    rho: float   # circuit power per BS antenna, J per channel use
    zeta: float  # static circuit power, J per channel use

    def __post_init__(self):
        if self.rho < 0:
            raise InvalidConfigError(f"rho must be >= 0, got {self.rho}")
        if not self.zeta > 0:
            raise InvalidConfigError(f"zeta must be > 0, got {self.zeta}")


def energy_per_coherence(timing: ProtocolTiming, p_BS: float, p_UE: float) -> float:
    """Transmit energy spent in one coherence period (Joule):
    tau_down p_BS + (tau_pilot + tau_up) p_UE."""
    return timing.tau_down * p_BS + (timing.tau_pilot + timing.tau_up) * p_UE


def downlink_average_power(timing: ProtocolTiming, p_BS: float, p_UE: float,
                           power: PowerModel, M: int) -> float:
    """Downlink share of the average consumed power, J per channel use."""
    data = timing.tau_up + timing.tau_down
    share = timing.tau_down / data
    circuit = timing.tau_pilot * p_UE / timing.tau + M * power.rho + power.zeta
    return share * circuit + timing.tau_down * p_BS / timing.tau


def downlink_ee(capacity: float, timing: ProtocolTiming, p_BS: float, p_UE: float,
                power: PowerModel, M: int) -> float:
    """Energy efficiency in bits/Joule: capacity over the downlink average power."""
    denom = downlink_average_power(timing, p_BS, p_UE, power, M)
    if denom <= 0:
        raise ValueError(f"average power must be positive, got {denom}")
    return capacity / denom


def _static_power_denominator(timing: ProtocolTiming, zeta: float) -> float:
    if not zeta > 0:
        raise InvalidConfigError(f"zeta must be > 0, got {zeta}")
    return timing.tau * zeta / (timing.tau_up + timing.tau_down)


def max_ee_bounds(kappa_BS: float, kappa_UE: float, timing: ProtocolTiming,
                  zeta: float) -> CapacityBounds:
    """Bounds on the best attainable EE in the static-circuit-power regime
    (rho = 0, transmit power terms neglected), bits/Joule."""
    cap = large_system_capacity_bounds(kappa_BS, kappa_UE)
    denom = _static_power_denominator(timing, zeta)
    return CapacityBounds(lower=cap.lower / denom, upper=cap.upper / denom)


def ee_ceiling_fixed_antennas(M: int, kappa_BS: float, kappa_UE: float,
                              timing: ProtocolTiming, zeta: float) -> float:
    """EE ceiling reached by growing the reflector count at a fixed antenna
    count M (rho = 0 regime), bits/Joule. Coincides with the shared EE lower
    bound at M = 1 and approaches the EE upper bound as M grows."""
    cap = high_power_capacity_bounds(M, kappa_BS, kappa_UE)
    return cap.upper / _static_power_denominator(timing, zeta)


def max_ee_fixed_antennas(M: int, kappa_BS: float, kappa_UE: float,
                          timing: ProtocolTiming, power: PowerModel) -> float:
    """Best attainable EE at antenna count M with circuit power M rho + zeta,
    transmit power terms neglected, bits/Joule.

    The downlink data fraction in the capacity cancels against the downlink
    share of the circuit power, leaving
    log2(1 + M/(k_BS + k_UE (M + k_BS))) / (tau (M rho + zeta) / (tau_up + tau_down)).
    """
    cap = high_power_capacity_bounds(M, kappa_BS, kappa_UE)
    circuit = M * power.rho + power.zeta
    denom = timing.tau * circuit / (timing.tau_up + timing.tau_down)
    return cap.upper / denom
