"""Per-realization spectral efficiency, Monte Carlo ergodic capacity and the
closed-form asymptotic capacity bounds.

The ergodic estimator draws a fresh channel and phase-noise realization per
trial from per-trial derived seeds, so the result is bit-identical for a
given seed regardless of how many worker threads evaluate the trials.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .beamforming import LinkDirection, build_noise_matrices, quadratic_form
from .model import (
    IrsState,
    SystemConfig,
    effective_channel,
    generate_channels,
    realize_phase_noise,
)


class UnboundedCapacityError(ValueError):
    """The requested asymptotic limit is infinite (no impairment sets a ceiling)."""


@dataclass(frozen=True)
class CapacityEstimate:
    """Sample mean and standard error of the spectral efficiency, bits/channel use."""

    mean: float
    std_error: float
    trials: int
    prefactor_applied: bool

    def __post_init__(self):
        if self.mean < 0 or self.std_error < 0:
            raise ValueError("mean and std_error must be >= 0")


@dataclass(frozen=True)
class CapacityBounds:
    lower: float
    upper: float

    def __post_init__(self):
        if not 0 <= self.lower <= self.upper:
            raise ValueError(
                f"bounds must satisfy 0 <= lower <= upper, got [{self.lower}, {self.upper}]"
            )


def instantaneous_se(h_eff: np.ndarray, config: SystemConfig,
                     direction: LinkDirection, use_reduced: bool = True) -> float:
    """log2(1 + h^H full^{-1} h) for one realization, without protocol prefactor.

    The default path evaluates the diagonal reduced form q and applies the
    rank-one identity q / (1 + kappa_UE q); ``use_reduced=False`` solves with
    the full matrix directly (the slower, equivalent route kept for
    cross-checking).
    """
    mat = build_noise_matrices(h_eff, config, direction)
    if use_reduced:
        q = quadratic_form(h_eff, mat, use_reduced=True)
        value = q / (1.0 + config.kappa_UE * q)
    else:
        value = quadratic_form(h_eff, mat, use_reduced=False)
    return float(np.log2(1.0 + value))


def trial_rng(seed: int, *path: int) -> np.random.Generator:
    """Independent generator for one trial of one experiment, derived from a
    root seed and an index path (splittable scheme)."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=path))


def thread_count() -> int:
    """Worker threads for Monte Carlo loops, from IRS_SIM_THREADS (0 = auto)."""
    raw = os.environ.get("IRS_SIM_THREADS", "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError as exc:
        raise ValueError(f"IRS_SIM_THREADS must be an integer, got {raw!r}") from exc
    if n < 0:
        raise ValueError(f"IRS_SIM_THREADS must be >= 0, got {n}")
    if n == 0:
        return os.cpu_count() or 1
    return n


def _indexed_map(fn, n: int) -> np.ndarray:
    """Evaluate fn(0..n-1) into an array, optionally threaded; order is fixed
    by index so the reduction below is independent of the worker count."""
    workers = thread_count()
    out = np.empty(n)
    if workers <= 1 or n < 2:
        for i in range(n):
            out[i] = fn(i)
        return out
    chunk = max(1, -(-n // (4 * workers)))
    spans = [(s, min(s + chunk, n)) for s in range(0, n, chunk)]

    def run_span(span):
        s, e = span
        return [fn(i) for i in range(s, e)]

    with ThreadPoolExecutor(max_workers=workers) as pool:
        for (s, e), vals in zip(spans, pool.map(run_span, spans)):
            out[s:e] = vals
    return out


def ergodic_capacity(config: SystemConfig, irs: IrsState, direction: LinkDirection,
                     trials: int, seed: int, prefactor: float = 1.0) -> CapacityEstimate:
    """Average instantaneous SE over fresh channel and phase-noise draws.

    The nominal IRS phases stay fixed at ``irs.theta`` (no optimization is
    performed over them); ``prefactor`` is the data fraction of the coherence
    period and multiplies both the mean and the standard error.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")

    def one_trial(t: int) -> float:
        rng = trial_rng(seed, t)
        realization = generate_channels(config, rng)
        state = realize_phase_noise(irs, rng)
        h = effective_channel(realization, state)
        return instantaneous_se(h, config, direction)

    values = _indexed_map(one_trial, trials)
    sem = float(values.std(ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
    return CapacityEstimate(
        mean=prefactor * float(values.mean()),
        std_error=prefactor * sem,
        trials=trials,
        prefactor_applied=prefactor != 1.0,
    )


def high_power_capacity_bounds(M: int, kappa_BS: float, kappa_UE: float,
                               prefactor: float = 1.0) -> CapacityBounds:
    """Bounds on the capacity ceiling reached as the transmit power grows.

    upper = prefactor log2(1 + M / (k_BS + k_UE (M + k_BS)))
    lower = prefactor log2(1 + 1 / (k_BS + k_UE (1 + k_BS)))
    """
    if M < 1:
        raise ValueError(f"M must be >= 1, got {M}")
    if kappa_BS < 0 or kappa_UE < 0:
        raise ValueError("kappa_BS and kappa_UE must be >= 0")
    if kappa_BS == 0 and kappa_UE == 0:
        raise UnboundedCapacityError(
            "capacity grows without bound when both impairment coefficients are zero"
        )
    upper = prefactor * np.log2(1.0 + M / (kappa_BS + kappa_UE * (M + kappa_BS)))
    lower = prefactor * np.log2(1.0 + 1.0 / (kappa_BS + kappa_UE * (1.0 + kappa_BS)))
    return CapacityBounds(lower=float(lower), upper=float(upper))


def large_system_capacity_bounds(kappa_BS: float, kappa_UE: float,
                                 prefactor: float = 1.0) -> CapacityBounds:
    """Bounds on the capacity ceiling as antennas and reflectors both grow.

    upper = prefactor log2(1 + 1/k_UE); lower as in the high-power case.
    """
    if kappa_BS < 0 or kappa_UE < 0:
        raise ValueError("kappa_BS and kappa_UE must be >= 0")
    if kappa_UE == 0:
        raise UnboundedCapacityError(
            "the large-system ceiling is infinite when kappa_UE = 0"
        )
    upper = prefactor * np.log2(1.0 + 1.0 / kappa_UE)
    lower = prefactor * np.log2(1.0 + 1.0 / (kappa_BS + kappa_UE * (1.0 + kappa_BS)))
    return CapacityBounds(lower=float(lower), upper=float(upper))


def high_power_quadratic_limit(M: int, kappa_BS: float, kappa_UE: float) -> float:
    """Limit of E{h^H reduced^{-1} h} as the noise-over-power ratio vanishes:
    M / ((1 + kappa_UE) kappa_BS)."""
    if M < 0:
        raise ValueError(f"M must be >= 0, got {M}")
    if kappa_BS <= 0:
        raise UnboundedCapacityError(
            "the quadratic form diverges with transmit power when kappa_BS = 0"
        )
    return M / ((1.0 + kappa_UE) * kappa_BS)
