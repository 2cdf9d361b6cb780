"""Noise-plus-distortion matrices, optimal combining/beamforming and SNR.

For a fixed effective channel h the receive/transmit optimization is a
generalized Rayleigh quotient problem whose closed-form solution is the
normalized solve full^{-1} h. The ``reduced`` matrix drops the rank-one user
distortion term; the two are linked by the rank-one resolvent identity, which
is what makes the diagonal fast path in :func:`quadratic_form` exact.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .model import SystemConfig

ALGEBRA_RTOL = 1e-10
UNIT_NORM_TOL = 1e-9


class LinkDirection(enum.Enum):
    DOWNLINK = "downlink"
    UPLINK = "uplink"


@dataclass(frozen=True, eq=False)
class NoisePlusDistortionMatrix:
    """Effective interference-plus-noise matrix for one link direction.

    ``full`` includes the rank-one user distortion term kappa_UE h h^H;
    ``reduced`` omits it and is diagonal (per-antenna BS distortion plus the
    scaled identity noise floor).
    """

    full: np.ndarray
    reduced: np.ndarray

    def __post_init__(self):
        full = np.asarray(self.full, dtype=complex)
        reduced = np.asarray(self.reduced, dtype=complex)
        if full.shape != reduced.shape or full.ndim != 2:
            raise ValueError(
                f"full and reduced must be equal-shape square matrices, got "
                f"{full.shape} and {reduced.shape}"
            )
        full.setflags(write=False)
        reduced.setflags(write=False)
        object.__setattr__(self, "full", full)
        object.__setattr__(self, "reduced", reduced)


def noise_over_power(config: SystemConfig, direction: LinkDirection) -> float:
    """sigma^2 / p for the given direction, honoring the uplink noise switch."""
    if direction is LinkDirection.DOWNLINK:
        return config.sigma2_UE / config.p_BS
    sigma2 = (config.sigma2_BS if config.uplink_noise_variance_source == "bs"
              else config.sigma2_UE)
    return sigma2 / config.p_UE


def build_noise_matrices(h_eff: np.ndarray, config: SystemConfig,
                         direction: LinkDirection) -> NoisePlusDistortionMatrix:
    """full = (1+k_UE) k_BS diag(h h^H) + k_UE h h^H + (sigma^2/p) I."""
    h = np.asarray(h_eff, dtype=complex)
    if h.ndim != 1 or h.shape[0] != config.M:
        raise ValueError(f"h_eff must have length M={config.M}, got shape {h.shape}")
    ratio = noise_over_power(config, direction)
    if not ratio > 0:
        raise ValueError("noise variance and power must both be positive")
    abs2 = np.abs(h) ** 2
    reduced = np.diag((1.0 + config.kappa_UE) * config.kappa_BS * abs2 + ratio
                      ).astype(complex)
    full = reduced + config.kappa_UE * np.outer(h, h.conj())
    return NoisePlusDistortionMatrix(full=full, reduced=reduced)


def optimal_beamformer(h_eff: np.ndarray,
                       mat: NoisePlusDistortionMatrix) -> np.ndarray:
    """Unit-norm maximizer of the generalized Rayleigh quotient |h^H w|^2 / w^H full w.

    The same formula serves receive combining (uplink matrix) and transmit
    beamforming (downlink matrix). With ideal hardware it reduces to h/||h||.
    """
    h = np.asarray(h_eff, dtype=complex)
    norm_h = np.linalg.norm(h)
    if norm_h == 0.0:
        raise ValueError("zero effective channel: beamforming direction is undefined")
    try:
        factor = scipy.linalg.cho_factor(mat.full)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"noise-plus-distortion matrix is singular: {exc}") from exc
    w = scipy.linalg.cho_solve(factor, h)
    return w / np.linalg.norm(w)


def snr(w: np.ndarray, h_eff: np.ndarray,
        mat: NoisePlusDistortionMatrix) -> float:
    """Post-combining SNR |h^H w|^2 / (w^H full w) for a unit-norm vector w."""
    w = np.asarray(w, dtype=complex)
    if abs(np.linalg.norm(w) - 1.0) > UNIT_NORM_TOL:
        raise ValueError(f"w must be unit norm, got ||w|| = {np.linalg.norm(w)!r}")
    h = np.asarray(h_eff, dtype=complex)
    numerator = np.abs(np.vdot(h, w)) ** 2
    denominator = float(np.real(np.vdot(w, mat.full @ w)))
    return float(numerator / denominator)


def quadratic_form(h_eff: np.ndarray, mat: NoisePlusDistortionMatrix,
                   use_reduced: bool = False) -> float:
    """h^H A^{-1} h for A = full (Cholesky solve) or A = reduced (diagonal sum)."""
    h = np.asarray(h_eff, dtype=complex)
    if use_reduced:
        d = np.real(np.diagonal(mat.reduced))
        if not np.all(d > 0):
            raise ValueError("reduced matrix is singular")
        return float(np.sum(np.abs(h) ** 2 / d))
    try:
        factor = scipy.linalg.cho_factor(mat.full)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"noise-plus-distortion matrix is singular: {exc}") from exc
    return float(np.real(np.vdot(h, scipy.linalg.cho_solve(factor, h))))


def rank_one_resolvent(B: np.ndarray, tau: complex, q: np.ndarray) -> np.ndarray:
    """Row vector q^H (B + tau q q^H)^{-1} without forming the updated matrix.

    Computed as q^H B^{-1} / (1 + tau q^H B^{-1} q); raises if the update is
    singular (denominator zero).
    """
    B = np.asarray(B, dtype=complex)
    q = np.asarray(q, dtype=complex)
    if B.ndim != 2 or B.shape[0] != B.shape[1] or q.shape != (B.shape[0],):
        raise ValueError(f"dimension mismatch: B {B.shape}, q {q.shape}")
    # q^H B^{-1} = (B^{-H} q)^H, so one solve with the conjugate transpose.
    row = np.linalg.solve(B.conj().T, q).conj()
    denom = 1.0 + tau * (row @ q)
    if abs(denom) < 1e-14 * max(1.0, abs(tau * (row @ q))):
        raise ValueError("rank-one update is singular (1 + tau q^H B^{-1} q = 0)")
    return row / denom
