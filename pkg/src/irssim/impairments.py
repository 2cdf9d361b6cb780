"""Additive transceiver distortion statistics for both link directions.

The distortion noise at an antenna is proportional to the signal power at
that antenna, so the BS covariance is diagonal in this model. All outputs use
the covariance (expectation) form, not per-symbol instantaneous powers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import HERMITIAN_TOL, SystemConfig, _as_complex_matrix, _check_hermitian


@dataclass(frozen=True, eq=False)
class DistortionCovariances:
    """BS distortion covariance (diagonal M x M) and user distortion variance."""

    upsilon_BS: np.ndarray
    v_UE: float

    def __post_init__(self):
        ups = np.asarray(self.upsilon_BS)
        diag = np.diagonal(ups)
        if np.abs(ups - np.diag(diag)).max(initial=0.0) != 0.0:
            raise ValueError("upsilon_BS must be exactly diagonal in this model")
        if diag.size and float(np.real(diag).min()) < 0:
            raise ValueError("upsilon_BS diagonal entries must be >= 0")
        if self.v_UE < 0:
            raise ValueError(f"v_UE must be >= 0, got {self.v_UE}")
        ups.setflags(write=False)
        object.__setattr__(self, "upsilon_BS", ups)


def evm_from_kappa(kappa: float) -> float:
    """Error vector magnitude of a transceiver with impairment coefficient kappa."""
    if kappa < 0:
        raise ValueError(f"kappa must be >= 0, got {kappa}")
    return math.sqrt(kappa)


def downlink_distortion(h_eff: np.ndarray, Q: np.ndarray,
                        kappa_BS: float, kappa_UE: float) -> DistortionCovariances:
    """Distortion statistics when the BS transmits with signal covariance Q.

    upsilon_BS = kappa_BS diag(Q); the user-side variance aggregates the power
    of the intended signal and of the BS distortion arriving through h_eff:
    v_UE = kappa_UE (h^H Q h + h^H upsilon_BS h).
    """
    h = np.asarray(h_eff, dtype=complex)
    Q = _as_complex_matrix(Q, "Q")
    if h.ndim != 1 or Q.shape != (h.shape[0], h.shape[0]):
        raise ValueError(f"dimension mismatch: h_eff {h.shape}, Q {Q.shape}")
    if kappa_BS < 0 or kappa_UE < 0:
        raise ValueError("kappa_BS and kappa_UE must be >= 0")
    _check_hermitian(Q, "Q")
    eig = np.linalg.eigvalsh(Q)
    scale = max(1.0, float(eig[-1]) if eig.size else 1.0)
    if eig.size and float(eig[0]) < -HERMITIAN_TOL * scale:
        raise ValueError(f"Q is not positive semi-definite (min eigenvalue {eig[0]:.3e})")

    upsilon = kappa_BS * np.diag(np.real(np.diagonal(Q)).astype(complex))
    signal_power = float(np.real(np.vdot(h, Q @ h)))
    distortion_power = float(np.real(np.vdot(h, upsilon @ h)))
    return DistortionCovariances(upsilon, kappa_UE * (signal_power + distortion_power))


def uplink_distortion(config: SystemConfig) -> DistortionCovariances:
    """Distortion statistics when the user transmits with power p_UE.

    v_UE = kappa_UE p_UE; the BS covariance uses the channel covariances
    (expectation form): kappa_BS p_UE (1 + kappa_UE) diag(C_d + sum_i C_i).
    """
    total = config.cov_direct.copy()
    for c in config.cov_irs_columns:
        total += c
    coeff = config.kappa_BS * config.p_UE * (1.0 + config.kappa_UE)
    upsilon = coeff * np.diag(np.real(np.diagonal(total)).astype(complex))
    return DistortionCovariances(upsilon, config.kappa_UE * config.p_UE)
