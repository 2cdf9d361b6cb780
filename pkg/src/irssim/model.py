"""System configuration, protocol timing, channel generation and IRS phase state.

Conventions used throughout the package:
  * channels are circularly symmetric complex Gaussian, CN(0, C), drawn as
    L z with L L^H = C and z i.i.d. CN(0, 1),
  * the cascaded reflector channel is stored directly as an M x N matrix whose
    i-th column is the BS-user path through reflector i alone,
  * all container types are treated as immutable after construction; random
    draws take an explicit seed (or numpy Generator) so parallel trials can
    derive independent streams.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

HERMITIAN_TOL = 1e-10

_COMPLEX = np.complex128


class InvalidConfigError(ValueError):
    """A configuration value (or covariance matrix) is unusable for simulation."""


def _as_complex_matrix(a, name: str) -> np.ndarray:
    out = np.asarray(a, dtype=_COMPLEX)
    if out.ndim != 2 or out.shape[0] != out.shape[1]:
        raise InvalidConfigError(f"{name} must be a square matrix, got shape {out.shape}")
    if not np.isfinite(out).all():
        raise InvalidConfigError(f"{name} contains non-finite entries")
    return out


def _check_hermitian(a: np.ndarray, name: str) -> None:
    scale = max(1.0, float(np.abs(a).max()) if a.size else 1.0)
    residual = float(np.abs(a - a.conj().T).max()) if a.size else 0.0
    if residual > HERMITIAN_TOL * scale:
        raise InvalidConfigError(
            f"{name} is not Hermitian (max residual {residual:.3e} exceeds tolerance)"
        )


def _is_identity(a: np.ndarray) -> bool:
    n = a.shape[0]
    return bool(np.array_equal(a, np.eye(n, dtype=_COMPLEX)))


def _psd_factor(cov: np.ndarray, name: str) -> np.ndarray:
    """Factor L with L L^H = cov; raises InvalidConfigError if cov is not PSD."""
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass
    # Singular but possibly still PSD (e.g. an all-zero covariance).
    lam, vec = np.linalg.eigh(cov)
    scale = max(1.0, float(lam[-1]) if lam.size else 1.0)
    if lam.size and float(lam[0]) < -HERMITIAN_TOL * scale:
        raise InvalidConfigError(
            f"{name} is not positive semi-definite (min eigenvalue {lam[0]:.3e})"
        )
    return vec * np.sqrt(np.clip(lam, 0.0, None))


@dataclass(frozen=True, eq=False)
class SystemConfig:
    """Static link parameters shared by every operation.

    Powers and noise variances are in Joule per channel use. ``kappa_BS`` and
    ``kappa_UE`` are the dimensionless transceiver impairment coefficients
    (distortion power proportional to signal power). ``cov_direct`` is the
    M x M covariance of the direct channel and ``cov_irs_columns[i]`` the
    covariance of the i-th cascaded reflector column.
    """

    M: int
    N: int
    p_BS: float = 1.0
    p_UE: float = 1.0
    sigma2_BS: float = 1.0
    sigma2_UE: float = 1.0
    kappa_BS: float = 0.0
    kappa_UE: float = 0.0
    cov_direct: np.ndarray = None
    cov_irs_columns: tuple = None
    # Which receiver noise variance the uplink combining matrix uses. The
    # "ue-as-printed" alternative keeps sigma2_UE in the uplink matrix instead
    # of the physically expected sigma2_BS.
    uplink_noise_variance_source: str = "bs"

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 1:
            raise InvalidConfigError(f"M must be a positive integer, got {self.M}")
        if int(self.N) != self.N or self.N < 0:
            raise InvalidConfigError(f"N must be a non-negative integer, got {self.N}")
        object.__setattr__(self, "M", int(self.M))
        object.__setattr__(self, "N", int(self.N))
        for name in ("p_BS", "p_UE", "sigma2_BS", "sigma2_UE"):
            if not getattr(self, name) > 0:
                raise InvalidConfigError(f"{name} must be > 0, got {getattr(self, name)}")
        for name in ("kappa_BS", "kappa_UE"):
            if getattr(self, name) < 0:
                raise InvalidConfigError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.uplink_noise_variance_source not in ("bs", "ue-as-printed"):
            raise InvalidConfigError(
                "uplink_noise_variance_source must be 'bs' or 'ue-as-printed', "
                f"got {self.uplink_noise_variance_source!r}"
            )

        cov_d = np.eye(self.M, dtype=_COMPLEX) if self.cov_direct is None else self.cov_direct
        cov_d = _as_complex_matrix(cov_d, "cov_direct")
        if cov_d.shape != (self.M, self.M):
            raise InvalidConfigError(
                f"cov_direct must be {self.M}x{self.M}, got {cov_d.shape}"
            )
        _check_hermitian(cov_d, "cov_direct")
        cov_d.setflags(write=False)
        object.__setattr__(self, "cov_direct", cov_d)

        if self.cov_irs_columns is None:
            cols = tuple(np.eye(self.M, dtype=_COMPLEX) for _ in range(self.N))
        else:
            cols = tuple(
                _as_complex_matrix(c, f"cov_irs_columns[{i}]")
                for i, c in enumerate(self.cov_irs_columns)
            )
        if len(cols) != self.N:
            raise InvalidConfigError(
                f"cov_irs_columns must hold N={self.N} matrices, got {len(cols)}"
            )
        for i, c in enumerate(cols):
            if c.shape != (self.M, self.M):
                raise InvalidConfigError(
                    f"cov_irs_columns[{i}] must be {self.M}x{self.M}, got {c.shape}"
                )
            _check_hermitian(c, f"cov_irs_columns[{i}]")
            c.setflags(write=False)
        object.__setattr__(self, "cov_irs_columns", cols)

    @classmethod
    def iid(cls, M: int, N: int, cov_scale: float = 1.0, **kwargs) -> "SystemConfig":
        """Config with cov_direct = cov_irs_columns[i] = cov_scale * I."""
        cov = cov_scale * np.eye(M, dtype=_COMPLEX)
        return cls(M=M, N=N, cov_direct=cov,
                   cov_irs_columns=tuple(cov for _ in range(N)), **kwargs)

    # Factors are computed once per config and reused by every Monte Carlo
    # trial. None marks an exact-identity covariance (draw passes through).
    @cached_property
    def _direct_factor(self):
        if _is_identity(self.cov_direct):
            return None
        return _psd_factor(self.cov_direct, "cov_direct")

    @cached_property
    def _irs_factors(self):
        if all(_is_identity(c) for c in self.cov_irs_columns):
            return None
        return [
            None if _is_identity(c) else _psd_factor(c, f"cov_irs_columns[{i}]")
            for i, c in enumerate(self.cov_irs_columns)
        ]


@dataclass(frozen=True)
class ProtocolTiming:
    """Split of one coherence period (in channel uses) into pilot/up/down phases."""

    tau: float
    tau_pilot: float
    tau_up: float
    tau_down: float

    def __post_init__(self):
        for name in ("tau_pilot", "tau_up", "tau_down"):
            if getattr(self, name) < 0:
                raise InvalidConfigError(f"{name} must be >= 0, got {getattr(self, name)}")
        if not self.tau > 0:
            raise InvalidConfigError(f"tau must be > 0, got {self.tau}")
        if not self.tau_up + self.tau_down > 0:
            raise InvalidConfigError("tau_up + tau_down must be > 0")
        total = self.tau_pilot + self.tau_up + self.tau_down
        if abs(total - self.tau) > 1e-9 * max(1.0, self.tau):
            raise InvalidConfigError(
                f"tau must equal tau_pilot + tau_up + tau_down ({total}), got {self.tau}"
            )

    @classmethod
    def from_phases(cls, tau_pilot: float, tau_up: float, tau_down: float) -> "ProtocolTiming":
        return cls(tau_pilot + tau_up + tau_down, tau_pilot, tau_up, tau_down)

    @classmethod
    def default_for(cls, N: int) -> "ProtocolTiming":
        """Default split: one pilot use per training subphase (N+1 of them),
        coherence period ten times the training length, remainder split evenly."""
        tau_pilot = float(N + 1)
        tau = 10.0 * tau_pilot
        half = (tau - tau_pilot) / 2.0
        return cls(tau, tau_pilot, half, half)

    @property
    def downlink_fraction(self) -> float:
        return self.tau_down / self.tau

    @property
    def uplink_fraction(self) -> float:
        return self.tau_up / self.tau


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """One fixed draw of the direct channel and the cascaded reflector columns."""

    h_d: np.ndarray   # (M,) complex
    H_irs: np.ndarray  # (M, N) complex

    def __post_init__(self):
        h_d = np.asarray(self.h_d, dtype=_COMPLEX)
        H = np.asarray(self.H_irs, dtype=_COMPLEX)
        if h_d.ndim != 1:
            raise ValueError(f"h_d must be a vector, got shape {h_d.shape}")
        if H.ndim != 2 or H.shape[0] != h_d.shape[0]:
            raise ValueError(
                f"H_irs must be (M, N) with M={h_d.shape[0]}, got shape {H.shape}"
            )
        if not (np.isfinite(h_d).all() and np.isfinite(H).all()):
            raise ValueError("channel realization contains non-finite entries")
        h_d.setflags(write=False)
        H.setflags(write=False)
        object.__setattr__(self, "h_d", h_d)
        object.__setattr__(self, "H_irs", H)


@dataclass(frozen=True)
class PhaseNoiseModel:
    """Zero-mean-direction circular noise on the realized reflector phases.

    kind "uniform": width is the half-width delta, samples on [-delta, delta].
    kind "von_mises": width is the concentration (larger means narrower).
    Both densities are symmetric around zero, so arg E{exp(j dtheta)} = 0.
    """

    kind: str = "uniform"
    width: float = 0.0

    def __post_init__(self):
        if self.kind not in ("uniform", "von_mises"):
            raise InvalidConfigError(
                f"phase noise kind must be 'uniform' or 'von_mises', got {self.kind!r}"
            )
        if self.width < 0:
            raise InvalidConfigError(f"phase noise width must be >= 0, got {self.width}")
        if self.kind == "uniform" and self.width > np.pi:
            raise InvalidConfigError(
                f"uniform phase noise half-width {self.width} exceeds pi; support "
                "would leave [-pi, pi)"
            )

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "uniform":
            if self.width == 0.0:
                return np.zeros(n)
            return rng.uniform(-self.width, self.width, n)
        return rng.vonmises(0.0, self.width, n) if n else np.zeros(0)


@dataclass(frozen=True, eq=False)
class IrsState:
    """Nominal reflector phases plus a noise model and one realized noise draw."""

    theta: np.ndarray
    noise_model: PhaseNoiseModel = field(default_factory=PhaseNoiseModel)
    delta_theta: np.ndarray = None

    def __post_init__(self):
        theta = np.mod(np.asarray(self.theta, dtype=float), 2.0 * np.pi)
        delta = self.delta_theta
        delta = np.zeros(theta.shape) if delta is None else np.asarray(delta, dtype=float)
        if theta.ndim != 1 or delta.shape != theta.shape:
            raise ValueError(
                f"theta and delta_theta must be equal-length vectors, got "
                f"{theta.shape} and {delta.shape}"
            )
        theta.setflags(write=False)
        delta.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "delta_theta", delta)

    @classmethod
    def identity(cls, N: int, noise_model: PhaseNoiseModel | None = None) -> "IrsState":
        """All-zero nominal phases (reflection matrix equal to the identity)."""
        return cls(np.zeros(N), noise_model or PhaseNoiseModel())

    def reflection_coefficients(self) -> np.ndarray:
        """Unit-modulus per-reflector coefficients exp(j(theta + delta_theta))."""
        return np.exp(1j * (self.theta + self.delta_theta))


def _complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * np.sqrt(0.5)


def generate_channels(config: SystemConfig, seed) -> ChannelRealization:
    """Draw one channel realization.

    h_d is CN(0, cov_direct); column i of H_irs is CN(0, cov_irs_columns[i]),
    columns mutually independent. Deterministic given the seed; ``seed`` may
    also be a numpy Generator to continue an existing stream.
    """
    rng = np.random.default_rng(seed)
    z = _complex_normal(rng, (config.M,))
    factor_d = config._direct_factor
    h_d = z if factor_d is None else factor_d @ z

    Z = _complex_normal(rng, (config.M, config.N))
    factors = config._irs_factors
    if factors is None:
        H = Z
    else:
        H = np.empty_like(Z)
        for i, f in enumerate(factors):
            H[:, i] = Z[:, i] if f is None else f @ Z[:, i]
    return ChannelRealization(h_d=h_d, H_irs=H)


def cascade_channel(G: np.ndarray, h_r: np.ndarray) -> np.ndarray:
    """Column-scale the BS-reflector channel by the reflector-user channel.

    Returns G diag(h_r); column i is the path through reflector i alone.
    """
    G = np.asarray(G, dtype=_COMPLEX)
    h_r = np.asarray(h_r, dtype=_COMPLEX)
    if G.ndim != 2 or h_r.ndim != 1 or G.shape[1] != h_r.shape[0]:
        raise ValueError(
            f"dimension mismatch: G is {G.shape}, h_r has length {h_r.shape}"
        )
    return G * h_r[np.newaxis, :]


def realize_phase_noise(state: IrsState, seed) -> IrsState:
    """Return a copy of ``state`` with a fresh phase noise draw.

    Samples are i.i.d. from the state's symmetric noise model; deterministic
    given the seed. Width zero reproduces the nominal phases exactly.
    """
    rng = np.random.default_rng(seed)
    delta = state.noise_model.sample(state.theta.shape[0], rng)
    return IrsState(state.theta, state.noise_model, delta)


def effective_channel(realization: ChannelRealization, irs: IrsState) -> np.ndarray:
    """Overall BS-user channel: direct path plus phase-shifted reflector columns."""
    if irs.theta.shape[0] != realization.H_irs.shape[1]:
        raise ValueError(
            f"dimension mismatch: IRS has {irs.theta.shape[0]} phases but the "
            f"cascaded channel has {realization.H_irs.shape[1]} columns"
        )
    if realization.H_irs.shape[1] == 0:
        return realization.h_d.copy()
    return realization.h_d + realization.H_irs @ irs.reflection_coefficients()
