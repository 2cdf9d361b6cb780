"""Experiment sweeps, CSV emission, config-file parsing and the CLI.

Three sweep kinds are provided: downlink SE versus SNR (with high-power
ceiling bound columns), SE versus the reflector count (with large-system
bound columns) and the closed-form peak EE versus the antenna count for
several circuit-power splits. Output rows are deterministic for a given
(config, seed, trials) triple regardless of worker-thread count.
"""

from __future__ import annotations

import enum
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .beamforming import LinkDirection
from .capacity import (
    CapacityBounds,
    UnboundedCapacityError,
    ergodic_capacity,
    high_power_capacity_bounds,
    large_system_capacity_bounds,
)
from .energy import PowerModel, ee_ceiling_fixed_antennas, max_ee_bounds, max_ee_fixed_antennas
from .model import (
    InvalidConfigError,
    IrsState,
    PhaseNoiseModel,
    ProtocolTiming,
    SystemConfig,
)

DEFAULT_TRIALS = 2000
DEFAULT_SEED = 1
DEFAULT_SNR_PAIRS = ((1, 20), (1, 70), (1, 150), (15, 150), (50, 150))
DEFAULT_SNR_GRID_DB = tuple(float(v) for v in range(0, 65, 5))
DEFAULT_REFLECTOR_M_GRID = (1, 5, 20)
DEFAULT_REFLECTOR_SNR_DB = (10.0, 15.0, 20.0)
DEFAULT_REFLECTOR_N_GRID = (10, 20, 40, 70, 100, 150, 220, 300)
DEFAULT_EE_SPLITS = (0.0, 0.002, 0.01, 0.02)
DEFAULT_EE_M_GRID = tuple(range(1, 501))


@dataclass(frozen=True)
class CovarianceSpec:
    """Covariance recipe from a config file: identity, scaled identity, or an
    explicit row-major matrix (applied to every reflector column)."""

    kind: str = "identity"
    scale: float = 1.0
    matrix: tuple = None  # row-major complex entries for kind "explicit"

    def build(self, M: int) -> np.ndarray:
        if self.kind == "identity":
            return np.eye(M, dtype=complex)
        if self.kind == "scaled":
            return self.scale * np.eye(M, dtype=complex)
        entries = np.asarray(self.matrix, dtype=complex)
        if entries.size != M * M:
            raise InvalidConfigError(
                f"explicit covariance has {entries.size} entries, needs M*M = {M * M}"
            )
        return entries.reshape(M, M)

    @classmethod
    def parse(cls, value: str, key: str) -> "CovarianceSpec":
        value = value.strip()
        if value == "identity":
            return cls("identity")
        if value.startswith("scaled:"):
            try:
                return cls("scaled", scale=float(value.split(":", 1)[1]))
            except ValueError as exc:
                raise InvalidConfigError(f"config key '{key}': bad scale in {value!r}") from exc
        try:
            entries = tuple(complex(tok) for tok in value.split(",") if tok.strip())
        except ValueError as exc:
            raise InvalidConfigError(
                f"config key '{key}': expected 'identity', 'scaled:<c>' or a "
                f"row-major entry list, got {value!r}"
            ) from exc
        return cls("explicit", matrix=entries)


@dataclass(frozen=True)
class Settings:
    """Scenario parameters plus sweep grids, as read from a config file."""

    p_UE: float = 1.0
    sigma2_BS: float = 1.0
    sigma2_UE: float = 1.0
    kappa_BS: float = 0.0025
    kappa_UE: float = 0.0025
    rho: float = 0.0
    zeta: float = 0.5e-6
    trials: int = DEFAULT_TRIALS
    seed: int = DEFAULT_SEED
    uplink_noise_variance_source: str = "bs"
    cov_direct: CovarianceSpec = field(default_factory=CovarianceSpec)
    cov_irs_columns: CovarianceSpec = field(default_factory=CovarianceSpec)
    phase_noise: PhaseNoiseModel = field(default_factory=PhaseNoiseModel)
    timing: ProtocolTiming = None  # None derives the per-N default split
    snr_pairs: tuple = DEFAULT_SNR_PAIRS
    snr_grid_db: tuple = DEFAULT_SNR_GRID_DB
    reflector_m_grid: tuple = DEFAULT_REFLECTOR_M_GRID
    reflector_snr_db_grid: tuple = DEFAULT_REFLECTOR_SNR_DB
    reflector_n_grid: tuple = DEFAULT_REFLECTOR_N_GRID
    ee_splits: tuple = DEFAULT_EE_SPLITS
    ee_m_grid: tuple = DEFAULT_EE_M_GRID

    def config_for(self, M: int, N: int, p_BS: float) -> SystemConfig:
        cov_col = self.cov_irs_columns.build(M)
        return SystemConfig(
            M=M, N=N, p_BS=p_BS, p_UE=self.p_UE,
            sigma2_BS=self.sigma2_BS, sigma2_UE=self.sigma2_UE,
            kappa_BS=self.kappa_BS, kappa_UE=self.kappa_UE,
            cov_direct=self.cov_direct.build(M),
            cov_irs_columns=tuple(cov_col for _ in range(N)),
            uplink_noise_variance_source=self.uplink_noise_variance_source,
        )

    def timing_for(self, N: int) -> ProtocolTiming:
        return self.timing if self.timing is not None else ProtocolTiming.default_for(N)

    @property
    def power(self) -> PowerModel:
        return PowerModel(rho=self.rho, zeta=self.zeta)


class SweepKind(enum.Enum):
    SNR_SWEEP = "snr-sweep"
    REFLECTOR_SWEEP = "reflector-sweep"
    ANTENNA_EE_SWEEP = "ee-sweep"


@dataclass(frozen=True)
class SweepSpec:
    kind: SweepKind
    grid: tuple
    trials: int
    seed: int
    base: Settings
    apply_protocol_prefactor: bool = False
    neglect_tx_power: bool = False

    def __post_init__(self):
        if not self.grid:
            raise InvalidConfigError("sweep grid must be non-empty")
        if self.trials < 1:
            raise InvalidConfigError(f"trials must be >= 1, got {self.trials}")


@dataclass(frozen=True)
class SweepRow:
    params: tuple
    value: float
    std_err: float
    bound_lower: float
    bound_upper: float


@dataclass(frozen=True)
class SweepResult:
    param_names: tuple
    value_name: str  # "se_mean" or "ee"
    rows: tuple


def _point_seed(root_seed: int, index: int) -> int:
    ss = np.random.SeedSequence(entropy=root_seed, spawn_key=(index,))
    return int(ss.generate_state(1, np.uint64)[0])


def _bounds_or_inf(fn, *args) -> CapacityBounds:
    # Ideal hardware has no finite ceiling; the sweep still runs, with
    # infinite bound columns.
    try:
        return fn(*args)
    except UnboundedCapacityError:
        return CapacityBounds(lower=np.inf, upper=np.inf)


def snr_sweep_spec(settings: Settings, trials=None, seed=None,
                   apply_protocol_prefactor=False) -> SweepSpec:
    grid = tuple(
        (m, n, snr_db)
        for (m, n) in settings.snr_pairs
        for snr_db in settings.snr_grid_db
    )
    return SweepSpec(SweepKind.SNR_SWEEP, grid,
                     trials if trials is not None else settings.trials,
                     seed if seed is not None else settings.seed,
                     settings, apply_protocol_prefactor)


def reflector_sweep_spec(settings: Settings, trials=None, seed=None,
                         apply_protocol_prefactor=False) -> SweepSpec:
    grid = tuple(
        (m, snr_db, n)
        for m in settings.reflector_m_grid
        for snr_db in settings.reflector_snr_db_grid
        for n in settings.reflector_n_grid
    )
    return SweepSpec(SweepKind.REFLECTOR_SWEEP, grid,
                     trials if trials is not None else settings.trials,
                     seed if seed is not None else settings.seed,
                     settings, apply_protocol_prefactor)


def ee_sweep_spec(settings: Settings, seed=None, neglect_tx_power=False) -> SweepSpec:
    grid = tuple(
        (split, m) for split in settings.ee_splits for m in settings.ee_m_grid
    )
    return SweepSpec(SweepKind.ANTENNA_EE_SWEEP, grid, 1,
                     seed if seed is not None else settings.seed,
                     settings, neglect_tx_power=neglect_tx_power)


def run_snr_sweep(spec: SweepSpec) -> SweepResult:
    """Ergodic downlink SE per (M, N, SNR) point, with high-power ceiling bounds."""
    if spec.kind is not SweepKind.SNR_SWEEP:
        raise ValueError(f"expected an SNR sweep spec, got {spec.kind}")
    base = spec.base
    rows = []
    for k, (m, n, snr_db) in enumerate(spec.grid):
        timing = base.timing_for(n)
        prefactor = timing.downlink_fraction if spec.apply_protocol_prefactor else 1.0
        p_bs = base.sigma2_UE * 10.0 ** (snr_db / 10.0)
        config = base.config_for(m, n, p_BS=p_bs)
        irs = IrsState.identity(n, base.phase_noise)
        est = ergodic_capacity(config, irs, LinkDirection.DOWNLINK,
                               spec.trials, _point_seed(spec.seed, k), prefactor)
        bounds = _bounds_or_inf(high_power_capacity_bounds,
                                m, base.kappa_BS, base.kappa_UE, prefactor)
        rows.append(SweepRow((m, n, snr_db), est.mean, est.std_error,
                             bounds.lower, bounds.upper))
    return SweepResult(("M", "N", "snr_db"), "se_mean", tuple(rows))


def run_reflector_sweep(spec: SweepSpec) -> SweepResult:
    """Ergodic downlink SE per (M, SNR, N) point, with large-system bounds."""
    if spec.kind is not SweepKind.REFLECTOR_SWEEP:
        raise ValueError(f"expected a reflector sweep spec, got {spec.kind}")
    base = spec.base
    rows = []
    for k, (m, snr_db, n) in enumerate(spec.grid):
        timing = base.timing_for(n)
        prefactor = timing.downlink_fraction if spec.apply_protocol_prefactor else 1.0
        p_bs = base.sigma2_UE * 10.0 ** (snr_db / 10.0)
        config = base.config_for(m, n, p_BS=p_bs)
        irs = IrsState.identity(n, base.phase_noise)
        est = ergodic_capacity(config, irs, LinkDirection.DOWNLINK,
                               spec.trials, _point_seed(spec.seed, k), prefactor)
        bounds = _bounds_or_inf(large_system_capacity_bounds,
                                base.kappa_BS, base.kappa_UE, prefactor)
        rows.append(SweepRow((m, snr_db, n), est.mean, est.std_error,
                             bounds.lower, bounds.upper))
    return SweepResult(("M", "snr_db", "N"), "se_mean", tuple(rows))


def run_antenna_ee_sweep(spec: SweepSpec) -> SweepResult:
    """Closed-form peak EE per (circuit split, M) point, with the static-power
    EE bounds; requires the transmit-power-neglect mode."""
    if spec.kind is not SweepKind.ANTENNA_EE_SWEEP:
        raise ValueError(f"expected an EE sweep spec, got {spec.kind}")
    if not spec.neglect_tx_power:
        raise InvalidConfigError(
            "the EE sweep is defined in the transmit-power-neglect mode; "
            "set neglect_tx_power (CLI flag --neglect-tx-power)"
        )
    base = spec.base
    total = base.rho + base.zeta
    timing = base.timing if base.timing is not None else ProtocolTiming.from_phases(0.0, 1.0, 1.0)
    rows = []
    for split, m in spec.grid:
        if not 0.0 <= split < 1.0:
            raise InvalidConfigError(f"circuit power split must be in [0, 1), got {split}")
        power = PowerModel(rho=split * total, zeta=(1.0 - split) * total)
        value = max_ee_fixed_antennas(m, base.kappa_BS, base.kappa_UE, timing, power)
        bounds = _bounds_or_inf(max_ee_bounds,
                                base.kappa_BS, base.kappa_UE, timing, power.zeta)
        rows.append(SweepRow((split, m), value, 0.0, bounds.lower, bounds.upper))
    return SweepResult(("rho_split", "M"), "ee", tuple(rows))


def _format_cell(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_csv(result: SweepResult, path) -> None:
    """Header plus one newline-terminated row per grid point; floats use the
    shortest round-trip decimal repr, so a read-back is bit exact."""
    header = ",".join(result.param_names
                      + (result.value_name, "std_err", "bound_lower", "bound_upper"))
    lines = [header]
    for row in result.rows:
        cells = [_format_cell(p) for p in row.params]
        cells += [_format_cell(v) for v in
                  (row.value, row.std_err, row.bound_lower, row.bound_upper)]
        lines.append(",".join(cells))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path):
    """Read back a sweep CSV as (header tuple, list of float tuples)."""
    with open(path, newline="") as fh:
        lines = [ln for ln in fh.read().split("\n") if ln]
    header = tuple(lines[0].split(","))
    rows = [tuple(float(tok) for tok in ln.split(",")) for ln in lines[1:]]
    return header, rows


# ---------------------------------------------------------------------------
# Config file parsing
# ---------------------------------------------------------------------------

def parse_config_text(text: str) -> dict:
    mapping = {}
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidConfigError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        mapping[key.strip()] = value.strip()
    return mapping


def _parse_scalar(value: str, key: str, cast):
    try:
        return cast(value)
    except ValueError as exc:
        raise InvalidConfigError(f"config key '{key}': cannot parse {value!r}") from exc


def _parse_list(value: str, key: str, cast):
    out = []
    for tok in value.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if ".." in tok and cast is int:
            lo, hi = tok.split("..", 1)
            out.extend(range(_parse_scalar(lo, key, int), _parse_scalar(hi, key, int) + 1))
        else:
            out.append(_parse_scalar(tok, key, cast))
    if not out:
        raise InvalidConfigError(f"config key '{key}': empty list")
    return tuple(out)


def _parse_pairs(value: str, key: str):
    pairs = []
    for tok in value.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if ":" not in tok:
            raise InvalidConfigError(f"config key '{key}': expected 'M:N' pairs, got {tok!r}")
        m, n = tok.split(":", 1)
        pairs.append((_parse_scalar(m, key, int), _parse_scalar(n, key, int)))
    if not pairs:
        raise InvalidConfigError(f"config key '{key}': empty list")
    return tuple(pairs)


_FLOAT_KEYS = ("p_UE", "sigma2_BS", "sigma2_UE", "kappa_BS", "kappa_UE", "rho", "zeta")
_INT_KEYS = ("trials", "seed")


def settings_from_mapping(mapping: dict) -> Settings:
    kwargs = {}
    mapping = dict(mapping)
    mapping.pop("M", None)  # accepted for completeness; sweeps set M per point
    mapping.pop("N", None)
    mapping.pop("p_BS", None)  # set from the SNR grid
    for key in _FLOAT_KEYS:
        if key in mapping:
            kwargs[key] = _parse_scalar(mapping.pop(key), key, float)
    for key in _INT_KEYS:
        if key in mapping:
            kwargs[key] = _parse_scalar(mapping.pop(key), key, int)
    if "uplink_noise_variance_source" in mapping:
        kwargs["uplink_noise_variance_source"] = mapping.pop("uplink_noise_variance_source")
    for key in ("cov_direct", "cov_irs_columns"):
        if key in mapping:
            kwargs[key] = CovarianceSpec.parse(mapping.pop(key), key)
    kind = mapping.pop("phase_noise_kind", "uniform")
    width = _parse_scalar(mapping.pop("phase_noise_width", "0"), "phase_noise_width", float)
    if kind != "uniform" or width != 0.0:
        kwargs["phase_noise"] = PhaseNoiseModel(kind, width)
    timing_keys = ("tau_pilot", "tau_up", "tau_down")
    if any(k in mapping for k in timing_keys):
        missing = [k for k in timing_keys if k not in mapping]
        if missing:
            raise InvalidConfigError(
                f"config: protocol timing needs tau_pilot, tau_up and tau_down; "
                f"missing '{missing[0]}'"
            )
        phases = [_parse_scalar(mapping.pop(k), k, float) for k in timing_keys]
        timing = ProtocolTiming.from_phases(*phases)
        if "tau" in mapping:
            tau = _parse_scalar(mapping.pop("tau"), "tau", float)
            if abs(tau - timing.tau) > 1e-9 * max(1.0, tau):
                raise InvalidConfigError(
                    f"config key 'tau': {tau} does not equal tau_pilot + tau_up + "
                    f"tau_down = {timing.tau}"
                )
        kwargs["timing"] = timing
    if "snr_pairs" in mapping:
        kwargs["snr_pairs"] = _parse_pairs(mapping.pop("snr_pairs"), "snr_pairs")
    if "snr_grid_db" in mapping:
        kwargs["snr_grid_db"] = _parse_list(mapping.pop("snr_grid_db"), "snr_grid_db", float)
    for key, cast in (("reflector_m_grid", int), ("reflector_snr_db_grid", float),
                      ("reflector_n_grid", int), ("ee_splits", float), ("ee_m_grid", int)):
        if key in mapping:
            kwargs[key] = _parse_list(mapping.pop(key), key, cast)
    if mapping:
        raise InvalidConfigError(f"unknown config key '{next(iter(mapping))}'")
    try:
        return Settings(**kwargs)
    except InvalidConfigError:
        raise
    except ValueError as exc:
        raise InvalidConfigError(str(exc)) from exc


def load_settings(path=None) -> Settings:
    if path is None:
        return Settings()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidConfigError(f"cannot read config file '{path}': {exc}") from exc
    return settings_from_mapping(parse_config_text(text))


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

def build_parser():
    import argparse

    parser = argparse.ArgumentParser(
        prog="irs-sim",
        description="Monte Carlo sweeps and closed-form capacity/EE bounds for an "
                    "IRS-assisted link with transceiver distortion",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, default_out):
        p.add_argument("--config", help="key=value config file")
        p.add_argument("--trials", type=int, help="Monte Carlo trials per grid point")
        p.add_argument("--seed", type=int, help="root RNG seed")
        p.add_argument("--out", default=default_out, help="output CSV path")
        p.add_argument("--phase-noise", type=float, metavar="DELTA",
                       help="uniform phase-noise half-width in radians")
        p.add_argument("--apply-protocol-prefactor", action="store_true",
                       help="scale SE by the downlink data fraction of the "
                            "coherence period")

    p = sub.add_parser("snr-sweep", help="downlink SE versus SNR")
    add_common(p, "snr_sweep.csv")
    p.set_defaults(handler=_cmd_snr_sweep)

    p = sub.add_parser("reflector-sweep", help="downlink SE versus reflector count")
    add_common(p, "reflector_sweep.csv")
    p.set_defaults(handler=_cmd_reflector_sweep)

    p = sub.add_parser("ee-sweep", help="peak EE versus antenna count (closed form)")
    add_common(p, "ee_sweep.csv")
    p.add_argument("--neglect-tx-power", action="store_true",
                   help="drop transmit-power terms from the EE denominator "
                        "(required for this sweep)")
    p.set_defaults(handler=_cmd_ee_sweep)

    p = sub.add_parser("bounds", help="print the closed-form capacity and EE bounds")
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--kappa-bs", type=float, help="BS impairment coefficient")
    p.add_argument("--kappa-ue", type=float, help="user impairment coefficient")
    p.add_argument("--m", type=int, default=15, help="antenna count for the fixed-M bound")
    p.add_argument("--zeta", type=float, help="static circuit power, J per channel use")
    p.set_defaults(handler=_cmd_bounds)

    return parser


def _settings_for(args) -> Settings:
    settings = load_settings(args.config)
    overrides = {}
    if getattr(args, "trials", None) is not None:
        overrides["trials"] = args.trials
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "phase_noise", None) is not None:
        overrides["phase_noise"] = PhaseNoiseModel(settings.phase_noise.kind,
                                                   args.phase_noise)
    return replace(settings, **overrides) if overrides else settings


def _run_and_write(spec: SweepSpec, runner, out_path) -> int:
    result = runner(spec)
    write_csv(result, out_path)
    print(f"wrote {len(result.rows)} rows to {out_path}")
    return 0


def _cmd_snr_sweep(args) -> int:
    settings = _settings_for(args)
    spec = snr_sweep_spec(settings,
                          apply_protocol_prefactor=args.apply_protocol_prefactor)
    return _run_and_write(spec, run_snr_sweep, args.out)


def _cmd_reflector_sweep(args) -> int:
    settings = _settings_for(args)
    spec = reflector_sweep_spec(settings,
                                apply_protocol_prefactor=args.apply_protocol_prefactor)
    return _run_and_write(spec, run_reflector_sweep, args.out)


def _cmd_ee_sweep(args) -> int:
    settings = _settings_for(args)
    spec = ee_sweep_spec(settings, neglect_tx_power=args.neglect_tx_power)
    return _run_and_write(spec, run_antenna_ee_sweep, args.out)


def _cmd_bounds(args) -> int:
    settings = load_settings(args.config)
    kappa_bs = args.kappa_bs if args.kappa_bs is not None else settings.kappa_BS
    kappa_ue = args.kappa_ue if args.kappa_ue is not None else settings.kappa_UE
    zeta = args.zeta if args.zeta is not None else settings.zeta
    timing = settings.timing if settings.timing is not None \
        else ProtocolTiming.from_phases(0.0, 1.0, 1.0)

    large = large_system_capacity_bounds(kappa_bs, kappa_ue)
    fixed = high_power_capacity_bounds(args.m, kappa_bs, kappa_ue)
    ee = max_ee_bounds(kappa_bs, kappa_ue, timing, zeta)
    ee_fixed = ee_ceiling_fixed_antennas(args.m, kappa_bs, kappa_ue, timing, zeta)

    print(f"kappa_BS = {kappa_bs}  kappa_UE = {kappa_ue}  M = {args.m}")
    print("capacity ceiling bounds (bits/channel use):")
    print(f"  large-system upper          {large.upper:.6f}")
    print(f"  shared lower                {large.lower:.6f}")
    print(f"  fixed-antennas upper (M={args.m})  {fixed.upper:.6f}")
    print(f"peak energy efficiency, zeta = {zeta} J/use (bits/Joule):")
    print(f"  max EE upper                {ee.upper:.3f}")
    print(f"  max EE lower                {ee.lower:.3f}")
    print(f"  EE ceiling at M={args.m}         {ee_fixed:.3f}")
    return 0


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.handler(args)
    except (InvalidConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main())
