"""Acceptance suite: one test per exit criterion, at the stated tolerance.

Each test prints a single PASS line on success (run with -s or -rA to see
them); a pytest failure line is the FAIL marker. Monte Carlo criteria use
fixed seeds, so the whole suite is deterministic.
"""

import re
import time

import numpy as np
import pytest
import scipy.special

from irssim.beamforming import (
    LinkDirection,
    build_noise_matrices,
    optimal_beamformer,
    quadratic_form,
    rank_one_resolvent,
    snr,
)
from irssim.capacity import (
    ergodic_capacity,
    high_power_capacity_bounds,
    instantaneous_se,
    large_system_capacity_bounds,
    trial_rng,
)
from irssim.energy import PowerModel, max_ee_bounds, max_ee_fixed_antennas
from irssim.harness import (
    Settings,
    cli_main,
    ee_sweep_spec,
    reflector_sweep_spec,
    run_antenna_ee_sweep,
    run_reflector_sweep,
)
from irssim.model import (
    IrsState,
    ProtocolTiming,
    SystemConfig,
    effective_channel,
    generate_channels,
)

KAPPA = 0.05 ** 2
DOWN = LinkDirection.DOWNLINK


def _report(num, text):
    print(f"\nACCEPTANCE {num:02d} PASS: {text}")


def test_c01_closed_form_bound_constants(capsys):
    start = time.monotonic()
    assert cli_main(["bounds", "--kappa-bs", str(KAPPA), "--kappa-ue", str(KAPPA),
                     "--m", "15"]) == 0
    out = capsys.readouterr().out
    large = float(re.search(r"large-system upper\s+([\d.]+)", out).group(1))
    lower = float(re.search(r"shared lower\s+([\d.]+)", out).group(1))
    fixed = float(re.search(r"fixed-antennas upper \(M=15\)\s+([\d.]+)", out).group(1))
    assert large == pytest.approx(8.6475, abs=1e-4)
    assert lower == pytest.approx(7.6493, abs=1e-4)
    assert fixed == pytest.approx(8.5544, abs=1e-4)
    elapsed = time.monotonic() - start
    assert elapsed < 1.0
    with capsys.disabled():
        _report(1, f"bounds CLI reports 8.6475 / 7.6493 / 8.5544 within 1e-4 "
                   f"({elapsed:.2f} s)")


def test_c02_rank_one_identity_suite():
    start = time.monotonic()
    rng = np.random.default_rng(202)
    worst = 0.0
    for _ in range(1000):
        m = int(rng.integers(2, 9))
        A = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
        B = A @ A.conj().T + 0.1 * np.eye(m)
        q = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        tau = complex(rng.uniform(0.0, 2.0), rng.uniform(-1.0, 1.0))
        got = rank_one_resolvent(B, tau, q)
        direct = q.conj() @ np.linalg.inv(B + tau * np.outer(q, q.conj()))
        worst = max(worst, np.linalg.norm(got - direct) / np.linalg.norm(direct))
    assert worst <= 1e-10
    elapsed = time.monotonic() - start
    assert elapsed < 5.0
    _report(2, f"1000 rank-one resolvent instances vs direct inversion, worst "
               f"relative error {worst:.2e} ({elapsed:.1f} s)")


def test_c03_capacity_form_equivalence():
    start = time.monotonic()
    rng = np.random.default_rng(303)
    worst = 0.0
    for _ in range(1000):
        m = int(rng.integers(1, 9))
        cfg = SystemConfig.iid(
            m, 0,
            kappa_BS=float(10 ** rng.uniform(-4, np.log10(0.05))),
            kappa_UE=float(10 ** rng.uniform(-4, np.log10(0.05))),
            p_BS=float(10 ** rng.uniform(-2, 6)))
        h = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        a = instantaneous_se(h, cfg, DOWN, use_reduced=True)
        b = instantaneous_se(h, cfg, DOWN, use_reduced=False)
        worst = max(worst, abs(a - b) / max(a, b))
    assert worst <= 1e-10
    elapsed = time.monotonic() - start
    assert elapsed < 5.0
    _report(3, f"1000 realizations, reduced vs full SE path, worst relative "
               f"difference {worst:.2e} ({elapsed:.1f} s)")


def test_c04_beamformer_optimality():
    start = time.monotonic()
    rng = np.random.default_rng(404)
    worst_margin = np.inf
    for i in range(100):
        m = (2, 4, 8)[i % 3]
        h = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        cfg = SystemConfig.iid(m, 0,
                               kappa_BS=float(rng.uniform(0.001, 0.1)),
                               kappa_UE=float(rng.uniform(0.001, 0.1)),
                               p_BS=float(10 ** rng.uniform(-1, 2)))
        mat = build_noise_matrices(h, cfg, DOWN)
        closed = snr(optimal_beamformer(h, mat), h, mat)
        W = rng.standard_normal((10_000, m)) + 1j * rng.standard_normal((10_000, m))
        W /= np.linalg.norm(W, axis=1)[:, None]
        num = np.abs(W @ h.conj()) ** 2
        den = np.einsum("ki,ij,kj->k", W.conj(), mat.full, W).real
        worst_margin = min(worst_margin, closed - float((num / den).max()))
    assert worst_margin >= -1e-9
    elapsed = time.monotonic() - start
    assert elapsed < 60.0
    _report(4, f"closed-form SNR beats 10^4 random unit vectors in 100 instances, "
               f"worst margin {worst_margin:+.2e} ({elapsed:.1f} s)")


def test_c05_high_power_saturation():
    start = time.monotonic()
    irs = IrsState.identity(150)
    bounds = high_power_capacity_bounds(15, KAPPA, KAPPA)

    def run(p_bs):
        cfg = SystemConfig.iid(15, 150, kappa_BS=KAPPA, kappa_UE=KAPPA, p_BS=p_bs)
        return ergodic_capacity(cfg, irs, DOWN, trials=2000, seed=505)

    at60 = run(1e6)   # SNR 60 dB with sigma2_UE = 1
    at80 = run(1e8)
    assert bounds.lower - 3 * at60.std_error <= at60.mean
    assert at60.mean <= bounds.upper + 3 * at60.std_error
    assert abs(at60.mean - at80.mean) < 0.02
    elapsed = time.monotonic() - start
    assert elapsed < 300.0
    _report(5, f"SE(60 dB) = {at60.mean:.4f} in [{bounds.lower:.4f}, {bounds.upper:.4f}] "
               f"+/- 3 s.e., |SE(60) - SE(80)| = {abs(at60.mean - at80.mean):.2e} "
               f"({elapsed:.1f} s)")


def test_c06_quadratic_form_limit_monte_carlo():
    start = time.monotonic()
    cfg = SystemConfig.iid(4, 16, kappa_BS=KAPPA, kappa_UE=KAPPA, p_BS=1e8)
    irs = IrsState.identity(16)
    total = 0.0
    trials = 10_000
    for t in range(trials):
        rng = trial_rng(606, t)
        h = effective_channel(generate_channels(cfg, rng), irs)
        total += quadratic_form(h, build_noise_matrices(h, cfg, DOWN), use_reduced=True)
    mean = total / trials
    expected = 4.0 / ((1.0 + KAPPA) * KAPPA)
    assert abs(mean - expected) <= 0.02 * expected
    elapsed = time.monotonic() - start
    assert elapsed < 120.0
    _report(6, f"mean reduced quadratic form {mean:.1f} within 2% of "
               f"{expected:.1f} ({elapsed:.1f} s)")


def test_c07_reflector_monotonicity():
    start = time.monotonic()
    settings = Settings(kappa_BS=KAPPA, kappa_UE=KAPPA, trials=4000, seed=707,
                        reflector_m_grid=(1,), reflector_snr_db_grid=(10.0,),
                        reflector_n_grid=(20, 70, 150))
    rows = run_reflector_sweep(reflector_sweep_spec(settings)).rows
    means = [r.value for r in rows]
    errs = [r.std_err for r in rows]
    for i in range(2):
        gap = means[i + 1] - means[i]
        assert gap > 3.0 * np.hypot(errs[i], errs[i + 1])
    elapsed = time.monotonic() - start
    assert elapsed < 300.0
    _report(7, f"SE strictly increases over N in {{20, 70, 150}}: "
               f"{means[0]:.3f} < {means[1]:.3f} < {means[2]:.3f} beyond 3 "
               f"combined s.e. ({elapsed:.1f} s)")


def test_c08_ee_curve_structure():
    start = time.monotonic()
    settings = Settings(kappa_BS=KAPPA, kappa_UE=KAPPA,
                        ee_splits=(0.0, 0.01, 0.02), ee_m_grid=tuple(range(1, 501)))
    rows = run_antenna_ee_sweep(ee_sweep_spec(settings, neglect_tx_power=True)).rows
    curves = {}
    for row in rows:
        curves.setdefault(row.params[0], []).append(row.value)

    flat = curves[0.0]
    assert all(b >= a for a, b in zip(flat, flat[1:]))
    timing = ProtocolTiming.from_phases(0.0, 1.0, 1.0)
    upper = max_ee_bounds(KAPPA, KAPPA, timing, settings.zeta).upper
    at_huge = max_ee_fixed_antennas(10 ** 6, KAPPA, KAPPA, timing,
                                    PowerModel(0.0, settings.zeta))
    assert abs(at_huge - upper) <= 1e-6 * upper

    peaks = {}
    for split in (0.01, 0.02):
        values = curves[split]
        peak = int(np.argmax(values)) + 1
        peaks[split] = peak
        assert 1 < peak < 500
    elapsed = time.monotonic() - start
    assert elapsed < 10.0
    _report(8, f"rho=0 EE curve nondecreasing with sup -> {upper:.4e}; interior "
               f"peaks M*={peaks[0.01]} (split 0.01), M*={peaks[0.02]} (split 0.02) "
               f"({elapsed:.1f} s)")


def test_c09_ideal_hardware_rayleigh_oracle():
    start = time.monotonic()
    cfg = SystemConfig.iid(1, 0)  # kappas 0, p over sigma2 = 1
    est = ergodic_capacity(cfg, IrsState.identity(0), DOWN, trials=100_000, seed=909)
    oracle = float(np.log2(np.e) * np.e * scipy.special.exp1(1.0))
    assert abs(est.mean - oracle) <= 3 * est.std_error
    elapsed = time.monotonic() - start
    assert elapsed < 120.0
    _report(9, f"ideal-hardware ergodic SE {est.mean:.4f} vs exponential-integral "
               f"oracle {oracle:.4f} within 3 s.e. = {3 * est.std_error:.4f} "
               f"({elapsed:.1f} s)")


def test_c10_phase_shift_irrelevance():
    start = time.monotonic()
    cfg = SystemConfig.iid(4, 32, kappa_BS=KAPPA, kappa_UE=KAPPA, p_BS=100.0)
    zero = ergodic_capacity(cfg, IrsState.identity(32), DOWN, trials=4000, seed=1012)
    theta = np.random.default_rng(55).uniform(0.0, 2.0 * np.pi, 32)
    shifted = ergodic_capacity(cfg, IrsState(theta), DOWN, trials=4000, seed=1013)
    combined = float(np.hypot(zero.std_error, shifted.std_error))
    assert abs(zero.mean - shifted.mean) <= 3 * combined
    elapsed = time.monotonic() - start
    assert elapsed < 300.0
    _report(10, f"theta = 0 vs random theta: |{zero.mean:.4f} - {shifted.mean:.4f}| "
                f"<= 3 combined s.e. = {3 * combined:.4f} ({elapsed:.1f} s)")
