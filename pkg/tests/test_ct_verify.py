import math

import numpy as np
import pytest

from mmselab.ct_verify import (
    IllConditioned,
    KalmanSetup,
    McConfig,
    kalman_cmmse,
    kalman_mmse,
    mc_scalar_mmse,
    simulate_path,
)
from mmselab.scalar_channel import ScalarChannel, mmse
from mmselab.sources import builtin_sources, gaussian, gaussian_pair_amplitude, rademacher, unit_amplitude
from mmselab.tone_channel import gaussian_cmmse, gaussian_mmse_tone


def test_setup_validation():
    with pytest.raises(ValueError):
        KalmanSetup(n_tones=1, q=1.0, dt=0.1)  # 2*pi/0.1 not an integer
    with pytest.raises(ValueError):
        KalmanSetup.from_steps(1, 1.0, 64)  # fewer than 100 steps
    with pytest.raises(ValueError):
        KalmanSetup.from_steps(0, 1.0, 256)
    s = KalmanSetup.from_steps(2, 1.0, 512)
    assert s.n_steps == 512
    assert s.frequencies == (1, 2)


def test_mc_config_validation():
    with pytest.raises(ValueError):
        McConfig(sample_count=100)


def test_simulate_path_pure_noise_at_zero_snr():
    setup = KalmanSetup.from_steps(1, 0.0, 4096)
    path = simulate_path(setup, unit_amplitude(), np.random.default_rng(9))
    assert path.increments.shape == (4096,)
    assert np.var(path.increments) == pytest.approx(setup.dt, rel=0.1)
    assert abs(np.mean(path.increments)) < 3 * math.sqrt(setup.dt / 4096)


def test_simulate_path_reproducible():
    setup = KalmanSetup.from_steps(2, 1.5, 1024)
    a = simulate_path(setup, unit_amplitude(), np.random.default_rng(4))
    b = simulate_path(setup, unit_amplitude(), np.random.default_rng(4))
    np.testing.assert_array_equal(a.increments, b.increments)
    np.testing.assert_array_equal(a.signal, b.signal)


def test_simulate_path_drift_matches_drawn_signal():
    setup = KalmanSetup.from_steps(1, 4.0, 8192)
    path = simulate_path(setup, unit_amplitude(), np.random.default_rng(21))
    # unit amplitude, N=1: signal energy is exactly 1 on the horizon
    energy = float(np.sum(path.signal**2) * setup.dt)
    assert energy == pytest.approx(1.0, rel=1e-3)
    residuals = path.increments - math.sqrt(setup.q) * path.signal * setup.dt
    assert abs(residuals.mean()) < 3 * math.sqrt(setup.dt / setup.n_steps)
    assert np.var(residuals) == pytest.approx(setup.dt, rel=0.1)


def test_gaussian_pair_path_statistics():
    setup = KalmanSetup.from_steps(4, 1.0, 512)
    rng = np.random.default_rng(3)
    energies = [
        float(np.sum(simulate_path(setup, gaussian_pair_amplitude(), rng).signal ** 2) * setup.dt)
        for _ in range(400)
    ]
    assert np.mean(energies) == pytest.approx(1.0, abs=0.05)


def test_kalman_zero_snr_returns_energy():
    setup = KalmanSetup.from_steps(2, 0.0, 256)
    assert kalman_cmmse(setup) == pytest.approx(1.0, rel=1e-12)
    assert kalman_mmse(setup) == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("n,q", [(1, 2.0), (2, 2.0), (4, 1.0)])
def test_kalman_matches_closed_forms_after_extrapolation(n, q):
    coarse = KalmanSetup.from_steps(n, q, 4096)
    fine = KalmanSetup.from_steps(n, q, 8192)
    cm = 2 * kalman_cmmse(fine) - kalman_cmmse(coarse)
    mm = 2 * kalman_mmse(fine) - kalman_mmse(coarse)
    assert cm == pytest.approx(gaussian_cmmse(n, q), abs=1e-3)
    assert mm == pytest.approx(gaussian_mmse_tone(n, q), abs=1e-3)


def test_kalman_first_order_in_dt():
    n, q = 1, 2.0
    gaps = []
    for steps in (1024, 2048, 4096):
        setup = KalmanSetup.from_steps(n, q, steps)
        gaps.append(abs(kalman_cmmse(setup) - gaussian_cmmse(n, q)))
    assert gaps[0] / gaps[1] == pytest.approx(2.0, rel=0.1)
    assert gaps[1] / gaps[2] == pytest.approx(2.0, rel=0.1)


def test_kalman_causal_dominates_noncausal():
    for steps in (512, 1024):
        setup = KalmanSetup.from_steps(2, 3.0, steps)
        assert kalman_cmmse(setup) >= kalman_mmse(setup)


def test_covariance_stays_psd():
    # a deliberately coarse, high-snr run still keeps the recursion PSD
    setup = KalmanSetup.from_steps(4, 50.0, 256)
    assert kalman_cmmse(setup) > 0.0


def test_psd_guard_raises():
    from mmselab.ct_verify import _assert_psd

    _assert_psd(np.eye(3))
    _assert_psd(np.diag([1.0, 1e-14, 0.0]))  # tiny negative tolerance band
    with pytest.raises(IllConditioned):
        _assert_psd(np.diag([1.0, -1e-6]))


def test_mc_gaussian_closed_form():
    est = mc_scalar_mmse(gaussian(), 1.0, McConfig(sample_count=10**6, seed=1))
    assert abs(est.value - 0.5) <= 3 * est.std_error
    assert est.std_error < 2e-3


def test_mc_zero_snr():
    est = mc_scalar_mmse(rademacher(), 0.0, McConfig(sample_count=10**5, seed=2))
    assert abs(est.value - 1.0) <= 3 * est.std_error


def test_mc_reproducible():
    cfg = McConfig(sample_count=10**5, seed=77)
    a = mc_scalar_mmse(rademacher(), 0.5, cfg)
    b = mc_scalar_mmse(rademacher(), 0.5, cfg)
    assert a == b


def test_mc_stratified_agrees():
    cfg = McConfig(sample_count=10**5, seed=5, stratified=True)
    est = mc_scalar_mmse(gaussian(), 1.0, cfg)
    assert abs(est.value - 0.5) <= 3 * est.std_error


def test_mc_matches_quadrature_rademacher():
    q = 0.1
    quad_val = mmse(ScalarChannel(rademacher(), q))
    est = mc_scalar_mmse(rademacher(), q, McConfig(sample_count=10**6, seed=31))
    assert abs(est.value - quad_val) <= 3 * est.std_error


def test_mc_consistent_across_builtin_sources():
    for i, src in enumerate(builtin_sources()):
        q = 1.0
        quad_val = mmse(ScalarChannel(src, q))
        est = mc_scalar_mmse(src, q, McConfig(sample_count=2 * 10**5, seed=100 + i))
        assert abs(est.value - quad_val) <= 3 * est.std_error, src.name
