import math

import numpy as np
import pytest

import rissim


def test_zadoff_chu_unit_modulus_and_autocorrelation():
    z = rissim.zadoff_chu(32, 3)
    assert np.allclose(np.abs(z), 1.0)
    for lag in range(1, 32):
        assert abs(np.vdot(z, np.roll(z, lag))) < 1e-9


def test_dft_is_unitary():
    f = rissim.dft_matrix(12)
    assert np.allclose(f.conj().T @ f, np.eye(12))


def test_channel_and_pilot_shapes():
    cfg = rissim.SystemConfig()
    cfg.M = 4
    taps = rissim.generate_channels(cfg, 7)
    assert taps.shape == (3, 4, 9, 32)
    pilots = rissim.build_pilots("proposed", cfg)
    assert pilots.shape == (3, 9, 96)
    assert rissim.build_pilots("tdma", cfg).shape == (3, 9, 192)


def test_noiseless_training_is_exact():
    cfg = rissim.SystemConfig()
    cfg.M = 2
    cfg.noise_var = 0.0
    eps = [0.2, -0.3, 0.45]
    out = rissim.train("proposed", cfg, eps, 11)
    assert np.allclose(out["cfo_hat"], eps, atol=1e-10)
    assert np.allclose(out["taps_hat"], out["taps"], atol=1e-9 * np.abs(out["taps"]).max())


def test_pgm_reaches_grid_optimum():
    rng = np.random.default_rng(3)
    h = (rng.standard_normal((2, 2, 3, 8)) + 1j * rng.standard_normal((2, 2, 3, 8))) / math.sqrt(2)
    phi, trace = rissim.pgm_optimize(h, 1.0, 1.0, 2)
    assert np.all(np.diff(trace) >= 0)
    grid = rissim.grid_search(h, 1.0, 1.0, 2, 64)
    f_pgm = rissim.achievable_rate(h, phi, 1.0, 1.0, 2)[0]
    f_grid = rissim.achievable_rate(h, grid, 1.0, 1.0, 2)[0]
    assert f_pgm >= f_grid - 1e-3


def test_gradient_matches_finite_difference():
    rng = np.random.default_rng(5)
    h = rng.standard_normal((2, 2, 4, 4)) + 1j * rng.standard_normal((2, 2, 4, 4))
    phi = rissim.project_unit_modulus(np.exp(1j * rng.uniform(0, 2 * np.pi, 4)))
    g = rissim.rate_gradient(h, phi, 1.0, 1.0, 2)
    step = 1e-6
    for r in range(1, 4):
        d = np.zeros(4, complex)
        d[r] = step
        dx = (rissim.achievable_rate(h, phi + d, 1.0, 1.0, 2)[1] - rissim.achievable_rate(h, phi - d, 1.0, 1.0, 2)[1]) / (2 * step)
        dy = (rissim.achievable_rate(h, phi + 1j * d, 1.0, 1.0, 2)[1] - rissim.achievable_rate(h, phi - 1j * d, 1.0, 1.0, 2)[1]) / (2 * step)
        assert g[r - 1] == pytest.approx(0.5 * (dx + 1j * dy), rel=1e-6)


def test_run_experiment_records():
    rows = rissim.run_experiment("nmse-cfo", '{"M": 2, "R": 2, "sweep": "snr_db", "sweep_values": [10]}', ["trials=3"])
    assert {r["scheme"] for r in rows} == {"proposed", "tdma", "ofdma+preamble"}
    for r in rows:
        assert r["trials"] == 3
        assert r["metric_name"] == "eta_eps"


def test_config_errors_surface_as_value_error():
    with pytest.raises(ValueError, match="unknown configuration key"):
        rissim.run_experiment("rate", '{"bogus": 1}')
    with pytest.raises(ValueError):
        rissim.build_pilots("cdma", rissim.SystemConfig())


def test_format_double_round_trips():
    assert rissim.format_double(0.1) == "0.1"
    assert float(rissim.format_double(1 / 3)) == 1 / 3
