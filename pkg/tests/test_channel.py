import math
from dataclasses import replace

import numpy as np
import pytest

from decoykit.channel import (FIBER_DB_PER_KM, Mixture, Stationary, db_to_eta, detector_link, error_k, eta_to_db,
                              expected_tally, preset, random_mixture, sample_tally, yield_k)
from decoykit.model import ProtocolSpec, SystemParams


def test_yield_values():
    ch = Stationary(0.5, 0.1)
    assert yield_k(ch, 0) == pytest.approx(0.1)
    assert yield_k(Stationary(0.3, 0.0), 1) == pytest.approx(0.3)
    assert yield_k(ch, 3) == pytest.approx(0.8875, abs=1e-15)


def test_yield_monte_carlo():
    rng = np.random.default_rng(1)
    eta, y0, k, n = 0.5, 0.1, 3, 400_000
    photons = rng.random((n, k)) < eta
    dark = rng.random(n) < y0
    mc = np.mean(photons.any(axis=1) | dark)
    assert mc == pytest.approx(0.8875, abs=4 * math.sqrt(0.8875 * 0.1125 / n))


def test_error_values():
    assert error_k(Stationary(0.3, 0.04, 0.9), 0) == pytest.approx(0.02)
    assert all(error_k(Stationary(0.3, 0.0, 1.0), k) == 0.0 for k in range(6))
    assert error_k(Stationary(1e-3, 2e-6, 0.98), 1) == pytest.approx(1.1e-5, rel=1e-12)


def test_monotone_and_errors_below_clicks():
    ch = Stationary(0.05, 1e-4, 0.9)
    y = [yield_k(ch, k) for k in range(12)]
    c = [error_k(ch, k) for k in range(12)]
    assert all(a <= b for a, b in zip(y, y[1:]))
    assert all(a <= b for a, b in zip(c, c[1:]))
    assert all(e <= v for e, v in zip(c, y))


def test_mixture_of_identical_components_is_stationary():
    ch = Stationary(0.01, 1e-5, 0.97)
    mix = Mixture((ch, ch, ch), (0.2, 0.3, 0.5))
    for k in range(8):
        assert yield_k(mix, k) == pytest.approx(yield_k(ch, k), rel=1e-15)
        assert error_k(mix, k) == pytest.approx(error_k(ch, k), rel=1e-15)
    p = ProtocolSpec.from_lists((0.0, 0.1, 0.6), (0.1, 0.1, 0.8))
    params = SystemParams(1e-7, 1e9, 1e-5, 0.97, 0.01)
    a, b = expected_tally(p, params, mix), expected_tally(p, params, ch)
    np.testing.assert_allclose(a.n_received, b.n_received, rtol=1e-14)


def test_mixture_validation():
    ch = Stationary(0.1, 0.0)
    with pytest.raises(ValueError):
        Mixture((ch, ch), (0.5, 0.6))
    with pytest.raises(ValueError):
        Mixture((ch,), (0.5, 0.5))
    mix = random_mixture(np.random.default_rng(0), 5)
    assert math.fsum(mix.frequencies) == pytest.approx(1.0, abs=1e-15)


def test_expected_tally_vacuum_and_dead_channel():
    p = ProtocolSpec.from_lists((0.0, 0.1, 0.6), (0.1, 0.1, 0.8))
    params = SystemParams(1e-7, 1e6, 1e-3, 0.98, 0.01)
    t = expected_tally(p, params)
    assert t.n_received[0] == pytest.approx(0.5 * 1e5 * 1e-3)
    assert t.n_errors[0] == pytest.approx(t.n_received[0] / 2)
    dead = expected_tally(p, replace(params, eta=0.0, y0=0.0))
    assert dead.n_received == (0.0, 0.0, 0.0)


def test_expected_tally_matches_photon_sum(worked_protocol, worked_params):
    t = expected_tally(worked_protocol, worked_params)
    ch = Stationary(worked_params.eta, worked_params.y0, worked_params.visibility)
    for j, mu in enumerate(worked_protocol.mus):
        pk = [math.exp(-mu) * mu ** k / math.factorial(k) for k in range(40)]
        c = 0.5 * t.n_sent[j] * math.fsum(p * yield_k(ch, k) for k, p in enumerate(pk))
        e = 0.5 * t.n_sent[j] * math.fsum(p * error_k(ch, k) for k, p in enumerate(pk))
        assert t.n_received[j] == pytest.approx(c, rel=1e-12)
        assert t.n_errors[j] == pytest.approx(e, rel=1e-12)


def test_expected_high_level_monte_carlo(worked_protocol, worked_params):
    # sample photon numbers and clicks pulse by pulse for the high level
    rng = np.random.default_rng(2)
    n, mu, eta, y0 = 10_000_000, 0.655, worked_params.eta, worked_params.y0
    k = rng.poisson(mu, size=n)
    through = rng.binomial(k, eta) > 0
    click = through | (rng.random(n) < y0)
    mc = 0.5 * np.mean(click)
    t = expected_tally(worked_protocol, worked_params)
    expected = t.n_received[2] / t.n_sent[2]
    assert mc == pytest.approx(expected, rel=5e-3)


def test_sample_is_deterministic_and_integer(worked_protocol):
    params = SystemParams(1e-7, 1e7, 1e-4, 0.95, 0.01)
    a = sample_tally(worked_protocol, params, seed=4)
    b = sample_tally(worked_protocol, params, seed=4)
    c = sample_tally(worked_protocol, params, seed=5)
    assert a == b and a != c
    assert all(float(v).is_integer() for v in a.n_sent + a.n_received + a.n_errors)
    assert a.n_total == 1e7


def test_sample_zero_signals(worked_protocol):
    t = sample_tally(worked_protocol, SystemParams(1e-7, 0, 1e-4, 0.95, 0.01))
    assert t.n_sent == t.n_received == t.n_errors == (0.0, 0.0, 0.0)


def test_sample_mean_matches_expectation(worked_protocol):
    params = SystemParams(1e-7, 1e6, 1e-3, 0.95, 0.02)
    exp = expected_tally(worked_protocol, params)
    draws = np.array([sample_tally(worked_protocol, params, seed=s).n_received for s in range(100)])
    sd = draws.std(axis=0, ddof=1)
    mean = draws.mean(axis=0)
    assert np.all(np.abs(mean - np.array(exp.n_received)) <= 3 * sd / 10 + 1e-9)


def test_presets():
    assert (preset("snspd").efficiency, preset("snspd").dark) == (0.02, 1.44e-8)
    assert (preset("TES").efficiency, preset("tes").dark) == (0.5, 4e-6)
    assert (preset("apd").efficiency, preset("apd").dark) == (0.1, 1.5e-5)
    assert all(preset(n).optics_loss_db == 7.0 for n in ("snspd", "tes", "apd"))
    with pytest.raises(KeyError):
        preset("pmt")


def test_loss_conversions():
    assert db_to_eta(30) == pytest.approx(1e-3)
    assert eta_to_db(1e-3) == pytest.approx(30.0)
    eta, y0 = detector_link(preset("tes"), 50.0)
    assert eta == pytest.approx(0.5 * 10 ** (-(7 + FIBER_DB_PER_KM * 50) / 10))
    assert y0 == 4e-6
