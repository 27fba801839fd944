import numpy as np
import pytest

from decoykit.bounds import min_single_photon
from decoykit.channel import db_to_eta, expected_tally
from decoykit.distinguish import (analyze_distinguishable, b1_via_dark_subtraction, four_laser_matrix,
                                  min_single_photon_distinguishable, q_four_laser, q_matrix)
from decoykit.model import IntensityLevel, ProtocolSpec, SpsBounds
from decoykit.optimize import analyze
from decoykit.stats import bound_upper, observation_bounds


@pytest.fixture
def setting(worked_protocol, worked_params):
    tally = expected_tally(worked_protocol, worked_params)
    return worked_protocol, worked_params, tally, observation_bounds(tally, worked_params.epsilon)


def test_q_four_laser_values():
    assert [q_four_laser(k) for k in range(6)] == [1.0, 1.0, 0.75, 1.0 / 2, 1.0 / 4, 1.0 / 8]
    with pytest.raises(ValueError):
        q_four_laser(-1)


def test_four_laser_matrix_targets_weak_decoy(worked_protocol):
    Q = four_laser_matrix(worked_protocol, 9)
    assert np.all(Q[0] == 1) and np.all(Q[2] == 1)
    assert Q[1, 2] == 0.75


def test_q_matrix_from_levels_and_validation(worked_protocol):
    lv = worked_protocol.levels
    p = ProtocolSpec((lv[0], IntensityLevel(lv[1].mu, lv[1].probability, False, (1.0, 1.0, 0.5)), lv[2]))
    Q = q_matrix(p, 5)
    assert Q[1].tolist() == [1.0, 1.0, 0.5, 0.5, 0.5]
    with pytest.raises(ValueError):
        q_matrix(p, 5, np.ones((2, 5)))
    with pytest.raises(ValueError):
        q_matrix(p, 5, np.full((3, 5), 1.5))


def test_sandwich(setting):
    proto, params, tally, obs = setting
    k = params.k_max
    zeros = np.zeros((3, k))
    zeros[2] = 1.0  # the key level always shares the common yields
    ps0, _ = min_single_photon_distinguishable(proto, obs, zeros, k)
    ps4, _ = min_single_photon_distinguishable(proto, obs, four_laser_matrix(proto, k), k)
    ps1, _ = min_single_photon_distinguishable(proto, obs, np.ones((3, k)), k)
    assert ps0[2] < ps4[2] < ps1[2]
    assert ps1 == pytest.approx(min_single_photon(proto, obs, k), rel=1e-12)


def test_raising_q_never_lowers_bound(setting):
    proto, params, tally, obs = setting
    k = params.k_max
    rng = np.random.default_rng(0)
    Q = np.ones((3, k))
    Q[:2] = rng.uniform(0.2, 1.0, size=(2, k))
    lower = min_single_photon_distinguishable(proto, obs, Q, k)[0]
    Q2 = Q.copy()
    Q2[1, 2:5] = np.minimum(1.0, Q2[1, 2:5] + 0.2)
    higher = min_single_photon_distinguishable(proto, obs, Q2, k)[0]
    assert higher[2] >= lower[2] * (1 - 1e-12)


def test_fully_distinguishable_levels_act_like_no_decoys(setting):
    proto, params, tally, obs = setting
    Q = np.zeros((3, params.k_max))
    Q[2] = 1.0
    ps, _ = min_single_photon_distinguishable(proto, obs, Q, params.k_max)
    assert ps[2] == 0.0


def test_dark_subtraction_without_darks_is_worst_case(setting):
    proto, params, tally, obs = setting
    sps = SpsBounds((0.0, 0.0, 1e-4), (0.0, 0.0, 0.0), 1.0)
    b1 = b1_via_dark_subtraction(tally, sps, params, proto)
    n = tally.n_sent[2]
    assert b1 == pytest.approx(min(1.0, n * bound_upper(tally.n_errors[2], n, params.epsilon) / (n * 1e-4)))
    assert b1_via_dark_subtraction(tally, SpsBounds((0.0,) * 3, (0.0,) * 3, 1.0), params, proto) == 1.0


def test_dark_subtraction_ordering_at_30db(worked_protocol, worked_params):
    from dataclasses import replace
    params = replace(worked_params, eta=db_to_eta(30))
    tally = expected_tally(worked_protocol, params)
    std = analyze(worked_protocol, params, tally)
    four = analyze_distinguishable(worked_protocol, params, tally, four_laser_matrix(worked_protocol, 9))
    n = tally.n_sent[2]
    worst = n * bound_upper(tally.n_errors[2], n, params.epsilon) / (n * four.sps.p_s[2])
    assert std.sps.b1_max < four.sps.b1_max < worst


def test_rate_not_above_indistinguishable(setting):
    proto, params, tally, obs = setting
    std = analyze(proto, params, tally)
    four = analyze_distinguishable(proto, params, tally, four_laser_matrix(proto, params.k_max))
    assert four.report.rate <= std.report.rate
    assert four.sps.diagnostics["b1_method"] == "dark-subtraction"
