import math
import warnings

import pytest

from decoykit.model import ProtocolSpec, SessionTally, SpsBounds, SystemParams
from decoykit.optimize import evaluate
from decoykit.rate import f_pa, key_length, pa_cost
from decoykit.stats import h2


def direct_f_pa(b, s):
    return 1.0 + 1.53 * b ** -0.54 * s ** -0.44


@pytest.mark.parametrize("b, s, expected", [(0.05, 1e6, 1.01767), (0.01, 1e3, 1.88043)])
def test_f_pa_values(b, s, expected):
    assert f_pa(b, s) == pytest.approx(direct_f_pa(b, s), rel=1e-15)
    assert f_pa(b, s) == pytest.approx(expected, abs=1e-5)


def test_f_pa_domain():
    assert f_pa(0.0, 10.0) == math.inf
    with pytest.raises(ValueError):
        f_pa(0.1, 0.0)
    with pytest.raises(ValueError):
        f_pa(1.5, 10.0)
    assert pa_cost(100.0, 0.0, 100.0) == 0.0
    assert pa_cost(0.0, 0.1, 100.0) == 0.0


def test_pa_cost_vanishes_continuously():
    costs = [pa_cost(1e6, b, 1e6) for b in (1e-2, 1e-4, 1e-6, 1e-8)]
    assert all(a > b for a, b in zip(costs, costs[1:]))
    assert costs[-1] < 1e-2 * costs[0]


PROTO = ProtocolSpec.from_lists((0.0, 0.1, 0.6), (0.1, 0.1, 0.8))
PARAMS = SystemParams(1e-7, 1000.0, 1e-6, 0.98, 1e-3)
TALLY = SessionTally((100.0, 100.0, 800.0), (0.0, 5.0, 200.0), (0.0, 1.0, 4.0))


def report(p_s=0.2, p_d=0.01, b1=0.05, tally=TALLY, params=PARAMS):
    sps = SpsBounds((0.0, 0.0, p_s), (0.0, 0.0, p_d), b1)
    return key_length(tally, sps, params, PROTO)


def test_key_length_formula_by_hand():
    rep = report()
    s, d = 800 * 0.2, 800 * 0.01
    ec = 1.2 * 200 * h2(4 / 200)
    pa = direct_f_pa(0.05, s) * s * h2(0.05)
    assert rep.key_length == pytest.approx(s + d - ec - pa, rel=1e-14)
    assert rep.rate * PARAMS.n_total == rep.key_length
    assert rep.key_levels == (2,)
    assert rep.ber == (4 / 200,)
    assert not rep.clamped


def test_zero_bounds_give_no_key():
    rep = report(p_s=0.0, p_d=0.0)
    assert rep.key_length == 0.0 and rep.clamped
    assert rep.raw_key_length < 0


def test_monotone_in_inputs():
    base = report().key_length
    assert report(b1=0.1).key_length < base
    assert report(p_s=0.25).key_length > base
    assert report(p_d=0.02).key_length > base
    more_errors = SessionTally(TALLY.n_sent, TALLY.n_received, (0.0, 1.0, 6.0))
    assert report(tally=more_errors).key_length < base


def test_doubling_f_ec_lowers_key(worked_protocol, worked_params):
    from dataclasses import replace
    a = evaluate(worked_protocol, worked_params).report.key_length
    b = evaluate(worked_protocol, replace(worked_params, f_ec=2.4)).report.key_length
    assert b < a


def test_key_level_without_detections_is_skipped():
    tally = SessionTally((100.0, 100.0, 800.0), (0.0, 5.0, 0.0), (0.0, 1.0, 0.0))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        rep = report(tally=tally)
    assert any("no detections" in str(w.message) for w in caught)
    assert rep.key_length == 0.0
    assert math.isnan(rep.ber[0])
    assert rep.warnings


def test_only_key_levels_are_summed():
    two_keys = ProtocolSpec.from_lists((0.0, 0.1, 0.6), (0.1, 0.1, 0.8), key_levels=(1, 2))
    sps = SpsBounds((0.0, 0.05, 0.2), (0.0, 0.0, 0.01), 0.05)
    rep = key_length(TALLY, sps, PARAMS, two_keys)
    assert rep.key_levels == (1, 2)
    assert len(rep.s) == 2


def test_worked_example_value(worked_protocol, worked_params):
    rep = evaluate(worked_protocol, worked_params).report
    assert rep.key_length == pytest.approx(862709.2, rel=1e-6)
    assert abs(rep.rate / 9.99621e-5 - 1) < 0.2
