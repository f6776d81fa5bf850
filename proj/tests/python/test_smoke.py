"""Smoke tests for the python bindings: reference-configuration values and
end-to-end sanity of the main operations."""

import json
import math

import pytest

import poissonloc as pl


def reference_array():
    a = 5.0 * math.pi / 4.0
    sensors = [(8.5, 0.0), (0.0, 8.5), (8.5 * math.cos(a), 8.5 * math.sin(a))]
    return pl.SensorArray(sensors=sensors, nu=1.0, epsilon=0.1,
                          theta_box=[-1.0, 1.0, -1.0, 1.0], horizon=10.0)


def reference_model(n=1.0):
    return pl.SignalModel(lambda0=1.0, lambda1=2.0, scale_n=n)


def test_delay_and_directions():
    array = reference_array()
    origin = pl.PlanePoint(0.0, 0.0)
    assert pl.delay(array, 0, origin) == pytest.approx(8.5)
    frame = pl.direction_frame(array, origin)
    assert frame.m[0] == pytest.approx((1.0, 0.0))
    assert frame.m[1] == pytest.approx((0.0, 1.0))
    s = math.sqrt(2.0) / 2.0
    assert frame.m[2] == pytest.approx((-s, -s))
    assert frame.tau == pytest.approx([8.5, 8.5, 8.5])


def test_validation_report():
    report = pl.validate_identifiability(reference_array(), reference_model())
    assert report["all_passed"]
    assert report["i3_sensors_not_aligned"]


def test_simulation_determinism_and_counting():
    array, model = reference_array(), reference_model(2.0)
    origin = pl.PlanePoint(0.0, 0.0)
    a = pl.sample_events(model, array, origin, seed=42)
    b = pl.sample_events(model, array, origin, seed=42)
    assert [r.times for r in a] == [r.times for r in b]
    c = pl.sample_events(model, array, origin, seed=43)
    assert [r.times for r in a] != [r.times for r in c]
    rec = pl.EventRecord(sensor=0, times=[3.0, 5.0], horizon=10.0)
    assert pl.counting_value(rec, 4.0) == 1
    assert pl.counting_value(rec, 5.0) == 2


def test_log_likelihood_values():
    array, model = reference_array(), reference_model()
    empty = [pl.EventRecord(sensor=j, times=[], horizon=10.0) for j in range(3)]
    v = pl.log_lr(model, array, pl.PlanePoint(0.0, 0.0), empty)
    assert v.left == pytest.approx(-9.0)
    assert v.right == pytest.approx(-9.0)
    w = pl.log_lr_constant(model, array, pl.PlanePoint(0.0, 0.0), empty)
    assert w.right == pytest.approx(v.right, abs=1e-12)


def test_estimators_recover_the_source():
    array, model = reference_array(), reference_model(50.0)
    origin = pl.PlanePoint(0.0, 0.0)
    records = pl.sample_events(model, array, origin, seed=7)
    be = pl.bayes_estimate(model, array, records)
    assert math.hypot(*be.estimate) < 0.2
    mle = pl.mle_estimate(model, array, records)
    assert math.hypot(*mle.estimate) < 0.2
    taus = [pl.estimate_arrival(model, rec) for rec in records]
    tri = pl.trilaterate(array, taus)
    assert math.hypot(*tri.estimate) < 0.5
    assert tri.diagnostics.condition_number < 100.0


def test_limit_process_sampling():
    limit = pl.limit_model_for(reference_model(), reference_array(), pl.PlanePoint(0.0, 0.0))
    assert limit.ell == pytest.approx(math.log(3.0))
    lnz = pl.sample_ln_z(limit, [(0.0, 0.0), (1.0, -0.5)], seed=5)
    assert lnz[0] == 0.0
    z1 = pl.sample_zeta(limit, seed=11)
    z2 = pl.sample_zeta(limit, seed=11)
    assert z1.zeta == z2.zeta
    assert z1.tail_fraction < 1e-4


def test_hellinger_and_expected_half_lr():
    array, model = reference_array(), reference_model()
    origin = pl.PlanePoint(0.0, 0.0)
    assert pl.hellinger(model, array, origin, origin) == 0.0
    assert pl.expected_half_lr(model, array, origin, pl.PlanePoint(0.0, 0.0)) == 1.0
    v = pl.expected_half_lr(model, array, origin, pl.PlanePoint(0.5, 0.0))
    assert 0.0 < v < 1.0


def test_default_config_and_errors():
    config = json.loads(pl.default_config_json())
    assert config["signal"]["lambda0"] == 1.0
    assert config["n_sweep"] == [1, 2, 5, 10, 20, 50, 100]
    with pytest.raises(pl.PoissonlocError):
        pl.delay(reference_array(), 9, pl.PlanePoint(0.0, 0.0))
    with pytest.raises(pl.PoissonlocError):
        pl.direction_frame(reference_array(), pl.PlanePoint(0.0, 8.45))
