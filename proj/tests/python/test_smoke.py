import json
import math

import pytest

import cimpcc


def test_circle_curvature_and_constant_normalization():
    profile = cimpcc.curvature_profile(cimpcc.circle(2.0, 200))
    assert all(abs(k - 0.5) < 0.005 for k in profile.raw)
    assert all(v == 0.0 for v in profile.normalized)


def test_desk_track_profile():
    cl = cimpcc.stadium_chicane()
    assert len(cl) == 454
    assert cl.total_length == pytest.approx(45.415, abs=1e-3)
    profile = cimpcc.curvature_profile(cl)
    assert min(profile.normalized) == 0.0
    assert max(profile.normalized) == 1.0


def test_parse_centerline_round_trip():
    cl = cimpcc.circle(1.0, 50)
    again = cimpcc.parse_centerline(cl.to_csv())
    assert len(again) == 50
    assert again.total_length == pytest.approx(cl.total_length, rel=1e-12)
    with pytest.raises(cimpcc.ParseError):
        cimpcc.parse_centerline("x_m,y_m,w_tr_right_m,w_tr_left_m\n1,2,oops,0.5\n")


def test_mapping():
    assert cimpcc.map_nsc_to_beta(0.0) == 1.0
    assert cimpcc.map_nsc_to_beta(1.0, alpha=3.0) == pytest.approx(math.exp(-3.0), abs=1e-15)
    with pytest.raises(cimpcc.DomainError):
        cimpcc.map_nsc_to_beta(1.5)


def test_rk4_straight_line():
    x = cimpcc.rk4_step([0.0, 0.0, 0.0, 0.0], [2.0, 0.0, 1.5], 0.05)
    assert x == pytest.approx([0.1, 0.0, 0.0, 0.075], abs=1e-15)


def test_config_defaults_and_errors():
    cfg = cimpcc.parse_run_config()
    assert cfg.mode == "compare"
    assert cfg.n_laps == 5
    echoed = json.loads(cfg.to_json())
    assert echoed["weights"]["q_con"] == 800.0
    with pytest.raises(cimpcc.ConfigurationError):
        cimpcc.parse_run_config('{"unknown": 1}')
    with pytest.raises(cimpcc.ParseError, match="line"):
        cimpcc.parse_run_config('{\n "n_laps": \n}')


def test_short_race_and_compare():
    cfg = cimpcc.parse_run_config('{"n_laps": 1}')
    track = cimpcc.load_track(cfg)
    result = cimpcc.run_race(track, "cimpcc", cfg)
    assert not result.aborted
    assert len(result.stats.lap_times) == 1
    assert result.stats.mean_velocity > 2.0
    assert result.telemetry_csv().startswith("t_s,x_m,y_m")
    assert json.loads(result.stats_json())["mode"] == "cimpcc"

    report = json.loads(cimpcc.compare(track, cfg))
    assert report["lap_time_change_percent"] > 5.0
    with pytest.raises(cimpcc.ConfigurationError):
        cimpcc.run_race(track, "fast", cfg)
