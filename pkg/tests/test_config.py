import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riscellfree.config import (
    ConfigError,
    Rectangle,
    config_from_dict,
    generate_geometry,
    load_config,
    noise_power_mw,
    substream,
    wrap_distance,
)


def test_desk_config_loads(desk_cfg):
    assert desk_cfg.M == 20 and desk_cfg.K == 4 and desk_cfg.N == 16
    assert desk_cfg.tau_p < desk_cfg.tau_c
    # p = pilot power / thermal noise power of 20 MHz at 9 dB noise figure
    expected = 100.0 / 10.0 ** ((-174.0 + 10.0 * math.log10(20e6) + 9.0) / 10.0)
    assert desk_cfg.p == pytest.approx(expected, rel=1e-12)
    assert desk_cfg.rho == pytest.approx(expected / 100.0, rel=1e-12)


def test_tau_p_boundary_rejected(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"tau_p": 200, "tau_c": 200}))
    with pytest.raises(ConfigError, match="tau_p < tau_c"):
        load_config(path)


def test_parse_failure(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError, match="parse"):
        load_config(path)


def test_eta_defaults_to_ones():
    cfg = config_from_dict({"K": 5})
    assert cfg.eta == (1.0,) * 5
    cfg = config_from_dict({"K": 3, "eta": 0.5})
    assert cfg.eta == (0.5, 0.5, 0.5)


def test_eta_out_of_range_rejected():
    with pytest.raises(ConfigError, match="eta"):
        config_from_dict({"K": 2, "eta": [0.5, 1.5]})


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="unknown"):
        config_from_dict({"M": 4, "tau_q": 2})


def test_wavelength_defaults_to_carrier():
    cfg = config_from_dict({})
    assert cfg.wavelength == pytest.approx(299_792_458.0 / 1.9e9)
    assert cfg.d_h == pytest.approx(cfg.wavelength / 4.0)


def test_noise_power_reference_value():
    # -174 dBm/Hz + 73.01 dB + 9 dB = -91.99 dBm
    assert 10 * math.log10(noise_power_mw(20.0, 9.0)) == pytest.approx(-91.9897, abs=1e-3)


def test_wrap_distance_examples():
    assert wrap_distance([-0.49, 0.0], [0.49, 0.0], 1.0) == pytest.approx(0.02)
    assert wrap_distance([0.3, -0.2], [0.3, -0.2], 1.0) == 0.0
    assert wrap_distance([0.0, 0.0], [0.3, 0.4], 1.0) == pytest.approx(0.5)


@settings(deadline=None, max_examples=200)
@given(
    ax=st.floats(-0.75, 0.75), ay=st.floats(-0.75, 0.75),
    bx=st.floats(-0.75, 0.75), by=st.floats(-0.75, 0.75),
)
def test_wrap_distance_properties(ax, ay, bx, by):
    side = 1.5
    d_ab = wrap_distance([ax, ay], [bx, by], side)
    d_ba = wrap_distance([bx, by], [ax, ay], side)
    assert d_ab == pytest.approx(d_ba, abs=1e-12)
    assert 0.0 <= d_ab <= side / math.sqrt(2.0) + 1e-12
    if d_ab == 0.0:
        for u, v in ((ax, bx), (ay, by)):
            delta = abs(u - v)
            assert min(delta, side - delta) == pytest.approx(0.0, abs=1e-12)


def test_generate_geometry_regions_and_determinism(desk_cfg):
    region_aps = Rectangle(-0.75, -0.5, -0.75, -0.5)
    region_users = Rectangle(0.375, 0.75, 0.375, 0.75)
    cfg = config_from_dict({"M": 30, "K": 8})
    g1 = generate_geometry(cfg, region_aps, region_users, substream(7, "geometry"))
    g2 = generate_geometry(cfg, region_aps, region_users, substream(7, "geometry"))
    assert np.array_equal(g1.ap_positions, g2.ap_positions)
    assert np.array_equal(g1.user_positions, g2.user_positions)
    assert np.all((g1.ap_positions >= [-0.75, -0.75]) & (g1.ap_positions <= [-0.5, -0.5]))
    assert np.all((g1.user_positions >= 0.375) & (g1.user_positions <= 0.75))
    assert np.array_equal(g1.ris_position, [0.0, 0.0])


def test_geometry_region_outside_square():
    cfg = config_from_dict(
        {
            "area_side_km": 1.0,
            "ap_region_km": [[-0.4, -0.2], [-0.4, -0.2]],
            "user_region_km": [[0.2, 0.4], [0.2, 0.4]],
        }
    )
    with pytest.raises(ConfigError, match="outside"):
        generate_geometry(cfg, Rectangle(-0.75, -0.5, -0.75, -0.5), cfg.user_region, substream(1, "g"))


def test_empty_region_rejected():
    with pytest.raises(ConfigError, match="empty region"):
        Rectangle(0.2, 0.2, 0.0, 0.1)


def test_substreams_are_keyed():
    a0 = substream(99, "alpha", 0).random(4)
    a0_again = substream(99, "alpha", 0).random(4)
    a1 = substream(99, "alpha", 1).random(4)
    b0 = substream(99, "beta", 0).random(4)
    assert np.array_equal(a0, a0_again)
    assert not np.array_equal(a0, a1)
    assert not np.array_equal(a0, b0)
