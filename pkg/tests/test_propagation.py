import numpy as np
import pytest

from riscellfree.config import config_from_dict, geometry_for, substream
from riscellfree.propagation import (
    PathLossParams,
    assign_pilots,
    cost231_reference_loss,
    draw_blocking,
    large_scale_all,
    three_slope_gain,
)

PARAMS = PathLossParams()


def db(x):
    return 10.0 * np.log10(x)


def test_reference_loss_hand_value():
    assert cost231_reference_loss(1900.0, 15.0, 1.65) == pytest.approx(140.715, abs=1e-3)


def test_three_slope_continuity_at_breakpoints():
    for d_star in (PARAMS.d0_km, PARAMS.d1_km):
        below = three_slope_gain(d_star * (1 - 1e-9), PARAMS)
        above = three_slope_gain(d_star * (1 + 1e-9), PARAMS)
        assert abs(db(below) - db(above)) < 0.01


def test_three_slope_far_exponent():
    # Oracle: hand evaluation of the piecewise law, gain ratio 2^-3.5 per
    # distance doubling beyond the far breakpoint.
    ratio = three_slope_gain(2 * PARAMS.d1_km * 1.01, PARAMS) / three_slope_gain(PARAMS.d1_km * 1.01, PARAMS)
    assert ratio == pytest.approx(2.0 ** -3.5, rel=1e-9)


def test_three_slope_flat_below_d0():
    assert three_slope_gain(0.0, PARAMS) == pytest.approx(three_slope_gain(PARAMS.d0_km, PARAMS))
    assert three_slope_gain(0.5 * PARAMS.d0_km, PARAMS) == pytest.approx(three_slope_gain(PARAMS.d0_km, PARAMS))


def test_three_slope_monotone():
    d = np.linspace(0.0, 1.0, 500)
    g = three_slope_gain(d, PARAMS)
    assert np.all(np.diff(g) <= 1e-20)


def test_blocking_degenerate_probabilities():
    rng = substream(5, "blocking")
    assert np.all(draw_blocking(0.0, rng, 20, 10) == 0.0)
    assert np.all(draw_blocking(1.0, rng, 20, 10) == 1.0)


def test_blocking_empirical_mean():
    # Binomial standard error at 1e5 draws: sqrt(0.2*0.8/1e5) ~ 0.00126
    a = draw_blocking(0.2, substream(5, "blocking"), 1000, 100)
    assert a.mean() == pytest.approx(0.2, abs=0.004)


def test_assign_pilots_round_robin():
    pilot_of, share = assign_pilots(10, 5)
    counts = np.bincount(pilot_of, minlength=5)
    assert np.all(counts == 2)
    assert np.all(share.sum(axis=0) == 2)

    pilot_of, share = assign_pilots(4, 4)
    assert np.array_equal(share, np.eye(4, dtype=bool))

    pilot_of, share = assign_pilots(3, 1)
    assert np.all(share)


def test_pilot_groups_partition():
    pilot_of, share = assign_pilots(11, 4)
    groups = {}
    for k in range(11):
        groups.setdefault(int(pilot_of[k]), set()).add(k)
    union = set().union(*groups.values())
    assert union == set(range(11))
    assert sum(len(g) for g in groups.values()) == 11
    for k in range(11):
        assert np.array_equal(np.flatnonzero(share[:, k]), sorted(groups[int(pilot_of[k])]))


def test_large_scale_all_determinism_and_blocking():
    cfg = config_from_dict({"M": 12, "K": 6, "p_tilde": 0.4})
    geometry = geometry_for(cfg, substream(cfg.master_seed, "geometry"))
    ls1 = large_scale_all(geometry, cfg, substream(cfg.master_seed, "ls"))
    ls2 = large_scale_all(geometry, cfg, substream(cfg.master_seed, "ls"))
    assert np.array_equal(ls1.direct_gain, ls2.direct_gain)
    assert np.array_equal(ls1.blocked, ls2.blocked)
    # direct gain vanishes exactly where the link is blocked
    assert np.all((ls1.direct_gain == 0.0) == (ls1.blocked == 0.0))
    assert np.all(ls1.direct_gain == ls1.blocked * ls1.direct_gain_unblocked)
    assert np.all(ls1.ris_ap_gain > 0) and np.all(ls1.ris_user_gain > 0)


def test_nearby_user_sees_largest_gain():
    cfg = config_from_dict({"M": 8, "K": 3, "p_tilde": 1.0})
    geometry = geometry_for(cfg, substream(3, "geometry"))
    ls = large_scale_all(geometry, cfg, substream(3, "ls"))
    from riscellfree.config import wrap_distance

    dists = wrap_distance(
        geometry.ap_positions[:, None, :], geometry.user_positions[None, :, :], cfg.area_side
    )
    for k in range(cfg.K):
        assert np.argmax(ls.direct_gain_unblocked[:, k]) == np.argmin(dists[:, k])
