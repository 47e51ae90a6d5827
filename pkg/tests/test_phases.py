import numpy as np
import pytest

from riscellfree.channels import PhaseShifts
from riscellfree.config import substream
from riscellfree.phases import (
    design_from_spec,
    equal_phase_design,
    explicit_phase_design,
    random_phase_design,
    total_nmse,
    verify_equal_phase_optimality,
)
from riscellfree.scenario import build_scenario

from conftest import synthetic_config, synthetic_corr, synthetic_state


def test_equal_design():
    design = equal_phase_design(np.pi / 4.0, 900)
    assert design.kind == "equal"
    assert np.allclose(design.realized.theta, np.pi / 4.0)
    assert np.allclose(equal_phase_design(0.0, 4).realized.diagonal, 1.0)


def test_random_design_support_and_determinism():
    d1 = random_phase_design(substream(1, "phase"), 64)
    d2 = random_phase_design(substream(1, "phase"), 64)
    assert np.array_equal(d1.realized.theta, d2.realized.theta)
    assert np.all(np.abs(d1.realized.theta) <= np.pi)

    draws = random_phase_design(substream(2, "phase"), 100_000).realized.theta
    se = (2 * np.pi / np.sqrt(12.0)) / np.sqrt(draws.size)
    assert abs(draws.mean()) <= 3 * se


def test_design_from_spec(tmp_path):
    assert np.allclose(design_from_spec("equal:0.5", 8, 1).realized.theta, 0.5)
    assert design_from_spec("random:7", 8, 1).kind == "random"
    path = tmp_path / "angles.txt"
    np.savetxt(path, np.linspace(-1, 1, 8))
    design = design_from_spec(f"file:{path}", 8, 1)
    assert design.kind == "explicit"
    assert np.allclose(design.realized.theta, np.linspace(-1, 1, 8))
    with pytest.raises(ValueError):
        design_from_spec(f"file:{path}", 9, 1)
    with pytest.raises(ValueError):
        design_from_spec("fancy:1", 8, 1)

    wrapped = explicit_phase_design([7.0, -7.0])
    assert wrapped.kind == "explicit"
    assert np.all(np.abs(wrapped.realized.theta) <= np.pi)


def test_total_nmse_single_term():
    cfg = synthetic_config()
    ls = synthetic_state(np.array([[1.0]]))
    corr = synthetic_corr(ls)
    assert total_nmse(ls, corr, PhaseShifts.of(np.zeros(1)), cfg) == pytest.approx(0.5)


def test_total_nmse_sum_structure():
    cfg1 = synthetic_config(M=1)
    cfg2 = synthetic_config(M=2)
    ls1 = synthetic_state(np.array([[1.0]]))
    ls2 = synthetic_state(np.array([[1.0], [1.0]]))
    phases = PhaseShifts.of(np.zeros(1))
    v1 = total_nmse(ls1, synthetic_corr(ls1), phases, cfg1)
    v2 = total_nmse(ls2, synthetic_corr(ls2), phases, cfg2)
    assert v2 == pytest.approx(2 * v1)


def test_total_nmse_bounded(desk_scenario, desk_cfg):
    value = total_nmse(desk_scenario.ls, desk_scenario.corr, equal_phase_design(1.0, desk_cfg.N).realized, desk_cfg)
    assert 0.0 <= value <= desk_cfg.M * desk_cfg.K


def test_global_phase_invariance(desk_scenario, desk_cfg):
    base = total_nmse(desk_scenario.ls, desk_scenario.corr, equal_phase_design(0.0, desk_cfg.N).realized, desk_cfg)
    rotated = total_nmse(desk_scenario.ls, desk_scenario.corr, equal_phase_design(np.pi / 4.0, desk_cfg.N).realized, desk_cfg)
    assert rotated == pytest.approx(base, rel=1e-12)

    theta = substream(3, "phase").uniform(-np.pi, np.pi, desk_cfg.N)
    v0 = total_nmse(desk_scenario.ls, desk_scenario.corr, PhaseShifts.of(theta), desk_cfg)
    v1 = total_nmse(desk_scenario.ls, desk_scenario.corr, PhaseShifts.of(theta + 0.8), desk_cfg)
    assert v1 == pytest.approx(v0, rel=1e-12)


def test_equal_phase_optimality_blocked_links(desk_cfg):
    scenario = build_scenario(desk_cfg, draw_index=0, system="no-los")
    report = verify_equal_phase_optimality(
        scenario.ls, scenario.corr, desk_cfg, samples=50, rng=substream(desk_cfg.master_seed, "verify")
    )
    assert not report.violation
    assert report.equal_value <= report.sampled_min + 1e-9 * report.equal_value


def test_equal_phase_verifier_requires_blocked_links(desk_scenario, desk_cfg):
    with pytest.raises(ValueError, match="direct links"):
        verify_equal_phase_optimality(
            desk_scenario.ls, desk_scenario.corr, desk_cfg, samples=2, rng=substream(0, "v")
        )


def test_all_designs_tie_for_identity_correlation(desk_cfg):
    # Scaled-identity covariances make the phase-weighted trace constant.
    scenario = build_scenario(desk_cfg, draw_index=0, system="no-los", correlation="independent")
    values = [
        total_nmse(scenario.ls, scenario.corr, random_phase_design(substream(9, "p", i), desk_cfg.N).realized, desk_cfg)
        for i in range(5)
    ]
    equal_value = total_nmse(scenario.ls, scenario.corr, equal_phase_design(0.3, desk_cfg.N).realized, desk_cfg)
    assert np.allclose(values, equal_value, rtol=1e-12)


def test_single_element_designs_tie(desk_cfg):
    from dataclasses import replace

    cfg = replace(desk_cfg, N_H=1, N_V=1)
    scenario = build_scenario(cfg, draw_index=0, system="no-los")
    report = verify_equal_phase_optimality(
        scenario.ls, scenario.corr, cfg, samples=20, rng=substream(1, "verify")
    )
    assert report.sampled_min == pytest.approx(report.equal_value, rel=1e-12)
    assert report.sampled_mean == pytest.approx(report.equal_value, rel=1e-12)
