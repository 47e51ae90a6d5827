import numpy as np
import pytest

from riscellfree.config import config_from_dict, load_config
from riscellfree.correlation import CorrelationModel
from riscellfree.phases import equal_phase_design
from riscellfree.propagation import LargeScaleState, assign_pilots
from riscellfree.scenario import build_scenario

from pathlib import Path

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


@pytest.fixture(scope="session")
def desk_cfg():
    return load_config(CONFIG_DIR / "desk.json")


@pytest.fixture(scope="session")
def paper_cfg():
    return load_config(CONFIG_DIR / "paper.json")


@pytest.fixture(scope="session")
def desk_scenario(desk_cfg):
    return build_scenario(desk_cfg, draw_index=0, system="ris")


@pytest.fixture(scope="session")
def quarter_phases(desk_cfg):
    return equal_phase_design(np.pi / 4.0, desk_cfg.N).realized


def synthetic_config(**overrides):
    """Minimal validated config for hand-computed cases."""
    raw = {
        "M": 1,
        "K": 1,
        "N_H": 1,
        "N_V": 1,
        "tau_c": 200,
        "tau_p": 1,
        "pilot_snr": 1.0,
        "data_snr": 1.0,
        "wavelength_m": 1.0,
        "element_width_m": 1.0,
        "element_height_m": 1.0,
        "master_seed": 1234,
        "trials": 1000,
    }
    raw.update(overrides)
    return config_from_dict(raw)


def synthetic_state(direct_gain, ris_ap_gain=None, ris_user_gain=None, tau_p=1):
    """LargeScaleState with hand-chosen gains (blocking all ones)."""
    direct_gain = np.atleast_2d(np.asarray(direct_gain, dtype=float))
    m, k = direct_gain.shape
    if ris_ap_gain is None:
        ris_ap_gain = np.zeros(m)
    if ris_user_gain is None:
        ris_user_gain = np.zeros(k)
    pilot_of, share = assign_pilots(k, tau_p)
    return LargeScaleState(
        direct_gain_unblocked=direct_gain,
        blocked=np.ones_like(direct_gain),
        direct_gain=direct_gain,
        ris_ap_gain=np.asarray(ris_ap_gain, dtype=float),
        ris_user_gain=np.asarray(ris_user_gain, dtype=float),
        pilot_of=pilot_of,
        pilot_share=share,
    )


def synthetic_corr(ls, R=None, d_h=1.0, d_v=1.0):
    if R is None:
        R = np.eye(1)
    return CorrelationModel(
        R=np.asarray(R, dtype=float),
        d_h=d_h,
        d_v=d_v,
        ris_ap_gain=ls.ris_ap_gain,
        ris_user_gain=ls.ris_user_gain,
    )


class ZeroNoiseRng:
    """Stub generator: deterministic zero draws, for noise-free examples."""

    def standard_normal(self, shape=None):
        return np.zeros(shape) if shape is not None else 0.0

    def random(self, shape=None):
        return np.zeros(shape) if shape is not None else 0.0
