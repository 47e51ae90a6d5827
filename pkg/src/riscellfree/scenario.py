"""Scenario assembly: geometry, large-scale state, correlation model.

A scenario draw is indexed so that every randomised ingredient comes from its
own counter-based sub-stream; draws are therefore reproducible in isolation
and shareable across the three compared systems:

``ris``      the full system (direct links unblocked with probability p_tilde)
``no-ris``   same draw with all RIS statistics zeroed
``no-los``   direct links removed entirely, RIS kept
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .config import Geometry, SystemConfig, geometry_for, substream
from .correlation import CorrelationModel, build_sinc_matrix, element_positions, identity_correlation
from .propagation import LargeScaleState, PathLossParams, large_scale_all

SYSTEMS = ("ris", "no-ris", "no-los")


@dataclass(frozen=True)
class Scenario:
    cfg: SystemConfig
    geometry: Geometry
    ls: LargeScaleState
    corr: CorrelationModel
    draw_index: int
    system: str


def correlation_matrix(cfg: SystemConfig, kind: str = "correlated") -> np.ndarray:
    if kind == "correlated":
        layout = element_positions(cfg.N_H, cfg.N_V, cfg.d_h, cfg.d_v)
        return build_sinc_matrix(layout, cfg.wavelength)
    if kind == "independent":
        return identity_correlation(cfg.N)
    raise ValueError("correlation kind must be 'correlated' or 'independent'")


def apply_system(ls: LargeScaleState, system: str) -> LargeScaleState:
    """Zero out the statistics the requested system variant does not have."""
    if system == "ris":
        return ls
    if system == "no-ris":
        return replace(
            ls,
            ris_ap_gain=np.zeros_like(ls.ris_ap_gain),
            ris_user_gain=np.zeros_like(ls.ris_user_gain),
        )
    if system == "no-los":
        return replace(
            ls,
            blocked=np.zeros_like(ls.blocked),
            direct_gain=np.zeros_like(ls.direct_gain),
        )
    raise ValueError(f"unknown system '{system}' (expected one of {SYSTEMS})")


def build_scenario(
    cfg: SystemConfig,
    draw_index: int = 0,
    system: str = "ris",
    correlation: str = "correlated",
    p_tilde: float | None = None,
) -> Scenario:
    """Deterministic scenario draw for (config, draw_index).

    Blocking indicators come from uniforms thresholded at p_tilde, so draws
    with different p_tilde values stay coupled monotonically, and all three
    systems of one draw share geometry and blocking randomness.
    """
    if p_tilde is not None:
        cfg = replace(cfg, p_tilde=p_tilde)
    geometry = geometry_for(cfg, substream(cfg.master_seed, "geometry", draw_index))
    uniforms = substream(cfg.master_seed, "blocking", draw_index).random((cfg.M, cfg.K))
    ls = large_scale_all(
        geometry,
        cfg,
        rng=substream(cfg.master_seed, "large-scale", draw_index),
        params=PathLossParams.from_config(cfg),
        blocking_uniforms=uniforms,
    )
    ls = apply_system(ls, system)
    corr = CorrelationModel(
        R=correlation_matrix(cfg, correlation),
        d_h=cfg.d_h,
        d_v=cfg.d_v,
        ris_ap_gain=ls.ris_ap_gain,
        ris_user_gain=ls.ris_user_gain,
    )
    return Scenario(cfg=cfg, geometry=geometry, ls=ls, corr=corr, draw_index=draw_index, system=system)
