"""Large-scale propagation: three-slope path loss, blocking, pilot reuse."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import Geometry, SystemConfig, wrap_distance


def cost231_reference_loss(carrier_mhz: float, ap_height_m: float, user_height_m: float) -> float:
    """COST231-Hata fixed loss term (dB) for distances expressed in km."""
    lf = math.log10(carrier_mhz)
    return (
        46.3
        + 33.9 * lf
        - 13.82 * math.log10(ap_height_m)
        - (1.1 * lf - 0.7) * user_height_m
        + (1.56 * lf - 0.8)
    )


@dataclass(frozen=True)
class PathLossParams:
    """Three-slope path loss: constant below d0, exponent-2 decay between d0
    and d1, exponent-3.5 beyond d1, continuous at both breakpoints."""

    d0_km: float = 0.01
    d1_km: float = 0.05
    reference_loss_db: float = 140.72
    exponent_mid: float = 2.0
    exponent_far: float = 3.5

    def __post_init__(self):
        if not (0 < self.d0_km < self.d1_km):
            raise ValueError("0 < d0 < d1 required")

    @classmethod
    def from_config(cls, cfg: SystemConfig) -> "PathLossParams":
        loss = cfg.reference_loss_db
        if loss is None:
            loss = cost231_reference_loss(cfg.carrier_ghz * 1e3, cfg.ap_height, cfg.user_height)
        return cls(d0_km=cfg.pathloss_d0, d1_km=cfg.pathloss_d1, reference_loss_db=loss)


def three_slope_gain(distance_km, params: PathLossParams):
    """Linear power gain of the three-slope law; vectorised over distances."""
    d = np.asarray(distance_km, dtype=float)
    if np.any(d < 0):
        raise ValueError("distance must be non-negative")
    e_mid = 10.0 * params.exponent_mid
    e_far = 10.0 * params.exponent_far
    # Continuity: the mid segment carries the far-segment value at d1, the
    # near segment freezes the mid-segment value at d0.
    mid_const = (e_far - e_mid) * np.log10(params.d1_km)
    d_eff = np.clip(d, params.d0_km, None)
    loss_db = np.where(
        d_eff > params.d1_km,
        params.reference_loss_db + e_far * np.log10(d_eff),
        params.reference_loss_db + mid_const + e_mid * np.log10(d_eff),
    )
    gain = 10.0 ** (-loss_db / 10.0)
    return gain if gain.ndim else float(gain)


def draw_blocking(p_tilde: float, rng: np.random.Generator, m: int, k: int) -> np.ndarray:
    """i.i.d. Bernoulli(p_tilde) indicators: 1 where the direct link exists."""
    if not 0.0 <= p_tilde <= 1.0:
        raise ValueError("p_tilde must lie in [0, 1]")
    return blocking_from_uniform(rng.random((m, k)), p_tilde)


def blocking_from_uniform(uniforms: np.ndarray, p_tilde: float) -> np.ndarray:
    """Threshold shared uniforms so blocking is coupled monotonically across
    p_tilde values of one scenario draw."""
    return (uniforms < p_tilde).astype(float)


def assign_pilots(k_users: int, tau_p: int) -> tuple:
    """Deterministic round-robin pilot reuse.

    Returns 0-based ``pilot_of`` and the boolean share matrix with entry
    (q, k) true when users q and k use the same pilot.  For any k the set of
    users sharing its pilot is ``np.flatnonzero(share[:, k])`` and always
    contains k itself.
    """
    if tau_p < 1:
        raise ValueError("tau_p must be >= 1")
    pilot_of = np.arange(k_users) % tau_p
    share = pilot_of[:, None] == pilot_of[None, :]
    return pilot_of, share


@dataclass
class LargeScaleState:
    """Every statistics-level quantity of one scenario draw."""

    direct_gain_unblocked: np.ndarray  # (M, K) three-slope AP-user gains
    blocked: np.ndarray  # (M, K) 0/1 indicators, 1 = link present
    direct_gain: np.ndarray  # (M, K) = blocked * unblocked gain
    ris_ap_gain: np.ndarray  # (M,)
    ris_user_gain: np.ndarray  # (K,)
    pilot_of: np.ndarray  # (K,) 0-based pilot indices
    pilot_share: np.ndarray  # (K, K) boolean share matrix

    def pilot_group(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.pilot_share[:, k])


def _link_distance(points_a, height_a, points_b, height_b, side):
    planar = wrap_distance(points_a, points_b, side)
    return np.sqrt(planar**2 + ((height_a - height_b) / 1000.0) ** 2)


def large_scale_all(
    geometry: Geometry,
    cfg: SystemConfig,
    rng: np.random.Generator,
    params: PathLossParams | None = None,
    blocking_uniforms: np.ndarray | None = None,
) -> LargeScaleState:
    """All large-scale coefficients of one scenario draw.

    Distances are wrap-around in the plane with the fixed mount heights added
    as a vertical leg.  ``blocking_uniforms`` may be supplied to couple the
    blocking draws across systems or across p_tilde values; otherwise they
    come from ``rng``.
    """
    if params is None:
        params = PathLossParams.from_config(cfg)
    side = cfg.area_side

    ap = geometry.ap_positions[:, None, :]
    users = geometry.user_positions[None, :, :]
    d_direct = _link_distance(ap, geometry.ap_height, users, geometry.user_height, side)
    d_ap_ris = _link_distance(geometry.ap_positions, geometry.ap_height, geometry.ris_position, geometry.ris_height, side)
    d_ris_user = _link_distance(geometry.user_positions, geometry.user_height, geometry.ris_position, geometry.ris_height, side)

    gain_unblocked = three_slope_gain(d_direct, params)
    if blocking_uniforms is None:
        blocking_uniforms = rng.random((cfg.M, cfg.K))
    blocked = blocking_from_uniform(blocking_uniforms, cfg.p_tilde)
    pilot_of, share = assign_pilots(cfg.K, cfg.tau_p)
    return LargeScaleState(
        direct_gain_unblocked=gain_unblocked,
        blocked=blocked,
        direct_gain=blocked * gain_unblocked,
        ris_ap_gain=three_slope_gain(d_ap_ris, params),
        ris_user_gain=three_slope_gain(d_ris_user, params),
        pilot_of=pilot_of,
        pilot_share=share,
    )
