"""Pilot phase and linear MMSE estimation of the aggregated channels.

Orthonormal pilots make the length-tau_p receive matrix equivalent to its
projection onto each pilot sequence, so the pilot phase is simulated directly
at the projected-signal level.  Users sharing a pilot share the projected
noise sample, which makes their estimates exactly parallel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import ChannelRealization, PhaseShifts, complex_normal
from .config import SystemConfig
from .correlation import CorrelationModel, phase_weighted_traces
from .propagation import LargeScaleState


@dataclass(frozen=True)
class PilotObservation:
    """Projected pilot signals; column k is the observation used to estimate
    the aggregated channel of user k."""

    projected: np.ndarray  # (M, K)
    noise: np.ndarray  # (M, tau_p), shared within each pilot group


@dataclass(frozen=True)
class EstimationStats:
    """Closed-form estimator statistics; they depend only on the large-scale
    state and the phase configuration, never on realisations.

    channel_var  total variance of the aggregated channel
    mmse_coef    scaling applied to the projected pilot signal
    estimate_var variance of the channel estimate
    error_var    variance of the estimation error (= channel_var - estimate_var)
    nmse         error variance normalised by channel variance
    """

    channel_var: np.ndarray  # (M, K)
    mmse_coef: np.ndarray  # (M, K)
    estimate_var: np.ndarray  # (M, K)
    error_var: np.ndarray  # (M, K)
    nmse: np.ndarray  # (M, K)
    pilot_energy: float  # p * tau_p


def project_pilots(
    chan: ChannelRealization,
    ls: LargeScaleState,
    cfg: SystemConfig,
    rng: np.random.Generator,
) -> PilotObservation:
    """Project the received pilot block onto each user's pilot sequence.

    The projection of user k collects sqrt(p tau_p) times the aggregated
    channels of every user sharing k's pilot, plus unit-variance noise that is
    identical across those users.
    """
    m = chan.aggregated.shape[0]
    noise = complex_normal(rng, (m, cfg.tau_p))
    group_sum = chan.aggregated @ ls.pilot_share.astype(float)
    projected = np.sqrt(cfg.p * cfg.tau_p) * group_sum + noise[:, ls.pilot_of]
    return PilotObservation(projected=projected, noise=noise)


def estimator_stats(
    ls: LargeScaleState,
    corr: CorrelationModel,
    phases: PhaseShifts,
    cfg: SystemConfig,
) -> EstimationStats:
    """All estimator statistics for one (scenario, phase configuration).

    With pilot energy q = p tau_p and channel variances v:

        coef_mk  = sqrt(q) v_mk / (q sum_{k' sharing} v_mk' + 1)
        est_var  = sqrt(q) v_mk coef_mk
        err_var  = v_mk - est_var
        nmse     = 1 - q v_mk / (q sum_{k' sharing} v_mk' + 1)

    Links with zero variance carry nmse 1 by convention (nothing estimable).
    """
    tr_single, _ = phase_weighted_traces(corr.R, phases.diagonal, corr.element_area)
    channel_var = ls.direct_gain + np.outer(ls.ris_ap_gain, ls.ris_user_gain) * tr_single
    q = cfg.p * cfg.tau_p
    denom = q * (channel_var @ ls.pilot_share.astype(float)) + 1.0
    coef = np.sqrt(q) * channel_var / denom
    estimate_var = np.sqrt(q) * channel_var * coef
    return EstimationStats(
        channel_var=channel_var,
        mmse_coef=coef,
        estimate_var=estimate_var,
        error_var=channel_var - estimate_var,
        nmse=1.0 - q * channel_var / denom,
        pilot_energy=q,
    )


def mmse_coefficient(
    ls: LargeScaleState,
    corr: CorrelationModel,
    phases: PhaseShifts,
    cfg: SystemConfig,
    m: int,
    k: int,
) -> float:
    return float(estimator_stats(ls, corr, phases, cfg).mmse_coef[m, k])


def estimate_channel(obs: PilotObservation, stats: EstimationStats, m: int, k: int) -> complex:
    """MMSE estimate of one aggregated channel: coef times the projection."""
    return complex(stats.mmse_coef[m, k] * obs.projected[m, k])


def estimate_all(obs: PilotObservation, stats: EstimationStats) -> np.ndarray:
    return stats.mmse_coef * obs.projected
