"""Per-coherence-interval channel realisations and aggregated channels.

This is the readable single-realisation path; the Monte-Carlo estimators in
``performance`` use the batched kernels, which are tested against these
functions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .correlation import CorrelationModel, phase_weighted_traces
from .propagation import LargeScaleState


@dataclass(frozen=True)
class PhaseShifts:
    """Diagonal RIS configuration Phi = diag(exp(j theta_n))."""

    theta: np.ndarray  # (N,) radians, wrapped to [-pi, pi]

    @classmethod
    def of(cls, theta) -> "PhaseShifts":
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        wrapped = np.mod(theta + np.pi, 2.0 * np.pi) - np.pi
        return cls(theta=wrapped)

    @property
    def diagonal(self) -> np.ndarray:
        return np.exp(1j * self.theta)

    def __len__(self) -> int:
        return self.theta.shape[0]


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """CN(0, 1) draws: real and imaginary parts each have variance 1/2."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


@dataclass(frozen=True)
class ChannelRealization:
    """One coherence-interval draw of all small-scale channels."""

    direct: np.ndarray  # (M, K) AP-user channels
    ap_ris: np.ndarray  # (M, N) AP-RIS channels
    ris_user: np.ndarray  # (K, N) RIS-user channels
    aggregated: np.ndarray  # (M, K) direct + cascaded


def aggregated_channel(direct, ap_ris, ris_user, phases: PhaseShifts):
    """Aggregated channel g + h^H Phi z; broadcasts over leading axes."""
    ap_ris = np.asarray(ap_ris)
    ris_user = np.asarray(ris_user)
    if ap_ris.shape[-1] != ris_user.shape[-1] or ap_ris.shape[-1] != len(phases):
        raise ValueError("RIS dimensions disagree")
    cascade = np.sum(np.conj(ap_ris) * phases.diagonal * ris_user, axis=-1)
    return direct + cascade


def sample_channels(
    ls: LargeScaleState,
    corr: CorrelationModel,
    phases: PhaseShifts,
    rng: np.random.Generator,
) -> ChannelRealization:
    """Draw one realisation: the direct channels are CN(0, beta), the RIS-leg
    channels are coloured by the shared correlation factor and scaled by the
    per-AP / per-user large-scale gains times the element area."""
    m = ls.direct_gain.shape[0]
    k = ls.direct_gain.shape[1]
    n = corr.n_elements
    factor_t = corr.factor.T  # right-multiplication colours rows

    direct = np.sqrt(ls.direct_gain) * complex_normal(rng, (m, k))
    ap_scale = np.sqrt(ls.ris_ap_gain * corr.element_area)[:, None]
    user_scale = np.sqrt(ls.ris_user_gain * corr.element_area)[:, None]
    ap_ris = ap_scale * (complex_normal(rng, (m, n)) @ factor_t)
    ris_user = user_scale * (complex_normal(rng, (k, n)) @ factor_t)

    aggregated = aggregated_channel(direct, ap_ris[:, None, :], ris_user[None, :, :], phases)
    return ChannelRealization(direct=direct, ap_ris=ap_ris, ris_user=ris_user, aggregated=aggregated)


def aggregate_variance(
    ls: LargeScaleState,
    corr: CorrelationModel,
    phases: PhaseShifts,
    m: int,
    k: int,
) -> float:
    """Total variance of the aggregated channel of the (m, k) link:
    direct gain plus the phase-weighted trace of the covariance product."""
    return float(aggregate_variance_matrix(ls, corr, phases)[m, k])


def aggregate_variance_matrix(
    ls: LargeScaleState,
    corr: CorrelationModel,
    phases: PhaseShifts,
) -> np.ndarray:
    tr_single, _ = phase_weighted_traces(corr.R, phases.diagonal, corr.element_area)
    return ls.direct_gain + np.outer(ls.ris_ap_gain, ls.ris_user_gain) * tr_single
