"""Uplink data phase: closed-form ergodic net throughput and its oracles.

The closed form follows the use-and-then-forget capacity bound under MRC:
only the mean of the effective channel is treated as known, everything else
is effective noise.  With every covariance a scalar multiple of one shared
correlation matrix, all interference traces collapse onto two cached scalars
(``trace_products``), which makes the closed form O(M K) per scenario after
one O(N^3) precomputation.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channels import ChannelRealization, PhaseShifts, complex_normal
from .config import SystemConfig, substream
from .correlation import CorrelationModel, phase_weighted_traces
from .estimation import EstimationStats, estimator_stats
from .kernels import KernelInputs, accumulate_uatf, decision_samples, draw_batch
from .propagation import LargeScaleState


@dataclass(frozen=True)
class ThetaTraces:
    """Cached interference traces for A = Phi^H (area R) Phi (area R).

    Every trace of (products of) phase-conjugated covariance pairs equals the
    per-link large-scale scalars times ``single`` = tr(A) respectively
    ``square`` = tr(A^2).
    """

    single: float
    square: float


def trace_products(corr: CorrelationModel, phases: PhaseShifts) -> ThetaTraces:
    single, square = phase_weighted_traces(corr.R, phases.diagonal, corr.element_area)
    return ThetaTraces(single=single, square=square)


def net_throughput(sinr: float, cfg: SystemConfig) -> float:
    """Net rate in Mbps: bandwidth (MHz) times uplink fraction times the
    pilot-overhead prelog times log2(1 + SINR)."""
    if np.any(np.asarray(sinr) < 0):
        raise ValueError("sinr must be non-negative")
    prelog = cfg.bandwidth_mhz * cfg.uplink_fraction * (1.0 - cfg.tau_p / cfg.tau_c)
    return prelog * np.log2(1.0 + sinr)


def closed_form_sinr_all(
    ls: LargeScaleState,
    corr: CorrelationModel,
    phases: PhaseShifts,
    cfg: SystemConfig,
    stats: EstimationStats | None = None,
    traces: ThetaTraces | None = None,
) -> np.ndarray:
    """Effective uplink SINR of every user under MRC.

    Numerator: rho eta_k (sum_m est_var_mk)^2.  Denominator: the mutual
    interference (non-coherent power, two quartic cascade terms, coherent
    pilot contamination) plus the noise term sum_m est_var_mk.  Users with a
    zero numerator (nothing received coherently) get SINR 0.
    """
    if stats is None:
        stats = estimator_stats(ls, corr, phases, cfg)
    if traces is None:
        traces = trace_products(corr, phases)

    eta = cfg.eta_array
    rho = cfg.rho
    q = stats.pilot_energy
    share = ls.pilot_share.astype(float)
    alpha = ls.ris_ap_gain
    atil = ls.ris_user_gain
    k_users = cfg.K

    dv = stats.channel_var
    gm = stats.estimate_var
    cf = stats.mmse_coef

    noise = gm.sum(axis=0)
    numerator = rho * eta * noise**2

    gain_cross = gm.T @ dv  # [k, k'] = sum_m est_var_mk channel_var_mk'
    coef_cross = cf.T @ dv  # [k, k'] = sum_m coef_mk channel_var_mk'

    mi_power = rho * (gain_cross @ eta)
    site_sq = (cf**2).T @ alpha**2
    mi_quartic_same = q * rho * traces.square * site_sq * (share @ (eta * atil**2))
    site_lin = (cf.T @ alpha) ** 2
    mi_quartic_cross = (
        q * rho * traces.square * site_lin * float(np.sum(eta * atil)) * (share @ atil)
    )
    off_share = share - np.eye(k_users)
    mi_coherent = q * rho * ((coef_cross**2 * off_share) @ eta)

    denominator = mi_power + mi_quartic_same + mi_quartic_cross + mi_coherent + noise
    sinr = np.zeros(k_users)
    live = numerator > 0
    sinr[live] = numerator[live] / denominator[live]
    return sinr


def closed_form_sinr(
    ls: LargeScaleState,
    corr: CorrelationModel,
    phases: PhaseShifts,
    cfg: SystemConfig,
    stats: EstimationStats | None = None,
    traces: ThetaTraces | None = None,
    k: int = 0,
) -> float:
    return float(closed_form_sinr_all(ls, corr, phases, cfg, stats, traces)[k])


def uplink_receive(
    chan: ChannelRealization,
    cfg: SystemConfig,
    symbols: np.ndarray,
    rng: np.random.Generator,
) -> np.ndarray:
    """Received data-phase samples: sqrt(rho) sum_k sqrt(eta_k) u_mk s_k + noise."""
    weighted = np.sqrt(cfg.rho) * np.sqrt(cfg.eta_array) * np.asarray(symbols)
    return chan.aggregated @ weighted + complex_normal(rng, chan.aggregated.shape[0])


def mrc_decision(received: np.ndarray, estimates: np.ndarray, k: int) -> complex:
    """Maximum-ratio combining: conjugate-estimate weighting summed over APs."""
    return complex(np.conj(estimates[:, k]) @ received)


def kernel_inputs(
    ls: LargeScaleState,
    corr: CorrelationModel,
    phases: PhaseShifts,
    cfg: SystemConfig,
    stats: EstimationStats,
) -> KernelInputs:
    factor = corr.factor
    mix = factor.conj().T @ (phases.diagonal[:, None] * factor)
    return KernelInputs(
        mix=np.ascontiguousarray(mix),
        sqrt_direct=np.sqrt(ls.direct_gain),
        cascade_scale=corr.element_area * np.sqrt(np.outer(ls.ris_ap_gain, ls.ris_user_gain)),
        coef=np.ascontiguousarray(stats.mmse_coef),
        pilot_of=ls.pilot_of.astype(np.int64),
        share=ls.pilot_share.astype(float),
        sqrt_pilot_energy=math.sqrt(stats.pilot_energy),
        n_pilots=cfg.tau_p,
    )


def _batch_sizes(trials: int, batches: int) -> list:
    base, extra = divmod(trials, batches)
    return [base + (1 if i < extra else 0) for i in range(batches)]


def _sinr_from_moments(mean_a, mean_b2, mean_n, eta, rho):
    coherent = rho * eta * np.abs(mean_a) ** 2
    interference = rho * (mean_b2 @ eta) - coherent + mean_n
    sinr = np.zeros_like(coherent)
    live = coherent > 0
    sinr[live] = coherent[live] / interference[live]
    return sinr


@dataclass(frozen=True)
class MonteCarloSinr:
    """Use-and-then-forget SINR estimated from fresh channel/noise draws."""

    sinr: np.ndarray  # (K,)
    stderr: np.ndarray  # (K,) batch-based standard error
    trials: int
    batches: int


def monte_carlo_sinr(
    ls: LargeScaleState,
    corr: CorrelationModel,
    phases: PhaseShifts,
    cfg: SystemConfig,
    trials: int,
    master_seed: int | None = None,
    batches: int = 50,
    workers: int = 1,
    purpose: str = "mc-uatf",
    max_rel_stderr: float | None = None,
) -> MonteCarloSinr:
    """Estimate the effective SINR by sample means over fresh draws.

    The coherent gain, the interference second moments, and the combined
    noise power are each estimated as sample means; standard errors come from
    the spread of per-batch SINR estimates.  Batch i always consumes the
    sub-stream (master_seed, purpose, i), so any worker count produces
    identical output.
    """
    if trials < 1000:
        raise ValueError("trials must be >= 1000 for a meaningful estimate")
    if trials < 2 * batches:
        raise ValueError("insufficient trials for the requested batch count")
    if master_seed is None:
        master_seed = cfg.master_seed
    stats = estimator_stats(ls, corr, phases, cfg)
    inputs = kernel_inputs(ls, corr, phases, cfg, stats)
    eta = cfg.eta_array
    sizes = _batch_sizes(trials, batches)

    def run_batch(i: int):
        rng = substream(master_seed, purpose, i)
        draws = draw_batch(rng, sizes[i], inputs)
        return accumulate_uatf(inputs, *draws)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_batch, range(batches)))
    else:
        results = [run_batch(i) for i in range(batches)]

    sum_a = np.zeros(cfg.K, dtype=complex)
    sum_b2 = np.zeros((cfg.K, cfg.K))
    sum_n = np.zeros(cfg.K)
    per_batch = np.empty((batches, cfg.K))
    for i, (a_i, b2_i, n_i) in enumerate(results):
        sum_a += a_i
        sum_b2 += b2_i
        sum_n += n_i
        per_batch[i] = _sinr_from_moments(a_i / sizes[i], b2_i / sizes[i], n_i / sizes[i], eta, cfg.rho)

    sinr = _sinr_from_moments(sum_a / trials, sum_b2 / trials, sum_n / trials, eta, cfg.rho)
    stderr = per_batch.std(axis=0, ddof=1) / math.sqrt(batches)
    if max_rel_stderr is not None:
        live = sinr > 0
        if np.any(stderr[live] > max_rel_stderr * sinr[live]):
            raise ValueError(
                "stderr too large: increase trials "
                f"(worst rel stderr {float(np.max(stderr[live] / sinr[live])):.3g})"
            )
    return MonteCarloSinr(sinr=sinr, stderr=stderr, trials=trials, batches=batches)


def asymptotic_limits(
    ls: LargeScaleState,
    corr: CorrelationModel,
    phases: PhaseShifts,
    cfg: SystemConfig,
    symbols: np.ndarray,
    regime: str,
) -> np.ndarray:
    """Deterministic limits of the normalised MRC decision statistic.

    ``fixed-N``: the statistic divided by the AP count converges to the
    pilot-sharing sum of coef times total channel variance (direct plus
    cascade), so the direct links survive.  ``joint``: dividing by AP count
    times element count keeps only the cascade traces; every occurrence of
    the channel variance (including inside the MMSE coefficient) is replaced
    by its cascade part, so the value is independent of the direct links.
    """
    stats = estimator_stats(ls, corr, phases, cfg)
    q = stats.pilot_energy
    share = ls.pilot_share.astype(float)
    weights = np.sqrt(cfg.eta_array * q * cfg.rho) * np.asarray(symbols, dtype=complex)
    if regime == "fixed-N":
        cross = stats.mmse_coef.T @ stats.channel_var  # [k, k']
        scale = 1.0 / cfg.M
    elif regime == "joint":
        traces = trace_products(corr, phases)
        cascade_var = np.outer(ls.ris_ap_gain, ls.ris_user_gain) * traces.single
        coef = np.sqrt(q) * cascade_var / (q * (cascade_var @ share) + 1.0)
        cross = coef.T @ cascade_var
        scale = 1.0 / (cfg.M * corr.n_elements)
    else:
        raise ValueError("regime must be 'fixed-N' or 'joint'")
    return scale * ((cross * share) @ weights)


def asymptotic_limit(
    ls: LargeScaleState,
    corr: CorrelationModel,
    phases: PhaseShifts,
    cfg: SystemConfig,
    stats: EstimationStats,
    k: int,
    symbols: np.ndarray,
    regime: str,
) -> complex:
    del stats  # recomputed internally; kept for API symmetry
    return complex(asymptotic_limits(ls, corr, phases, cfg, symbols, regime)[k])


def decision_rms_deviation(
    ls: LargeScaleState,
    corr: CorrelationModel,
    phases: PhaseShifts,
    cfg: SystemConfig,
    symbols: np.ndarray,
    trials: int,
    master_seed: int | None = None,
    regime: str = "fixed-N",
    batches: int = 10,
    purpose: str = "mc-asym",
) -> np.ndarray:
    """RMS distance of the normalised decision statistic from its limit."""
    if master_seed is None:
        master_seed = cfg.master_seed
    stats = estimator_stats(ls, corr, phases, cfg)
    inputs = kernel_inputs(ls, corr, phases, cfg, stats)
    limits = asymptotic_limits(ls, corr, phases, cfg, symbols, regime)
    scale = 1.0 / cfg.M if regime == "fixed-N" else 1.0 / (cfg.M * corr.n_elements)
    symbols = np.asarray(symbols, dtype=complex)

    total = np.zeros(cfg.K)
    sizes = _batch_sizes(trials, batches)
    for i, size in enumerate(sizes):
        rng = substream(master_seed, purpose, i)
        draws = draw_batch(rng, size, inputs)
        w_data = complex_normal(rng, (size, cfg.M))
        r = decision_samples(inputs, *draws, w_data, cfg.rho, cfg.eta_array, symbols)
        total += np.sum(np.abs(scale * r - limits) ** 2, axis=0)
    return np.sqrt(total / trials)


@dataclass(frozen=True)
class ThroughputReport:
    """Closed-form vs Monte-Carlo throughput columns for one scenario."""

    sinr: np.ndarray
    rate_mbps: np.ndarray
    mc_sinr: np.ndarray
    mc_stderr: np.ndarray
    mc_rate_mbps: np.ndarray
    rel_gap: np.ndarray

    @property
    def sum_rate_mbps(self) -> float:
        return float(self.rate_mbps.sum())


def throughput_report(
    ls: LargeScaleState,
    corr: CorrelationModel,
    phases: PhaseShifts,
    cfg: SystemConfig,
    trials: int,
    master_seed: int | None = None,
    workers: int = 1,
    max_rel_stderr: float | None = None,
) -> ThroughputReport:
    closed = closed_form_sinr_all(ls, corr, phases, cfg)
    mc = monte_carlo_sinr(
        ls, corr, phases, cfg, trials, master_seed, workers=workers, max_rel_stderr=max_rel_stderr
    )
    reference = np.where(mc.sinr > 0, mc.sinr, 1.0)
    rel_gap = np.abs(closed - mc.sinr) / reference
    return ThroughputReport(
        sinr=closed,
        rate_mbps=net_throughput(closed, cfg),
        mc_sinr=mc.sinr,
        mc_stderr=mc.stderr,
        mc_rate_mbps=net_throughput(mc.sinr, cfg),
        rel_gap=rel_gap,
    )


@dataclass(frozen=True)
class EmpiricalEstimation:
    """Monte-Carlo moments of one link's channel estimate (oracle for the
    closed-form estimator statistics).  Standard errors come from batch
    spread; the error/estimate correlation carries a component-wise SE so
    that |corr| <= 3 se is a fair zero test for a complex statistic."""

    estimate_var: float
    estimate_var_se: float
    error_var: float
    error_var_se: float
    error_estimate_corr: float
    error_estimate_corr_se: float
    regression_slope: float
    regression_slope_se: float
    trials: int


def empirical_estimation_moments(
    ls: LargeScaleState,
    corr: CorrelationModel,
    phases: PhaseShifts,
    cfg: SystemConfig,
    m: int,
    k: int,
    trials: int,
    master_seed: int | None = None,
    batches: int = 40,
    purpose: str = "mc-estimation",
) -> EmpiricalEstimation:
    """Sample E{|estimate|^2}, E{|error|^2}, the error/estimate correlation,
    and the regression slope of the channel on its pilot observation.

    Implements the pilot phase directly (channel draws, projected noise,
    MMSE scaling) without touching the closed-form variance expressions, so
    it is a valid oracle for them.
    """
    if master_seed is None:
        master_seed = cfg.master_seed
    stats = estimator_stats(ls, corr, phases, cfg)
    coef = float(stats.mmse_coef[m, k])
    group = ls.pilot_group(k)
    local = int(np.flatnonzero(group == k)[0])
    factor = corr.factor
    mix = factor.conj().T @ (phases.diagonal[:, None] * factor)
    sqrt_pe = math.sqrt(cfg.p * cfg.tau_p)
    n = corr.n_elements

    amp_ap = math.sqrt(ls.ris_ap_gain[m] * corr.element_area)
    amp_users = np.sqrt(ls.ris_user_gain[group] * corr.element_area)
    sqrt_beta = np.sqrt(ls.direct_gain[m, group])

    est_sq = np.zeros(batches)
    err_sq = np.zeros(batches)
    cross = np.zeros(batches, dtype=complex)
    slope = np.zeros(batches)
    sizes = _batch_sizes(trials, batches)
    for i, size in enumerate(sizes):
        rng = substream(master_seed, purpose, i * 1000 + m * 17 + k)
        w_ap = complex_normal(rng, (size, n))
        x_user = complex_normal(rng, (size, group.size, n))
        g = complex_normal(rng, (size, group.size))
        w_p = complex_normal(rng, size)
        wmix = w_ap @ np.conj(mix)
        cascade = np.einsum("tn,tqn->tq", np.conj(wmix), x_user)
        u = sqrt_beta * g + amp_ap * amp_users * cascade
        observed = sqrt_pe * u.sum(axis=1) + w_p
        uhat = coef * observed
        err = u[:, local] - uhat
        est_sq[i] = np.mean(np.abs(uhat) ** 2)
        err_sq[i] = np.mean(np.abs(err) ** 2)
        cross[i] = np.mean(err * np.conj(uhat))
        slope[i] = np.mean(np.conj(observed) * u[:, local]).real / np.mean(np.abs(observed) ** 2)

    def agg(values):
        return float(values.mean()), float(values.std(ddof=1) / math.sqrt(batches))

    est_var, est_se = agg(est_sq)
    err_var, err_se = agg(err_sq)
    slope_mean, slope_se = agg(slope)
    corr_norm = math.sqrt(max(est_var * err_var, np.finfo(float).tiny))
    se_re = cross.real.std(ddof=1) / math.sqrt(batches)
    se_im = cross.imag.std(ddof=1) / math.sqrt(batches)
    return EmpiricalEstimation(
        estimate_var=est_var,
        estimate_var_se=est_se,
        error_var=err_var,
        error_var_se=err_se,
        error_estimate_corr=float(np.abs(cross.mean()) / corr_norm),
        error_estimate_corr_se=float(math.hypot(se_re, se_im) / corr_norm),
        regression_slope=slope_mean,
        regression_slope_se=slope_se,
        trials=trials,
    )
