"""Vectorised numpy implementation of the Monte-Carlo trial kernel.

One batch call consumes pre-generated standard complex Gaussian draws and
returns the running sums needed by the use-and-then-forget throughput
estimator.  The compiled kernel performs identical arithmetic trial by
trial; both consume the same draws, so any backend mix is statistically
indistinguishable.
"""

from __future__ import annotations

import numpy as np


def accumulate_uatf(inputs, w_ap, x_user, g_direct, w_pilot):
    """Accumulate one batch of trials.

    Returns (sum_a, sum_b2, sum_n):
      sum_a[k]     sum over trials of sum_m conj(uhat_mk) u_mk
      sum_b2[k,l]  sum over trials of |sum_m conj(uhat_mk) u_ml|^2
      sum_n[k]     sum over trials of sum_m |uhat_mk|^2
    """
    u, uhat = _channels_and_estimates(inputs, w_ap, x_user, g_direct, w_pilot)
    b = np.einsum("tmk,tml->tkl", np.conj(uhat), u)
    sum_a = np.einsum("tkk->k", b)
    sum_b2 = np.sum(b.real**2 + b.imag**2, axis=0)
    sum_n = np.sum(uhat.real**2 + uhat.imag**2, axis=(0, 1))
    return sum_a, sum_b2, sum_n


def decision_samples(inputs, w_ap, x_user, g_direct, w_pilot, w_data, rho, eta, symbols):
    """Per-trial combined decision statistics r[t, k] for fixed symbols."""
    u, uhat = _channels_and_estimates(inputs, w_ap, x_user, g_direct, w_pilot)
    b = np.einsum("tmk,tml->tkl", np.conj(uhat), u)
    weighted = np.sqrt(rho) * (np.sqrt(eta) * symbols)
    signal = b @ weighted
    noise = np.einsum("tmk,tm->tk", np.conj(uhat), w_data)
    return signal + noise


def _channels_and_estimates(inputs, w_ap, x_user, g_direct, w_pilot):
    mixed = x_user @ inputs.mix.T
    cascade = np.einsum("tmi,tki->tmk", np.conj(w_ap), mixed)
    u = inputs.sqrt_direct * g_direct + inputs.cascade_scale * cascade
    group_sum = u @ inputs.share
    projected = inputs.sqrt_pilot_energy * group_sum + w_pilot[:, :, inputs.pilot_of]
    uhat = inputs.coef * projected
    return u, uhat
