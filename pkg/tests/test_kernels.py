import numpy as np
import pytest

from riscellfree.config import substream
from riscellfree.kernels import (
    KernelInputs,
    backend_name,
    compiled_available,
    draw_batch,
    numpy_backend,
)


def _tiny_inputs(m=3, k=2, n=4, n_pilots=2, seed=0):
    rng = np.random.default_rng(seed)
    factor = rng.standard_normal((n, n)) / np.sqrt(n)
    phi = np.exp(1j * rng.uniform(-np.pi, np.pi, n))
    pilot_of = np.arange(k) % n_pilots
    share = (pilot_of[:, None] == pilot_of[None, :]).astype(float)
    return KernelInputs(
        mix=np.ascontiguousarray(factor.T @ (phi[:, None] * factor)).astype(complex),
        sqrt_direct=rng.uniform(0.1, 1.0, (m, k)),
        cascade_scale=rng.uniform(0.1, 1.0, (m, k)),
        coef=rng.uniform(0.1, 1.0, (m, k)),
        pilot_of=pilot_of.astype(np.int64),
        share=share,
        sqrt_pilot_energy=1.7,
        n_pilots=n_pilots,
    )


def _naive_accumulate(inputs, w_ap, x_user, g_direct, w_pilot):
    """Literal per-trial transcription of the trial arithmetic (test oracle)."""
    trials, m, n = w_ap.shape
    k = x_user.shape[1]
    sum_a = np.zeros(k, dtype=complex)
    sum_b2 = np.zeros((k, k))
    sum_n = np.zeros(k)
    for t in range(trials):
        u = np.zeros((m, k), dtype=complex)
        for mi in range(m):
            for ki in range(k):
                cascade = 0.0 + 0.0j
                for i in range(n):
                    inner = sum(inputs.mix[i, j] * x_user[t, ki, j] for j in range(n))
                    cascade += np.conj(w_ap[t, mi, i]) * inner
                u[mi, ki] = (
                    inputs.sqrt_direct[mi, ki] * g_direct[t, mi, ki]
                    + inputs.cascade_scale[mi, ki] * cascade
                )
        uhat = np.zeros((m, k), dtype=complex)
        for mi in range(m):
            for ki in range(k):
                group_sum = sum(u[mi, q] for q in range(k) if inputs.share[q, ki])
                projected = inputs.sqrt_pilot_energy * group_sum + w_pilot[t, mi, inputs.pilot_of[ki]]
                uhat[mi, ki] = inputs.coef[mi, ki] * projected
        for ki in range(k):
            b_row = np.conj(uhat[:, ki]) @ u
            sum_a[ki] += b_row[ki]
            sum_b2[ki] += np.abs(b_row) ** 2
            sum_n[ki] += np.sum(np.abs(uhat[:, ki]) ** 2)
    return sum_a, sum_b2, sum_n


def test_numpy_backend_matches_naive_loop():
    inputs = _tiny_inputs()
    draws = draw_batch(substream(1, "kernel"), 40, inputs)
    fast = numpy_backend.accumulate_uatf(inputs, *draws)
    slow = _naive_accumulate(inputs, *draws)
    for a, b in zip(fast, slow):
        assert np.allclose(a, b, rtol=1e-10)


@pytest.mark.skipif(not compiled_available(), reason="compiled kernel not built")
def test_compiled_backend_matches_numpy():
    from riscellfree.kernels import _uatf_cy

    inputs = _tiny_inputs(m=5, k=4, n=6, n_pilots=2, seed=3)
    draws = draw_batch(substream(2, "kernel"), 128, inputs)
    fast = _uatf_cy.accumulate_uatf(inputs, *draws)
    ref = numpy_backend.accumulate_uatf(inputs, *draws)
    for a, b in zip(fast, ref):
        assert np.allclose(a, b, rtol=1e-10)


def test_draw_batch_deterministic():
    inputs = _tiny_inputs()
    d1 = draw_batch(substream(5, "draw"), 16, inputs)
    d2 = draw_batch(substream(5, "draw"), 16, inputs)
    for a, b in zip(d1, d2):
        assert np.array_equal(a, b)


def test_decision_samples_matches_naive():
    inputs = _tiny_inputs(seed=4)
    trials = 30
    draws = draw_batch(substream(6, "kernel"), trials, inputs)
    rng = substream(7, "data")
    w_data = (rng.standard_normal((trials, 3)) + 1j * rng.standard_normal((trials, 3))) / np.sqrt(2)
    rho = 2.5
    eta = np.array([1.0, 0.5])
    symbols = np.array([1.0 + 0j, -1.0 + 0j])
    got = numpy_backend.decision_samples(inputs, *draws, w_data, rho, eta, symbols)

    u, uhat = _naive_channels(inputs, *draws)
    expected = np.zeros((trials, 2), dtype=complex)
    for t in range(trials):
        b = np.conj(uhat[t]).T @ u[t]
        expected[t] = np.sqrt(rho) * b @ (np.sqrt(eta) * symbols) + np.conj(uhat[t]).T @ w_data[t]
    assert np.allclose(got, expected, rtol=1e-9)


def _naive_channels(inputs, w_ap, x_user, g_direct, w_pilot):
    trials, m, n = w_ap.shape
    k = x_user.shape[1]
    u = np.zeros((trials, m, k), dtype=complex)
    uhat = np.zeros((trials, m, k), dtype=complex)
    for t in range(trials):
        for mi in range(m):
            for ki in range(k):
                inner = inputs.mix @ x_user[t, ki]
                cascade = np.conj(w_ap[t, mi]) @ inner
                u[t, mi, ki] = (
                    inputs.sqrt_direct[mi, ki] * g_direct[t, mi, ki]
                    + inputs.cascade_scale[mi, ki] * cascade
                )
        for mi in range(m):
            for ki in range(k):
                group_sum = sum(u[t, mi, q] for q in range(k) if inputs.share[q, ki])
                uhat[t, mi, ki] = inputs.coef[mi, ki] * (
                    inputs.sqrt_pilot_energy * group_sum + w_pilot[t, mi, inputs.pilot_of[ki]]
                )
    return u, uhat


def test_backend_name_reports_selection():
    assert backend_name() in ("python", "compiled")
