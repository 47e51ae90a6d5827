"""Monte-Carlo trial kernels: compiled extension with numpy fallback.

The compiled kernel is selected automatically when the extension built; set
``RISCF_BACKEND=python`` or ``RISCF_BACKEND=compiled`` to force a choice
(forcing ``compiled`` without the extension raises at import of this module's
``accumulate_uatf``).  Both backends consume identical pre-generated draws,
so the choice only affects speed and last-bit rounding.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import numpy_backend

try:
    from . import _uatf_cy
except ImportError:
    _uatf_cy = None

_FORCED = os.environ.get("RISCF_BACKEND", "").strip().lower()
if _FORCED == "python":
    _ACTIVE = "python"
elif _FORCED == "compiled":
    if _uatf_cy is None:
        raise ImportError("RISCF_BACKEND=compiled but the extension is not built")
    _ACTIVE = "compiled"
else:
    _ACTIVE = "compiled" if _uatf_cy is not None else "python"


def backend_name() -> str:
    return _ACTIVE


def compiled_available() -> bool:
    return _uatf_cy is not None


@dataclass(frozen=True)
class KernelInputs:
    """Scenario-level constants consumed by the trial kernels.

    mix                N x N matrix F^H Phi F (F the correlation factor)
    sqrt_direct        (M, K) sqrt of direct-link gains
    cascade_scale      (M, K) element area times sqrt of the two RIS-leg gains
    coef               (M, K) MMSE scaling coefficients
    pilot_of           (K,) pilot index per user
    share              (K, K) 0/1 pilot-sharing matrix
    sqrt_pilot_energy  sqrt(p tau_p)
    n_pilots           tau_p
    """

    mix: np.ndarray
    sqrt_direct: np.ndarray
    cascade_scale: np.ndarray
    coef: np.ndarray
    pilot_of: np.ndarray
    share: np.ndarray
    sqrt_pilot_energy: float
    n_pilots: int


def draw_batch(rng: np.random.Generator, trials: int, inputs: KernelInputs):
    """Standard complex Gaussian draws for one batch, in a fixed order."""
    m, k = inputs.sqrt_direct.shape
    n = inputs.mix.shape[0]

    def crandn(*shape):
        return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)

    w_ap = crandn(trials, m, n)
    x_user = crandn(trials, k, n)
    g_direct = crandn(trials, m, k)
    w_pilot = crandn(trials, m, inputs.n_pilots)
    return w_ap, x_user, g_direct, w_pilot


def accumulate_uatf(inputs: KernelInputs, w_ap, x_user, g_direct, w_pilot):
    if _ACTIVE == "compiled":
        return _uatf_cy.accumulate_uatf(inputs, w_ap, x_user, g_direct, w_pilot)
    return numpy_backend.accumulate_uatf(inputs, w_ap, x_user, g_direct, w_pilot)


def decision_samples(inputs: KernelInputs, w_ap, x_user, g_direct, w_pilot, w_data, rho, eta, symbols):
    return numpy_backend.decision_samples(
        inputs, w_ap, x_user, g_direct, w_pilot, w_data, rho, eta, symbols
    )
