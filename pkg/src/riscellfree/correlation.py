"""RIS element layout and the sinc spatial-correlation model.

All AP-side and user-side covariance matrices share one N x N correlation
matrix ``R`` and differ only by positive scalars (large-scale gain times
element area).  The model therefore stores ``R`` once and keeps every
covariance as a ``(scale, shared R)`` pair, which keeps memory at O(N^2)
instead of O(M K N^2) and makes the trace algebra used by the closed-form
throughput a pair of cached scalars.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ElementLayout:
    """Positions of the RIS elements on a vertical rectangular grid.

    Element x (1-based) sits at [0, mod(x-1, N_H) d_H, floor((x-1)/N_H) d_V],
    i.e. the grid is filled row-major along the horizontal axis.
    """

    n_h: int
    n_v: int
    d_h: float
    d_v: float
    positions: np.ndarray  # (N, 3) in metres

    @property
    def count(self) -> int:
        return self.n_h * self.n_v


def element_positions(n_h: int, n_v: int, d_h: float, d_v: float) -> ElementLayout:
    if n_h < 1 or n_v < 1:
        raise ValueError("element counts must be >= 1")
    if d_h <= 0 or d_v <= 0:
        raise ValueError("element sizes must be positive")
    idx = np.arange(n_h * n_v)
    positions = np.column_stack([
        np.zeros_like(idx, dtype=float),
        (idx % n_h) * d_h,
        (idx // n_h) * d_v,
    ])
    return ElementLayout(n_h=n_h, n_v=n_v, d_h=d_h, d_v=d_v, positions=positions)


def build_sinc_matrix(layout: ElementLayout, wavelength: float) -> np.ndarray:
    """Correlation matrix R with [R]_lt = sinc(2 ||u_l - u_t|| / wavelength).

    np.sinc implements sin(pi x)/(pi x) with the removable singularity at 0,
    so the diagonal is exactly 1.
    """
    if wavelength <= 0:
        raise ValueError("wavelength must be positive")
    diff = layout.positions[:, None, :] - layout.positions[None, :, :]
    dist = np.sqrt(np.sum(diff**2, axis=-1))
    return np.sinc(2.0 * dist / wavelength)


def factorize_psd(matrix: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Factor F with F F^H = matrix, for symmetric PSD input.

    Eigen-based rather than Cholesky: the sinc matrix at quarter-wavelength
    spacing is numerically rank deficient, and Cholesky fails on semidefinite
    input.  Eigenvalues in [-tol, 0) are clipped to zero; anything below -tol
    means the matrix is indefinite and raises.
    """
    matrix = np.asarray(matrix, dtype=float)
    eigvals, eigvecs = np.linalg.eigh(matrix)
    if eigvals.min() < -tol:
        raise ValueError(f"matrix indefinite: min eigenvalue {eigvals.min():.3e} < -{tol:.0e}")
    eigvals = np.clip(eigvals, 0.0, None)
    return eigvecs * np.sqrt(eigvals)


@dataclass(frozen=True)
class ScaledCovariance:
    """A covariance matrix represented as scale * shared_matrix (never copied)."""

    scale: float
    matrix: np.ndarray

    def trace(self) -> float:
        return self.scale * float(np.trace(self.matrix))

    def dense(self) -> np.ndarray:
        return self.scale * self.matrix


@dataclass
class CorrelationModel:
    """Shared correlation structure plus per-AP / per-user large-scale scalars.

    The AP-m covariance is ``ris_ap_gain[m] * d_h * d_v * R`` and the user-k
    covariance is ``ris_user_gain[k] * d_h * d_v * R``.
    """

    R: np.ndarray
    d_h: float
    d_v: float
    ris_ap_gain: np.ndarray  # (M,)
    ris_user_gain: np.ndarray  # (K,)
    _factor: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_elements(self) -> int:
        return self.R.shape[0]

    @property
    def element_area(self) -> float:
        return self.d_h * self.d_v

    @property
    def factor(self) -> np.ndarray:
        """Lazy F with F F^H = R; only sampling paths need it."""
        if self._factor is None:
            self._factor = factorize_psd(self.R)
        return self._factor

    def covariance_of(self, side: str, index: int) -> ScaledCovariance:
        """Covariance of the AP-RIS (side='ap') or RIS-user (side='user') channel."""
        if side == "ap":
            scale = float(self.ris_ap_gain[index])
        elif side == "user":
            scale = float(self.ris_user_gain[index])
        else:
            raise ValueError("side must be 'ap' or 'user'")
        if scale < 0:
            raise ValueError("large-scale scalar must be non-negative")
        return ScaledCovariance(scale=scale * self.element_area, matrix=self.R)


def identity_correlation(n: int) -> np.ndarray:
    """Spatially-independent fading: R = I (element area scaling retained)."""
    return np.eye(n)


def phase_weighted_traces(R: np.ndarray, phase: np.ndarray, area: float) -> tuple:
    """Cached scalars tr(A) and tr(A^2) for A = Phi^H (area R) Phi (area R).

    ``phase`` holds the unit-modulus diagonal of Phi.  With every covariance a
    scalar multiple of R, every trace of products of phase-conjugated
    covariances reduces to these two scalars times large-scale factors.
    A is similar to a PSD matrix, so both traces are real and non-negative.
    """
    phase = np.asarray(phase)
    conj_rot = R * np.outer(np.conj(phase), phase)  # Phi^H R Phi
    prod = conj_rot @ R
    tr_single = float(np.sum(conj_rot * R.T).real) * area**2
    tr_square = float(np.sum(prod * prod.T).real) * area**4
    return tr_single, tr_square
