"""Laguerre basis evaluation and design matrices over finite sample grids.

The basis functions are phi_k(t) = sqrt(2a) * exp(-a*t) * L_k(2*a*t) with
L_k the classical Laguerre polynomials. They are orthonormal on the positive
half line and diagonalize causal convolution up to a triangular correction,
which is what the rest of the package exploits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

__all__ = [
    "SampleGrid",
    "LaguerreContext",
    "laguerre_poly",
    "laguerre_fn",
    "basis_matrix",
    "build_context",
    "convolve_basis_identity_check",
]


@dataclass(frozen=True)
class SampleGrid:
    """Observation times t_1 <= ... <= t_n inside [0, horizon].

    Attributes
    ----------
    times : (n,) ndarray
        Nondecreasing observation times, possibly irregular.
    horizon : float
        Right end T of the acquisition window; times may not exceed it.
    """

    times: np.ndarray
    horizon: float

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "horizon", float(self.horizon))
        if times.ndim != 1 or times.size < 2:
            raise ValueError("a sample grid needs at least two observation times")
        if np.any(np.diff(times) < 0):
            raise ValueError("observation times must be nondecreasing")
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if times[0] < 0:
            raise ValueError("observation times must be nonnegative")
        if times[-1] > self.horizon * (1 + 1e-12):
            raise ValueError("observation times must not exceed the horizon")

    @property
    def n(self) -> int:
        return self.times.size

    @classmethod
    def equispaced(cls, n: int, horizon: float) -> "SampleGrid":
        """Regular design 0 = t_1 < ... < t_n = horizon."""
        return cls(np.linspace(0.0, horizon, n), horizon)


def _recurrence(order: int, x: np.ndarray, start: np.ndarray) -> np.ndarray:
    """Run the three-term recurrence up to `order`, seeded with `start` at k=0.

    Works for plain polynomials (start = 1) and for the exponentially damped
    variant (start = exp(-x/2)); the recurrence is linear so the damping
    factor rides along unchanged.
    """
    prev = start
    if order == 0:
        return prev
    cur = (1.0 - x) * start
    for k in range(1, order):
        prev, cur = cur, ((2 * k + 1 - x) * cur - k * prev) / (k + 1)
    return cur


def laguerre_poly(order: int, x) -> float | np.ndarray:
    """Laguerre polynomial L_k(x) for x >= 0 via the stable recurrence."""
    if order < 0:
        raise ValueError("order must be nonnegative")
    arr = np.asarray(x, dtype=float)
    out = _recurrence(order, arr, np.ones_like(arr))
    return float(out) if arr.ndim == 0 else out


def laguerre_fn(order: int, scale: float, t) -> float | np.ndarray:
    """Laguerre basis function phi_k(t) = sqrt(2a) exp(-a t) L_k(2 a t).

    The exponential damping is carried through the recurrence instead of
    being applied to L_k afterwards, so large arguments (2*a*t up to ~700)
    do not overflow intermediate values even for high orders.
    """
    if order < 0:
        raise ValueError("order must be nonnegative")
    if scale <= 0:
        raise ValueError("scale must be positive")
    arr = np.asarray(t, dtype=float)
    x = 2.0 * scale * arr
    out = np.sqrt(2.0 * scale) * _recurrence(order, x, np.exp(-scale * arr))
    return float(out) if arr.ndim == 0 else out


def basis_matrix(times, scale: float, max_order: int) -> np.ndarray:
    """Matrix with columns phi_0 ... phi_{max_order-1} evaluated at `times`.

    One damped recurrence pass fills all columns.
    """
    if max_order < 1:
        raise ValueError("max_order must be at least 1")
    if scale <= 0:
        raise ValueError("scale must be positive")
    t = np.atleast_1d(np.asarray(times, dtype=float))
    x = 2.0 * scale * t
    out = np.empty((t.size, max_order))
    prev = np.exp(-scale * t)
    out[:, 0] = prev
    if max_order > 1:
        cur = (1.0 - x) * prev
        out[:, 1] = cur
        for k in range(1, max_order - 1):
            prev, cur = cur, ((2 * k + 1 - x) * cur - k * prev) / (k + 1)
            out[:, k + 1] = cur
    return np.sqrt(2.0 * scale) * out


@dataclass(frozen=True)
class LaguerreContext:
    """Cached design quantities for one (grid, scale, max_order) triple.

    design[i, k] = phi_k(t_i); gram = design^T design. The thin QR factors
    of the design are kept alongside so downstream least squares never has
    to form or invert the gram matrix. Immutable after construction.
    """

    scale: float
    max_order: int
    grid: SampleGrid
    design: np.ndarray
    gram: np.ndarray
    q_factor: np.ndarray
    r_factor: np.ndarray


def build_context(grid: SampleGrid, scale: float, max_order: int) -> LaguerreContext:
    """Evaluate and cache the design matrix for the given basis size."""
    if max_order > grid.n:
        raise ValueError(
            f"max_order {max_order} exceeds the number of observations {grid.n}"
        )
    design = basis_matrix(grid.times, scale, max_order)
    gram = design.T @ design
    q_factor, r_factor = np.linalg.qr(design, mode="reduced")
    return LaguerreContext(
        scale=float(scale),
        max_order=int(max_order),
        grid=grid,
        design=design,
        gram=gram,
        q_factor=q_factor,
        r_factor=r_factor,
    )


def convolve_basis_identity_check(
    k: int, j: int, scale: float, t: float
) -> tuple[float, float]:
    """Both sides of the basis self-convolution identity, as a diagnostic.

    The causal convolution of phi_k and phi_j telescopes into a difference of
    two higher-order basis functions scaled by (2a)^{-1/2}. Returns the
    numerically integrated left side and the closed-form right side; callers
    assert agreement. Quadrature never enters the estimator path.
    """
    t = float(t)
    if t == 0.0:
        return 0.0, 0.0
    left, _ = quad(
        lambda x: laguerre_fn(k, scale, x) * laguerre_fn(j, scale, t - x),
        0.0,
        t,
        limit=200,
    )
    right = (
        laguerre_fn(k + j, scale, t) - laguerre_fn(k + j + 1, scale, t)
    ) / np.sqrt(2.0 * scale)
    return left, right
