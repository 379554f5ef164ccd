"""Least-squares estimation of basis coefficients from sampled function values.

One projection routine serves both the noisy signal (producing the estimated
convolution coefficients) and the sampled kernel (producing the coefficients
the triangular operator is built from).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .laguerre import LaguerreContext, SampleGrid, basis_matrix, build_context
from .toeplitz import SINGULARITY_TOL, dense_matrix, from_kernel_coeffs

__all__ = [
    "CoeffVector",
    "RankDeficientDesignError",
    "project_samples",
    "select_max_order",
    "implied_eta",
    "reconstruct",
]

# Relative size of a QR diagonal entry below which a column is declared
# linearly dependent on its predecessors.
_RANK_TOL = 1e-13


class RankDeficientDesignError(ValueError):
    """Design matrix is numerically rank deficient.

    Attributes
    ----------
    order : int
        Index of the first basis order whose column adds no new direction.
    """

    def __init__(self, order: int):
        self.order = order
        super().__init__(f"design matrix is rank deficient at basis order {order}")


@dataclass(frozen=True)
class CoeffVector:
    """Coefficients of a truncated basis expansion, tagged with their scale.

    Coefficients computed at different scales live in different bases and
    must never be mixed; the tag makes that mistake loud.
    """

    values: np.ndarray
    scale: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "scale", float(self.scale))
        if values.ndim != 1 or values.size < 1:
            raise ValueError("coefficient vector must be 1-d with length >= 1")
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    def __len__(self) -> int:
        return self.values.size


def project_samples(ctx: LaguerreContext, samples) -> CoeffVector:
    """Least-squares coefficients of the sampled values in the cached design.

    Solves min ||design @ c - samples|| through the cached thin QR factors;
    the gram matrix is never formed or inverted, which matters because the
    design's conditioning is already marginal at the largest usable orders.
    """
    y = np.asarray(samples, dtype=float)
    if y.shape != (ctx.grid.n,):
        raise ValueError(
            f"expected {ctx.grid.n} samples matching the grid, got {y.shape}"
        )
    rdiag = np.abs(np.diag(ctx.r_factor))
    bad = np.nonzero(rdiag < _RANK_TOL * rdiag.max())[0]
    if bad.size:
        raise RankDeficientDesignError(int(bad[0]))
    coef = solve_triangular(ctx.r_factor, ctx.q_factor.T @ y, lower=False)
    return CoeffVector(values=coef, scale=ctx.scale)


def select_max_order(
    grid: SampleGrid,
    scale: float,
    g_samples,
    cap: int = 25,
    cond_threshold: float = 1e12,
) -> int:
    """Largest usable basis size for the given grid, scale and kernel samples.

    Walks down from the cap and returns the first size at which both the
    design gram matrix and the gram of the estimated kernel operator have
    condition number below the threshold. "Full rank" needs a numeric cutoff
    in floating point; the default leaves roughly four digits of headroom.
    """
    if cap < 1:
        raise ValueError("cap must be at least 1")
    g = np.asarray(g_samples, dtype=float)
    if g.shape != (grid.n,):
        raise ValueError("kernel samples must match the grid")
    for max_order in range(min(cap, grid.n), 0, -1):
        ctx = build_context(grid, scale, max_order)
        if np.linalg.cond(ctx.gram) > cond_threshold:
            continue
        try:
            g_hat = project_samples(ctx, g)
        except RankDeficientDesignError:
            continue
        op = from_kernel_coeffs(g_hat, scale)
        if abs(op.first_col[0]) < SINGULARITY_TOL:
            continue
        gm = dense_matrix(op)
        if np.linalg.cond(gm @ gm.T) > cond_threshold:
            continue
        return max_order
    raise ValueError(
        "no basis size passes the rank checks; the grid or kernel is degenerate"
    )


def implied_eta(max_order: int, n: int) -> float:
    """Exponent eta such that max_order = n^((1+eta)/3), for reporting."""
    return 3.0 * np.log(max_order) / np.log(n) - 1.0


def reconstruct(coeffs: CoeffVector, ts) -> np.ndarray:
    """Evaluate the truncated basis expansion at the given times."""
    t = np.asarray(ts, dtype=float)
    if np.any(t < 0):
        raise ValueError("evaluation times must be nonnegative")
    return basis_matrix(t, coeffs.scale, len(coeffs)) @ coeffs.values
