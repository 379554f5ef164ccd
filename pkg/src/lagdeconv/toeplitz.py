"""Lower triangular Toeplitz operators derived from kernel expansion coefficients.

The coefficient map from a target function to its causal convolution with a
kernel is lower triangular and Toeplitz in the Laguerre basis; this module
holds that operator (stored by first column only), its forward-substitution
solver, and diagnostics relating the operator symbol to the kernel's Laplace
transform.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Optional

import numpy as np

if TYPE_CHECKING:  # pragma: no cover
    from .coeffs import CoeffVector

__all__ = [
    "SINGULARITY_TOL",
    "SingularOperatorError",
    "ToeplitzLT",
    "SymbolDiagnostics",
    "from_kernel_coeffs",
    "truncate",
    "dense_matrix",
    "solve_lower",
    "nesting_check",
    "symbol_diagnostics",
    "growth_exponent",
]

# Below this magnitude the leading diagonal entry is treated as zero.
SINGULARITY_TOL = 1e-13


class SingularOperatorError(ValueError):
    """The operator's diagonal entry is numerically zero, so it cannot be solved."""


@dataclass(frozen=True)
class ToeplitzLT:
    """Lower triangular Toeplitz operator stored by its first column.

    Entry (i, j) of the full matrix equals first_col[i - j] for i >= j and 0
    otherwise; the dense matrix is never materialized on the solve path.
    """

    first_col: np.ndarray
    size: int

    def __post_init__(self):
        col = np.asarray(self.first_col, dtype=float)
        object.__setattr__(self, "first_col", col)
        object.__setattr__(self, "size", int(self.size))
        if col.ndim != 1 or col.size != self.size or self.size < 1:
            raise ValueError("first_col must be a 1-d vector matching size >= 1")

    def apply(self, vec) -> np.ndarray:
        """Matrix-vector product, computed as a truncated convolution."""
        v = np.asarray(vec, dtype=float)
        if v.shape != (self.size,):
            raise ValueError("vector length must match operator size")
        return np.convolve(self.first_col, v)[: self.size]


def from_kernel_coeffs(g_coeffs: "CoeffVector", scale: float) -> ToeplitzLT:
    """Operator mapping target coefficients to convolution coefficients.

    The first column is the difference sequence of the kernel coefficients
    divided by sqrt(2a). The coefficient vector must be tagged with the same
    scale, since coefficients at different scales are incomparable.
    """
    if g_coeffs.scale != scale:
        raise ValueError(
            f"coefficient scale {g_coeffs.scale} does not match requested {scale}"
        )
    v = np.asarray(g_coeffs.values, dtype=float)
    col = np.empty_like(v)
    col[0] = v[0]
    if v.size > 1:
        col[1:] = np.diff(v)
    return ToeplitzLT(first_col=col / np.sqrt(2.0 * scale), size=v.size)


def truncate(op: ToeplitzLT, m: int) -> ToeplitzLT:
    """Leading m-by-m principal sub-operator (same first column, shortened)."""
    if not 1 <= m <= op.size:
        raise ValueError(f"truncation size {m} outside [1, {op.size}]")
    return ToeplitzLT(first_col=op.first_col[:m], size=m)


def dense_matrix(op: ToeplitzLT) -> np.ndarray:
    """Materialize the dense matrix. For diagnostics, rank checks and test
    oracles only; the solve path works from the first column."""
    m = op.size
    out = np.zeros((m, m))
    for i in range(m):
        out[i:, i] = op.first_col[: m - i]
    return out


def solve_lower(op: ToeplitzLT, rhs, singularity_tol: float = SINGULARITY_TOL):
    """Solve op @ x = rhs by forward substitution.

    rhs may be a vector or a matrix of stacked column right-hand sides.
    Raises SingularOperatorError when the diagonal entry is below the
    tolerance.
    """
    b = op.first_col
    if abs(b[0]) < singularity_tol:
        raise SingularOperatorError(
            f"leading coefficient {b[0]!r} is below the singularity tolerance"
        )
    r = np.asarray(rhs, dtype=float)
    if r.shape[0] != op.size:
        raise ValueError("right-hand side length must match operator size")
    x = np.empty_like(r)
    x[0] = r[0] / b[0]
    for i in range(1, op.size):
        x[i] = (r[i] - b[1 : i + 1][::-1] @ x[:i]) / b[0]
    return x


def nesting_check(op_M: ToeplitzLT, m: int, rhs_M, tol: float = 1e-10) -> bool:
    """Whether truncating the solution commutes with truncating the system.

    The first m entries of the full solve must match the solve of the
    m-truncated operator against the m-truncated right-hand side; this is the
    property that lets one large solve serve every smaller model size.
    """
    if not 1 <= m <= op_M.size:
        raise ValueError(f"m={m} outside [1, {op_M.size}]")
    rhs_M = np.asarray(rhs_M, dtype=float)
    full = solve_lower(op_M, rhs_M)[:m]
    part = solve_lower(truncate(op_M, m), rhs_M[:m])
    denom = max(float(np.linalg.norm(part)), 1.0)
    return float(np.linalg.norm(full - part)) <= tol * denom


@dataclass(frozen=True)
class SymbolDiagnostics:
    """Truncated operator symbol sampled on the unit circle.

    symbol_values uses the operator-normalized coefficients and is directly
    comparable to the kernel's Laplace transform evaluated through the
    Cayley-type map a(1+z)/(1-z); raw_symbol_values carries the extra
    sqrt(2a) of the plain coefficient differences. growth_exponent is filled
    by callers who also ran the variance-norm pipeline.
    """

    theta_grid: np.ndarray
    symbol_values: np.ndarray
    raw_symbol_values: np.ndarray
    mapped_laplace: Optional[np.ndarray]
    growth_exponent: Optional[float] = None


def symbol_diagnostics(
    g_coeffs,
    laplace_transform: Optional[Callable],
    scale: float,
    theta_grid,
) -> SymbolDiagnostics:
    """Compare the truncated symbol sum with the mapped Laplace transform.

    Accepts a tagged coefficient vector or a bare (possibly empty) array of
    kernel coefficients. The angle grid must stay away from multiples of
    2*pi, where the map to the Laplace domain is singular.
    """
    theta = np.asarray(theta_grid, dtype=float)
    wrapped = np.mod(theta, 2.0 * np.pi)
    if np.any(np.minimum(wrapped, 2.0 * np.pi - wrapped) < 1e-3):
        raise ValueError("theta grid must avoid multiples of 2*pi by at least 1e-3")

    values = getattr(g_coeffs, "values", g_coeffs)
    values = np.asarray(values, dtype=float)
    z = np.exp(1j * theta)
    if values.size == 0:
        symbol = np.zeros_like(z)
    else:
        from .coeffs import CoeffVector

        col = from_kernel_coeffs(CoeffVector(values, scale), scale).first_col
        symbol = np.exp(1j * np.outer(theta, np.arange(col.size))) @ col

    mapped = None
    if laplace_transform is not None:
        s = scale * (1.0 + z) / (1.0 - z)
        mapped = np.asarray([laplace_transform(si) for si in s], dtype=complex)

    return SymbolDiagnostics(
        theta_grid=theta,
        symbol_values=symbol,
        raw_symbol_values=np.sqrt(2.0 * scale) * symbol,
        mapped_laplace=mapped,
    )


def growth_exponent(v_squared_by_m) -> float:
    """Least-squares slope of log(v^2) against log(m).

    For kernels whose coefficient map degrades polynomially, the variance
    norms grow like m^(2r) and the fitted slope estimates 2r.
    """
    arr = np.asarray(v_squared_by_m, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("expected a sequence of (m, v_squared) pairs")
    m, v2 = arr[:, 0], arr[:, 1]
    if np.unique(m).size < 5:
        raise ValueError("need at least 5 pairs with distinct m")
    if np.any(m <= 0) or np.any(v2 <= 0):
        raise ValueError("m and v_squared must be positive")
    slope = np.polyfit(np.log(m), np.log(v2), 1)[0]
    return float(slope)
