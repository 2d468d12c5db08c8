"""Dense real linear algebra used by the decoders and SNR calculators.

Everything here is a pure function of its inputs.  Orthogonal projections are
always applied through thin QR factors, never through explicit M x M
projector matrices: applying ``P_perp`` to a vector costs O(M k) instead of
O(M^2), which is what keeps exhaustive decoding over hundreds of candidate
subspaces cheap.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular

from .exceptions import DimensionMismatchError, RankDeficientError

# A column counts as dependent when its R diagonal falls below this fraction
# of the largest diagonal.  Monte Carlo draws can be near-degenerate even
# though the model assumes full-rank bases.
RANK_TOL = 1e-10


def as_matrix(a, name="matrix") -> np.ndarray:
    """Validate and return ``a`` as a 2-d float array with finite entries."""
    m = np.asarray(a, dtype=float)
    if m.ndim != 2:
        raise DimensionMismatchError(f"{name} must be 2-d, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DimensionMismatchError(f"{name} contains non-finite entries")
    return m


def as_vector(a, name="vector") -> np.ndarray:
    """Validate and return ``a`` as a 1-d float array with finite entries."""
    v = np.asarray(a, dtype=float)
    if v.ndim != 1:
        raise DimensionMismatchError(f"{name} must be 1-d, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise DimensionMismatchError(f"{name} contains non-finite entries")
    return v


def _check_rank(r: np.ndarray, context: str) -> None:
    diag = np.abs(np.diag(r))
    dmax = diag.max(initial=0.0)
    if dmax == 0.0 or diag.min() < RANK_TOL * dmax:
        raise RankDeficientError(
            f"{context}: column rank below tolerance (min |R_ii| = "
            f"{diag.min(initial=0.0):.3e}, max = {dmax:.3e})"
        )


def qr_thin(a) -> tuple[np.ndarray, np.ndarray]:
    """Thin QR factorization of an M x k matrix with M >= k.

    Returns (Q, R) with Q of shape M x k, orthonormal columns, and R upper
    triangular, using Householder reflections (LAPACK).  Raises
    RankDeficientError when the columns are numerically dependent.
    """
    a = as_matrix(a)
    m, k = a.shape
    if m < k:
        raise DimensionMismatchError(f"need rows >= cols, got {m} x {k}")
    q, r = np.linalg.qr(a, mode="reduced")
    _check_rank(r, "qr_thin")
    return q, r


def thin_q(a) -> np.ndarray:
    """Orthonormal basis for the column span of ``a`` (rank-checked)."""
    return qr_thin(a)[0]


def residual_project(b, y) -> np.ndarray:
    """Residual of y after orthogonal projection onto the columns of b.

    Computes ``P_perp y = y - Q (Q^T y)`` where Q is a thin QR factor of b.
    """
    y = np.asarray(y, dtype=float)
    q = thin_q(b)
    return y - q @ (q.T @ y)


def nullspace_basis(b) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of the span of b.

    For b of shape M x k (full column rank, M > k) returns an M x (M - k)
    matrix whose columns are the eigenvectors of ``P_perp`` with eigenvalue
    one, obtained from the trailing columns of a full QR factorization.
    """
    b = as_matrix(b)
    m, k = b.shape
    if m <= k:
        raise DimensionMismatchError(f"need rows > cols, got {m} x {k}")
    q, r = np.linalg.qr(b, mode="complete")
    _check_rank(r[:k, :], "nullspace_basis")
    return q[:, k:]


def least_squares(b, y) -> np.ndarray:
    """Coefficients c minimizing ||y - b c||_2 via the thin QR factors."""
    y = as_vector(y, "y")
    q, r = qr_thin(b)
    if q.shape[0] != y.shape[0]:
        raise DimensionMismatchError(
            f"b has {q.shape[0]} rows but y has length {y.shape[0]}"
        )
    return solve_triangular(r, q.T @ y, lower=False)
