"""Scikit-learn style estimators wrapping the two recovery algorithms.

Both estimators follow the sparse-coding convention: ``fit(X, y)`` takes the
sampled dictionary X (the M x N product of the sampling matrix and the
signal basis) and the measurement vector y, estimates which blocks of the
coefficient vector are active, and refits the coefficients on the selected
columns by least squares.  ``predict(X)`` returns ``X @ coef_``, so the
estimators drop into pipelines or model-selection utilities unchanged.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator

from . import decode
from .exceptions import DimensionMismatchError, DomainError
from .linalg import least_squares
from .model import block_columns, enumerate_supports, DEFAULT_SUPPORT_CAP


def _validate_problem(X, y, block_size):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if X.ndim != 2:
        raise DimensionMismatchError(f"X must be 2-d, got shape {X.shape}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise DimensionMismatchError("X and y must be finite")
    if X.shape[0] != y.shape[0]:
        raise DimensionMismatchError(
            f"X has {X.shape[0]} rows but y has length {y.shape[0]}"
        )
    if X.shape[1] % block_size != 0:
        raise DimensionMismatchError(
            f"{X.shape[1]} columns do not divide into blocks of {block_size}"
        )
    return X, y


class _BlockSupportEstimator(BaseEstimator):
    """Shared fit plumbing: validation, coefficient refit, prediction."""

    def __init__(self, n_nonzero_blocks=1, block_size=1):
        self.n_nonzero_blocks = n_nonzero_blocks
        self.block_size = block_size

    def _check(self, X, y):
        if int(self.n_nonzero_blocks) < 1:
            raise DomainError("n_nonzero_blocks must be >= 1")
        if int(self.block_size) < 1:
            raise DomainError("block_size must be >= 1")
        return _validate_problem(X, y, int(self.block_size))

    def _finish(self, X, y, support):
        cols = block_columns(support, int(self.block_size))
        coef = np.zeros(X.shape[1])
        coef[cols] = least_squares(X[:, cols], y)
        self.support_ = tuple(support)
        self.coef_ = coef
        r = y - X @ coef
        self.residual_energy_ = float(r @ r)
        return self

    def predict(self, X):
        X = np.asarray(X, dtype=float)
        return X @ self.coef_


class MLSubspaceDecoder(_BlockSupportEstimator):
    """Exhaustive maximum-likelihood block support estimator.

    Scores every one of the C(L, k0) candidate supports by projection
    residual energy and keeps the minimizer.  Exhaustive search is
    exponential in the number of blocks, so enumeration is capped at
    ``support_cap`` candidates.

    Attributes after fit: ``support_``, ``coef_``, ``residual_energy_`` and,
    when ``store_energies=True``, ``per_candidate_energies_``.
    """

    def __init__(
        self,
        n_nonzero_blocks=1,
        block_size=1,
        store_energies=False,
        support_cap=DEFAULT_SUPPORT_CAP,
    ):
        super().__init__(n_nonzero_blocks, block_size)
        self.store_energies = store_energies
        self.support_cap = support_cap

    def fit(self, X, y):
        X, y = self._check(X, y)
        d = int(self.block_size)
        n_blocks = X.shape[1] // d
        supports = enumerate_supports(n_blocks, int(self.n_nonzero_blocks), self.support_cap)
        cands = [X[:, block_columns(u, d)] for u in supports]
        result = decode.ml_decode(y, cands)
        if self.store_energies:
            self.per_candidate_energies_ = result.per_candidate_energies
        return self._finish(X, y, supports[result.estimated])


class BlockOMP(_BlockSupportEstimator):
    """Greedy block orthogonal matching pursuit support estimator.

    Runs ``n_nonzero_blocks`` rounds of block selection by residual
    correlation; a drop-in, cheap alternative to the exhaustive decoder.
    """

    def fit(self, X, y):
        X, y = self._check(X, y)
        d = int(self.block_size)
        n_blocks = X.shape[1] // d
        blocks = [X[:, i * d : (i + 1) * d] for i in range(n_blocks)]
        support = decode.bomp(y, blocks, int(self.n_nonzero_blocks))
        return self._finish(X, y, support)
