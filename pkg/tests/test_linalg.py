import numpy as np
import pytest

from unionrec import linalg
from unionrec.exceptions import DimensionMismatchError, RankDeficientError


def test_qr_identity_columns():
    a = np.eye(3)[:, :2]
    q, r = linalg.qr_thin(a)
    assert np.allclose(np.abs(q), a, atol=1e-12)
    assert np.allclose(np.abs(np.diag(r)), 1.0, atol=1e-12)


def test_qr_single_column_normalization():
    q, r = linalg.qr_thin(np.array([[3.0], [4.0]]))
    assert np.allclose(np.abs(q[:, 0]), [0.6, 0.8])
    assert np.isclose(abs(r[0, 0]), 5.0)


def test_qr_reassembles_random_matrix():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((8, 3))
    q, r = linalg.qr_thin(a)
    assert np.linalg.norm(q @ r - a) <= 1e-10 * np.linalg.norm(a)
    assert np.linalg.norm(q.T @ q - np.eye(3)) <= 1e-10


def test_qr_rank_deficient_raises():
    a = np.ones((5, 2))  # duplicate columns
    with pytest.raises(RankDeficientError):
        linalg.qr_thin(a)
    with pytest.raises(RankDeficientError):
        linalg.qr_thin(np.zeros((4, 1)))


def test_qr_shape_and_finiteness_checks():
    with pytest.raises(DimensionMismatchError):
        linalg.qr_thin(np.ones((2, 3)))
    with pytest.raises(DimensionMismatchError):
        linalg.qr_thin(np.array([[1.0], [np.nan]]))


def test_residual_project_in_span_is_zero():
    rng = np.random.default_rng(1)
    b = rng.standard_normal((7, 3))
    y = b @ rng.standard_normal(3)
    r = linalg.residual_project(b, y)
    assert np.linalg.norm(r) <= 1e-9 * np.linalg.norm(y)


def test_residual_project_canonical_case():
    b = np.array([[1.0], [0.0]])
    r = linalg.residual_project(b, np.array([1.0, 2.0]))
    assert np.allclose(r, [0.0, 2.0], atol=1e-12)


def test_residual_project_matches_explicit_inverse():
    rng = np.random.default_rng(2)
    b = rng.standard_normal((6, 2))
    y = rng.standard_normal(6)
    p = b @ np.linalg.inv(b.T @ b) @ b.T
    expected = y - p @ y
    assert np.allclose(linalg.residual_project(b, y), expected, atol=1e-9)


def test_nullspace_basis_canonical_case():
    qn = linalg.nullspace_basis(np.array([[1.0], [0.0]]))
    assert qn.shape == (2, 1)
    assert np.allclose(np.abs(qn[:, 0]), [0.0, 1.0], atol=1e-12)


def test_nullspace_orthonormal_and_annihilating():
    rng = np.random.default_rng(3)
    b = rng.standard_normal((9, 4))
    qn = linalg.nullspace_basis(b)
    assert qn.shape == (9, 5)
    assert np.linalg.norm(qn.T @ qn - np.eye(5)) <= 1e-10
    assert np.linalg.norm(b.T @ qn) <= 1e-9 * np.linalg.norm(b)


def test_nullspace_energy_matches_residual():
    rng = np.random.default_rng(4)
    for m, k in [(5, 2), (8, 3), (12, 6)]:
        b = rng.standard_normal((m, k))
        y = rng.standard_normal(m)
        qn = linalg.nullspace_basis(b)
        r = linalg.residual_project(b, y)
        assert np.isclose(
            np.linalg.norm(qn.T @ y), np.linalg.norm(r), rtol=1e-9, atol=1e-12
        )


def test_least_squares_consistent_system():
    rng = np.random.default_rng(5)
    b = rng.standard_normal((10, 4))
    c = rng.standard_normal(4)
    assert np.allclose(linalg.least_squares(b, b @ c), c, atol=1e-9)


def test_least_squares_orthonormal_basis():
    rng = np.random.default_rng(6)
    q, _ = np.linalg.qr(rng.standard_normal((8, 3)))
    y = rng.standard_normal(8)
    assert np.allclose(linalg.least_squares(q, y), q.T @ y, atol=1e-10)


def test_least_squares_matches_normal_equations():
    rng = np.random.default_rng(7)
    b = rng.standard_normal((9, 3))
    y = rng.standard_normal(9)
    expected = np.linalg.solve(b.T @ b, b.T @ y)
    got = linalg.least_squares(b, y)
    assert np.allclose(got, expected, rtol=1e-9)
    resid = y - b @ got
    assert np.linalg.norm(b.T @ resid) <= 1e-9 * np.linalg.norm(y)


def test_projector_invariants_random_grid():
    # idempotence, complementarity, annihilation across shapes
    rng = np.random.default_rng(8)
    for m, k in [(4, 1), (6, 2), (10, 4), (15, 7), (20, 3)]:
        b = rng.standard_normal((m, k))
        q = linalg.thin_q(b)
        p = q @ q.T
        assert np.linalg.norm(p @ p - p) <= 1e-9
        y = rng.standard_normal(m)
        py, ry = p @ y, linalg.residual_project(b, y)
        assert abs(py @ py + ry @ ry - y @ y) <= 1e-9 * max(1.0, y @ y)
        assert np.linalg.norm((np.eye(m) - p) @ b) <= 1e-9 * np.linalg.norm(b)
