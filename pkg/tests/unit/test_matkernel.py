#!/usr/bin/env python3
"""
Tests for the dense matrix kernel: pseudoinverse, symmetric eigendecomposition, norms.
"""

import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

# Add the project root to sys.path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.errors import DimensionMismatch, NonSymmetric
from src.matkernel import gram_eigen, matrix_rank, norms, pseudoinverse, spectral_norm, symmetric_eigen

ROBOT_B = np.array([[2.0, 1.0, 1.0], [0.2, -1.0, 1.0]])


def _penrose_errors(A, P):
    """Relative residuals of the four Penrose conditions"""
    scale_a = max(np.linalg.norm(A), 1e-300)
    scale_p = max(np.linalg.norm(P), 1e-300)
    AP = A @ P
    PA = P @ A
    return (
        np.linalg.norm(AP @ A - A) / scale_a,
        np.linalg.norm(PA @ P - P) / scale_p,
        np.linalg.norm(AP - AP.T),
        np.linalg.norm(PA - PA.T),
    )


def test_pseudoinverse_identity():
    """Identity is its own pseudoinverse"""
    np.testing.assert_allclose(pseudoinverse(np.eye(2)), np.eye(2), atol=1e-15)


def test_pseudoinverse_zero_matrix():
    """Zero matrix maps to the zero transpose shape"""
    P = pseudoinverse(np.zeros((2, 3)))
    assert P.shape == (3, 2)
    assert np.all(P == 0.0)


def test_pseudoinverse_full_row_rank_matches_direct_formula():
    """B^+ = B^T (B B^T)^-1 for the underwater-robot input matrix"""
    BBt = ROBOT_B @ ROBOT_B.T
    det = BBt[0, 0] * BBt[1, 1] - BBt[0, 1] * BBt[1, 0]
    inverse = np.array([[BBt[1, 1], -BBt[0, 1]], [-BBt[1, 0], BBt[0, 0]]]) / det
    np.testing.assert_allclose(pseudoinverse(ROBOT_B), ROBOT_B.T @ inverse, rtol=1e-12, atol=1e-14)


def test_pseudoinverse_rank_deficient():
    """Exactly rank-deficient input keeps only the nonzero singular direction"""
    A = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    np.testing.assert_allclose(pseudoinverse(A), A.T, atol=1e-15)
    assert matrix_rank(A) == 1


def test_penrose_conditions_on_random_matrices():
    """Four Penrose conditions within 1e-9 on 1000 random matrices up to 8x8"""
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(1000):
        rows, cols = rng.integers(1, 9, size=2)
        A = rng.normal(size=(rows, cols))
        worst = max(worst, *_penrose_errors(A, pseudoinverse(A)))
    assert worst <= 1e-9


def test_symmetric_eigen_identity():
    """I gives lambda = (1, 1) and V = I"""
    eig = symmetric_eigen(np.eye(2))
    np.testing.assert_allclose(eig.eigenvalues, [1.0, 1.0])
    np.testing.assert_allclose(eig.eigenvectors, np.eye(2), atol=1e-12)


def test_symmetric_eigen_diagonal_sorted_descending():
    """diag(4, 1) gives lambda = (4, 1) and V = I"""
    eig = symmetric_eigen(np.diag([4.0, 1.0]))
    np.testing.assert_allclose(eig.eigenvalues, [4.0, 1.0])
    np.testing.assert_allclose(eig.eigenvectors, np.eye(2), atol=1e-12)
    assert eig.lambda_max == 4.0
    assert eig.lambda_min == 1.0


def test_symmetric_eigen_scalar_gram():
    """B_uc^T B_uc for B_uc = [1, 1]^T is the 1x1 matrix (2)"""
    eig = gram_eigen(np.array([[1.0], [1.0]]))
    np.testing.assert_allclose(eig.eigenvalues, [2.0])
    np.testing.assert_allclose(eig.eigenvectors, [[1.0]])


def test_symmetric_eigen_rejects_asymmetric():
    """Asymmetry beyond tolerance raises NonSymmetric"""
    with pytest.raises(NonSymmetric):
        symmetric_eigen(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_symmetric_eigen_rejects_rectangular():
    with pytest.raises(DimensionMismatch):
        symmetric_eigen(np.ones((2, 3)))


def test_symmetric_eigen_sign_convention():
    """First non-negligible entry of every eigenvector is positive"""
    rng = np.random.default_rng(3)
    for _ in range(50):
        A = rng.normal(size=(4, 4))
        eig = symmetric_eigen(A + A.T)
        for j in range(4):
            column = eig.eigenvectors[:, j]
            first = column[np.flatnonzero(np.abs(column) > 1e-12)[0]]
            assert first > 0.0


@given(seed=st.integers(0, 2**32 - 1), size=st.integers(1, 6))
def test_symmetric_eigen_reconstruction_and_orthonormality(seed, size):
    """V diag(lambda) V^T reproduces S and V is orthonormal, within 1e-10"""
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(size, size))
    S = A + A.T
    eig = symmetric_eigen(S)
    assert np.all(np.diff(eig.eigenvalues) <= 0.0)
    assert np.linalg.norm(eig.reconstruct() - S) <= 1e-10 * max(1.0, np.linalg.norm(S))
    np.testing.assert_allclose(eig.eigenvectors.T @ eig.eigenvectors, np.eye(size), atol=1e-10)
    # ||V^T||_inf = ||V||_1
    assert norms(eig.eigenvectors.T).inf == pytest.approx(norms(eig.eigenvectors).one, rel=1e-15)


def test_psd_spectrum_is_clamped():
    """A rank-deficient Gram matrix never reports negative eigenvalues"""
    rng = np.random.default_rng(5)
    for _ in range(50):
        F = rng.normal(size=(5, 2))
        eig = gram_eigen(F.T @ F @ np.ones((2, 3)))
        assert np.all(eig.eigenvalues >= 0.0)


@given(seed=st.integers(0, 2**32 - 1), size=st.integers(1, 6))
def test_rayleigh_inequality(seed, size):
    """lambda_min ||x||^2 <= x^T P x <= lambda_max ||x||^2"""
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(size, size))
    P = A + A.T
    x = rng.normal(size=size)
    eig = symmetric_eigen(P)
    quad = float(x @ P @ x)
    sq = float(x @ x)
    slack = 1e-10 * max(1.0, np.abs(eig.eigenvalues).max()) * sq
    assert eig.lambda_min * sq - slack <= quad <= eig.lambda_max * sq + slack


def test_norms_of_matrix():
    """Induced 1- and inf-norms are max column and row sums"""
    result = norms(np.array([[1.0, -2.0], [3.0, 4.0]]))
    assert result.one == 6.0
    assert result.inf == 7.0
    assert result.two == pytest.approx(np.linalg.norm(np.array([[1.0, -2.0], [3.0, 4.0]]), 2))


def test_norms_of_vector():
    """Vector (3, -4): one = 7, inf = 4, two = 5"""
    result = norms(np.array([3.0, -4.0]))
    assert result == (7.0, 4.0, 5.0)


def test_norms_of_identity():
    result = norms(np.eye(3))
    assert result.one == result.inf == 1.0
    assert result.two == pytest.approx(1.0)


def test_spectral_norm_matches_largest_singular_value():
    np.testing.assert_allclose(spectral_norm(ROBOT_B), np.linalg.svd(ROBOT_B, compute_uv=False)[0], rtol=1e-12)


def test_nonfinite_input_rejected():
    with pytest.raises(DimensionMismatch):
        pseudoinverse(np.array([[1.0, np.nan]]))


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
