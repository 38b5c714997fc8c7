"""
Small dense real-matrix kernel.

Moore-Penrose pseudoinverse by truncated SVD, symmetric eigendecomposition with
a reproducible ordering and sign convention, and the induced norms used by the
energy formulas. All functions are pure and take array_like inputs.
"""

import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatch, NonSymmetric
from .settings import get_tolerance

logger = logging.getLogger(__name__)


def as_matrix(data, name: str = "matrix") -> np.ndarray:
    """
    Validate and convert array_like data to a finite float64 matrix.

    One-dimensional input is read as a column vector.
    """
    A = np.array(data, dtype=np.float64)
    if A.ndim == 1:
        A = A.reshape(-1, 1)
    if A.ndim != 2 or A.shape[0] == 0 or A.shape[1] == 0:
        raise DimensionMismatch(f"{name} must be a non-empty 2-D array, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise DimensionMismatch(f"{name} contains NaN or Inf entries")
    return A


def as_vector(data, name: str = "vector") -> np.ndarray:
    """Validate and convert array_like data to a finite 1-D float64 vector"""
    v = np.array(data, dtype=np.float64).reshape(-1)
    if v.size == 0:
        raise DimensionMismatch(f"{name} is empty")
    if not np.all(np.isfinite(v)):
        raise DimensionMismatch(f"{name} contains NaN or Inf entries")
    return v


@dataclass(frozen=True, eq=False)
class SymmetricEigen:
    """Eigenvalues sorted descending with orthonormal eigenvector columns"""
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def lambda_min(self) -> float:
        return float(self.eigenvalues[-1])

    def reconstruct(self) -> np.ndarray:
        """V diag(lambda) V^T"""
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.T


class MatrixNorms(NamedTuple):
    one: float
    inf: float
    two: float


def pseudoinverse(A) -> np.ndarray:
    """
    Compute the Moore-Penrose pseudoinverse of a matrix.

    Singular values below max(rows, cols) * eps * sigma_max (times the
    configured cutoff factor) are treated as zero.

    Parameters
    ----------
    A : array_like
        Finite real matrix of shape (rows, cols)

    Returns
    -------
    ndarray
        The pseudoinverse, shape (cols, rows)
    """
    A = as_matrix(A)
    U, s, Vt = np.linalg.svd(A, full_matrices=False)

    sigma_max = s[0] if s.size else 0.0
    tol = get_tolerance('pinv_cutoff_factor') * max(A.shape) * np.finfo(A.dtype).eps * sigma_max
    large = s > tol
    s_inv = np.zeros_like(s)
    s_inv[large] = 1.0 / s[large]
    logger.debug(f"pinv {A.shape}: rank {int(large.sum())}, sigma_max {sigma_max:.3e}")

    return (Vt.T * s_inv) @ U.T


def matrix_rank(A) -> int:
    """Numerical rank using the same cutoff as pseudoinverse"""
    A = as_matrix(A)
    s = np.linalg.svd(A, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    tol = get_tolerance('pinv_cutoff_factor') * max(A.shape) * np.finfo(A.dtype).eps * s[0]
    return int(np.sum(s > tol))


def symmetric_eigen(S) -> SymmetricEigen:
    """
    Eigendecomposition of a real symmetric matrix.

    Eigenvalues come back sorted descending; each eigenvector is flipped so its
    first non-negligible entry is positive. Eigenvalues within the clamp
    tolerance below zero are set to zero, so PSD inputs never report negative
    spectrum from round-off.
    """
    S = as_matrix(S)
    if S.shape[0] != S.shape[1]:
        raise DimensionMismatch(f"symmetric_eigen needs a square matrix, got {S.shape}")

    scale = max(1.0, float(np.max(np.abs(S))))
    asymmetry = float(np.max(np.abs(S - S.T))) / scale
    tol = get_tolerance('symmetry')
    if asymmetry > tol:
        raise NonSymmetric(asymmetry, tol)

    w, V = np.linalg.eigh(0.5 * (S + S.T))
    # stable, so repeated eigenvalues keep the solver's column order
    order = np.argsort(-w, kind='stable')
    w = w[order]
    V = V[:, order]

    clamp = get_tolerance('eigen_clamp') * scale
    w[(w < 0.0) & (w > -clamp)] = 0.0

    for j in range(V.shape[1]):
        column = V[:, j]
        nonzero = np.flatnonzero(np.abs(column) > 1e-12)
        if nonzero.size and column[nonzero[0]] < 0.0:
            V[:, j] = -column

    return SymmetricEigen(eigenvalues=w, eigenvectors=V)


def gram_eigen(A) -> SymmetricEigen:
    """Eigendecomposition of the Gram product A^T A"""
    A = as_matrix(A)
    return symmetric_eigen(A.T @ A)


def spectral_norm(A) -> float:
    """Largest singular value, via the eigenvalues of A^T A"""
    return float(np.sqrt(max(gram_eigen(A).lambda_max, 0.0)))


def norms(A) -> MatrixNorms:
    """
    Induced 1-, inf- and 2-norms.

    For a column vector these reduce to the vector 1-, inf- and Euclidean
    norms.
    """
    A = as_matrix(A)
    absA = np.abs(A)
    one = float(absA.sum(axis=0).max())
    inf = float(absA.sum(axis=1).max())
    if A.shape[1] == 1:
        two = float(np.linalg.norm(A[:, 0]))
    else:
        two = float(np.linalg.svd(A, compute_uv=False)[0])
    return MatrixNorms(one=one, inf=inf, two=two)
