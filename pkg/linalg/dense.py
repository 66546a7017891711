"""
Floating-point pseudoinverse, rank and spectral primitives.

A DenseMatrix is a float64 numpy array. `pinv_numeric` and `numeric_rank`
also accept stacks of shape (..., m, n) so samplers can work block-wise.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import linalg as sla

import config
from exceptions import DegenerateInputError, DomainError, InvalidInputError
from linalg.rational import RationalMatrix

EPS = np.finfo(np.float64).eps


@dataclass(frozen=True)
class SpectralSummary:
    """
    Nonzero-spectrum summary of a symmetric positive semidefinite matrix.

    Attributes:
        lambda_min_nonzero (float): Smallest eigenvalue above the rank tolerance.
        lambda_max_nonzero (float): Largest eigenvalue above the rank tolerance.
        rank (int): Number of eigenvalues above the rank tolerance.
        eigenvalues (tuple): All eigenvalues, sorted descending.
    """

    lambda_min_nonzero: float
    lambda_max_nonzero: float
    rank: int
    eigenvalues: Tuple[float, ...]


def as_dense(M, name: str = "matrix", ndim: int = 2) -> np.ndarray:
    """
    Convert `M` to a float64 array and check it is finite.

    Raises:
        InvalidInputError: If `M` has fewer than `ndim` dimensions, an empty axis,
            or a NaN/Inf entry.
    """
    arr = np.asarray(M, dtype=np.float64)
    if arr.ndim < ndim or 0 in arr.shape:
        raise InvalidInputError(f"{name} must be a non-empty array with at least {ndim} dimensions, got shape {arr.shape}.")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} has non-finite entries.")
    return arr


def default_rank_tol(singular_values: np.ndarray, shape) -> np.ndarray:
    """max(rows, cols) * eps * largest singular value, per matrix of a stack."""
    return max(shape[-2:]) * EPS * np.max(singular_values, axis=-1)


def _effective_tol(s: np.ndarray, shape, rank_tol: float) -> np.ndarray:
    if rank_tol < 0:
        raise InvalidInputError(f"rank_tol must be >= 0, got {rank_tol}.")
    if rank_tol == 0:
        return np.asarray(default_rank_tol(s, shape))
    return np.full(s.shape[:-1], float(rank_tol))


def pinv_with_rank(M, rank_tol: float = 0.0):
    """
    Pseudoinverse and numeric rank from a single SVD.

    Returns:
        tuple: (M⁺, rank); rank is an int for a single matrix, an int array for a stack.
    """
    arr = as_dense(M)
    u, s, vt = np.linalg.svd(arr, full_matrices=False)
    tol = _effective_tol(s, arr.shape, rank_tol)
    keep = s > tol[..., None]
    s_inv = np.where(keep, 1.0 / np.where(keep, s, 1.0), 0.0)
    pinv = np.swapaxes(vt, -1, -2) @ (s_inv[..., None] * np.swapaxes(u, -1, -2))
    rank = np.count_nonzero(keep, axis=-1)
    if arr.ndim == 2:
        rank = int(rank)
    return pinv, rank


def gram_pinv_with_rank(Y, rank_tol: float = 0.0):
    """
    (YᵀY)⁺ and rank(YᵀY) from the SVD of Y, without forming YᵀY.

    The singular values of S = YᵀY are σ(Y)², so the rank rule of
    `pinv_with_rank` is applied to σ(Y)² with S's p × p shape.
    """
    arr = as_dense(Y)
    _, sv, vt = np.linalg.svd(arr, full_matrices=False)
    s = sv**2
    p = arr.shape[-1]
    tol = _effective_tol(s, (p, p), rank_tol)
    keep = s > tol[..., None]
    s_inv = np.where(keep, 1.0 / np.where(keep, s, 1.0), 0.0)
    pinv = np.swapaxes(vt, -1, -2) @ (s_inv[..., None] * vt)
    rank = np.count_nonzero(keep, axis=-1)
    if arr.ndim == 2:
        rank = int(rank)
    return pinv, rank


def pinv_numeric(M, rank_tol: float = 0.0) -> np.ndarray:
    """
    Moore-Penrose pseudoinverse by singular value decomposition.

    Singular values at or below the tolerance are treated as zero. `rank_tol = 0`
    selects `default_rank_tol`.

    Args:
        M (array_like): Matrix, or stack of matrices, to invert.
        rank_tol (float, optional): Absolute singular value cutoff. Defaults to 0 (auto).

    Returns:
        np.ndarray: M⁺ with shape (..., n, m).

    Raises:
        InvalidInputError: If `M` is not finite or `rank_tol` is negative.
    """
    return pinv_with_rank(M, rank_tol)[0]


def numeric_rank(M, rank_tol: float = 0.0):
    """Count of singular values above the effective tolerance (int, or int array for a stack)."""
    arr = as_dense(M)
    s = np.linalg.svd(arr, compute_uv=False)
    tol = _effective_tol(s, arr.shape, rank_tol)
    rank = np.count_nonzero(s > tol[..., None], axis=-1)
    return int(rank) if arr.ndim == 2 else rank


def symmetrize(M, name: str = "matrix") -> np.ndarray:
    """
    Check ‖M − Mᵀ‖ ≤ SYMMETRY_TOL·‖M‖ (max-abs norms) and return (M + Mᵀ)/2.

    Raises:
        DomainError: If `M` is not square or not symmetric within tolerance.
    """
    arr = as_dense(M, name)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DomainError(f"{name} must be square, got shape {arr.shape}.")
    gap = np.max(np.abs(arr - arr.T))
    scale = np.max(np.abs(arr))
    if gap > config.SYMMETRY_TOL * scale:
        raise DomainError(f"{name} is not symmetric: max |M - M^T| = {gap:.3e}.")
    return (arr + arr.T) / 2.0


def sym_sqrt_pd(Sigma) -> np.ndarray:
    """
    Symmetric positive definite square root A with A·A = Sigma.

    Raises:
        DomainError: If Sigma is not symmetric, or its smallest eigenvalue is not positive.
    """
    sym = symmetrize(Sigma, "Sigma")
    w, v = sla.eigh(sym)
    if w[0] <= 0:
        raise DomainError(f"Sigma is not positive definite: smallest eigenvalue {w[0]!r}.")
    root = (v * np.sqrt(w)) @ v.T
    return (root + root.T) / 2.0


def spectral_summary(M, rank_tol: float = 0.0) -> SpectralSummary:
    """
    Eigenvalues (descending), rank and nonzero extremes of a symmetric PSD matrix.

    The rank uses the same tolerance rule as `numeric_rank`, applied to |eigenvalues|.

    Raises:
        DomainError: If `M` is not symmetric.
        DegenerateInputError: If `M` has no eigenvalue above the tolerance.
    """
    sym = symmetrize(M)
    w = sla.eigh(sym, eigvals_only=True)[::-1]
    tol = _effective_tol(np.abs(w), sym.shape, rank_tol)
    nonzero = w[w > tol]
    if nonzero.size == 0:
        raise DegenerateInputError("matrix has no nonzero eigenvalue.")
    return SpectralSummary(
        lambda_min_nonzero=float(nonzero[-1]),
        lambda_max_nonzero=float(nonzero[0]),
        rank=int(nonzero.size),
        eigenvalues=tuple(float(x) for x in w),
    )


def penrose_residuals(M, P):
    """
    Max-norm residuals of the four Penrose conditions.

    Returns (‖MPM − M‖, ‖PMP − P‖, ‖(MP)ᵀ − MP‖, ‖(PM)ᵀ − PM‖). Two RationalMatrix
    arguments give exact Fraction residuals.

    Raises:
        InvalidInputError: If P is not cols × rows of M.
    """
    if isinstance(M, RationalMatrix) and isinstance(P, RationalMatrix):
        return M.penrose_residuals(P)

    m = as_dense(M, "M")
    p = as_dense(P, "P")
    if m.ndim != 2 or p.shape != (m.shape[1], m.shape[0]):
        raise InvalidInputError(f"P must have shape {m.shape[::-1]}, got {p.shape}.")
    mp = m @ p
    pm = p @ m

    def max_abs(a: np.ndarray) -> float:
        return float(np.max(np.abs(a)))

    return (
        max_abs(mp @ m - m),
        max_abs(pm @ p - p),
        max_abs(mp.T - mp),
        max_abs(pm.T - pm),
    )
