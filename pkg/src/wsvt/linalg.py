"""Dense matrix primitives: SVD, thresholding operators, norms, CSV I/O.

Matrices are 2-D float64 numpy arrays (row-major storage, numpy's
default). Every public operation treats its inputs as immutable and
returns fresh arrays, so values can be shared freely across threads.
"""

from typing import NamedTuple

import numpy as np

from .errors import NumericalError


class SvdFactors(NamedTuple):
    """Full thin SVD ``M = U @ diag(sigma) @ V.T``.

    U is m x k, V is n x k with orthonormal columns, sigma is a
    descending nonnegative k-vector, k = min(m, n). Singular vectors
    are sign-ambiguous; consume only sign-invariant quantities
    (reconstructions, norms, projectors).
    """

    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray

    def reconstruct(self):
        """Multiply the factors back into a dense matrix."""
        return (self.U * self.sigma) @ self.V.T


def as_matrix(a, name="matrix"):
    """Validate and convert input to a dense 2-D float64 array.

    Rejects empty arrays, wrong dimensionality, and non-finite entries
    (NaN/Inf never enter the solvers).
    """
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got ndim={m.ndim}")
    if m.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def svd(M):
    """Thin SVD of a dense matrix.

    Returns:
        SvdFactors with descending singular values.

    Raises:
        NumericalError: if the underlying LAPACK routine fails to
            converge (never returns silent garbage).
    """
    M = as_matrix(M)
    try:
        U, s, Vt = np.linalg.svd(M, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge: {exc}") from exc
    return SvdFactors(U, s, Vt.T)


def svdvals(M):
    """Singular values only (descending), cheaper than a full SVD."""
    M = as_matrix(M)
    try:
        return np.linalg.svd(M, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge: {exc}") from exc


def soft_threshold(x, tau):
    """Soft-thresholding sign(x) * max(|x| - tau, 0), elementwise."""
    if tau < 0:
        raise ValueError(f"tau must be nonnegative, got {tau}")
    return np.sign(x) * np.maximum(np.abs(x) - tau, 0.0)


def svt_shrink(M, tau):
    """Singular value shrinkage U S_tau(Sigma) V^T.

    This is the proximal operator of tau * nuclear norm: the unique
    minimizer of 0.5 * ||M - B||_F^2 + tau * ||B||_*. The result has
    rank equal to the number of singular values exceeding tau.
    """
    if tau < 0:
        raise ValueError(f"tau must be nonnegative, got {tau}")
    U, s, V = svd(M)
    return (U * np.maximum(s - tau, 0.0)) @ V.T


def hard_threshold_rank(M, r):
    """Best rank-r approximation: keep the r largest singular values.

    Raises:
        ValueError: if r is negative or exceeds min(rows, cols).
    """
    M = as_matrix(M)
    kmax = min(M.shape)
    if not 0 <= r <= kmax:
        raise ValueError(f"rank must be in [0, {kmax}], got {r}")
    if r == 0:
        return np.zeros_like(M)
    U, s, V = svd(M)
    return (U[:, :r] * s[:r]) @ V[:, :r].T


def spectral_norm(M):
    """Largest singular value (operator 2-norm)."""
    return float(svdvals(M)[0])


def nuclear_norm(M):
    """Sum of singular values."""
    return float(np.sum(svdvals(M)))


def frobenius_norm(M):
    """Root sum of squared entries."""
    return float(np.linalg.norm(M, "fro"))


def save_matrix_csv(path, M):
    """Write a matrix as CSV: one row per line, '.' decimal, no header."""
    M = as_matrix(M)
    np.savetxt(path, M, delimiter=",", fmt="%.17g")


def load_matrix_csv(path):
    """Read a matrix written by save_matrix_csv (or any headerless CSV)."""
    M = np.loadtxt(path, delimiter=",", ndmin=2)
    return as_matrix(M, name=str(path))
