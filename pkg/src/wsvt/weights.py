"""Data-driven estimation of the diagonal weight matrix.

The weight is inferred from a coarse unweighted decomposition: frames
whose initial foreground is near-empty get a large diagonal weight
lambda_tilde, pulling the refined background toward them. The chain is

    coarse split -> intensity threshold eps1 (foreground histogram)
    -> per-frame percentage scores -> score threshold eps2 (mode)
    -> background frame indices I -> diagonal W.
"""

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateInputError
from .linalg import as_matrix
from .solvers import WsvtParams, wsvt_solve

HISTOGRAM_BINS = 256      # matches 8-bit imagery
SCORE_DECIMALS = 2        # quantization for the score mode
BACKGROUND_NONZERO_TOL = 1e-12


@dataclass(frozen=True)
class CoarseEstimate:
    """Initial background/foreground split; B_in + F_in == X exactly."""

    B_in: np.ndarray
    F_in: np.ndarray


@dataclass(frozen=True)
class WeightSpec:
    """Learned background frame indices and their amplification."""

    indices: tuple
    lambda_tilde: float
    n: int

    def __post_init__(self):
        idx = tuple(sorted(int(i) for i in self.indices))
        object.__setattr__(self, "indices", idx)
        if any(i < 0 or i >= self.n for i in idx):
            raise ValueError(f"indices outside [0, {self.n})")
        if len(set(idx)) != len(idx):
            raise ValueError("duplicate indices")
        if not self.lambda_tilde >= 1:
            raise ValueError(f"lambda_tilde must be >= 1, got {self.lambda_tilde}")


def coarse_estimate(X, params=None):
    """Two unweighted solver passes, split into background + residual.

    The stopping tolerance cannot fire before the two-pass cap, so the
    coarse split is independent of params.epsilon.
    """
    X = as_matrix(X, "X")
    p = params if params is not None else WsvtParams()
    sol = wsvt_solve(X, np.eye(X.shape[1]), replace(p, max_iter=2))
    B_in = sol.B
    return CoarseEstimate(B_in=B_in, F_in=X - B_in)


def epsilon1_from_histogram(F_in):
    """Intensity threshold separating residual floor from foreground.

    Quantizes |F_in| into HISTOGRAM_BINS bins over [0, max] and returns
    the smallest magnitude falling in the second lowest occupied bin
    among entries with positive magnitude.

    Raises:
        DegenerateInputError: all-zero input, or fewer than two
            distinct positive magnitude bins.
    """
    a = np.abs(as_matrix(F_in, "F_in")).ravel()
    amax = float(a.max())
    if amax == 0.0:
        raise DegenerateInputError("coarse foreground is identically zero")
    pos = a[a > 0.0]
    bins = np.minimum((pos * (HISTOGRAM_BINS / amax)).astype(np.int64), HISTOGRAM_BINS - 1)
    occupied = np.unique(bins)
    if occupied.size < 2:
        raise DegenerateInputError(
            "fewer than two distinct positive magnitudes in the foreground histogram"
        )
    second = occupied[1]
    return float(pos[bins == second].min())


def percentage_scores(F_in, B_in, eps1):
    """Per-frame ratio of foreground to background on-pixels, in percent.

    score_j = 100 * #{i : |F_in[i,j]| >= eps1} / #{i : B_in[i,j] != 0}.
    A frame whose background column is entirely zero gets a +inf
    sentinel (it cannot be ranked and is never selected).
    """
    F_in = as_matrix(F_in, "F_in")
    B_in = as_matrix(B_in, "B_in")
    if F_in.shape != B_in.shape:
        raise ValueError(f"shape mismatch {F_in.shape} vs {B_in.shape}")
    fg = (np.abs(F_in) >= eps1).sum(axis=0).astype(np.float64)
    bg = (np.abs(B_in) > BACKGROUND_NONZERO_TOL).sum(axis=0).astype(np.float64)
    return np.where(bg == 0, np.inf, 100.0 * fg / np.maximum(bg, 1.0))


def epsilon2_mode(scores):
    """Mode of the scores after rounding to SCORE_DECIMALS decimals.

    Infinite sentinels are excluded; ties break toward the smallest
    modal value (a more conservative background set).
    """
    s = np.asarray(scores, dtype=np.float64)
    finite = s[np.isfinite(s)]
    if finite.size == 0:
        raise DegenerateInputError("no finite percentage scores")
    rounded = np.round(finite, SCORE_DECIMALS)
    values, counts = np.unique(rounded, return_counts=True)
    return float(values[counts == counts.max()].min())


def select_background_indices(scores, eps2):
    """Frame indices with score <= eps2 (least foreground movement)."""
    s = np.asarray(scores, dtype=np.float64)
    return np.flatnonzero(s <= eps2)


def build_weight_matrix(n, spec):
    """Diagonal weight: lambda_tilde on the background indices, 1 elsewhere.

    Raises:
        DegenerateInputError: empty index set; callers should fall back
            to the identity weight.
    """
    if spec.n != n:
        raise ValueError(f"spec is for n={spec.n}, expected {n}")
    if len(spec.indices) == 0:
        raise DegenerateInputError(
            "no background frames selected; fall back to an identity weight"
        )
    w = np.ones(n)
    w[list(spec.indices)] = spec.lambda_tilde
    return np.diag(w)


def learn_weights(X, params=None, lambda_tilde=5.0):
    """Run the full weight-learning chain on a data matrix.

    Returns:
        (W, spec, info): the n x n diagonal weight, the WeightSpec, and
        a dict with keys epsilon1, epsilon2, scores, indices,
        lambda_tilde, fallback_identity. If no frame qualifies, W falls
        back to the identity (with a warning) and indices is empty.
    """
    X = as_matrix(X, "X")
    n = X.shape[1]
    est = coarse_estimate(X, params)
    eps1 = epsilon1_from_histogram(est.F_in)
    scores = percentage_scores(est.F_in, est.B_in, eps1)
    eps2 = epsilon2_mode(scores)
    indices = select_background_indices(scores, eps2)
    spec = WeightSpec(indices=tuple(int(i) for i in indices), lambda_tilde=lambda_tilde, n=n)
    info = {
        "epsilon1": eps1,
        "epsilon2": eps2,
        "scores": [float(v) for v in scores],
        "indices": [int(i) for i in indices],
        "lambda_tilde": float(lambda_tilde),
        "fallback_identity": False,
    }
    try:
        W = build_weight_matrix(n, spec)
    except DegenerateInputError:
        warnings.warn("weight learning selected no frames; using identity weight")
        W = np.eye(n)
        info["fallback_identity"] = True
    return W, spec, info
