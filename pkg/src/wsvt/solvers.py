"""Low-rank solvers: weighted SVT via ADM, closed-form SVT, rank-r PCA,
and robust-PCA baselines (inexact ALM and accelerated proximal gradient).

The weighted solver minimizes

    0.5 * ||(X - B) W||_F^2 + tau * ||B||_*

for a nonsingular weight matrix W by alternating minimization of the
augmented Lagrangian of the split problem C = B W, D = B:

    L(C, D, Y, mu) = 0.5 ||XW - C||_F^2 + tau ||D||_*
                     + <Y, D - C W^-1> + mu/2 ||D - C W^-1||_F^2.

Every solve records a per-iteration trace used by the convergence
diagnostics in diagnose_bounds().
"""

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DegenerateInputError, NumericalError
from .linalg import as_matrix, frobenius_norm, soft_threshold, svd, svdvals, svt_shrink, hard_threshold_rank

# Penalty growth is capped to avoid float overflow; iterations past the
# cap keep mu fixed.
MU_CAP = 1e12
# Reject weight matrices with condition estimate above this.
MAX_WEIGHT_CONDITION = 1e12

# Diagnostic tolerances, pinned once for the whole artifact.
INCREMENT_TOL = 1e-9     # Lagrangian increment inequality slack
DUAL_TOL = 1e-6          # spectral bound on the multiplier
SANDWICH_TOL = 1e-7      # objective sandwich slack
COUPLING_FACTOR = 20.0   # max/median bound on mu_k * residual_k


@dataclass(frozen=True)
class WsvtParams:
    """Configuration of the weighted solver.

    Defaults are the background-estimation settings (tau=4500, mu0=5,
    rho=1.1, stopping threshold 1e-7 on |L_{k+1} - L_k|).
    """

    tau: float = 4500.0
    mu0: float = 5.0
    rho: float = 1.1
    epsilon: float = 1e-7
    max_iter: int = 500

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not self.mu0 > 0:
            raise ValueError(f"mu0 must be positive, got {self.mu0}")
        if not self.rho > 1:
            raise ValueError(f"rho must exceed 1, got {self.rho}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")


@dataclass(frozen=True)
class IterationRecord:
    """Diagnostics of one solver pass.

    Pass k consumes iterates (C_k, D_k, Y_k) and penalty mu_k and
    produces (C_{k+1}, D_{k+1}, Y_{k+1}). The record stores:

      mu                = mu_k = mu0 * rho^k (until the cap),
      L                 = L(C_{k+1}, D_{k+1}, Y_k, mu_k), evaluated
                          after the D-update and before the Y-update,
      coupling_residual = ||D_{k+1} - C_{k+1} W^-1||_F,
      y_spectral        = ||Y_{k+1}||_2,
      objective         = 0.5 ||XW - C_{k+1}||_F^2 + tau ||D_{k+1}||_*.
    """

    k: int
    mu: float
    L: float
    coupling_residual: float
    y_spectral: float
    objective: float


@dataclass(frozen=True)
class WsvtSolution:
    """Final decomposition B = C W^-1 plus iterates and trace."""

    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    Y: np.ndarray
    trace: tuple
    converged: bool

    @property
    def iterations(self):
        return len(self.trace)


@dataclass(frozen=True)
class RpcaParams:
    """Configuration of the RPCA baselines.

    lam defaults to 1/sqrt(max(m, n)), resolved against the data at
    solve time; mu/rho are the inexact-ALM penalty settings.
    """

    lam: float | None = None
    mu: float = 1.5
    rho: float = 1.25
    epsilon: float = 1e-7
    max_iter: int = 1000

    def __post_init__(self):
        if self.lam is not None and not self.lam > 0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if not self.rho > 1:
            raise ValueError(f"rho must exceed 1, got {self.rho}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")

    def resolve_lam(self, shape):
        return self.lam if self.lam is not None else 1.0 / math.sqrt(max(shape))


@dataclass(frozen=True)
class RpcaIterationRecord:
    k: int
    mu: float
    residual: float  # ||X - lowrank - sparse||_F / ||X||_F


class _WeightOps:
    """Precomputed actions of a fixed nonsingular weight matrix.

    For diagonal W every inverse reduces to entrywise reciprocals; for
    general W the inverse and the eigendecomposition of W^T W are
    formed once per solve.
    """

    def __init__(self, W, n_expected):
        W = as_matrix(W, "W")
        if W.shape != (n_expected, n_expected):
            raise ValueError(
                f"W must be {n_expected}x{n_expected}, got {W.shape[0]}x{W.shape[1]}"
            )
        cond = np.linalg.cond(W)
        if not np.isfinite(cond) or cond > MAX_WEIGHT_CONDITION:
            raise DegenerateInputError(
                f"weight matrix is singular or ill-conditioned (cond={cond:.3e})"
            )
        self.W = W
        self._diag = None
        if np.count_nonzero(W - np.diag(np.diagonal(W))) == 0:
            self._diag = np.diagonal(W).copy()
        if self._diag is None:
            self._inv = np.linalg.inv(W)
            lam, Q = np.linalg.eigh(W.T @ W)
            self._eig = lam
            self._Q = Q

    def times_w(self, M):
        """M @ W."""
        if self._diag is not None:
            return M * self._diag
        return M @ self.W

    def times_w_inv(self, M):
        """M @ W^-1."""
        if self._diag is not None:
            return M / self._diag
        return M @ self._inv

    def times_w_inv_t(self, M):
        """M @ (W^-1)^T."""
        if self._diag is not None:
            return M / self._diag
        return M @ self._inv.T

    def c_update(self, A, mu):
        """A @ (I + mu (W^T W)^-1)^-1 via the eigendecomposition of W^T W."""
        if self._diag is not None:
            w2 = self._diag**2
            return A * (w2 / (w2 + mu))
        return (A @ self._Q * (self._eig / (self._eig + mu))) @ self._Q.T


def wsvt_solve(X, W, params=None):
    """Solve the weighted singular value thresholding problem by ADM.

    Iterates, starting from C = XW, D = X, Y = 0, mu = mu0:

        C   <- (XW + mu D (W^-1)^T + Y (W^-1)^T)(I + mu (W^T W)^-1)^-1
        UsV <- svd(C W^-1 - Y/mu)
        D   <- U S_{tau/mu}(Sigma) V^T
        Y   <- Y + mu (D - C W^-1)
        mu  <- rho * mu   (capped at MU_CAP)

    and stops when |L_{k+1} - L_k| < epsilon or at max_iter.

    Args:
        X: m x n data matrix, finite entries.
        W: n x n nonsingular weight matrix (condition estimate must not
            exceed MAX_WEIGHT_CONDITION).
        params: WsvtParams; defaults to the background preset.

    Returns:
        WsvtSolution with B = C W^-1 and the full iteration trace.

    Raises:
        DegenerateInputError: singular or ill-conditioned W.
        NumericalError: SVD failure or non-finite Lagrangian, carrying
            the iteration index.
    """
    X = as_matrix(X, "X")
    p = params if params is not None else WsvtParams()
    ops = _WeightOps(W, X.shape[1])

    XW = ops.times_w(X)
    C = XW.copy()
    D = X.copy()
    Y = np.zeros_like(X)
    mu = p.mu0

    trace = []
    converged = False
    prev_L = None
    for k in range(p.max_iter):
        C = ops.c_update(XW + ops.times_w_inv_t(mu * D + Y), mu)
        E = ops.times_w_inv(C)  # C W^-1
        M = E - Y / mu
        try:
            U, s, V = svd(M)
        except NumericalError as exc:
            raise NumericalError(f"SVD failed at iteration {k}: {exc}", iteration=k) from exc
        s_shrunk = np.maximum(s - p.tau / mu, 0.0)
        D = (U * s_shrunk) @ V.T
        R = D - E

        fit = 0.5 * frobenius_norm(XW - C) ** 2
        d_nuclear = float(s_shrunk.sum())
        res = frobenius_norm(R)
        L = fit + p.tau * d_nuclear + float(np.vdot(Y, R)) + 0.5 * mu * res**2
        objective = fit + p.tau * d_nuclear
        if not np.isfinite(L):
            raise NumericalError(f"Lagrangian diverged at iteration {k}", iteration=k)

        # Y + mu (D - E) == mu (D - M): the dual update in closed form,
        # whose exact SVD is -U (mu * min(Sigma, tau/mu)) V^T.
        Y = mu * (D - M)
        y_spectral = float(min(mu * s[0], p.tau)) if s.size else 0.0

        trace.append(IterationRecord(k, mu, L, res, y_spectral, objective))
        if prev_L is not None and abs(L - prev_L) < p.epsilon:
            converged = True
            break
        prev_L = L
        mu = min(p.rho * mu, MU_CAP)

    return WsvtSolution(B=E, C=C, D=D, Y=Y, trace=tuple(trace), converged=converged)


def svt_solve(X, tau):
    """Closed-form singular value thresholding (the W = identity case)."""
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    return svt_shrink(as_matrix(X, "X"), tau)


def pca_solve(X, r):
    """Best rank-r approximation in Frobenius norm."""
    return hard_threshold_rank(as_matrix(X, "X"), r)


def augmented_lagrangian(C, D, Y, mu, X, W, tau):
    """Evaluate L(C, D, Y, mu) for the split weighted problem.

    L = 0.5 ||XW - C||_F^2 + tau ||D||_* + <Y, D - C W^-1>
        + mu/2 ||D - C W^-1||_F^2
    """
    C, D, Y, X = (as_matrix(a, n) for a, n in ((C, "C"), (D, "D"), (Y, "Y"), (X, "X")))
    W = as_matrix(W, "W")
    R = D - np.linalg.solve(W.T, C.T).T
    fit = 0.5 * frobenius_norm(X @ W - C) ** 2
    return fit + tau * float(np.sum(svdvals(D))) + float(np.vdot(Y, R)) + 0.5 * mu * frobenius_norm(R) ** 2


def rpca_iealm(X, params=None):
    """Robust PCA by the inexact augmented Lagrange method.

    Decomposes X into a low-rank part (nuclear norm) and a sparse part
    (l1 norm, weight lam). Per iteration: entrywise soft threshold at
    lam/mu, singular value shrinkage at 1/mu, dual update, mu <- rho*mu.
    The initial penalty is params.mu / ||X||_2 (the customary
    data-scaled convention). Stops when
    ||X - lowrank - sparse||_F / ||X||_F < epsilon.

    Returns:
        (lowrank, sparse, trace) with trace a list of RpcaIterationRecord.
    """
    X = as_matrix(X, "X")
    p = params if params is not None else RpcaParams()
    lam = p.resolve_lam(X.shape)
    norm_x = frobenius_norm(X)
    if norm_x == 0.0:
        return np.zeros_like(X), np.zeros_like(X), []

    norm_two = float(svdvals(X)[0])
    # Standard dual initialization: Y = X / max(||X||_2, ||X||_inf / lam).
    Y = X / max(norm_two, float(np.abs(X).max()) / lam)
    L = np.zeros_like(X)
    S = np.zeros_like(X)
    # params.mu is expressed in units of 1/||X||_2, following the usual
    # data-scaled penalty of inexact-ALM implementations.
    mu = p.mu / norm_two
    trace = []
    for k in range(p.max_iter):
        S = soft_threshold(X - L + Y / mu, lam / mu)
        try:
            U, s, V = svd(X - S + Y / mu)
        except NumericalError as exc:
            raise NumericalError(f"SVD failed at iteration {k}: {exc}", iteration=k) from exc
        L = (U * np.maximum(s - 1.0 / mu, 0.0)) @ V.T
        Z = X - L - S
        Y = Y + mu * Z
        res = frobenius_norm(Z) / norm_x
        trace.append(RpcaIterationRecord(k, mu, res))
        mu = min(p.rho * mu, MU_CAP)
        if res < p.epsilon:
            break
    return L, S, trace


def rpca_apg(X, params=None):
    """Robust PCA by accelerated proximal gradient with continuation.

    Minimizes mu (||A||_* + lam ||E||_1) + 0.5 ||X - A - E||_F^2 with
    mu decreasing geometrically (factor 0.9) from 0.99 ||X||_2 to a
    floor of 1e-9 of its start. Same stopping rule and return shape as
    rpca_iealm; params.mu and params.rho are not consulted.
    """
    X = as_matrix(X, "X")
    p = params if params is not None else RpcaParams()
    lam = p.resolve_lam(X.shape)
    norm_x = frobenius_norm(X)
    if norm_x == 0.0:
        return np.zeros_like(X), np.zeros_like(X), []

    A = A_prev = np.zeros_like(X)
    E = E_prev = np.zeros_like(X)
    t = t_prev = 1.0
    mu = 0.99 * float(svdvals(X)[0])
    mu_floor = 1e-9 * mu
    trace = []
    for k in range(p.max_iter):
        beta = (t_prev - 1.0) / t
        YA = A + beta * (A - A_prev)
        YE = E + beta * (E - E_prev)
        G = 0.5 * (YA + YE - X)  # half-gradient of the coupling term
        try:
            U, s, V = svd(YA - G)
        except NumericalError as exc:
            raise NumericalError(f"SVD failed at iteration {k}: {exc}", iteration=k) from exc
        A_prev, E_prev = A, E
        A = (U * np.maximum(s - mu / 2.0, 0.0)) @ V.T
        E = soft_threshold(YE - G, lam * mu / 2.0)
        t_prev, t = t, (1.0 + math.sqrt(1.0 + 4.0 * t * t)) / 2.0
        mu = max(0.9 * mu, mu_floor)
        res = frobenius_norm(X - A - E) / norm_x
        trace.append(RpcaIterationRecord(k, mu, res))
        if res < p.epsilon:
            break
    return A, E, trace


@dataclass(frozen=True)
class BoundReport:
    """Empirical verdicts of the solver's convergence guarantees.

    alpha is the fitted constant in ||D_k - C_k W^-1||_F <= alpha/mu_k;
    beta/gamma are the fitted constants of the objective sandwich
    -beta/mu^2 <= objective_k - f_inf <= gamma/mu over the trace tail.
    """

    alpha: float
    coupling_ok: bool
    coupling_tail_max: float
    coupling_tail_median: float
    increment_ok: bool
    increment_violations: int
    dual_ok: bool
    dual_max: float
    beta: float
    gamma: float
    sandwich_ok: bool

    def all_ok(self):
        return self.coupling_ok and self.increment_ok and self.dual_ok and self.sandwich_ok


def diagnose_bounds(trace, tau):
    """Check a solver trace against the convergence guarantees.

    Verifies, with the module tolerances:
      (a) mu_k * coupling_residual_k stays bounded: over the final half
          of the trace, max <= COUPLING_FACTOR * median; alpha reports
          the overall max.
      (b) L_{k+1} - L_k <= (mu_k + mu_{k-1})/2 * residual^2 of the
          previous pass, within INCREMENT_TOL, at every iteration.
      (c) y_spectral <= tau + DUAL_TOL at every iteration.
      (d) objective_k - f_inf lies in [-beta/mu^2 - tol, gamma/mu + tol]
          over the final half, for fitted finite beta, gamma, taking
          f_inf as the final objective.

    Args:
        trace: sequence of IterationRecord, at least 5 entries.
        tau: nuclear-norm weight of the solve that produced the trace.

    Raises:
        ValueError: fewer than 5 records.
    """
    records = list(trace)
    if len(records) < 5:
        raise ValueError(f"trace too short for diagnostics: {len(records)} < 5")

    scaled = np.array([r.mu * r.coupling_residual for r in records])
    alpha = float(scaled.max())
    tail = scaled[len(records) // 2 :]
    tail_max = float(tail.max())
    tail_median = float(np.median(tail))
    coupling_ok = tail_max <= COUPLING_FACTOR * tail_median or tail_max == 0.0

    violations = 0
    for prev, cur in zip(records, records[1:]):
        bound = 0.5 * (cur.mu + prev.mu) * prev.coupling_residual**2
        if cur.L - prev.L > bound + INCREMENT_TOL:
            violations += 1
    increment_ok = violations == 0

    dual_max = max(r.y_spectral for r in records)
    dual_ok = dual_max <= tau + DUAL_TOL

    f_inf = records[-1].objective
    beta = 0.0
    gamma = 0.0
    obj_tail = records[len(records) // 2 :]
    for r in obj_tail:
        diff = r.objective - f_inf
        if diff > 0:
            gamma = max(gamma, diff * r.mu)
        elif diff < 0:
            beta = max(beta, -diff * r.mu**2)
    sandwich_ok = math.isfinite(beta) and math.isfinite(gamma) and all(
        -beta / r.mu**2 - SANDWICH_TOL <= r.objective - f_inf <= gamma / r.mu + SANDWICH_TOL
        for r in obj_tail
    )

    return BoundReport(
        alpha=alpha,
        coupling_ok=coupling_ok,
        coupling_tail_max=tail_max,
        coupling_tail_median=tail_median,
        increment_ok=increment_ok,
        increment_violations=violations,
        dual_ok=dual_ok,
        dual_max=dual_max,
        beta=beta,
        gamma=gamma,
        sandwich_ok=sandwich_ok,
    )


TRACE_CSV_HEADER = ("k", "mu", "L", "coupling_residual", "y_spectral", "objective")


def save_trace_csv(path, trace):
    """Write a WSVT trace as CSV with the canonical header."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_CSV_HEADER)
        for r in trace:
            writer.writerow([r.k, repr(r.mu), repr(r.L), repr(r.coupling_residual),
                             repr(r.y_spectral), repr(r.objective)])


def save_rpca_trace_csv(path, trace):
    """Write an RPCA trace as CSV (k, mu, residual)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("k", "mu", "residual"))
        for r in trace:
            writer.writerow([r.k, repr(r.mu), repr(r.residual)])
