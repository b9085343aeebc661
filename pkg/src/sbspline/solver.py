"""Penalized least-squares fitting in the reduced model space.

The reduced problem minimizes

    (1/n) |Y - S d - R* c|^2 + lam c' R** c

over ``(d, c)``, where ``S`` holds the null-space basis at the data, ``R*`` the
kernel between data and basis locations and ``R**`` the kernel among basis
locations. Multiplying through by ``n`` gives the normal equations

    [S'S    S'R*          ] [d]   [S'Y ]
    [R*'S   R*'R* + n lam R**] [c] = [R*'Y]

which are assembled once in ``O(n q^2)`` and factorized in ``O(q^3)``.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .kernels import KernelSpec, gram, null_basis

logger = logging.getLogger(__name__)

JITTER_START = 1e-10
JITTER_MAX = 1e-6
FULL_ORACLE_MAX_N = 2000
DOF_TOL = 1e-8


class ConditioningError(np.linalg.LinAlgError):
    """The penalized system stayed singular after the largest jitter."""

    def __init__(self, message, smallest_pivot):
        super().__init__(message)
        self.smallest_pivot = smallest_pivot


class RankError(ValueError):
    pass


class DegenerateDofError(ValueError):
    pass


@dataclass
class FittedSpline:
    """A fitted spline in the unit cube, sufficient to predict anywhere."""

    spec: KernelSpec
    basis: np.ndarray
    d_coef: np.ndarray
    c_coef: np.ndarray
    lam: float
    diagnostics: dict = field(default_factory=dict)
    fitted: np.ndarray | None = field(default=None, repr=False)

    @property
    def q_eff(self) -> int:
        return len(self.basis)

    def predict(self, X_new) -> np.ndarray:
        return predict(self, X_new)


@dataclass
class AssembledSystem:
    """Cross products of the reduced problem that do not depend on lambda.

    ``Z`` maps the free coefficients onto ``c``; it is the identity except
    for conditionally positive definite kernels, where its columns span the
    orthogonal complement of ``S*`` (the null basis at the basis locations).
    """

    S: np.ndarray
    R_star: np.ndarray
    R_ss: np.ndarray
    Y: np.ndarray
    Z: np.ndarray
    M: np.ndarray
    gram_MM: np.ndarray
    MtY: np.ndarray
    penalty: np.ndarray

    @property
    def n(self) -> int:
        return len(self.Y)

    @property
    def m(self) -> int:
        return self.S.shape[1]


def _constraint_basis(S_basis: np.ndarray) -> np.ndarray:
    """Orthonormal basis for ``{c : S_basis' c = 0}``."""
    q, m = S_basis.shape
    Q, _ = np.linalg.qr(S_basis, mode="complete")
    rank = np.linalg.matrix_rank(S_basis)
    return Q[:, rank:] if q > rank else np.zeros((q, 0))


def assemble(X, Y, basis, spec: KernelSpec) -> AssembledSystem:
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float).ravel()
    basis = np.asarray(basis, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if basis.ndim == 1:
        basis = basis[:, None]
    if len(X) != len(Y):
        raise ValueError("X and Y lengths differ")
    if len(basis) < 1:
        raise ValueError("need at least one basis location")
    S = null_basis(spec, X)
    if spec.m > len(X):
        raise RankError(f"null space dimension m={spec.m} exceeds n={len(X)}")
    R_star = gram(spec, X, basis)
    R_ss = gram(spec, basis, basis)
    jit = JITTER_START * np.mean(np.diag(R_ss)) if spec.family != "thinplate-2d" else 0.0
    if jit > 0:
        R_ss = R_ss + jit * np.eye(len(basis))
    if spec.conditional:
        Z = _constraint_basis(null_basis(spec, basis))
    else:
        Z = np.eye(len(basis))
    M = np.hstack([S, R_star @ Z])
    gram_MM = M.T @ M
    MtY = M.T @ Y
    q_free = Z.shape[1]
    penalty = np.zeros((spec.m + q_free, spec.m + q_free))
    penalty[spec.m:, spec.m:] = Z.T @ R_ss @ Z
    return AssembledSystem(S, R_star, R_ss, Y, Z, M, gram_MM, MtY, penalty)


def _factor(H: np.ndarray):
    """Cholesky of ``H`` with relative jitter escalation."""
    scale = np.mean(np.abs(np.diag(H))) or 1.0
    try:
        return linalg.cho_factor(H, lower=True, check_finite=False), 0.0
    except linalg.LinAlgError:
        pass
    jitter = JITTER_START
    while jitter <= JITTER_MAX * (1 + 1e-9):
        try:
            Hj = H + jitter * scale * np.eye(len(H))
            cf = linalg.cho_factor(Hj, lower=True, check_finite=False)
            logger.debug("system factorized with jitter %.1e", jitter)
            return cf, jitter
        except linalg.LinAlgError:
            jitter *= 10.0
    pivots = np.linalg.eigvalsh(H)
    raise ConditioningError(
        f"penalized system singular after jitter {JITTER_MAX:g}; smallest pivot {pivots[0]:.3e}",
        float(pivots[0]),
    )


def _solve_system(system: AssembledSystem, lam: float):
    if lam <= 0:
        raise ValueError("lambda must be positive")
    H = system.gram_MM + system.n * lam * system.penalty
    cf, jitter = _factor(H)
    theta = linalg.cho_solve(cf, system.MtY, check_finite=False)
    return theta, cf, jitter


def _evaluate(system: AssembledSystem, lam: float, with_trace: bool = True) -> dict:
    theta, cf, jitter = _solve_system(system, lam)
    fitted = system.M @ theta
    resid = system.Y - fitted
    out = {"theta": theta, "fitted": fitted, "rss": float(resid @ resid), "jitter": jitter}
    if with_trace:
        # tr A = tr(H^{-1} M'M), O(q^3)
        edf = float(np.trace(linalg.cho_solve(cf, system.gram_MM, check_finite=False)))
        out["edf"] = edf
        dof = system.n - edf
        # an exact zero shows up as rounding noise
        if dof <= DOF_TOL * system.n:
            raise DegenerateDofError(f"tr(I - A) = {dof:.3e} <= 0 at lambda={lam:g}")
        out["gcv"] = system.n * out["rss"] / dof**2
    return out


def _to_model(system, res, spec, basis, lam, diagnostics) -> FittedSpline:
    theta = res["theta"]
    d_coef = theta[:spec.m]
    c_coef = system.Z @ theta[spec.m:]
    return FittedSpline(spec, np.array(basis, dtype=float, copy=True), d_coef, c_coef, float(lam),
                        diagnostics, res["fitted"])


def _basis_points(X, sel):
    idx = getattr(sel, "indices", sel)
    idx = np.asarray(idx, dtype=int)
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    return X[idx]


def fit_restricted(data, sel, spec: KernelSpec, lam: float) -> FittedSpline:
    """Minimize the penalized criterion over the span of the selected kernels.

    Parameters
    ----------
    data : Dataset
        Anything with ``X`` (n x d, unit cube) and ``Y`` attributes.
    sel : BasisSelection or index array
        Rows of ``data.X`` that carry a kernel basis function.
    spec : KernelSpec
    lam : float
        Smoothing parameter, > 0.
    """
    t0 = time.perf_counter()
    basis = _basis_points(data.X, sel)
    system = assemble(data.X, data.Y, basis, spec)
    res = _evaluate(system, lam)
    elapsed = time.perf_counter() - t0
    diag = {"edf": res["edf"], "gcv": res["gcv"], "fit_seconds": elapsed, "jitter": res["jitter"]}
    return _to_model(system, res, spec, basis, lam, diag)


def fit_full_oracle(data, spec: KernelSpec, lam: float) -> FittedSpline:
    """Dense solve with every observation as a basis location.

    Uses the classical system ``(R + n lam I) c + S d = Y``, ``S' c = 0``,
    which is a different route to the same minimizer as :func:`fit_restricted`
    with ``q = n``. Test-scale only.
    """
    X = np.asarray(data.X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    Y = np.asarray(data.Y, dtype=float).ravel()
    n = len(Y)
    if n > FULL_ORACLE_MAX_N:
        raise ValueError(
            f"full oracle refuses n={n} > {FULL_ORACLE_MAX_N}; use fit_restricted with a basis subsample"
        )
    if lam <= 0:
        raise ValueError("lambda must be positive")
    S = null_basis(spec, X)
    m = S.shape[1]
    if m > n:
        raise RankError(f"null space dimension m={m} exceeds n={n}")
    R = gram(spec, X, X)
    K = np.zeros((n + m, n + m))
    K[:n, :n] = R + n * lam * np.eye(n)
    K[:n, n:] = S
    K[n:, :n] = S.T
    rhs = np.concatenate([Y, np.zeros(m)])
    sol = linalg.solve(K, rhs, assume_a="sym")
    c, dvec = sol[:n], sol[n:]
    fitted = S @ dvec + R @ c
    return FittedSpline(spec, X.copy(), dvec, c, float(lam), {}, fitted)


def criterion(data, basis, spec: KernelSpec, lam: float, d_coef, c_coef) -> float:
    """Value of the reduced penalized criterion at given coefficients."""
    X = np.asarray(data.X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    Y = np.asarray(data.Y, dtype=float).ravel()
    basis = np.asarray(basis, dtype=float)
    if basis.ndim == 1:
        basis = basis[:, None]
    S = null_basis(spec, X)
    resid = Y - S @ d_coef - gram(spec, X, basis) @ c_coef
    R_ss = gram(spec, basis, basis)
    return float(resid @ resid / len(Y) + lam * c_coef @ R_ss @ c_coef)


def default_grid() -> np.ndarray:
    return np.logspace(-8, 2, 40)


def _golden(f, a: float, b: float, tol: float) -> tuple[float, float]:
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def gcv_select(data, sel, spec: KernelSpec, grid=None, refine: bool = True):
    """Choose lambda by generalized cross-validation.

    ``V(lam) = n |(I - A) Y|^2 / tr(I - A)^2`` is evaluated on ``grid``
    (default: 40 log-spaced values in [1e-8, 1e2]); the best grid point is
    then refined by golden-section search in log10(lambda) between its
    neighbours, to a tolerance of 0.01.

    Returns
    -------
    lam : float
    model : FittedSpline
        Fit at ``lam``; ``diagnostics`` carries the grid scores.
    """
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float).ravel()
    if grid.size == 0 or np.any(grid <= 0):
        raise ValueError("lambda grid must be non-empty and positive")
    basis = _basis_points(data.X, sel)
    t0 = time.perf_counter()
    system = assemble(data.X, data.Y, basis, spec)
    assemble_seconds = time.perf_counter() - t0
    t0 = time.perf_counter()
    scores = np.empty(len(grid))
    edfs = np.empty(len(grid))
    for i, lam in enumerate(grid):
        res = _evaluate(system, lam)
        scores[i] = res["gcv"]
        edfs[i] = res["edf"]
    best = int(np.argmin(scores))
    lam_star, v_star = float(grid[best]), float(scores[best])

    if refine and len(grid) > 1:
        order = np.argsort(grid)
        pos = int(np.where(order == best)[0][0])
        lo = np.log10(grid[order[max(pos - 1, 0)]])
        hi = np.log10(grid[order[min(pos + 1, len(grid) - 1)]])
        if hi > lo:
            x, v = _golden(lambda t: _evaluate(system, 10.0**t)["gcv"], lo, hi, 1e-2)
            if v < v_star:
                lam_star, v_star = float(10.0**x), float(v)
    gcv_seconds = time.perf_counter() - t0

    t1 = time.perf_counter()
    res = _evaluate(system, lam_star)
    # assembly is shared with the sweep but is part of any single fit
    fit_seconds = assemble_seconds + time.perf_counter() - t1
    diag = {
        "edf": res["edf"],
        "gcv": res["gcv"],
        "gcv_seconds": gcv_seconds,
        "fit_seconds": fit_seconds,
        "jitter": res["jitter"],
        "grid": grid.tolist(),
        "grid_scores": scores.tolist(),
        "grid_edf": edfs.tolist(),
    }
    return lam_star, _to_model(system, res, spec, basis, lam_star, diag)


def predict(model: FittedSpline, X_new) -> np.ndarray:
    """``sum_k d_k xi_k(x) + sum_i c_i R(x*_i, x)`` at each row of ``X_new``."""
    X_new = np.asarray(X_new, dtype=float)
    if X_new.ndim == 1:
        X_new = X_new[:, None] if model.spec.d == 1 else X_new[None, :]
    if X_new.shape[1] != model.spec.d:
        raise ValueError(f"points have {X_new.shape[1]} columns, model expects {model.spec.d}")
    out = null_basis(model.spec, X_new) @ model.d_coef
    # chunk rows so the kernel block stays modest
    step = max(1, 2_000_000 // max(1, model.q_eff))
    for start in range(0, len(X_new), step):
        block = X_new[start:start + step]
        out[start:start + step] += gram(model.spec, block, model.basis) @ model.c_coef
    return out
