"""CGNE / CGNR recurrences, reference Krylov solvers and preconditioning.

The four recurrences follow the classic two-panel presentation: a general
panel that touches ``A`` and ``A^t``, and a skew panel that only needs ``A``
because ``A^t = -A``.  Both start from ``x_0 = 0``.

The reference solvers work on ``K_m(A, b)`` through an explicit orthonormal
basis and dense projected problems.  They are oracles, not production paths.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .krylov import build_basis, odd_basis
from .operators import LinearOperator, aslinearoperator, dense_solve

__all__ = [
    "SolverConfig",
    "IterateHistory",
    "SolveResult",
    "GalerkinIterate",
    "PreconditionedSystem",
    "DivergenceError",
    "BasisTruncatedError",
    "cgne_skew",
    "cgnr_skew",
    "cgne_general",
    "cgnr_general",
    "galerkin_reference",
    "minres_reference",
    "error_minimizer_oracle",
    "residual_minimizer_oracle",
    "precondition",
    "krylov_basis_for",
]

CONVERGED, MAX_ITER, BREAKDOWN = "converged", "max_iter", "breakdown"
# sigma_min(H) / ||H|| at or below which a projected Galerkin matrix is singular.
GALERKIN_SINGULAR_TOL = 1e-12


class DivergenceError(FloatingPointError):
    pass


class BasisTruncatedError(ValueError):
    """The requested Krylov dimension exceeds the grade of the seed."""

    def __init__(self, message, grade):
        super().__init__(message)
        self.grade = grade


# Ceiling on max_iter as a multiple of the dimension; finite-precision CG
# on normal equations with many distinct singular values overruns n steps.
MAX_ITER_FACTOR = 10
GENERAL_DEFAULT_FACTOR = 4


@dataclass
class SolverConfig:
    """Stopping rules.

    ``max_iter=None`` means ``dim`` for the skew recurrences and
    ``4 * dim`` for the general ones.
    """

    rtol: float = 1e-10
    max_iter: Optional[int] = None
    breakdown_tol: float = 1e-30
    record_history: bool = True

    def resolve_max_iter(self, dim, general=False):
        if not 0 <= self.rtol < 1:
            raise ValueError(f"rtol must lie in [0, 1), got {self.rtol}")
        if self.breakdown_tol < 0:
            raise ValueError("breakdown_tol must be nonnegative")
        if self.max_iter is None:
            return GENERAL_DEFAULT_FACTOR * dim if general else dim
        if not 1 <= self.max_iter <= MAX_ITER_FACTOR * dim:
            raise ValueError(f"max_iter must lie in [1, {MAX_ITER_FACTOR * dim}], got {self.max_iter}")
        return int(self.max_iter)


@dataclass
class IterateHistory:
    """Per-iteration record; index 0 holds the starting state ``x_0 = 0``.

    ``alpha[0]`` and ``beta[0]`` are NaN, as is the ``beta`` of a final
    iteration that stopped before forming a new direction.
    """

    res_norm: List[float] = field(default_factory=list)
    true_res_norm: List[float] = field(default_factory=list)
    err_norm: List[float] = field(default_factory=list)
    alpha: List[float] = field(default_factory=list)
    beta: List[float] = field(default_factory=list)
    x: List[np.ndarray] = field(default_factory=list)

    def __len__(self):
        return len(self.res_norm)

    def rows(self):
        for q in range(len(self)):
            yield {
                "q": q,
                "res_norm": self.res_norm[q],
                "true_res_norm": self.true_res_norm[q],
                "err_norm": self.err_norm[q] if self.err_norm else math.nan,
                "alpha": self.alpha[q],
                "beta": self.beta[q],
            }


@dataclass
class SolveResult:
    x: np.ndarray
    iterations: int
    termination: str
    history: IterateHistory
    method: str = ""
    applies: int = 0
    y_history: Optional[List[np.ndarray]] = None

    @property
    def converged(self):
        return self.termination == CONVERGED

    @property
    def iterates(self):
        return self.history.x


class _Counted:
    """Wraps an operator and counts forward/transpose applications."""

    def __init__(self, op):
        self.op = op
        self.count = 0

    def apply(self, v):
        self.count += 1
        return self.op.apply(v)

    def apply_transpose(self, v):
        self.count += 1
        return self.op.apply_transpose(v)


def _check_rhs(op, b):
    b = np.asarray(b, dtype=float)
    if b.shape != (op.dim,):
        raise ValueError(f"rhs of shape {b.shape} does not match operator dimension {op.dim}")
    if not np.all(np.isfinite(b)):
        raise ValueError("rhs has non-finite entries")
    if not np.any(b):
        raise ValueError("rhs must be nonzero")
    return b


def _normal_cg(A, b, cfg, *, residual_min, skew_panel, x_true=None, track_y=False, method=""):
    cfg = cfg or SolverConfig()
    op = aslinearoperator(A)
    if skew_panel and not op.is_skew:
        raise ValueError(f"{method} needs a skew-tagged operator (run verify_skew first)")
    b = _check_rhs(op, b)
    max_iter = cfg.resolve_max_iter(op.dim, general=not skew_panel)
    A_ = _Counted(op)
    # skew panel: -A r ; general panel: A^t r
    direction = (lambda v: -A_.apply(v)) if skew_panel else A_.apply_transpose

    bnorm = np.linalg.norm(b)
    x = np.zeros_like(b)
    r = b.copy()
    s = direction(r)
    p = s.copy()
    rr = r @ r
    numer = (s @ s) if residual_min else rr
    hist = IterateHistory()
    record_x = cfg.record_history

    def log(alpha, beta, true_res):
        hist.res_norm.append(float(np.sqrt(rr)))
        hist.true_res_norm.append(float(true_res))
        if x_true is not None:
            hist.err_norm.append(float(np.linalg.norm(x - x_true)))
        hist.alpha.append(alpha)
        hist.beta.append(beta)
        if record_x:
            hist.x.append(x.copy())
        if y_hist is not None:
            y_hist.append(y.copy())

    y = d = y_hist = None
    if track_y:
        y, d = np.zeros_like(b), r.copy()
        y_hist = []
    log(math.nan, math.nan, bnorm)

    numer0 = numer
    denom0 = None
    termination, q = MAX_ITER, 0
    while q < max_iter:
        Ap = A_.apply(p)
        denom = (Ap @ Ap) if residual_min else (p @ p)
        if denom0 is None:
            denom0 = denom
        if denom <= cfg.breakdown_tol * denom0 or numer <= cfg.breakdown_tol * numer0:
            termination = BREAKDOWN
            break
        alpha = numer / denom
        if not math.isfinite(alpha):
            raise DivergenceError(f"non-finite alpha at iteration {q + 1}")
        q += 1
        x = x + alpha * p
        r = r - alpha * Ap
        rr = r @ r
        if track_y:
            y = y + alpha * d
        true_res = np.linalg.norm(b - A_.apply(x))
        if true_res <= cfg.rtol * bnorm:
            log(float(alpha), math.nan, true_res)
            termination = CONVERGED
            break
        s = direction(r)
        numer_new = (s @ s) if residual_min else rr
        beta = numer_new / numer
        if not math.isfinite(beta):
            raise DivergenceError(f"non-finite beta at iteration {q}")
        log(float(alpha), float(beta), true_res)
        p = s + beta * p
        if track_y:
            d = r + beta * d
        numer = numer_new
    return SolveResult(x, q, termination, hist, method, A_.count, y_hist)


def cgne_skew(A, b, cfg=None, x_true=None):
    """Craig's method (CGNE) for skew ``A``: minimizes ``||x_q - x||`` over
    ``K_q(A^2, A b)``."""
    return _normal_cg(A, b, cfg, residual_min=False, skew_panel=True, x_true=x_true, method="cgne_skew")


def cgnr_skew(A, b, cfg=None, x_true=None):
    """CGNR / CGLS for skew ``A``: minimizes ``||b - A x_q||`` over
    ``K_q(A^2, A b)``."""
    return _normal_cg(A, b, cfg, residual_min=True, skew_panel=True, x_true=x_true, method="cgnr_skew")


def cgne_general(A, b, cfg=None, x_true=None):
    """CG on ``A A^t y = b`` with ``x = A^t y``, for any nonsingular ``A``.

    With ``cfg.record_history`` set, ``result.y_history`` holds the ``y``
    iterates (``x_q = A^t y_q``).
    """
    cfg = cfg or SolverConfig()
    return _normal_cg(
        A, b, cfg, residual_min=False, skew_panel=False, x_true=x_true,
        track_y=cfg.record_history, method="cgne_general",
    )


def cgnr_general(A, b, cfg=None, x_true=None):
    """CG on ``A^t A x = A^t b`` for any nonsingular ``A``."""
    return _normal_cg(A, b, cfg, residual_min=True, skew_panel=False, x_true=x_true, method="cgnr_general")


def krylov_basis_for(A, b, m, basis=None):
    """Basis of ``K_m(A, b)``, reusing ``basis`` when it is large enough."""
    op = aslinearoperator(A)
    if basis is not None and (basis.dim >= m or basis.grade_reached):
        full = basis
    else:
        full = build_basis(op, b, m)
    if full.dim < m:
        raise BasisTruncatedError(f"K_{m}(A, b) requested but the grade of b is {full.dim}", full.dim)
    return full.truncate(m)


@dataclass
class GalerkinIterate:
    """Outcome of :func:`galerkin_reference`; ``x`` is None when it does not exist."""

    m: int
    x: Optional[np.ndarray]
    sigma_min: float
    h_norm: float

    @property
    def exists(self):
        return self.x is not None


def galerkin_reference(A, b, m, basis=None, singular_tol=GALERKIN_SINGULAR_TOL):
    """Iterate in ``K_m(A, b)`` whose residual is orthogonal to ``K_m(A, b)``.

    Solves the projected system ``Q^t A Q y = Q^t b``.  When ``Q^t A Q`` is
    numerically singular (``sigma_min <= singular_tol * ||H||``; always the
    case for odd ``m`` and skew ``A``) the iterate is reported as missing.
    For a skew-tagged operator ``H`` is replaced by its skew part, which the
    exact ``H`` equals; rounding would otherwise hide the odd-order
    singularity (a 1x1 ``H`` is never exactly zero in floating point).
    """
    op = aslinearoperator(A)
    b = _check_rhs(op, b)
    Q = krylov_basis_for(op, b, m, basis).Q
    AQ = np.column_stack([op.apply(Q[:, j]) for j in range(m)])
    H = Q.T @ AQ
    if op.is_skew:
        H = 0.5 * (H - H.T)
    sv = np.linalg.svd(H, compute_uv=False)
    h_norm, sigma_min = float(sv[0]), float(sv[-1])
    if sigma_min <= singular_tol * h_norm:
        return GalerkinIterate(m, None, sigma_min, h_norm)
    y = np.linalg.solve(H, Q.T @ b)
    return GalerkinIterate(m, Q @ y, sigma_min, h_norm)


def minres_reference(A, b, m, basis=None):
    """``argmin ||b - A z||`` over ``z`` in ``K_m(A, b)`` by dense least squares."""
    op = aslinearoperator(A)
    b = _check_rhs(op, b)
    Q = krylov_basis_for(op, b, m, basis).Q
    AQ = np.column_stack([op.apply(Q[:, j]) for j in range(m)])
    coef = np.linalg.lstsq(AQ, b, rcond=None)[0]
    return Q @ coef


def _odd_space(op, b, q):
    basis = odd_basis(op, b, q)
    if basis.dim < q:
        raise BasisTruncatedError(f"K_{q}(A^2, A b) requested but its grade is {basis.dim}", basis.dim)
    return basis.Q


def error_minimizer_oracle(A, b, q, x_true=None):
    """Orthogonal projection of the true solution onto ``K_q(A^2, A b)``."""
    op = aslinearoperator(A)
    b = _check_rhs(op, b)
    if x_true is None:
        x_true = dense_solve(op.to_dense(), b)
    Q = _odd_space(op, b, q)
    return Q @ (Q.T @ x_true)


def residual_minimizer_oracle(A, b, q):
    """``argmin ||b - A z||`` over ``z`` in ``K_q(A^2, A b)``."""
    op = aslinearoperator(A)
    b = _check_rhs(op, b)
    Q = _odd_space(op, b, q)
    AQ = np.column_stack([op.apply(Q[:, j]) for j in range(Q.shape[1])])
    return Q @ np.linalg.lstsq(AQ, b, rcond=None)[0]


@dataclass(frozen=True)
class PreconditionedSystem:
    """``M_L^{-1} A M_R^{-1}`` plus the maps ``b -> M_L^{-1} b`` and
    ``x~ -> M_R^{-1} x~ = x``."""

    operator: LinearOperator
    transform_rhs: Callable[[np.ndarray], np.ndarray]
    recover: Callable[[np.ndarray], np.ndarray]


def _identity(v):
    return np.asarray(v, dtype=float)


def precondition(A, ml_solve=None, mr_solve=None, ml_solve_t=None, mr_solve_t=None, kind="general"):
    """Two-sided preconditioned operator ``v -> M_L^{-1} A M_R^{-1} v``.

    ``ml_solve`` / ``mr_solve`` apply ``M_L^{-1}`` / ``M_R^{-1}``; ``None`` is
    the identity.  The transpose action needs ``M_R^{-t}`` and ``M_L^{-t}``;
    when ``*_solve_t`` is omitted the corresponding factor is taken to be
    symmetric (diagonal scalings, for instance).  Pass ``kind="skew"`` only
    when the preconditioned operator is known to be skew; otherwise keep the
    general tag and certify it with :func:`verify_skew` first.
    """
    op = aslinearoperator(A)
    ml = ml_solve or _identity
    mr = mr_solve or _identity
    ml_t = ml_solve_t or ml
    mr_t = mr_solve_t or mr
    n = op.dim
    probe = np.linspace(1.0, 2.0, n)
    for name, f in (("ml_solve", ml), ("mr_solve", mr), ("ml_solve_t", ml_t), ("mr_solve_t", mr_t)):
        out = np.asarray(f(probe))
        if out.shape != (n,):
            raise ValueError(f"{name} maps R^{n} to shape {out.shape}")

    def matvec(v):
        return np.asarray(ml(op.apply(np.asarray(mr(v), dtype=float))), dtype=float)

    def rmatvec(v):
        return np.asarray(mr_t(op.apply_transpose(np.asarray(ml_t(v), dtype=float))), dtype=float)

    pre = LinearOperator(n, matvec, rmatvec, "general")
    if kind == "skew":
        pre = pre.as_skew()
    return PreconditionedSystem(pre, lambda b: np.asarray(ml(b), dtype=float), lambda xt: np.asarray(mr(xt), dtype=float))
