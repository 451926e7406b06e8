"""Linear operators, skew-symmetric matrices and the dense direct-solve oracle.

Dense matrices are plain ``numpy.ndarray`` objects in C (row-major) order.
Sparse skew-symmetric matrices keep only their strict upper triangle, so
``A.T == -A`` holds by construction.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

__all__ = [
    "LinearOperator",
    "SparseSkewMatrix",
    "SkewReport",
    "SingularMatrixError",
    "InstanceGenerationError",
    "aslinearoperator",
    "skew_symmetrize",
    "verify_skew",
    "random_skew",
    "dense_solve",
    "estimate_norm",
    "condition_estimate",
    "SINGULAR_RCOND",
    "MAX_GENERATION_RETRIES",
]

# Reciprocal 1-norm condition below which an instance is treated as singular.
SINGULAR_RCOND = 1e-12
MAX_GENERATION_RETRIES = 100

KINDS = ("general", "skew")


class SingularMatrixError(np.linalg.LinAlgError):
    """Raised when the direct solver meets an (numerically) singular matrix."""

    def __init__(self, message, rcond=0.0):
        super().__init__(message)
        self.rcond = rcond

    @property
    def condition_estimate(self):
        return np.inf if self.rcond == 0 else 1.0 / self.rcond


class InstanceGenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class LinearOperator:
    """Matrix-free action ``v -> A v`` together with ``v -> A^t v``.

    For ``kind == "skew"`` the transpose action is always the negated forward
    action; a separate transpose is never consulted.
    """

    dim: int
    matvec: Callable[[np.ndarray], np.ndarray]
    rmatvec: Optional[Callable[[np.ndarray], np.ndarray]] = None
    kind: str = "general"
    dense: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if self.kind == "general" and self.rmatvec is None:
            raise ValueError("a general operator needs a transpose action")

    @property
    def shape(self):
        return (self.dim, self.dim)

    @property
    def is_skew(self):
        return self.kind == "skew"

    def apply(self, v):
        return np.asarray(self.matvec(v), dtype=float)

    def apply_transpose(self, v):
        if self.kind == "skew":
            return -self.apply(v)
        return np.asarray(self.rmatvec(v), dtype=float)

    def __matmul__(self, v):
        return self.apply(v)

    def square(self):
        """Composite operator ``v -> A(A v)``; never forms ``A @ A``."""
        return LinearOperator(
            self.dim,
            lambda v: self.apply(self.apply(v)),
            lambda v: self.apply_transpose(self.apply_transpose(v)),
            kind="general",
        )

    def as_skew(self):
        return LinearOperator(self.dim, self.matvec, None, "skew", self.dense)

    def as_general(self):
        return LinearOperator(self.dim, self.matvec, self.apply_transpose, "general", self.dense)

    def to_dense(self):
        if self.dense is not None:
            return np.array(self.dense, dtype=float)
        eye = np.eye(self.dim)
        return np.column_stack([self.apply(eye[:, j]) for j in range(self.dim)])

    @classmethod
    def from_dense(cls, matrix, kind="general"):
        M = np.ascontiguousarray(matrix, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {M.shape}")
        if kind == "skew":
            return cls(M.shape[0], M.__matmul__, None, "skew", M)
        MT = np.ascontiguousarray(M.T)
        return cls(M.shape[0], M.__matmul__, MT.__matmul__, kind, M)


class SparseSkewMatrix:
    """Real skew-symmetric matrix stored as its strict upper triangle.

    Each stored triplet ``(i, j, a)`` with ``i < j`` stands for ``A[i, j] = a``
    and ``A[j, i] = -a``.
    """

    def __init__(self, n, rows, cols, values):
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        values = np.asarray(values, dtype=float).ravel()
        if not (len(rows) == len(cols) == len(values)):
            raise ValueError("rows, cols and values must have equal length")
        n = int(n)
        if n < 1:
            raise ValueError("n must be positive")
        if len(rows) and (rows.min() < 0 or cols.max() >= n):
            raise ValueError("triplet index out of range")
        if np.any(rows >= cols):
            raise ValueError("only strict upper-triangle triplets (row < col) may be stored")
        keys = rows * n + cols
        if len(np.unique(keys)) != len(keys):
            raise ValueError("duplicate (row, col) triplets")
        if not np.all(np.isfinite(values)):
            raise ValueError("non-finite matrix entry")
        order = np.argsort(keys, kind="stable")
        self.n = n
        self.rows = rows[order]
        self.cols = cols[order]
        self.values = values[order]
        for a in (self.rows, self.cols, self.values):
            a.setflags(write=False)

    @property
    def shape(self):
        return (self.n, self.n)

    @property
    def nnz(self):
        return len(self.values)

    def triplets(self):
        return list(zip(self.rows.tolist(), self.cols.tolist(), self.values.tolist()))

    def apply(self, v):
        v = np.asarray(v, dtype=float)
        upper = np.bincount(self.rows, weights=self.values * v[self.cols], minlength=self.n)
        lower = np.bincount(self.cols, weights=self.values * v[self.rows], minlength=self.n)
        return upper - lower

    __matmul__ = apply

    def to_dense(self):
        A = np.zeros((self.n, self.n))
        A[self.rows, self.cols] = self.values
        A[self.cols, self.rows] = -self.values
        return A

    def to_operator(self):
        return LinearOperator(self.n, self.apply, None, "skew", None)

    @classmethod
    def from_dense(cls, matrix):
        """Extract the strict upper triangle; the lower triangle is ignored."""
        M = np.asarray(matrix, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {M.shape}")
        rows, cols = np.nonzero(np.triu(M, k=1))
        return cls(M.shape[0], rows, cols, M[rows, cols])

    def __eq__(self, other):
        if not isinstance(other, SparseSkewMatrix):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.rows, other.rows)
            and np.array_equal(self.cols, other.cols)
            and np.array_equal(self.values, other.values)
        )

    def __repr__(self):
        return f"SparseSkewMatrix(n={self.n}, nnz={self.nnz})"


def aslinearoperator(A, kind=None):
    """Wrap ``A`` (ndarray, scipy sparse, SparseSkewMatrix or LinearOperator).

    ``kind=None`` keeps the natural tag: skew for SparseSkewMatrix, otherwise
    whatever the operator already carries, and general for raw arrays.
    """
    if isinstance(A, LinearOperator):
        if kind is None or kind == A.kind:
            return A
        return A.as_skew() if kind == "skew" else A.as_general()
    if isinstance(A, SparseSkewMatrix):
        op = A.to_operator()
        return op if kind in (None, "skew") else op.as_general()
    if hasattr(A, "tocsr"):
        M = A.tocsr()
        if M.shape[0] != M.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {M.shape}")
        MT = M.T.tocsr()
        op = LinearOperator(M.shape[0], M.__matmul__, MT.__matmul__, "general")
        return op.as_skew() if kind == "skew" else op
    return LinearOperator.from_dense(A, kind or "general")


def skew_symmetrize(B):
    """Return ``(B - B^t) / 2`` with an exactly zero diagonal."""
    B = np.asarray(B, dtype=float)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {B.shape}")
    if B.shape[0] % 2:
        raise ValueError("odd dimension: a skew-symmetric matrix of odd order is singular")
    S = 0.5 * (B - B.T)
    np.fill_diagonal(S, 0.0)
    return S


def estimate_norm(A, steps=20, seed=0):
    """Cheap estimate of ``||A||``.

    Max absolute row sum when a dense form is at hand, otherwise ``steps``
    rounds of power iteration on ``A^t A``.
    """
    if isinstance(A, np.ndarray):
        return float(np.abs(A).sum(axis=1).max()) if A.size else 0.0
    if isinstance(A, SparseSkewMatrix):
        return estimate_norm(A.to_dense())
    op = aslinearoperator(A)
    if op.dense is not None:
        return estimate_norm(op.dense)
    v = np.random.default_rng(seed).standard_normal(op.dim)
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(steps):
        w = op.apply_transpose(op.apply(v))
        nw = np.linalg.norm(w)
        if nw == 0:
            return 0.0
        est = np.sqrt(nw)
        v = w / nw
    return float(est)


@dataclass
class SkewReport:
    ok: bool
    max_quadratic: float
    max_transpose: float
    norm_estimate: float
    worst_index: Optional[int] = None

    def __bool__(self):
        return self.ok


def verify_skew(A, sample_count=10, seed=0, tol=1e-12):
    """Sample ``z^t A z`` and ``A^t z + A z`` on seeded random vectors."""
    op = aslinearoperator(A)
    if op.dim < 2:
        raise ValueError("operator dimension must be at least 2")
    norm_est = estimate_norm(op)
    rng = np.random.default_rng(seed)
    max_quad = max_tr = 0.0
    worst, worst_val = None, -1.0
    for k in range(sample_count):
        z = rng.standard_normal(op.dim)
        Az = op.apply(z)
        zz = z @ z
        # products formed before summation: a fused dot leaves rounding residue
        # where exact pairwise cancellation is expected
        quad = abs(np.sum(z * Az)) / (norm_est * zz) if norm_est > 0 else 0.0
        nAz = np.linalg.norm(Az)
        diff = np.linalg.norm(op.apply_transpose(z) + Az)
        tr = diff / nAz if nAz > 0 else (0.0 if diff == 0 else np.inf)
        max_quad, max_tr = max(max_quad, quad), max(max_tr, tr)
        if max(quad, tr) > worst_val:
            worst, worst_val = k, max(quad, tr)
    ok = bool(max_quad <= tol and max_tr <= tol)
    return SkewReport(ok, float(max_quad), float(max_tr), norm_est, None if ok else worst)


def _rcond(A):
    lu, piv = scipy.linalg.lu_factor(A, check_finite=True)
    if np.any(np.diag(lu) == 0):
        return lu, piv, 0.0
    anorm = np.abs(A).sum(axis=0).max()
    rcond, info = lapack.dgecon(lu, anorm, norm="1")
    return lu, piv, float(rcond)


def condition_estimate(A):
    """1-norm condition estimate of a dense matrix (LAPACK ``dgecon``)."""
    A = _as_dense(A)
    _, _, rcond = _rcond(A)
    return np.inf if rcond == 0 else 1.0 / rcond


def _as_dense(A):
    if isinstance(A, np.ndarray):
        return np.asarray(A, dtype=float)
    if isinstance(A, (SparseSkewMatrix, LinearOperator)):
        return A.to_dense()
    if hasattr(A, "toarray"):
        return A.toarray().astype(float)
    return np.asarray(A, dtype=float)


def dense_solve(A, b, rcond_min=SINGULAR_RCOND):
    """Pivoted LU solve used as ground truth for every error-norm check."""
    M = _as_dense(A)
    b = np.asarray(b, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if b.shape != (M.shape[0],):
        raise ValueError(f"rhs of shape {b.shape} does not conform to {M.shape}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv, rcond = _rcond(M)
    if rcond <= rcond_min:
        raise SingularMatrixError(f"matrix is singular to working precision (rcond={rcond:.3g})", rcond)
    return scipy.linalg.lu_solve((lu, piv), b)


def random_skew(n, density=1.0, seed=0, max_retries=MAX_GENERATION_RETRIES):
    """Seeded random nonsingular skew matrix with entries uniform in [-1, 1].

    Attempt ``k`` draws from ``numpy.random.default_rng([seed, k])``; an
    attempt whose dense form has ``rcond <= SINGULAR_RCOND`` is discarded.
    """
    n = int(n)
    if n < 2 or n % 2:
        raise ValueError(f"n must be an even integer >= 2, got {n}")
    if not 0 < density <= 1:
        raise ValueError("density must lie in (0, 1]")
    iu, ju = np.triu_indices(n, k=1)
    for attempt in range(max_retries):
        rng = np.random.default_rng([seed, attempt])
        keep = rng.random(len(iu)) < density
        vals = rng.uniform(-1.0, 1.0, size=len(iu))
        S = SparseSkewMatrix(n, iu[keep], ju[keep], vals[keep])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            _, _, rcond = _rcond(S.to_dense())
        if rcond > SINGULAR_RCOND:
            return S
    raise InstanceGenerationError(
        f"no nonsingular instance for n={n}, density={density}, seed={seed} "
        f"after {max_retries} attempts"
    )
