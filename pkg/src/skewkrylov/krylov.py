"""Orthonormal Krylov bases and the even/odd split of ``K_m(A, b)``.

For skew ``A`` the space ``K_m(A, b)`` is the orthogonal sum of
``K_ceil(m/2)(A^2, b)`` (even powers) and ``K_floor(m/2)(A^2, A b)`` (odd
powers).  The helpers here build those bases explicitly and measure how far
floating point strays from that orthogonality.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .operators import LinearOperator, aslinearoperator

__all__ = [
    "KrylovBasis",
    "EvenOddSplit",
    "StaleBasisError",
    "build_basis",
    "even_basis",
    "odd_basis",
    "split_even_odd",
    "split_bases",
    "mutual_gram",
    "solution_orthogonality",
]

DEFAULT_BREAKDOWN_TOL = 1e-12


class StaleBasisError(ValueError):
    """The vector handed to :func:`split_even_odd` is not in the subspace."""


@dataclass(frozen=True)
class KrylovBasis:
    """Orthonormal basis ``Q`` (columns) of ``K_m(G, seed)``.

    ``grade_reached`` is set once ``G`` maps the span back into itself, at
    which point ``dim`` is the grade of ``seed`` (possibly below
    ``requested``).
    """

    generator: Callable[[np.ndarray], np.ndarray]
    seed: np.ndarray
    Q: np.ndarray
    h: np.ndarray
    requested: int
    grade_reached: bool

    @property
    def dim(self):
        return self.Q.shape[1]

    @property
    def columns(self):
        return [self.Q[:, j] for j in range(self.dim)]

    def truncate(self, k):
        """Leading ``k`` columns; they span ``K_k(G, seed)``."""
        k = min(k, self.dim)
        return KrylovBasis(
            self.generator, self.seed, self.Q[:, :k], self.h[: k + 1, :k], k,
            self.grade_reached and k == self.dim,
        )

    def project(self, v):
        return self.Q @ (self.Q.T @ v)


def _action(G):
    if isinstance(G, LinearOperator):
        return G.apply
    if callable(G) and not hasattr(G, "shape"):
        return G
    return aslinearoperator(G).apply


def build_basis(G, seed, m, breakdown_tol=DEFAULT_BREAKDOWN_TOL):
    """Arnoldi with modified Gram-Schmidt and one reorthogonalization pass.

    Stops early, with ``grade_reached=True``, once the orthogonalized
    candidate has norm ``<= breakdown_tol * ||G q_k||``.
    """
    apply = _action(G)
    seed = np.asarray(seed, dtype=float)
    beta = np.linalg.norm(seed)
    if beta == 0 or not np.isfinite(beta):
        raise ValueError("Krylov seed must be a nonzero finite vector")
    if m < 0:
        raise ValueError("m must be nonnegative")
    n = seed.shape[0]
    m = min(int(m), n)
    Q = np.zeros((n, m))
    h = np.zeros((m + 1, m))
    if m == 0:
        return KrylovBasis(apply, seed, Q, h, 0, False)
    Q[:, 0] = seed / beta
    for k in range(m):
        w = apply(Q[:, k])
        wnorm = np.linalg.norm(w)
        for _ in range(2):
            for i in range(k + 1):
                c = Q[:, i] @ w
                h[i, k] += c
                w = w - c * Q[:, i]
        hn = np.linalg.norm(w)
        h[k + 1, k] = hn
        if hn <= breakdown_tol * wnorm:
            return KrylovBasis(apply, seed, Q[:, : k + 1].copy(), h[: k + 2, : k + 1].copy(), m, True)
        if k + 1 < m:
            Q[:, k + 1] = w / hn
    return KrylovBasis(apply, seed, Q, h, m, False)


def even_basis(A, b, k, breakdown_tol=DEFAULT_BREAKDOWN_TOL):
    """Orthonormal basis of ``K_k(A^2, b)``."""
    op = aslinearoperator(A)
    return _squared_basis(op, np.asarray(b, dtype=float), k, breakdown_tol)


def odd_basis(A, b, k, breakdown_tol=DEFAULT_BREAKDOWN_TOL):
    """Orthonormal basis of ``K_k(A^2, A b)``."""
    op = aslinearoperator(A)
    return _squared_basis(op, op.apply(np.asarray(b, dtype=float)), k, breakdown_tol)


def _squared_basis(op, seed, k, breakdown_tol):
    # Eigenvalues of A^2 come in equal pairs when A is skew, so no vector has
    # grade above n/2 under A^2.  Rounding can push the breakdown ratio of a
    # tiny system past breakdown_tol; the cap keeps that noise out of the basis.
    if not op.is_skew or k <= op.dim // 2:
        return build_basis(op.square(), seed, k, breakdown_tol)
    basis = build_basis(op.square(), seed, op.dim // 2, breakdown_tol)
    return replace(basis, requested=k, grade_reached=True)


@dataclass(frozen=True)
class EvenOddSplit:
    p_e: np.ndarray
    p_o: np.ndarray
    q_e: int
    q_o: int

    @property
    def reconstruction(self):
        return self.p_e + self.p_o


def split_even_odd(p, basis_full, A, tol=1e-10, sub_bases=None):
    """Write ``p`` in ``K_m(A, b)`` as ``p_e + p_o``.

    ``p_e`` and ``p_o`` are the orthogonal projections of ``p`` onto
    ``K_ceil(m/2)(A^2, b)`` and ``K_floor(m/2)(A^2, A b)`` where ``m`` is the
    dimension of ``basis_full`` and ``b`` its seed.  ``sub_bases`` may carry
    prebuilt ``(even, odd)`` bases of exactly those dimensions for reuse
    across many vectors.

    Raises
    ------
    StaleBasisError
        If ``p`` is not in ``basis_full`` or the two projections fail to add
        back up to ``p`` (relative tolerance ``tol``).
    """
    p = np.asarray(p, dtype=float)
    pnorm = np.linalg.norm(p)
    m = basis_full.dim
    q_e, q_o = (m + 1) // 2, m // 2
    if pnorm == 0:
        z = np.zeros_like(p)
        return EvenOddSplit(z, z.copy(), q_e, q_o)
    off = np.linalg.norm(p - basis_full.project(p)) / pnorm
    if off > tol:
        raise StaleBasisError(f"vector is not in the Krylov subspace (relative distance {off:.3g})")
    if sub_bases is None:
        sub_bases = split_bases(A, basis_full)
    Qe, Qo = (_columns(B) for B in sub_bases)
    p_e = Qe @ (Qe.T @ p)
    p_o = Qo @ (Qo.T @ p)
    defect = np.linalg.norm(p - p_e - p_o) / pnorm
    if defect > tol:
        raise StaleBasisError(f"even/odd projections do not reconstruct p (relative defect {defect:.3g})")
    return EvenOddSplit(p_e, p_o, q_e, q_o)


def split_bases(A, basis_full):
    """Bases of ``K_ceil(m/2)(A^2, b)`` and ``K_floor(m/2)(A^2, A b)``."""
    m, b = basis_full.dim, basis_full.seed
    return even_basis(A, b, (m + 1) // 2), odd_basis(A, b, m // 2)


def _columns(U):
    return U.Q if isinstance(U, KrylovBasis) else np.asarray(U, dtype=float).reshape(len(U), -1)


def mutual_gram(U, V):
    """Largest ``|u_i^t v_j|`` over the columns of two bases."""
    QU, QV = _columns(U), _columns(V)
    if QU.shape[0] != QV.shape[0]:
        raise ValueError("bases live in spaces of different dimension")
    if QU.shape[1] == 0 or QV.shape[1] == 0:
        return 0.0
    return float(np.abs(QU.T @ QV).max())


def solution_orthogonality(x, V):
    """Largest ``|x^t v_j| / ||x||``; zero for an empty basis."""
    x = np.asarray(x, dtype=float)
    QV = _columns(V)
    if QV.shape[1] == 0:
        return 0.0
    return float(np.abs(x @ QV).max() / np.linalg.norm(x))
