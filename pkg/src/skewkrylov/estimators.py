"""scikit-learn style wrappers around the solvers.

``fit(A, b)`` solves ``A x = b`` and stores the solution in ``x_``; hyper
parameters follow the usual ``get_params`` / ``set_params`` contract, so the
solvers can be cloned and swept like any other estimator.

>>> import numpy as np
>>> from skewkrylov import CGNR, random_skew
>>> A = random_skew(8, 1.0, seed=0)
>>> est = CGNR(rtol=1e-12).fit(A, np.ones(8))
>>> bool(est.converged_)
True
"""
import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_operator, check_positive_int, check_rhs
from .solvers import (
    SolverConfig,
    cgne_general,
    cgne_skew,
    cgnr_general,
    cgnr_skew,
    galerkin_reference,
    minres_reference,
)

__all__ = ["CGNE", "CGNR", "GalerkinSolver", "MinimumResidualSolver"]

_PANELS = ("auto", "skew", "general")


class _SolverMixin:
    def score(self, A, b):
        """Negative relative residual ``-||b - A x_|| / ||b||`` (higher is better)."""
        check_is_fitted(self, "x_")
        op = check_operator(A)
        b = check_rhs(b, op.dim)
        return -float(np.linalg.norm(b - op.apply(self.x_)) / np.linalg.norm(b))


class _NormalEquationsCG(_SolverMixin, BaseEstimator):
    _skew_solver = None
    _general_solver = None

    def __init__(self, rtol=1e-10, max_iter=None, panel="auto", record_history=True):
        self.rtol = rtol
        self.max_iter = max_iter
        self.panel = panel
        self.record_history = record_history

    def fit(self, A, b, x_true=None):
        if self.panel not in _PANELS:
            raise ValueError(f"panel must be one of {_PANELS}, got {self.panel!r}")
        op = check_operator(A, kind="skew" if self.panel == "skew" else None)
        b = check_rhs(b, op.dim)
        cfg = SolverConfig(
            rtol=self.rtol,
            max_iter=check_positive_int(self.max_iter, "max_iter", allow_none=True),
            record_history=self.record_history,
        )
        use_skew = op.is_skew and self.panel != "general"
        solver = type(self)._skew_solver if use_skew else type(self)._general_solver
        res = solver(op, b, cfg, x_true=x_true)
        self.result_ = res
        self.x_ = res.x
        self.n_iter_ = res.iterations
        self.termination_ = res.termination
        self.converged_ = res.converged
        self.history_ = res.history
        self.panel_ = "skew" if use_skew else "general"
        return self


class CGNE(_NormalEquationsCG):
    """Craig's method: CG on ``A A^t y = b`` with ``x = A^t y``.

    Parameters
    ----------
    rtol : float
        Stop once ``||b - A x_q|| <= rtol * ||b||`` (true residual).
    max_iter : int or None
        Iteration cap; defaults to the problem dimension.
    panel : {"auto", "skew", "general"}
        ``"auto"`` uses the skew recurrence for skew-tagged operators.
    record_history : bool
        Keep every iterate in ``history_.x``.
    """

    _skew_solver = staticmethod(cgne_skew)
    _general_solver = staticmethod(cgne_general)


class CGNR(_NormalEquationsCG):
    """CGNR / CGLS: CG on ``A^t A x = A^t b``.  Parameters as for :class:`CGNE`."""

    _skew_solver = staticmethod(cgnr_skew)
    _general_solver = staticmethod(cgnr_general)


class GalerkinSolver(_SolverMixin, BaseEstimator):
    """Reference Galerkin iterate on ``K_m(A, b)``.

    After ``fit``, ``exists_`` tells whether the iterate is defined; when it
    is not (odd ``m`` for skew ``A``) ``x_`` is ``None``.
    """

    def __init__(self, m=2):
        self.m = m

    def fit(self, A, b):
        op = check_operator(A)
        b = check_rhs(b, op.dim)
        g = galerkin_reference(op, b, check_positive_int(self.m, "m"))
        self.x_ = g.x
        self.exists_ = g.exists
        self.sigma_min_ = g.sigma_min
        return self

    def score(self, A, b):
        if getattr(self, "exists_", True) is False:
            return -np.inf
        return super().score(A, b)


class MinimumResidualSolver(_SolverMixin, BaseEstimator):
    """Reference minimum-residual iterate on ``K_m(A, b)``."""

    def __init__(self, m=2):
        self.m = m

    def fit(self, A, b):
        op = check_operator(A)
        b = check_rhs(b, op.dim)
        self.x_ = minres_reference(op, b, check_positive_int(self.m, "m"))
        return self
