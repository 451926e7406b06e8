import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from skewkrylov import CGNE, CGNR, GalerkinSolver, MinimumResidualSolver, dense_solve, random_skew


@pytest.fixture
def problem():
    S = random_skew(20, 0.5, seed=2)
    b = np.random.default_rng(3).standard_normal(20)
    return S, b, dense_solve(S.to_dense(), b)


@pytest.mark.parametrize("cls", [CGNE, CGNR])
def test_fit_attributes(cls, problem):
    S, b, x = problem
    est = cls(rtol=1e-12).fit(S, b, x_true=x)
    assert est.converged_ and est.panel_ == "skew"
    assert np.linalg.norm(est.x_ - x) <= 1e-8 * np.linalg.norm(x)
    assert est.n_iter_ == est.result_.iterations
    assert len(est.history_.err_norm) == est.n_iter_ + 1
    assert est.score(S, b) >= -1e-12


@pytest.mark.parametrize("cls", [CGNE, CGNR])
def test_general_panel_on_dense(cls):
    rng = np.random.default_rng(0)
    A = rng.standard_normal((15, 15)) + 5 * np.eye(15)
    b = rng.standard_normal(15)
    est = cls().fit(A, b)
    assert est.panel_ == "general" and est.converged_


def test_forced_general_panel(problem):
    S, b, _ = problem
    assert CGNR(panel="general").fit(S, b).panel_ == "general"
    with pytest.raises(ValueError):
        CGNR(panel="sideways").fit(S, b)


def test_params_and_clone():
    est = CGNE(rtol=1e-6, max_iter=7)
    assert est.get_params() == {"rtol": 1e-6, "max_iter": 7, "panel": "auto", "record_history": True}
    est.set_params(rtol=1e-8)
    twin = clone(est)
    assert twin.get_params() == est.get_params() and twin is not est
    assert clone(GalerkinSolver(m=4)).m == 4


def test_not_fitted():
    with pytest.raises(NotFittedError):
        CGNR().score(np.eye(2), np.ones(2))


def test_reference_estimators(problem):
    S, b, x = problem
    g = GalerkinSolver(m=3).fit(S, b)
    assert not g.exists_ and g.x_ is None and g.score(S, b) == -np.inf
    g = GalerkinSolver(m=20).fit(S, b)
    assert g.exists_ and np.linalg.norm(g.x_ - x) <= 1e-8 * np.linalg.norm(x)
    m = MinimumResidualSolver(m=20).fit(S, b)
    assert m.score(S, b) >= -1e-10


def test_validation_errors():
    with pytest.raises(ValueError):
        CGNR().fit(np.ones((3, 4)), np.ones(3))
    with pytest.raises(ValueError):
        CGNR().fit(np.eye(3), np.zeros(3))
    with pytest.raises(ValueError):
        GalerkinSolver(m=0).fit(np.eye(2), np.ones(2))
    with pytest.raises(ValueError):
        CGNE(max_iter=2.5).fit(np.eye(2), np.ones(2))


def test_module_doctest():
    import doctest

    from skewkrylov import estimators

    assert doctest.testmod(estimators).failed == 0
