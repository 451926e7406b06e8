import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skewkrylov import (
    InstanceGenerationError,
    LinearOperator,
    SingularMatrixError,
    SparseSkewMatrix,
    aslinearoperator,
    dense_solve,
    random_skew,
    skew_symmetrize,
    verify_skew,
)
from skewkrylov.operators import estimate_norm

from .conftest import rotation_blocks


def test_skew_symmetrize_formula():
    S = skew_symmetrize(np.array([[1.0, 2.0], [0.0, 1.0]]))
    np.testing.assert_array_equal(S, [[0.0, 1.0], [-1.0, 0.0]])


def test_skew_symmetrize_idempotent_on_skew():
    A = skew_symmetrize(np.random.default_rng(0).standard_normal((6, 6)))
    np.testing.assert_array_equal(skew_symmetrize(A), A)


def test_skew_symmetrize_identity_gives_zero_and_singular():
    Z = skew_symmetrize(np.eye(2))
    np.testing.assert_array_equal(Z, np.zeros((2, 2)))
    with pytest.raises(SingularMatrixError):
        dense_solve(Z, np.ones(2))


def test_skew_symmetrize_rejects_odd():
    with pytest.raises(ValueError, match="odd"):
        skew_symmetrize(np.eye(3))


def test_skew_symmetrize_zero_diagonal_exact():
    B = np.random.default_rng(1).standard_normal((8, 8)) * 1e3
    assert np.all(np.diag(skew_symmetrize(B)) == 0.0)


def test_verify_skew_rotation():
    rep = verify_skew(np.array([[0.0, 1.0], [-1.0, 0.0]]), tol=0.0)
    assert rep.ok and rep.max_quadratic == 0.0 and rep.max_transpose == 0.0


def test_verify_skew_identity_fails():
    rep = verify_skew(np.eye(2), tol=1e-12)
    assert not rep.ok
    assert rep.worst_index is not None
    # z^t I z / (||I|| ||z||^2) = 1 for every z
    assert rep.max_quadratic == pytest.approx(1.0)


def test_verify_skew_dense_50_against_explicit_transpose():
    A = skew_symmetrize(np.random.default_rng(5).standard_normal((50, 50)))
    # independent check: the explicit transpose of the dense array
    assert np.array_equal(A.T, -A)
    rep = verify_skew(aslinearoperator(A), tol=1e-12)
    assert rep.ok


def test_verify_skew_sparse_by_construction():
    S = random_skew(6, 0.5, seed=1)
    rep = verify_skew(S, tol=1e-15)
    assert rep.ok
    assert rep.max_transpose == 0.0


def test_random_skew_deterministic():
    a, b = random_skew(4, 1.0, 7), random_skew(4, 1.0, 7)
    assert a.triplets() == b.triplets()
    assert a == b


def test_random_skew_nonsingular_by_svd():
    S = random_skew(50, 0.2, 3)
    assert np.linalg.svd(S.to_dense(), compute_uv=False).min() > 1e-8


def test_random_skew_values_in_range_and_upper():
    S = random_skew(20, 0.5, 2)
    assert np.all(S.rows < S.cols)
    assert np.all(np.abs(S.values) <= 1.0)


def test_random_skew_rejects_odd_and_bad_density():
    with pytest.raises(ValueError):
        random_skew(5, 1.0, 0)
    with pytest.raises(ValueError):
        random_skew(4, 0.0, 0)


def test_random_skew_retry_limit():
    with pytest.raises(InstanceGenerationError):
        random_skew(4, 1e-9, 0, max_retries=3)


def test_dense_solve_rotation():
    np.testing.assert_array_equal(dense_solve(np.array([[0.0, 1.0], [-1.0, 0.0]]), np.array([1.0, 0.0])), [0.0, 1.0])


def test_dense_solve_blocks():
    x = dense_solve(rotation_blocks([1.0, 2.0]), np.array([1.0, 0.0, 1.0, 0.0]))
    np.testing.assert_allclose(x, [0.0, 1.0, 0.0, 0.5], atol=1e-15)


def test_dense_solve_zero_padded_singular():
    A = np.zeros((4, 4))
    A[:2, :2] = [[0.0, 1.0], [-1.0, 0.0]]
    with pytest.raises(SingularMatrixError) as err:
        dense_solve(A, np.ones(4))
    assert err.value.condition_estimate == np.inf


def test_dense_solve_residual_bound(skew200):
    S, b = skew200
    A = S.to_dense()
    x = dense_solve(A, b)
    kappa = np.linalg.cond(A, 1)
    assert np.linalg.norm(b - A @ x) / np.linalg.norm(b) <= 1e-12 * kappa


def test_sparse_matches_dense_expansion():
    S = random_skew(40, 0.3, 9)
    A = S.to_dense()
    rng = np.random.default_rng(0)
    for _ in range(10):
        v = rng.standard_normal(40)
        Av = A @ v
        assert np.linalg.norm(S.apply(v) - Av) <= 1e-14 * np.linalg.norm(Av)


def test_sparse_rejects_bad_triplets():
    with pytest.raises(ValueError):
        SparseSkewMatrix(4, [1], [0], [1.0])
    with pytest.raises(ValueError):
        SparseSkewMatrix(4, [0, 0], [1, 1], [1.0, 2.0])
    with pytest.raises(ValueError):
        SparseSkewMatrix(4, [0], [4], [1.0])


def test_skew_transpose_is_negation_exactly():
    op = random_skew(10, 1.0, 0).to_operator()
    v = np.random.default_rng(1).standard_normal(10)
    assert np.array_equal(op.apply_transpose(v) + op.apply(v), np.zeros(10))


def test_general_operator_needs_transpose():
    with pytest.raises(ValueError):
        LinearOperator(3, lambda v: v)


def test_estimate_norm_power_iteration_close_to_two_norm():
    S = random_skew(30, 1.0, 4)
    est = estimate_norm(S.to_operator())
    true = np.linalg.norm(S.to_dense(), 2)
    assert 0.8 * true <= est <= true * (1 + 1e-12)


@settings(max_examples=30, deadline=None)
@given(
    n=st.sampled_from([2, 4, 6, 10]),
    seed=st.integers(0, 10_000),
    alpha=st.floats(-3, 3),
    beta=st.floats(-3, 3),
)
def test_operator_linearity(n, seed, alpha, beta):
    rng = np.random.default_rng(seed)
    op = aslinearoperator(skew_symmetrize(rng.standard_normal((n, n))), "skew")
    u, v = rng.standard_normal(n), rng.standard_normal(n)
    lhs = op.apply(alpha * u + beta * v)
    rhs = alpha * op.apply(u) + beta * op.apply(v)
    assert np.linalg.norm(lhs - rhs) <= 1e-13 * (1 + np.linalg.norm(rhs))
    z = rng.standard_normal(n)
    Az = op.apply(z)
    assert abs(z @ Az) <= 1e-13 * (np.linalg.norm(Az) * np.linalg.norm(z) + 1e-300)
