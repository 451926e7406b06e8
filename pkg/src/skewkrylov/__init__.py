"""Krylov solvers and equivalence checks for real skew-symmetric systems."""
from .equivalence import (
    RunReport,
    check_lemma,
    check_theorem_equal,
    check_theorem_nobetter,
    compare_methods,
    pythagorean_defects,
)
from .estimators import CGNE, CGNR, GalerkinSolver, MinimumResidualSolver
from .krylov import (
    EvenOddSplit,
    KrylovBasis,
    StaleBasisError,
    build_basis,
    even_basis,
    mutual_gram,
    odd_basis,
    solution_orthogonality,
    split_even_odd,
)
from .mmio import MatrixMarketError, read_matrix_market, read_vector, write_matrix_market, write_vector
from .operators import (
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
from .solvers import (
    BasisTruncatedError,
    DivergenceError,
    SolveResult,
    SolverConfig,
    cgne_general,
    cgne_skew,
    cgnr_general,
    cgnr_skew,
    error_minimizer_oracle,
    galerkin_reference,
    minres_reference,
    precondition,
    residual_minimizer_oracle,
)

__version__ = "0.1.0"
