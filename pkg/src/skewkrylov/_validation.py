import numbers

import numpy as np
from sklearn.utils.validation import check_array, column_or_1d

from .operators import LinearOperator, SparseSkewMatrix, aslinearoperator


def check_operator(A, kind=None, require_skew=False):
    """Coerce ``A`` to a :class:`LinearOperator`, validating dense input."""
    if not isinstance(A, (LinearOperator, SparseSkewMatrix)) and not hasattr(A, "tocsr"):
        A = check_array(A, dtype=float, ensure_2d=True, ensure_min_samples=2, ensure_min_features=2)
        if A.shape[0] != A.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {A.shape}")
    op = aslinearoperator(A, kind)
    if require_skew and not op.is_skew:
        raise ValueError("a skew-tagged operator is required; pass kind='skew' or a SparseSkewMatrix")
    return op


def check_rhs(b, dim):
    b = column_or_1d(check_array(np.asarray(b, dtype=float).reshape(-1, 1), dtype=float), warn=False)
    if b.shape[0] != dim:
        raise ValueError(f"rhs has length {b.shape[0]}, operator dimension is {dim}")
    if not np.any(b):
        raise ValueError("rhs must be nonzero")
    return b


def check_positive_int(value, name, allow_none=False):
    if value is None and allow_none:
        return None
    if not isinstance(value, numbers.Integral) or isinstance(value, bool) or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)
