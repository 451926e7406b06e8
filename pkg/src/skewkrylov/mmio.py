"""Matrix Market reader and writer.

Supported: ``matrix coordinate|array real|double|integer general|skew-symmetric``.
Skew files come back as :class:`SparseSkewMatrix`, general ones as dense
arrays (the caller decides the skew tag with :func:`verify_skew`).

By default the writer emits ``coordinate real skew-symmetric`` with the
strict upper triangle and 17 significant digits, so a write/read round trip
is bit-exact.
"""
from __future__ import annotations

import os

import numpy as np

from .operators import SparseSkewMatrix

__all__ = ["MatrixMarketError", "read_matrix_market", "write_matrix_market", "read_vector", "write_vector", "FLOAT_FORMAT"]

FLOAT_FORMAT = "%.17g"
_FIELDS = ("real", "double", "integer")
_SYMMETRIES = ("general", "skew-symmetric")


class MatrixMarketError(ValueError):
    def __init__(self, message, line=None, path=None):
        where = f"line {line}: " if line is not None else ""
        src = f"{path}: " if path else ""
        super().__init__(f"{src}{where}{message}")
        self.line = line
        self.path = path


def _tokens(lines, start):
    """Yield ``(lineno, fields)`` for non-blank, non-comment lines."""
    for k, raw in enumerate(lines[start:], start=start + 1):
        s = raw.strip()
        if not s or s.startswith("%"):
            continue
        yield k, s.split()


def _number(tok, lineno, path):
    try:
        v = float(tok)
    except ValueError:
        raise MatrixMarketError(f"not a number: {tok!r}", lineno, path) from None
    if not np.isfinite(v):
        raise MatrixMarketError(f"non-finite value {tok!r}", lineno, path)
    return v


def _index(tok, lineno, path):
    try:
        return int(tok)
    except ValueError:
        raise MatrixMarketError(f"not an integer index: {tok!r}", lineno, path) from None


def parse_matrix_market(text, path=None, with_comments=False):
    lines = text.splitlines()
    if not lines:
        raise MatrixMarketError("empty file", 1, path)
    head = lines[0].split()
    if len(head) != 5 or head[0].lower() != "%%matrixmarket" or head[1].lower() != "matrix":
        raise MatrixMarketError("malformed header; expected '%%MatrixMarket matrix <format> <field> <symmetry>'", 1, path)
    fmt, fld, sym = (h.lower() for h in head[2:])
    if fmt not in ("coordinate", "array"):
        raise MatrixMarketError(f"unsupported format {fmt!r}", 1, path)
    if fld not in _FIELDS:
        raise MatrixMarketError(f"unsupported field {fld!r}", 1, path)
    if sym not in _SYMMETRIES:
        raise MatrixMarketError(f"unsupported symmetry {sym!r}", 1, path)
    comments = [ln.strip()[1:].strip() for ln in lines[1:] if ln.strip().startswith("%")]

    body = _tokens(lines, 1)
    try:
        size_line, size = next(body)
    except StopIteration:
        raise MatrixMarketError("missing size line", len(lines), path) from None
    want = 3 if fmt == "coordinate" else 2
    if len(size) != want:
        raise MatrixMarketError(f"size line needs {want} integers", size_line, path)
    dims = [_index(t, size_line, path) for t in size]
    nrows, ncols = dims[0], dims[1]
    if nrows < 1 or ncols < 1:
        raise MatrixMarketError("matrix dimensions must be positive", size_line, path)
    if sym == "skew-symmetric" and nrows != ncols:
        raise MatrixMarketError("skew-symmetric matrix must be square", size_line, path)

    if fmt == "coordinate":
        result = _parse_coordinate(body, nrows, ncols, dims[2], sym, size_line, path)
    else:
        result = _parse_array(body, nrows, ncols, sym, size_line, path)
    return (result, comments) if with_comments else result


def _parse_coordinate(body, nrows, ncols, nnz, sym, size_line, path):
    rows, cols, vals = [], [], []
    seen = {}
    orientation = None
    last = size_line
    for lineno, tok in body:
        last = lineno
        if len(rows) == nnz:
            raise MatrixMarketError(f"more entries than the declared {nnz}", lineno, path)
        if len(tok) != 3:
            raise MatrixMarketError("entry needs 'row col value'", lineno, path)
        i, j = _index(tok[0], lineno, path), _index(tok[1], lineno, path)
        v = _number(tok[2], lineno, path)
        if not (1 <= i <= nrows and 1 <= j <= ncols):
            raise MatrixMarketError(f"index ({i}, {j}) out of range for {nrows}x{ncols}", lineno, path)
        i, j = i - 1, j - 1
        if sym == "skew-symmetric":
            if i == j:
                raise MatrixMarketError("diagonal entry in a skew-symmetric file", lineno, path)
            side = "lower" if i > j else "upper"
            if orientation is None:
                orientation = side
            elif side != orientation:
                raise MatrixMarketError(f"{side}-triangle entry in a file that started {orientation}", lineno, path)
            if i > j:
                i, j, v = j, i, -v
        key = (i, j)
        if key in seen:
            raise MatrixMarketError(f"duplicate entry ({i + 1}, {j + 1}), first on line {seen[key]}", lineno, path)
        seen[key] = lineno
        rows.append(i)
        cols.append(j)
        vals.append(v)
    if len(rows) != nnz:
        raise MatrixMarketError(f"declared {nnz} entries but found {len(rows)}", last, path)
    if sym == "skew-symmetric":
        return SparseSkewMatrix(nrows, rows, cols, vals)
    M = np.zeros((nrows, ncols))
    M[rows, cols] = vals
    return M


def _parse_array(body, nrows, ncols, sym, size_line, path):
    if sym == "skew-symmetric":
        # strictly lower triangle, column-major
        positions = [(i, j) for j in range(ncols) for i in range(j + 1, nrows)]
    else:
        positions = [(i, j) for j in range(ncols) for i in range(nrows)]
    vals = []
    last = size_line
    for lineno, tok in body:
        last = lineno
        if len(tok) != 1:
            raise MatrixMarketError("array entry needs exactly one value", lineno, path)
        if len(vals) == len(positions):
            raise MatrixMarketError(f"more than the expected {len(positions)} values", lineno, path)
        vals.append(_number(tok[0], lineno, path))
    if len(vals) != len(positions):
        raise MatrixMarketError(f"expected {len(positions)} values but found {len(vals)}", last, path)
    if sym == "skew-symmetric":
        keep = [(j, i, -v) for (i, j), v in zip(positions, vals) if v != 0.0]
        r, c, v = zip(*keep) if keep else ((), (), ())
        return SparseSkewMatrix(nrows, r, c, v)
    M = np.zeros((nrows, ncols))
    for (i, j), v in zip(positions, vals):
        M[i, j] = v
    return M


def read_matrix_market(path, with_comments=False):
    """Read a Matrix Market file.

    Returns a :class:`SparseSkewMatrix` for skew-symmetric files and a dense
    ``ndarray`` for general ones; with ``with_comments=True`` a
    ``(matrix, comments)`` pair.  Raises :class:`MatrixMarketError` (with the
    offending line number) on malformed input.
    """
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return parse_matrix_market(text, path=os.fspath(path), with_comments=with_comments)


def format_matrix_market(matrix, comments=(), symmetry="skew-symmetric"):
    if symmetry == "general":
        M = matrix.to_dense() if isinstance(matrix, SparseSkewMatrix) else np.asarray(matrix, dtype=float)
        rows, cols = np.nonzero(M)
        out = ["%%MatrixMarket matrix coordinate real general"]
        out += [f"% {c}" for c in comments]
        out.append(f"{M.shape[0]} {M.shape[1]} {len(rows)}")
        out += [f"{i + 1} {j + 1} {FLOAT_FORMAT % M[i, j]}" for i, j in zip(rows.tolist(), cols.tolist())]
        return "\n".join(out) + "\n"
    if symmetry != "skew-symmetric":
        raise ValueError(f"cannot write symmetry {symmetry!r}")
    if not isinstance(matrix, SparseSkewMatrix):
        matrix = SparseSkewMatrix.from_dense(matrix)
    out = ["%%MatrixMarket matrix coordinate real skew-symmetric"]
    out += [f"% {c}" for c in comments]
    out.append(f"{matrix.n} {matrix.n} {matrix.nnz}")
    for i, j, v in zip(matrix.rows.tolist(), matrix.cols.tolist(), matrix.values.tolist()):
        out.append(f"{i + 1} {j + 1} {FLOAT_FORMAT % v}")
    return "\n".join(out) + "\n"


def write_matrix_market(matrix, path, comments=(), symmetry="skew-symmetric"):
    """Write ``matrix`` as a coordinate file.

    With the default skew-symmetric symmetry, dense input is reduced to its
    strict upper triangle; no skewness check is made here.  ``"general"``
    writes every nonzero entry.
    """
    text = format_matrix_market(matrix, comments, symmetry)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def read_vector(path):
    """Read a right-hand side: Matrix Market array ``n x 1`` or plain text."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if text.lstrip().lower().startswith("%%matrixmarket"):
        M = parse_matrix_market(text, path=os.fspath(path))
        if isinstance(M, SparseSkewMatrix) or M.ndim != 2 or M.shape[1] != 1:
            raise MatrixMarketError("right-hand side must be an n x 1 general matrix", 1, os.fspath(path))
        return M[:, 0].copy()
    vals = []
    for lineno, tok in _tokens(text.splitlines(), 0):
        vals.extend(_number(t, lineno, os.fspath(path)) for t in tok)
    if not vals:
        raise MatrixMarketError("empty vector file", 1, os.fspath(path))
    return np.array(vals)


def write_vector(v, path):
    v = np.asarray(v, dtype=float).ravel()
    lines = ["%%MatrixMarket matrix array real general", f"{v.size} 1"]
    lines += [FLOAT_FORMAT % x for x in v.tolist()]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
