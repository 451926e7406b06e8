from pathlib import Path

import numpy as np
import pytest
import scipy.io

from skewkrylov import (
    MatrixMarketError,
    SparseSkewMatrix,
    random_skew,
    read_matrix_market,
    read_vector,
    write_matrix_market,
    write_vector,
)
from skewkrylov.mmio import parse_matrix_market

BAD_DIR = Path(__file__).parent / "data" / "bad"

# fixture -> line number the error must cite
BAD_FILES = {
    "bad_size_line.mtx": 2,
    "bad_symmetry.mtx": 1,
    "count_short.mtx": 4,
    "diagonal.mtx": 4,
    "duplicate.mtx": 4,
    "missing_banner.mtx": 1,
    "mixed_orientation.mtx": 5,
    "non_numeric.mtx": 3,
    "out_of_range.mtx": 3,
}

HEADER = "%%MatrixMarket matrix coordinate real skew-symmetric\n"


def test_two_by_two(tmp_path):
    f = tmp_path / "a.mtx"
    f.write_text(HEADER + "2 2 1\n1 2 1.0\n")
    S = read_matrix_market(f)
    np.testing.assert_array_equal(S.to_dense(), [[0.0, 1.0], [-1.0, 0.0]])


def test_lower_orientation_negated(tmp_path):
    f = tmp_path / "a.mtx"
    f.write_text(HEADER + "3 3 2\n2 1 -1.5\n3 2 2.0\n")
    D = read_matrix_market(f).to_dense()
    assert D[1, 0] == -1.5 and D[0, 1] == 1.5
    assert D[2, 1] == 2.0 and D[1, 2] == -2.0


def test_header_only_zero_entries():
    S = parse_matrix_market(HEADER + "4 4 0\n")
    assert S.nnz == 0 and S.n == 4


def test_comments_kept(tmp_path):
    f = tmp_path / "c.mtx"
    write_matrix_market(random_skew(4, 1.0, seed=0), f, comments=["seed=0", "density=1"])
    _, comments = read_matrix_market(f, with_comments=True)
    assert comments == ["seed=0", "density=1"]


@pytest.mark.parametrize("seed", range(10))
def test_round_trip_bit_exact(tmp_path, seed):
    S = random_skew(20 + 2 * seed, 0.3, seed=seed)
    f = tmp_path / "s.mtx"
    write_matrix_market(S, f)
    back = read_matrix_market(f)
    assert back == S
    assert np.array_equal(back.values, S.values)


def test_round_trip_matches_scipy_reader(tmp_path):
    S = random_skew(50, 0.2, seed=3)
    f = tmp_path / "s.mtx"
    write_matrix_market(S, f)
    ref = scipy.io.mmread(str(f))
    np.testing.assert_array_equal(np.asarray(ref.todense()), S.to_dense())


def test_scipy_written_file_reads(tmp_path):
    D = random_skew(8, 1.0, seed=2).to_dense()
    f = tmp_path / "sp.mtx"
    scipy.io.mmwrite(str(f), D, symmetry="skew-symmetric")
    np.testing.assert_array_equal(read_matrix_market(f).to_dense(), D)


def test_dense_written_as_strict_upper(tmp_path):
    D = random_skew(6, 1.0, seed=1).to_dense()
    f = tmp_path / "d.mtx"
    write_matrix_market(D, f)
    body = f.read_text().splitlines()[2:]
    assert all(int(line.split()[0]) < int(line.split()[1]) for line in body)
    np.testing.assert_array_equal(read_matrix_market(f).to_dense(), D)


def test_general_round_trip(tmp_path):
    M = np.random.default_rng(0).standard_normal((5, 5))
    f = tmp_path / "g.mtx"
    write_matrix_market(M, f, symmetry="general")
    np.testing.assert_array_equal(read_matrix_market(f), M)


def test_array_formats():
    gen = parse_matrix_market("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n")
    np.testing.assert_array_equal(gen, [[1.0, 3.0], [2.0, 4.0]])
    skew = parse_matrix_market("%%MatrixMarket matrix array real skew-symmetric\n3 3\n-1\n-2\n-3\n")
    np.testing.assert_array_equal(skew.to_dense(), [[0, 1, 2], [-1, 0, 3], [-2, -3, 0]])


def test_integer_field():
    S = parse_matrix_market("%%MatrixMarket matrix coordinate integer skew-symmetric\n2 2 1\n1 2 3\n")
    assert S.to_dense()[0, 1] == 3.0


@pytest.mark.parametrize("name,line", sorted(BAD_FILES.items()))
def test_bad_corpus_rejected_with_line(name, line):
    with pytest.raises(MatrixMarketError) as info:
        read_matrix_market(BAD_DIR / name)
    assert info.value.line == line
    assert f"line {line}:" in str(info.value)
    assert name in str(info.value)


def test_bad_corpus_is_complete():
    assert sorted(p.name for p in BAD_DIR.glob("*.mtx")) == sorted(BAD_FILES)


def test_vectors(tmp_path):
    v = np.random.default_rng(0).standard_normal(7)
    f = tmp_path / "b.mtx"
    write_vector(v, f)
    np.testing.assert_array_equal(read_vector(f), v)
    t = tmp_path / "b.txt"
    t.write_text("1 2\n% note\n3\n")
    np.testing.assert_array_equal(read_vector(t), [1.0, 2.0, 3.0])
    (tmp_path / "empty.txt").write_text("\n")
    with pytest.raises(MatrixMarketError):
        read_vector(tmp_path / "empty.txt")


def test_sparse_equality_semantics():
    a = SparseSkewMatrix(3, [0], [1], [1.0])
    assert a == SparseSkewMatrix(3, [0], [1], [1.0])
    assert a != SparseSkewMatrix(3, [0], [1], [2.0])
