import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coble.errors import Inconsistent, ZeroInverse
from coble.field import PrimeField, normalize, normalize_rows, projective_points

primes = st.sampled_from([5, 7, 11, 13, 23, 31])


def matrices(q, max_rows=7, max_cols=7):
    return st.tuples(st.integers(1, max_rows), st.integers(1, max_cols), st.integers(0, 2**32 - 1)).map(
        lambda t: np.random.default_rng(t[2]).integers(0, q, size=(t[0], t[1]))
    )


@pytest.mark.parametrize("q,a,expected", [(7, 3, 5), (7, 1, 1), (23, 2, 12)])
def test_inverse_examples(q, a, expected):
    assert PrimeField.of(q).inv(a) == expected


def test_zero_has_no_inverse():
    with pytest.raises(ZeroInverse):
        PrimeField.of(7).inv(0)


@pytest.mark.parametrize("bad", [2, 3, 9, 1, 0])
def test_rejects_bad_modulus(bad):
    with pytest.raises(ValueError):
        PrimeField(bad)


@given(primes, st.integers(1, 10**6))
def test_inverse_property(q, a):
    F = PrimeField.of(q)
    if a % q:
        assert a * F.inv(a) % q == 1


def test_rank_examples():
    F = PrimeField.of(11)
    assert F.rank(np.zeros((4, 4), dtype=np.int64)) == 0
    assert PrimeField.of(7).rank(np.eye(5, dtype=np.int64)) == 5
    M = np.random.default_rng(0).integers(0, 11, (9, 9))
    M[3] = M[5]
    assert F.rank(M) <= 8


def test_kernel_examples():
    F = PrimeField.of(7)
    assert F.kernel(np.eye(3, dtype=np.int64)).shape[0] == 0
    assert F.kernel(np.zeros((3, 3), dtype=np.int64)).shape[0] == 3


@given(primes.flatmap(lambda q: st.tuples(st.just(q), matrices(q))))
def test_rank_nullity_and_kernel(args):
    q, M = args
    F = PrimeField.of(q)
    K = F.kernel(M)
    assert F.rank(M) + K.shape[0] == M.shape[1]
    assert not F.matmul(M, K.T).any()


@given(primes.flatmap(lambda q: st.tuples(st.just(q), matrices(q), st.integers(0, 2**32 - 1))))
def test_solve_in_span(args):
    q, M, s = args
    F = PrimeField.of(q)
    x = np.random.default_rng(s).integers(0, q, M.shape[1])
    B = F.matmul(M, x[:, None])[:, 0]
    X, K = F.solve(M, B)
    assert np.array_equal(F.matmul(M, X[:, None])[:, 0], B)
    assert K.shape[0] == M.shape[1] - F.rank(M)


def test_solve_identity_and_inconsistent():
    F = PrimeField.of(7)
    B = np.array([[1, 2], [3, 4], [5, 6]])
    assert np.array_equal(F.solve(np.eye(3, dtype=np.int64), B)[0], B)
    M = np.array([[1, 2], [2, 4]])
    X, K = F.solve(M, np.array([1, 2]))
    assert K.shape[0] == 1
    with pytest.raises(Inconsistent):
        F.solve(M, np.array([1, 0]))


@given(primes.flatmap(lambda q: st.tuples(st.just(q), st.integers(1, 6), st.integers(0, 2**32 - 1))))
def test_det_multiplicative_and_inverse(args):
    q, n, s = args
    F = PrimeField.of(q)
    rng = np.random.default_rng(s)
    A, B = rng.integers(0, q, (2, n, n))
    assert F.det(F.matmul(A, B)) == F.det(A) * F.det(B) % q
    if F.det(A):
        assert np.array_equal(F.matmul(A, F.inverse(A)), np.eye(n, dtype=np.int64))
    else:
        with pytest.raises(ZeroInverse):
            F.inverse(A)


@settings(max_examples=20)
@given(primes.flatmap(lambda q: st.tuples(st.just(q), st.integers(0, 2**32 - 1))))
def test_batch_rank_matches_rank(args):
    q, s = args
    F = PrimeField.of(q)
    rng = np.random.default_rng(s)
    mats = rng.integers(0, q, (30, 5, 6))
    # force some low-rank members
    mats[::3, 3] = mats[::3, 0]
    mats[::3, 4] = 0
    assert list(F.batch_rank(mats)) == [F.rank(m) for m in mats]


def test_blocked_echelon_matches_plain():
    F = PrimeField.of(23)
    rng = np.random.default_rng(4)
    M = rng.integers(0, 23, (300, 900))
    M[150:] = F.matmul(rng.integers(0, 23, (150, 150)), M[:150])
    U1, p1 = F.rref(M)
    U2, p2 = F.echelon(M)
    assert p1 == p2
    assert F.rank(M) == 150
    assert np.array_equal(F.rref(U2)[0], U1)


@pytest.mark.slow
def test_large_solve_by_substitution():
    F = PrimeField.of(23)
    rng = np.random.default_rng(7)
    n = 3003
    M = rng.integers(0, 23, (n, n))
    x = rng.integers(0, 23, n)
    B = F.matmul(M, x[:, None])[:, 0]
    X, K = F.solve(M, B)
    assert K.shape[0] == 0
    assert np.array_equal(X, x)


@pytest.mark.parametrize("k,q", [(2, 5), (3, 7), (4, 5)])
def test_projective_points(k, q):
    P = projective_points(k, q)
    assert len(P) == (q**k - 1) // (q - 1)
    assert np.array_equal(normalize_rows(P, q), P)
    assert len({tuple(p) for p in P}) == len(P)


@given(primes, st.lists(st.integers(0, 100), min_size=3, max_size=9), st.integers(1, 30))
def test_normalize_projective(q, v, c):
    v = np.array(v) % q
    if not v.any() or c % q == 0:
        return
    assert np.array_equal(normalize(v, q), normalize(c * v, q))
    assert normalize(v, q)[np.flatnonzero(v)[0]] == 1
