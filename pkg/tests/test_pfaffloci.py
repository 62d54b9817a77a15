import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coble.errors import KernelNotOneDim, RankTooHigh
from coble.exterior import Trivector, double_contract, pfaffian, skew_matrix
from coble.pfaffloci import (
    coble_cubic,
    coble_cubic_data,
    cubic_by_interpolation,
    kernel5,
    on_abelian,
    p4_of,
    rank_at,
    rank_batch,
    tangent_A,
    tangent_A_contraction,
    verify_pfaffian_identity,
)


@settings(max_examples=5, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([5, 7, 11]))
def test_pfaffian_vector_identity_random(s, q):
    om = Trivector.random(9, q, np.random.default_rng(s))
    assert verify_pfaffian_identity(om)


def test_identity_at_random_points(omega7):
    C, sc = coble_cubic_data(omega7)
    rng = np.random.default_rng(0)
    for p in rng.integers(0, 7, (100, 9)):
        M = skew_matrix(omega7, p)
        for i in range(9):
            keep = [j for j in range(9) if j != i]
            assert pfaffian(M[np.ix_(keep, keep)], 7) == sc[i] * C(p) * p[i] % 7


def test_rank_examples(omega11):
    assert rank_at(omega11, np.zeros(9, dtype=np.int64)) == 0
    P = np.random.default_rng(1).integers(0, 11, (4000, 9))
    # ranks are even and rank 8 dominates; about 1/q of points sit on the cubic
    r = rank_batch(omega11, P)
    assert set(np.unique(r)) <= {0, 2, 4, 6, 8}
    assert (r == 8).mean() > 0.85


def test_rank_eight_iff_off_cubic(omega7):
    C = coble_cubic(omega7)
    P = np.random.default_rng(2).integers(0, 7, (3000, 9))
    assert np.array_equal(rank_batch(omega7, P) == 8, C(P) != 0)


def test_a_points_are_rank_four_and_singular_on_cubic(omega7, points7):
    C = coble_cubic(omega7)
    assert (rank_batch(omega7, points7) == 4).all()
    assert all(on_abelian(omega7, p) for p in points7)
    assert not C(points7).any()
    assert not C.gradient(points7).any()


def test_cubic_smooth_at_rank_six_points(omega7, points7):
    C = coble_cubic(omega7)
    rng = np.random.default_rng(3)
    P = rng.integers(0, 7, (20000, 9))
    six = P[rank_batch(omega7, P) == 6]
    assert len(six) > 50
    assert not C(six).any()
    smooth = C.gradient(six).any(axis=1)
    assert smooth.mean() > 0.9


def test_generic_point_off_a(omega7):
    P = np.random.default_rng(4).integers(0, 7, (200, 9))
    assert sum(on_abelian(omega7, p) for p in P) <= 2


def test_kernel5_and_p4(omega7, points7):
    for P in points7[:20]:
        K = kernel5(omega7, P)
        assert K.dim == 5 and K.contains(P)
        V = p4_of(omega7, P)
        assert V.dim == 4
        for Q in points7[20:25]:
            v = double_contract(omega7, P, Q)
            assert V.contains(v) or not v.any()
            assert not (K.basis @ v % 7).any()


def test_rank_too_high(omega7):
    p = np.random.default_rng(5).integers(0, 7, 9)
    while rank_at(omega7, p) != 8:
        p = (p + 1) % 7
    with pytest.raises(RankTooHigh):
        kernel5(omega7, p)
    with pytest.raises(RankTooHigh):
        p4_of(omega7, p)


def test_tangent_plane(omega7, points7):
    for P in points7:
        T = tangent_A(omega7, P)
        assert T.dim == 3 and T.contains(P)
        assert T == tangent_A_contraction(omega7, P)


def test_cubic_by_interpolation(omega7, points7):
    C = coble_cubic(omega7)
    got = cubic_by_interpolation(points7, 7)
    assert got.proportional_to(C) is not None
    with pytest.raises(KernelNotOneDim):
        cubic_by_interpolation(points7[:2], 7)
