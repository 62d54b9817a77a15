import numpy as np
import pytest

from coble.errors import MembershipFailed, UnknownLabel
from coble.exterior import Subspace, Trivector
from coble.orbits8 import (
    FingerprintDB,
    UNKNOWN,
    classify8,
    default_database,
    fingerprint,
    in_flag_sum,
    normal_form,
    reference_flags,
    transport,
    transport_matrix,
    y4_three_flags,
)


@pytest.fixture(scope="module")
def db():
    return default_database()


def test_normal_form_shape():
    y4 = normal_form("Y4")
    assert len(y4.terms()) == 6 and set(y4.terms().values()) == {1}
    with pytest.raises(UnknownLabel):
        normal_form("Y9")


def test_transport_of_zero():
    assert transport(Trivector(8, 5), 3).is_zero()


def test_trivial_fingerprints():
    assert fingerprint(Trivector(8, 5)).counts[1:] == (0, 0, 0, 0)
    fp = fingerprint(Trivector.from_terms(8, 5, {(0, 1, 2): 1}))
    assert fp.counts[2:] == (0, 0, 0)
    assert fp.total == (5**8 - 1) // 4


def test_fingerprint_invariant_under_transport():
    y = Trivector.random(8, 5, np.random.default_rng(40))
    base = fingerprint(y)
    for seed in range(10):
        assert fingerprint(transport(y, seed)) == base


def test_database_separates_labels(db):
    assert db.collisions() == []
    labels = {lab for lab, _ in db.entries}
    assert labels == {"Y3", "Y4", "Y6", "generic"}
    assert FingerprintDB.from_json(db.to_json()) == db


def test_classify_anchors(db):
    assert classify8(normal_form("Y4"), db) == "Y4"
    assert classify8(transport(normal_form("Y3"), 11), db) == "Y3"
    assert classify8(transport(normal_form("Y6"), 12), db) == "Y6"


def test_classify_random_is_generic(db):
    rng = np.random.default_rng(41)
    got = [classify8(Trivector.random(8, 5, rng), db) for _ in range(6)]
    assert got.count("generic") >= 5


def test_classify_decomposable_unknown(db):
    assert classify8(Trivector.from_terms(8, 5, {(0, 1, 2): 1}), db) == UNKNOWN


@pytest.mark.parametrize("name", sorted(reference_flags()))
def test_reference_anchor(name):
    label, pattern, spaces = reference_flags()[name]
    assert in_flag_sum(normal_form(label), pattern, spaces)


@pytest.mark.parametrize("name", sorted(reference_flags()))
def test_reference_anchor_transported(name):
    label, pattern, spaces = reference_flags()[name]
    g = transport_matrix(5, 5)
    assert in_flag_sum(normal_form(label).act(g), pattern, [s.image(g) for s in spaces])


def test_wrong_flag_rejected():
    y4 = normal_form("Y4")
    rng = np.random.default_rng(42)
    rows = rng.integers(0, 5, (6, 8))
    assert not in_flag_sum(y4, ((4, 4, 8), (6, 6, 6)), [Subspace(8, 5, rows[:4]), Subspace(8, 5, rows)])


def test_y4_three_flags_are_the_reference_ones():
    fl = reference_flags()
    V2, V5 = fl["Y4_W1"][2]
    got = y4_three_flags(normal_form("Y4"), V2, V5)
    expected = {tuple(fl[k][2]) for k in ("Y4_W2_a", "Y4_W2_b", "Y4_W2_c")}
    assert len(got) == 3 and set(got) == expected
    for U4, U6 in got:
        assert in_flag_sum(normal_form("Y4"), ((4, 4, 8), (6, 6, 6)), [U4, U6])


def test_y4_three_flags_equivariant():
    fl = reference_flags()
    V2, V5 = fl["Y4_W1"][2]
    g = transport_matrix(7, 5)
    got = y4_three_flags(normal_form("Y4").act(g), V2.image(g), V5.image(g))
    originals = y4_three_flags(normal_form("Y4"), V2, V5)
    assert set(got) == {(a.image(g), b.image(g)) for a, b in originals}


def test_y4_three_flags_rejects_wrong_input():
    with pytest.raises(MembershipFailed):
        y4_three_flags(normal_form("Y4"), Subspace.coordinate(8, 5, [0, 1]), Subspace.coordinate(8, 5, range(5)))
