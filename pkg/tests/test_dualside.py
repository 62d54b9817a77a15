import numpy as np
import pytest

from coble.dualside import (
    Calibration,
    ModelFlag,
    calibrate,
    classify_point,
    dual_points,
    dy6_image,
    is_singular,
    multiplicity,
    p4_points,
    sextic_interpolate,
    sigma_image,
    smooth_cubic_points,
    t_flag,
    torsion_census,
    triple_cover_enumerate,
    verify_membership,
    x_flag,
    z_flag,
)
from coble.chords import make_group
from coble.errors import DegenerateChord, FieldTooLarge, ZeroContraction
from coble.exterior import Flag, Subspace, Trivector
from coble.pfaffloci import coble_cubic
from coble.scanner import curve_points
from coble.verify import constructive_triples, random_chord_pairs


@pytest.fixture(scope="module")
def group23(omega23, pool23):
    return make_group(omega23, pool23, 0)


@pytest.fixture(scope="module")
def calib23(omega23, sextic23, group23):
    return calibrate(omega23, sextic23.form, group23, np.random.default_rng(2))


@pytest.fixture(scope="module")
def triples11(omega11, points11):
    return constructive_triples(omega11, points11, 12, np.random.default_rng(21))[0]


def test_sigma_image_symmetry(omega11, triples11):
    for t in triples11:
        s = sigma_image(omega11, t.P, t.Q)
        assert np.array_equal(s, sigma_image(omega11, t.Q, t.P))
        assert np.array_equal(s, sigma_image(omega11, t.P, t.R))
        assert np.array_equal(s, sigma_image(omega11, t.Q, t.R))


def test_sigma_image_on_curve_pair(omega7, points7):
    P = points7[0]
    Q = next(x for x in curve_points(omega7, P).points if not np.array_equal(x, P))
    with pytest.raises(ZeroContraction):
        sigma_image(omega7, P, Q)


def test_sextic_refuses_small_field(omega7):
    with pytest.raises(FieldTooLarge):
        sextic_interpolate(omega7)


def test_sextic_is_dual_of_cubic(omega23, sextic23):
    assert sextic23.kernel_dim == 1 and sextic23.q == 23
    C3 = coble_cubic(omega23)
    X = smooth_cubic_points(C3, 200, np.random.default_rng(30))
    assert not sextic23.form(dual_points(C3, X)).any()


def test_generic_sextic_points_are_smooth(omega23, sextic23):
    C3 = coble_cubic(omega23)
    Y = dual_points(C3, smooth_cubic_points(C3, 100, np.random.default_rng(31)))
    smooth = sextic23.form.gradient(Y).any(axis=1)
    assert smooth.mean() >= 0.9


def test_random_points_mostly_off(sextic23):
    X = np.random.default_rng(32).integers(0, 23, (500, 9))
    off = (sextic23.form(X) != 0).mean()
    assert abs(off - (1 - 1 / 23)) < 0.05


def test_sigma_and_p4_points_singular(omega23, pool23, sextic23):
    rng = np.random.default_rng(33)
    C6 = sextic23.form
    for P, Q in random_chord_pairs(omega23, pool23, 30, rng):
        x = sigma_image(omega23, P, Q)
        assert is_singular(C6, x)
        assert multiplicity(C6, x, rng=rng) >= 2
    for P in pool23[:5]:
        for x in p4_points(omega23, P, 4, rng):
            assert is_singular(C6, x)


def test_tangent_chord_images(group23, pool23, sextic23):
    C6 = sextic23.form
    done = 0
    for P in pool23[:50]:
        try:
            x = dy6_image(group23, P)
        except DegenerateChord:
            continue
        done += 1
        assert is_singular(C6, x)
    assert done >= 25


def test_calibration(calib23):
    assert calib23.m3 >= 2 and calib23.m4 >= 2
    assert calib23.m6 > calib23.m4
    assert Calibration.from_json(calib23.to_json()) == calib23


def test_classify_point(omega23, pool23, sextic23, calib23):
    rng = np.random.default_rng(34)
    C6 = sextic23.form
    labels = [classify_point(omega23, sigma_image(omega23, P, Q), C6, calib23, pool23).label
              for P, Q in random_chord_pairs(omega23, pool23, 8, rng)]
    assert all(lab in ("DY4", "DY6") for lab in labels)
    C3 = coble_cubic(omega23)
    Y = dual_points(C3, smooth_cubic_points(C3, 10, rng))
    smooth = [classify_point(omega23, y, C6, calib23).label for y in Y]
    assert smooth.count("SexticSmooth") >= 8
    X = rng.integers(0, 23, (40, 9))
    off = [classify_point(omega23, x, C6, calib23).label for x in X]
    assert off.count("OffSextic") >= 32


def test_t_flags_share_line(omega11, triples11):
    rng = np.random.default_rng(35)
    for t in triples11[:6]:
        flags = [t_flag(omega11, a, b, rng) for a, b in ((t.P, t.Q), (t.P, t.R), (t.Q, t.R))]
        assert all(f.dims == (1, 5, 7) and f.certified for f in flags)
        assert flags[0].space(1) == flags[1].space(1) == flags[2].space(1)


def test_z_and_x_flags(omega11, triples11):
    rng = np.random.default_rng(36)
    for t in triples11[:6]:
        zf = z_flag(omega11, t.P, t.Q, t.R, rng)
        assert zf.dims == (1, 3, 6)
        xs = [x_flag(omega11, t.P, t.Q, t.R, zf=zf, pair=k) for k in range(3)]
        assert all(x.dims == (1, 3, 5, 6, 7) for x in xs)
        keys = {(x.space(5), x.space(7)) for x in xs}
        assert len(keys) == 3


def test_triple_cover_matches_pairwise_t_flags(omega11, triples11):
    rng = np.random.default_rng(37)
    for t in triples11[:5]:
        zf = z_flag(omega11, t.P, t.Q, t.R, rng)
        pairs = triple_cover_enumerate(omega11, zf)
        expected = {(fr.U5_space, fr.V7_space) for fr in zf.extra["frames"]}
        assert len(pairs) == 3 and set(pairs) == expected


def test_membership_fails_for_a_random_flag(omega11):
    rng = np.random.default_rng(38)
    rows = rng.integers(0, 11, (7, 9))
    spaces = [Subspace(9, 11, rows[:k]) for k in (1, 5, 7)]
    assert not verify_membership(omega11, ModelFlag("T", Flag(spaces)))


def test_triple_cover_refuses_large_field(omega11, triples11):
    t = triples11[0]
    zf = z_flag(omega11, t.P, t.Q, t.R, np.random.default_rng(39))
    big = Trivector(9, 37, omega11.coeffs)
    with pytest.raises(FieldTooLarge):
        triple_cover_enumerate(big, zf)


def test_torsion_census_keys(group7, points7):
    out = torsion_census(group7, points7)
    assert out["points"] == len(points7)
    assert out["three_torsion"] >= 1  # the identity
    assert out["flexes"] <= out["three_torsion"]
