import json

import numpy as np
import pytest

from coble.errors import FieldTooLarge
from coble.exterior import Trivector, double_contract
from coble.pfaffloci import kernel5, on_abelian
from coble.scanner import (
    ScanReport,
    curve_points,
    enumerate_A,
    enumerate_rank_reference,
    hyperplane_section,
    rank_census,
    sort_points,
)


@pytest.fixture(scope="module")
def omega5():
    return Trivector.random(9, 5, np.random.default_rng(8))


def test_prefilter_scan_matches_reference(omega5):
    ref = enumerate_rank_reference(omega5)
    for pre in (0, 1, 3):
        got = enumerate_A(omega5, prefilter=pre)
        assert np.array_equal(sort_points(got.points), ref.points)


def test_rank_census_consistent(omega5):
    census = rank_census(omega5)
    assert sum(census.values()) == (5**9 - 1) // 4
    assert census[0] == 0
    assert census[2] + census[4] == enumerate_A(omega5).count
    assert census[2] == enumerate_A(omega5, max_rank=2).count


def test_q7_census(omega7, points7):
    rep = enumerate_A(omega7)
    assert rep.count == len(points7)
    assert abs(rep.count / 49 - 1) <= 10 / np.sqrt(7)
    assert enumerate_A(omega7, max_rank=2).count == 0


def test_scan_deterministic_across_workers(omega7):
    a = enumerate_A(omega7, workers=1)
    b = enumerate_A(omega7, workers=2)
    assert np.array_equal(a.points, b.points)


def test_report_json_round_trip(omega7):
    rep = enumerate_A(omega7)
    doc = json.loads(json.dumps(rep.to_json()))
    assert set(doc) >= {"q", "predicate", "count", "points", "millis"}
    back = ScanReport.from_json(doc)
    assert back.count == rep.count and np.array_equal(back.points, rep.points)


def test_full_scan_limit():
    with pytest.raises(FieldTooLarge):
        enumerate_A(Trivector.random(9, 17, np.random.default_rng(0)))


def test_curves(omega7, points7):
    for P in points7[:20]:
        rep = curve_points(omega7, P)
        assert any(np.array_equal(P, x) for x in rep.points)
        assert abs(rep.count - 8) <= 4 * np.sqrt(7)
        assert all(on_abelian(omega7, x) for x in rep.points)
        assert all(kernel5(omega7, P).contains(x) for x in rep.points)


def test_curve_inside_section_of_its_chords(omega7, points7):
    P, Q = points7[0], points7[5]
    v = double_contract(omega7, P, Q)
    if not v.any():
        pytest.skip("Q lies on C_P")
    sec = {tuple(x) for x in hyperplane_section(omega7, v, points7).points}
    assert {tuple(x) for x in curve_points(omega7, P).points} <= sec
    assert {tuple(x) for x in curve_points(omega7, Q).points} <= sec


def test_random_section_contains_no_curve(omega7, points7):
    rng = np.random.default_rng(9)
    curves = [{tuple(x) for x in curve_points(omega7, P).points} for P in points7]
    for _ in range(10):
        v = rng.integers(0, 7, 9)
        sec = {tuple(x) for x in hyperplane_section(omega7, v, points7).points}
        assert sum(c <= sec for c in curves) <= 1
