import numpy as np
import pytest

import coble.generate as gen
from coble.errors import DegenerateChord, SuitabilityExhausted
from coble.exterior import Trivector
from coble.generate import generate, planted_trivector, suitability_gate
from coble.pfaffloci import rank_at, verify_pfaffian_identity


def test_decomposable_fails():
    om = Trivector.from_terms(9, 7, {(0, 1, 2): 1})
    g = suitability_gate(om)
    assert not g and g.diagnostic == "generic_rank"


def test_wrong_dimension():
    assert suitability_gate(Trivector.random(8, 7, np.random.default_rng(0))).diagnostic == "dimension"


def test_generated_q7_passes(bench):
    om, gate, _ = bench.instance(7)
    assert gate and gate.diagnostic == "ok"
    assert gate.info["generic_rank8_fraction"] >= 0.5
    assert verify_pfaffian_identity(om)
    assert gate.info["num_points"] >= 3


def test_generate_is_deterministic():
    a = generate(7, 2)
    b = generate(7, 2)
    assert a.omega == b.omega and a.attempts == b.attempts


def test_chord_only_failure(monkeypatch, omega7):
    def broken(*a, **k):
        raise DegenerateChord("forced")

    monkeypatch.setattr(gen, "third_point", broken)
    g = suitability_gate(omega7)
    assert not g and g.diagnostic == "chord"


def test_exhaustion(monkeypatch):
    monkeypatch.setattr(gen, "suitability_gate", lambda *a, **k: gen.GateResult(False, "forced"))
    with pytest.raises(SuitabilityExhausted):
        generate(7, 0, max_attempts=3)


@pytest.mark.parametrize("q,seed", [(17, 0), (23, 1), (29, 2)])
def test_planted_point_lies_on_a(q, seed):
    om, pt = planted_trivector(q, np.random.default_rng(seed))
    assert rank_at(om, pt) == 4


def test_planted_needs_known_points(omega23):
    assert suitability_gate(omega23).diagnostic == "no_points"
