"""Random trivectors and the gate deciding whether one is generic enough.

Over a tiny field a random omega can land on special loci (singular A,
degenerate Pfaffians).  `suitability_gate` runs the cheap checks in a fixed
order and reports the first failure; `generate` resamples until one passes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chords import third_point
from .errors import CobleError, NotDivisible, SingularSurfacePoint, SuitabilityExhausted
from .exterior import Trivector, basis, basis_index, double_contract, matrix_to_two_form
from .field import PrimeField, normalize
from .pfaffloci import coble_cubic_data, rank_batch, tangent_A, verify_pfaffian_identity
from .scanner import FULL_SCAN_MAX_Q, SUBSPACE_SCAN_MAX_Q, curve_points, enumerate_A

MAX_ATTEMPTS = 32
GENERIC_SAMPLES = 200


@dataclass
class GateResult:
    passed: bool
    diagnostic: str
    info: dict = field(default_factory=dict)
    points: np.ndarray | None = field(default=None, repr=False)

    def __bool__(self):
        return self.passed


def random_trivector(q: int, rng: np.random.Generator, n: int = 9) -> Trivector:
    return Trivector.random(n, q, rng)


def random_invertible(n: int, q: int, rng: np.random.Generator) -> np.ndarray:
    F = PrimeField.of(q)
    while True:
        g = rng.integers(0, q, size=(n, n))
        if F.rank(g) == n:
            return g


def planted_trivector(q: int, rng: np.random.Generator) -> tuple[Trivector, np.ndarray]:
    """A random omega together with one known point of A.

    omega0 = e8 ^ theta + sigma' with theta a rank-four 2-form and sigma' a
    3-form on the first eight coordinates, so e8* has rank four.  A random
    change of basis g then hides the structure; the point moves to e8* g^-1.
    """
    n = 9
    F = PrimeField.of(q)
    idx9 = basis_index(n, 3)
    c9 = np.zeros(len(idx9), dtype=np.int64)
    for c, t in zip(Trivector.random(8, q, rng).coeffs, basis(8, 3)):
        c9[idx9[t]] = c
    while True:
        a, b, c, d = rng.integers(0, q, size=(4, 8))
        theta = np.mod(np.outer(a, b) - np.outer(b, a) + np.outer(c, d) - np.outer(d, c), q)
        if F.rank(theta) == 4:
            break
    for (i, j), val in zip(basis(8, 2), matrix_to_two_form(theta, 8, q)):
        c9[idx9[(i, j, 8)]] = val
    g = random_invertible(n, q, rng)
    omega = Trivector(n, q, c9).act(g)
    e8 = np.zeros(n, dtype=np.int64)
    e8[8] = 1
    point = normalize(F.matmul(e8[None, :], F.inverse(g))[0], q)
    return omega, point


def _generic_rank_fraction(omega: Trivector, samples: int = GENERIC_SAMPLES) -> float:
    rng = np.random.default_rng(0)
    P = rng.integers(0, omega.q, size=(samples, omega.n))
    return float((rank_batch(omega, P) == omega.n - 1).mean())


def suitability_gate(omega: Trivector, known_points=None, chord_pairs: int = 10) -> GateResult:
    """Checks, in order: generic rank, Pfaffian divisibility, A (scan or known
    points), no rank <= 2, smoothness of A at every available point, at least
    three points, one successful constructive chord.
    """
    q = omega.q
    info: dict = {}
    if omega.n != 9:
        return GateResult(False, "dimension", info)
    frac = _generic_rank_fraction(omega)
    info["generic_rank8_fraction"] = frac
    if frac < 0.5:
        return GateResult(False, "generic_rank", info)
    try:
        coble_cubic_data(omega)
    except NotDivisible:
        return GateResult(False, "divisibility", info)
    if not verify_pfaffian_identity(omega):
        return GateResult(False, "divisibility", info)

    if q <= FULL_SCAN_MAX_Q:
        pts = enumerate_A(omega).points
        info["scanned"] = True
    else:
        if known_points is None or not len(known_points):
            return GateResult(False, "no_points", info)
        seeds = np.atleast_2d(np.asarray(known_points, dtype=np.int64))
        found = {tuple(int(x) for x in normalize(s, q)) for s in seeds}
        if q <= SUBSPACE_SCAN_MAX_Q:
            for s in seeds:
                if rank_batch(omega, s[None, :])[0] > 4:
                    return GateResult(False, "no_points", info)
                found.update(tuple(int(x) for x in pt) for pt in curve_points(omega, s).points)
        pts = np.array(sorted(found), dtype=np.int64)
        info["scanned"] = False
    info["num_points"] = int(len(pts))
    if not len(pts):
        return GateResult(False, "A_empty", info, pts)
    if (rank_batch(omega, pts) <= 2).any():
        return GateResult(False, "rank_le_2", info, pts)
    for p in pts:
        try:
            tangent_A(omega, p)
        except SingularSurfacePoint:
            info["singular_point"] = [int(x) for x in p]
            return GateResult(False, "smooth", info, pts)
    if len(pts) < 3:
        return GateResult(False, "points", info, pts)

    rng = np.random.default_rng(1)
    tried = 0
    for _ in range(20 * chord_pairs):
        if tried >= chord_pairs:
            break
        i, j = rng.choice(len(pts), 2, replace=False)
        if not double_contract(omega, pts[i], pts[j]).any():
            continue
        tried += 1
        try:
            third_point(omega, pts[i], pts[j], np.random.default_rng(tried))
            return GateResult(True, "ok", info, pts)
        except CobleError:
            continue
    return GateResult(False, "chord", info, pts)


@dataclass
class Generated:
    omega: Trivector
    gate: GateResult
    attempts: list
    planted_point: np.ndarray | None = None


def generate(q: int, seed: int, planted: bool | None = None, max_attempts: int = MAX_ATTEMPTS) -> Generated:
    """Seeded random omega that passes the gate.

    Above the full-scan limit the trivector is planted with a known point of
    A, since no scan can find one.
    """
    if planted is None:
        planted = q > FULL_SCAN_MAX_Q
    rng = np.random.default_rng(seed)
    log = []
    for attempt in range(max_attempts):
        if planted:
            omega, point = planted_trivector(q, rng)
            gate = suitability_gate(omega, known_points=point[None, :])
        else:
            omega, point = random_trivector(q, rng), None
            gate = suitability_gate(omega)
        log.append({"attempt": attempt, "diagnostic": gate.diagnostic, **gate.info})
        if gate:
            return Generated(omega, gate, log, point)
    raise SuitabilityExhausted(f"no suitable trivector in {max_attempts} attempts (q={q}, seed={seed})")
