"""Chords of the rank-four locus A and the group law they induce.

For two points P, Q of A (covectors with rank omega(P, ., .) = 4) there is a
unique third point R of A with [omega(P,Q,.)] = [omega(P,R,.)] = [omega(Q,R,.)].
`third_point` finds R by linear algebra alone; `third_point_oracle` finds it by
scanning the P^3 of covectors vanishing on an auxiliary five-space U5.

With the chord relation P + Q + R = O, fixing any E in A turns A into a
group with identity E:  P (+) Q = third(E, third(P, Q)).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateChord, NotUnique, RankTooHigh, ZeroContraction
from .exterior import (
    Subspace,
    Trivector,
    double_contract,
    matrix_to_two_form,
    transform_tensor,
    vector_wedge,
    wedge,
)
from .field import PrimeField, normalize
from .pfaffloci import kernel5, rank_at, rank_batch
from .scanner import SUBSPACE_SCAN_MAX_Q, FieldTooLarge, curve_points, sort_points, subspace_points

SPLIT_DRAWS = 8


def _key(p) -> tuple:
    return tuple(int(x) for x in p)


@dataclass
class ChordFrame:
    """Everything the constructive third-point computation builds on the way."""

    q: int
    p: np.ndarray
    r_q: np.ndarray  # the second covector Q
    v1: np.ndarray  # omega(P, Q, .) as a vector of V9
    v_P: np.ndarray
    v_Q: np.ndarray
    V7: np.ndarray  # basis rows of ker p  cap  ker Q
    u: np.ndarray
    u2: np.ndarray  # u'
    vw: tuple  # (v, w) with alpha = v1 ^ u + v ^ w
    vw2: tuple  # (v', w') with beta = v1 ^ u' + v' ^ w'
    U5: np.ndarray  # basis rows (v1, v, w, v', w') in V9
    sigma: np.ndarray  # the Lambda^3 V7 part of omega, full tensor in V7 coordinates

    @property
    def U5_space(self) -> Subspace:
        return Subspace(len(self.p), self.q, self.U5, role="V")

    @property
    def V7_space(self) -> Subspace:
        return Subspace(len(self.p), self.q, self.V7, role="V")


@dataclass(frozen=True)
class ChordTriple:
    P: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    v1: np.ndarray

    def points(self):
        return (self.P, self.Q, self.R)


def _skew_from_rows(x, y, q):
    """The skew matrix of x ^ y."""
    return np.mod(np.outer(x, y) - np.outer(y, x), q)


def _split_rank4(A: np.ndarray, v1: np.ndarray, q: int, rng: np.random.Generator):
    """Write the rank-4 skew matrix A as v1 ^ u + v ^ w.

    Adds t * v1 ^ u0 for a random u0 in the support of A, with t chosen so the
    sum becomes decomposable (its square vanishes in Lambda^4 of the support).
    """
    F = PrimeField.of(q)
    n = A.shape[0]
    L = F.rref(A)[0]
    if L.shape[0] != 4:
        raise DegenerateChord(f"two-form has rank {L.shape[0]}, expected 4")
    if F.rank(np.vstack([L, v1])) != 4:
        raise DegenerateChord("contraction line is not in the support of the two-form")

    a = matrix_to_two_form(A, n, q)
    aa = wedge(a, 2, a, 2, n, q)
    for _ in range(SPLIT_DRAWS):
        u0 = np.mod(rng.integers(0, q, 4) @ L, q)
        if F.rank(np.vstack([v1, u0])) < 2:
            continue
        v1u0 = matrix_to_two_form(_skew_from_rows(v1, u0, q), n, q)
        cross = wedge(v1u0, 2, a, 2, n, q)
        nz = np.flatnonzero(cross)
        if nz.size == 0:
            continue
        i = nz[0]
        # aa + 2 t cross = 0, and both live in the line Lambda^4 L
        t = (-int(aa[i]) * F.inv(2 * int(cross[i]))) % q
        if np.mod(aa + 2 * t * cross, q).any():
            raise DegenerateChord("square of the two-form is not in Lambda^4 of its support")
        G = np.mod(A + t * _skew_from_rows(v1, u0, q), q)
        nzG = np.argwhere(np.triu(G) != 0)
        if len(nzG) == 0:
            continue
        ia, ib = nzG[0]
        gab = int(G[ia, ib])
        v = G[:, ia] * F.inv(gab) % q
        w = G[:, ib].copy()
        if not np.array_equal(_skew_from_rows(v, w, q), G):
            raise DegenerateChord("shifted two-form is not decomposable")
        u = (-t * u0) % q
        return u, v, w
    raise DegenerateChord("no admissible auxiliary vector found for the split")


def chord_frame(omega: Trivector, p, r, rng: np.random.Generator | None = None) -> ChordFrame:
    """Frame for the chord through P and Q: V7 = ker P cap ker Q, the splits of alpha and beta, and U5."""
    q = omega.q
    F = PrimeField.of(q)
    rng = np.random.default_rng(0) if rng is None else rng
    p = np.mod(np.asarray(p, dtype=np.int64), q)
    r = np.mod(np.asarray(r, dtype=np.int64), q)
    v1 = double_contract(omega, p, r)
    if not v1.any():
        raise ZeroContraction("omega(P, Q, .) vanishes")
    PQ = np.vstack([p, r])
    if F.rank(PQ) < 2:
        raise DegenerateChord("P and Q coincide")
    X, V7 = F.solve(PQ, np.eye(2, dtype=np.int64))
    last = None
    for attempt in range(SPLIT_DRAWS):
        v_P, v_Q = X[:, 0], X[:, 1]
        if attempt:
            # the splits depend on the lifts of v_P, v_Q modulo V7; U5 does not
            v_P = np.mod(v_P + rng.integers(0, q, 7) @ V7, q)
            v_Q = np.mod(v_Q + rng.integers(0, q, 7) @ V7, q)
        try:
            return _frame_for_lifts(omega, p, r, v1, v_P, v_Q, V7, rng)
        except DegenerateChord as exc:
            last = exc
            if "span V7" not in str(exc):
                raise
    raise last


def _frame_for_lifts(omega, p, r, v1, v_P, v_Q, V7, rng) -> ChordFrame:
    q = omega.q
    n = omega.n
    F = PrimeField.of(q)
    B = np.vstack([v_P, v_Q, V7])
    C = omega.in_basis(B)
    if not np.array_equal(np.mod(C[0, 1, 2:] @ V7, q), v1):
        raise DegenerateChord("contraction line does not match the adapted block")
    v1_7 = C[0, 1, 2:]
    alpha = C[0, 2:, 2:]
    beta = C[1, 2:, 2:]
    sigma = C[2:, 2:, 2:]
    u7, v7, w7 = _split_rank4(alpha, v1_7, q, rng)
    u27, v27, w27 = _split_rank4(beta, v1_7, q, rng)
    lift = lambda x: np.mod(x @ V7, q)  # noqa: E731
    u, v, w, u2, v2, w2 = (lift(x) for x in (u7, v7, w7, u27, v27, w27))

    # reassemble omega from the pieces
    rebuilt = vector_wedge([v_P, v_Q, v1], n, q)
    rebuilt = rebuilt + vector_wedge([v_P, v1, u], n, q) + vector_wedge([v_P, v, w], n, q)
    rebuilt = rebuilt + vector_wedge([v_Q, v1, u2], n, q) + vector_wedge([v_Q, v2, w2], n, q)
    sig = Trivector.from_tensor(transform_tensor(sigma, V7, q), q)
    if not np.array_equal(np.mod(rebuilt + sig.coeffs, q), omega.coeffs):
        raise DegenerateChord("reassembled trivector differs from the input")

    U5 = np.vstack([v1, v, w, v2, w2])
    if F.rank(U5) != 5:
        raise DegenerateChord(f"U5 has dimension {F.rank(U5)}")
    if F.rank(np.vstack([u7, u27, np.vstack([v1_7, v7, w7, v27, w27])])) != 7:
        raise DegenerateChord("u, u' and U5 do not span V7")
    return ChordFrame(q, p, r, v1, v_P, v_Q, V7, u, u2, (v, w), (v2, w2), U5, sigma)


def _third_from_frame(omega: Trivector, fr: ChordFrame) -> np.ndarray:
    """The covector R from the four linear conditions, with the sanity checks on the result."""
    q = omega.q
    F = PrimeField.of(q)

    # basis (u, u', v1, v, w, v', w') of V7, coordinates taken in V7
    V7 = fr.V7
    rows9 = np.vstack([fr.u, fr.u2, fr.U5])
    coords, _ = F.solve(V7.T, rows9.T)  # columns are V7-coordinates of each row
    B7 = coords.T
    S = transform_tensor(fr.sigma, F.inverse(B7), q)
    sigma0 = S[0, 1, 2:]
    s_u = matrix_to_two_form(S[0, 2:, 2:], 5, q)
    s_u2 = matrix_to_two_form(S[1, 2:, 2:], 5, q)
    e = np.eye(5, dtype=np.int64)
    vw = matrix_to_two_form(_skew_from_rows(e[1], e[2], q), 5, q)
    vw2 = matrix_to_two_form(_skew_from_rows(e[3], e[4], q), 5, q)
    lead = wedge(e[0], 1, sigma0, 1, 5, q)
    cols = [wedge(lead, 2, x, 2, 5, q) for x in (vw, vw2, s_u, s_u2)]
    K = F.kernel(np.stack(cols, axis=1))
    if K.shape[0] != 1:
        raise DegenerateChord(f"linear conditions leave a {K.shape[0]}-dimensional solution space")
    vals = np.concatenate([K[0], np.zeros(5, dtype=np.int64)])
    B9 = np.vstack([fr.v_P, fr.v_Q, fr.u, fr.u2, fr.U5])
    R = F.solve(B9, vals)[0]
    R = normalize(R, q)
    if rank_at(omega, R) > 4:
        raise DegenerateChord("computed third point is off A")
    if F.rank(np.vstack([fr.p, fr.r_q, R])) < 3:
        raise DegenerateChord("computed third point lies on the line PQ")
    line = normalize(fr.v1, q)
    for X in (fr.p, fr.r_q):
        c = double_contract(omega, X, R)
        if not c.any() or not np.array_equal(normalize(c, q), line):
            err = DegenerateChord("computed third point lies on C_P or C_Q")
            err.candidate = R
            raise err
    return R


def third_point(omega: Trivector, P, Q, rng: np.random.Generator | None = None) -> ChordTriple:
    """The third point of A on the chord through P and Q, by exact linear algebra."""
    fr = chord_frame(omega, P, Q, rng)
    R = _third_from_frame(omega, fr)
    return ChordTriple(normalize(P, omega.q), normalize(Q, omega.q), R, normalize(fr.v1, omega.q))


def third_point_oracle(omega: Trivector, P, Q, rng: np.random.Generator | None = None) -> ChordTriple:
    """The third point by scanning all covectors that vanish on U5.

    Besides P, Q and the third point, the scan can meet points of
    C_P cap C_Q (both contractions vanish); those are discarded.
    """
    q = omega.q
    if q > SUBSPACE_SCAN_MAX_Q:
        raise FieldTooLarge(f"P^3 scan is limited to q <= {SUBSPACE_SCAN_MAX_Q}")
    fr = chord_frame(omega, P, Q, rng)
    ann = Subspace(omega.n, q, fr.U5).perp().basis
    pts = subspace_points(ann, q)
    hits = sort_points(pts[rank_batch(omega, pts) <= 4])
    Pn, Qn = normalize(P, q), normalize(Q, q)
    others = [
        h
        for h in hits
        if not (np.array_equal(h, Pn) or np.array_equal(h, Qn))
        and (double_contract(omega, Pn, h).any() or double_contract(omega, Qn, h).any())
    ]
    if len(others) != 1:
        raise NotUnique(len(others))
    return ChordTriple(Pn, Qn, others[0], normalize(fr.v1, q))


def contraction_lines_agree(omega: Trivector, tri: ChordTriple) -> bool:
    """[omega(P,Q,.)] = [omega(P,R,.)] = [omega(Q,R,.)]."""
    q = omega.q
    lines = []
    for a, b in ((tri.P, tri.Q), (tri.P, tri.R), (tri.Q, tri.R)):
        v = double_contract(omega, a, b)
        if not v.any():
            return False
        lines.append(normalize(v, q))
    return all(np.array_equal(lines[0], x) for x in lines[1:])


# -- group law ----------------------------------------------------------------


@dataclass
class GroupContext:
    """The group structure on A with identity E.

    ``pool`` holds known points of A used as auxiliaries; ``stats`` counts
    which route produced each chord.
    """

    omega: Trivector
    E: np.ndarray
    seed: int
    pool: np.ndarray
    rng: np.random.Generator = field(repr=False, default=None)
    O_E: np.ndarray | None = None
    cache: dict = field(default_factory=dict, repr=False)
    stats: dict = field(default_factory=lambda: {"direct": 0, "oracle": 0, "composite": 0}, repr=False)
    max_retries: int = 8

    @property
    def q(self) -> int:
        return self.omega.q

    def _aux(self, avoid, partners=()) -> np.ndarray:
        """A random pool point outside ``avoid`` with nonzero contraction against every partner."""
        avoid = {_key(a) for a in avoid}
        for _ in range(256):
            T = self.pool[int(self.rng.integers(len(self.pool)))]
            if _key(T) in avoid:
                continue
            if all(double_contract(self.omega, X, T).any() for X in partners):
                return T
        raise DegenerateChord("auxiliary pool exhausted")

    def _chord(self, P, Q) -> np.ndarray | None:
        """Third point by the direct algorithm, else the scan oracle; None if both decline."""
        key = (_key(P), _key(Q)) if _key(P) <= _key(Q) else (_key(Q), _key(P))
        if key in self.cache:
            return self.cache[key]
        R = None
        if key[0] != key[1] and double_contract(self.omega, P, Q).any():
            try:
                R = third_point(self.omega, P, Q, self.rng).R
                self.stats["direct"] += 1
            except DegenerateChord:
                if self.q <= SUBSPACE_SCAN_MAX_Q:
                    try:
                        R = third_point_oracle(self.omega, P, Q, self.rng).R
                        self.stats["oracle"] += 1
                    except DegenerateChord:
                        R = None
        if R is not None:
            self.cache[key] = R
        return R

    def third(self, P, Q) -> np.ndarray:
        """The R with P + Q + R = O; tangent and degenerate chords go through auxiliaries."""
        P = normalize(P, self.q)
        Q = normalize(Q, self.q)
        R = self._chord(P, Q)
        if R is None:
            R = self._composite_third(P, Q)
            key = (_key(P), _key(Q)) if _key(P) <= _key(Q) else (_key(Q), _key(P))
            self.cache[key] = R
        return R

    def _composite_third(self, P, Q) -> np.ndarray:
        """third(P, Q) = third(third(third(P,T1), third(Q,T2)), third(T1,T2)) for auxiliaries T1, T2.

        Every inner chord must be computable directly (or by the oracle);
        otherwise fresh auxiliaries are drawn.
        """
        for _ in range(self.max_retries * 4):
            T1 = self._aux([P, Q], [P])
            T2 = self._aux([P, Q, T1], [Q, T1])
            A = self._chord(P, T1)
            B = self._chord(Q, T2)
            W = self._chord(T1, T2)
            if A is None or B is None or W is None:
                continue
            X = self._chord(A, B)
            if X is None:
                continue
            R = self._chord(X, W)
            if R is None:
                continue
            self.stats["composite"] += 1
            return R
        raise DegenerateChord(f"composite chord failed after {self.max_retries * 4} auxiliary draws")

    def tangent_third(self, P) -> np.ndarray:
        """The R with 2P + R = O."""
        return self.third(P, P)

    def add(self, P, Q) -> np.ndarray:
        return self.third(self.E, self.third(P, Q))

    def neg(self, P) -> np.ndarray:
        return self.third(P, self.O_E)

    def sub(self, P, Q) -> np.ndarray:
        return self.add(P, self.neg(Q))

    def double(self, P) -> np.ndarray:
        return self.add(P, P)

    def double_via_aux(self, P) -> np.ndarray:
        """2P computed as ((P + T) + P) - T for a random auxiliary T."""
        T = self._aux([P, self.E], [P])
        return self.add(self.add(self.add(P, T), P), self.neg(T))

    def scalar_mul(self, n: int, P) -> np.ndarray:
        P = normalize(P, self.q)
        if n < 0:
            return self.scalar_mul(-n, self.neg(P))
        acc = self.E
        base = P
        while n:
            if n & 1:
                acc = self.add(acc, base)
            n >>= 1
            if n:
                base = self.double(base)
        return acc

    def chord_sum(self, tri: ChordTriple) -> np.ndarray:
        return self.add(self.add(tri.P, tri.Q), tri.R)


def make_group(omega: Trivector, pool, seed: int = 0) -> GroupContext:
    """Group structure with identity the lexicographically first known point."""
    pool = sort_points(np.unique(np.asarray(pool, dtype=np.int64), axis=0))
    if len(pool) < 3:
        raise DegenerateChord("need at least three points of A")
    ctx = GroupContext(omega, pool[0], seed, pool, rng=np.random.default_rng(seed))
    ctx.O_E = ctx.tangent_third(ctx.E)
    return ctx


def grow_pool(omega: Trivector, seeds, target: int, rng: np.random.Generator, use_curves: bool = True) -> np.ndarray:
    """Collect points of A from a few seeds via curve scans and random chords."""
    q = omega.q
    found = {_key(normalize(s, q)) for s in seeds}
    if use_curves and q <= SUBSPACE_SCAN_MAX_Q:
        for s in list(found):
            if len(found) >= target:
                break
            for pt in curve_points(omega, np.array(s)).points:
                found.add(_key(pt))
    stall = 0
    while len(found) < target and stall < 50 * target:
        pts = list(found)
        a, b = rng.choice(len(pts), 2, replace=False) if len(pts) > 1 else (0, 0)
        try:
            R = third_point(omega, np.array(pts[a]), np.array(pts[b]), rng).R
        except (DegenerateChord, ZeroContraction, RankTooHigh):
            stall += 1
            continue
        if _key(R) in found:
            stall += 1
        else:
            found.add(_key(R))
    return sort_points(np.array(sorted(found), dtype=np.int64))


def is_on_A(omega: Trivector, p) -> bool:
    return rank_at(omega, p) <= 4


def curve_membership(omega: Trivector, P, x) -> bool:
    """Whether x lies in P(kernel5(P)), i.e. on the curve C_P."""
    return kernel5(omega, P).contains(x)
