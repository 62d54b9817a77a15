"""Geometry on P(V9): the dual sextic, contraction images of chords, and flags.

A pair of points P, Q of A maps to the line [omega(P, Q, .)] in P(V9).  Those
lines sweep a singular fourfold of the sextic dual to the Coble cubic.  The
flag builders here certify, by exact subspace membership, that omega sits in
the wedge-space sums attached to such a line.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .chords import ChordFrame, GroupContext, chord_frame
from .errors import (
    BadIntersection,
    DegenerateChord,
    KernelNotOneDim,
    MembershipFailed,
    ZeroContraction,
)
from .exterior import Flag, Subspace, Trivector, double_contract, extend_basis, in_sum_of_spans, wedge_space
from .field import PrimeField, normalize, projective_points
from .forms import HomogeneousForm, monomial_values
from .pfaffloci import coble_cubic, p4_of, rank_batch
from .scanner import SUBSPACE_SCAN_MAX_Q, FieldTooLarge, subspace_points

SEXTIC_MIN_Q = 23
SEXTIC_LADDER = (23, 31, 41)
SEXTIC_SAMPLES = 3500

LABELS = ("OffSextic", "SexticSmooth", "DY3", "DY4", "DY6", "DY8", "Undetermined")


def sigma_image(omega: Trivector, P, Q) -> np.ndarray:
    """The point [omega(P, Q, .)] of P(V9)."""
    v = double_contract(omega, P, Q)
    if not v.any():
        raise ZeroContraction("omega(P, Q, .) vanishes")
    return normalize(v, omega.q)


# -- the sextic -----------------------------------------------------------------


def line_values(F: HomogeneousForm, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """F(x + t y) for every line (x, y) and every t in F_q, shape (lines, q)."""
    q = F.q
    t = np.arange(q)
    pts = (X[:, None, :] + t[None, :, None] * Y[:, None, :]) % q
    return F(pts.reshape(-1, X.shape[1])).reshape(len(X), q)


def smooth_cubic_points(C: HomogeneousForm, count: int, rng: np.random.Generator, batch: int = 512) -> np.ndarray:
    """Distinct points of {C = 0} with nonzero gradient, found as roots of C on random lines."""
    q, n = C.q, C.n
    seen: dict = {}
    while len(seen) < count:
        X = rng.integers(0, q, size=(batch, n))
        Y = rng.integers(0, q, size=(batch, n))
        vals = line_values(C, X, Y)
        li, ti = np.nonzero(vals == 0)
        Z = (X[li] + ti[:, None] * Y[li]) % q
        Z = Z[Z.any(axis=1)]
        if not len(Z):
            continue
        G = C.gradient(Z)
        Z = Z[G.any(axis=1)]
        for z in Z:
            key = tuple(int(x) for x in normalize(z, q))
            seen.setdefault(key, None)
            if len(seen) >= count:
                break
    return np.array(list(seen), dtype=np.int64)


def dual_points(C: HomogeneousForm, X: np.ndarray) -> np.ndarray:
    """Normalized gradients of C at the given smooth points."""
    G = C.gradient(X)
    return np.array([normalize(g, C.q) for g in G], dtype=np.int64)


@dataclass
class SexticResult:
    form: HomogeneousForm
    q: int
    samples: int
    kernel_dim: int
    millis: float = 0.0


def sextic_interpolate(omega: Trivector, seed: int = 0, samples: int = SEXTIC_SAMPLES, min_q: int = SEXTIC_MIN_Q) -> SexticResult:
    """The sextic through the gradient images of smooth points of the Coble cubic.

    Each sampled smooth point x of C3 gives one linear condition C6(grad C3(x)) = 0
    on the 3003 coefficients; the kernel must be a single line.
    """
    q = omega.q
    if q < min_q:
        raise FieldTooLarge(f"sextic interpolation expects q >= {min_q}, got {q}")
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    C = coble_cubic(omega)
    X = smooth_cubic_points(C, samples, rng)
    Y = np.unique(dual_points(C, X), axis=0)
    M = monomial_values(Y, 6, q, omega.n)
    K = PrimeField.of(q).kernel(M)
    if K.shape[0] != 1:
        raise KernelNotOneDim(K.shape[0])
    form = HomogeneousForm(q, 6, K[0], omega.n).normalized()
    return SexticResult(form, q, len(Y), 1, (time.perf_counter() - t0) * 1e3)


# -- multiplicities -------------------------------------------------------------


def _line_coefficients(F: HomogeneousForm, x, Y: np.ndarray) -> np.ndarray:
    """Coefficients of F(x + t y) in t for each direction y, shape (len(Y), d + 1)."""
    q, d = F.q, F.degree
    if q <= d:
        raise ValueError("line restriction needs q > degree")
    ts = np.arange(d + 1)
    pts = (np.asarray(x)[None, None, :] + ts[None, :, None] * Y[:, None, :]) % q
    vals = F(pts.reshape(-1, len(x))).reshape(len(Y), d + 1)
    Fq = PrimeField.of(q)
    Vinv = Fq.inverse(np.mod(ts[:, None] ** ts[None, :], q))
    return Fq.matmul(vals, Vinv.T)


def multiplicity(F: HomogeneousForm, x, trials: int = 8, rng: np.random.Generator | None = None) -> int:
    """Order of vanishing of F at x: min over random directions y of the t-adic
    valuation of F(x + t y).  Returns d + 1 if F vanishes on every tested line.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    x = np.asarray(x, dtype=np.int64)
    if F(x) != 0:
        return 0
    Y = rng.integers(0, F.q, size=(trials, len(x)))
    coeffs = _line_coefficients(F, x, Y)
    best = F.degree + 1
    for row in coeffs:
        nz = np.flatnonzero(row)
        if nz.size:
            best = min(best, int(nz[0]))
    return best


def is_singular(F: HomogeneousForm, x) -> bool:
    return F(x) == 0 and not F.gradient(np.asarray(x)).any()


def p4_points(omega: Trivector, P, count: int, rng: np.random.Generator) -> np.ndarray:
    """Random points of P(P4) for the support four-space P4 of omega(P, ., .)."""
    B = p4_of(omega, P).basis
    pts = []
    while len(pts) < count:
        c = rng.integers(0, omega.q, size=B.shape[0])
        if c.any():
            pts.append(normalize(c @ B % omega.q, omega.q))
    return np.array(pts, dtype=np.int64)


# -- flags ----------------------------------------------------------------------


def _span(n: int, q: int, rows) -> Subspace:
    return Subspace(n, q, np.atleast_2d(np.asarray(rows, dtype=np.int64)), role="V")


def _hyperplanes(n: int, q: int, covectors) -> Subspace:
    """Common kernel {v : c(v) = 0 for every given covector c}."""
    return Subspace(n, q, np.atleast_2d(np.asarray(covectors, dtype=np.int64)), role="V*").perp()


# wedge-space patterns, written as index triples into the flag plus the ambient space
_PATTERNS = {
    "T": ((1, 9, 9), (5, 5, 9), (7, 7, 7)),
    "Z": ((1, 9, 9), (3, 6, 9), (6, 6, 6)),
    "X": ((1, 9, 9), (3, 5, 9), (3, 6, 7), (6, 6, 6)),
}
_DIMS = {"T": (1, 5, 7), "Z": (1, 3, 6), "X": (1, 3, 5, 6, 7)}


def model_sum(tag: str, flag: Flag) -> list[Subspace]:
    """The wedge spaces whose sum defines the model attached to ``tag``."""
    n, q = flag[0].n, flag[0].q
    by_dim = {s.dim: s for s in flag.spaces}
    by_dim[n] = Subspace.full(n, q)
    return [wedge_space(by_dim[a], by_dim[b], by_dim[c]) for a, b, c in _PATTERNS[tag]]


@dataclass
class ModelFlag:
    tag: str
    flag: Flag
    certified: bool = False
    extra: dict = field(default_factory=dict, repr=False)

    @property
    def dims(self):
        return self.flag.dims

    def space(self, dim: int) -> Subspace:
        for s in self.flag.spaces:
            if s.dim == dim:
                return s
        raise KeyError(dim)


def verify_membership(omega: Trivector, mf: ModelFlag) -> bool:
    if mf.dims != _DIMS[mf.tag]:
        raise BadIntersection(f"{mf.tag} flag has dimensions {mf.dims}, expected {_DIMS[mf.tag]}")
    return in_sum_of_spans(omega, model_sum(mf.tag, mf.flag))


def _certified(omega: Trivector, tag: str, spaces, extra=None) -> ModelFlag:
    mf = ModelFlag(tag, Flag(spaces), extra=extra or {})
    if not verify_membership(omega, mf):
        raise MembershipFailed(f"omega is not in the {tag} wedge-space sum")
    mf.certified = True
    return mf


def t_flag(omega: Trivector, P, Q, rng: np.random.Generator | None = None, frame: ChordFrame | None = None) -> ModelFlag:
    """V1 = [omega(P,Q,.)] inside V5 = U5 inside V7 = ker P cap ker Q."""
    n, q = omega.n, omega.q
    fr = chord_frame(omega, P, Q, rng) if frame is None else frame
    V1 = _span(n, q, sigma_image(omega, P, Q))
    return _certified(omega, "T", [V1, fr.U5_space, fr.V7_space], {"frame": fr})


def _pair_frames(omega: Trivector, P, Q, R, rng):
    return [chord_frame(omega, a, b, rng) for a, b in ((P, Q), (P, R), (Q, R))]


def z_flag(omega: Trivector, P, Q, R, rng: np.random.Generator | None = None, frames=None) -> ModelFlag:
    """V1 = [omega(P,Q,.)], V3 = common part of the three pairwise U5's, V6 = ker P cap ker Q cap ker R."""
    n, q = omega.n, omega.q
    frames = _pair_frames(omega, P, Q, R, rng) if frames is None else frames
    V1 = _span(n, q, sigma_image(omega, P, Q))
    V3 = frames[0].U5_space.intersect(frames[1].U5_space).intersect(frames[2].U5_space)
    if V3.dim != 3:
        raise BadIntersection(f"the three U5 spaces meet in dimension {V3.dim}")
    V6 = _hyperplanes(n, q, [P, Q, R])
    if V6.dim != 6:
        raise BadIntersection(f"the three hyperplanes meet in dimension {V6.dim}")
    return _certified(omega, "Z", [V1, V3, V6], {"frames": frames})


def x_flag(omega: Trivector, P, Q, R, rng: np.random.Generator | None = None, zf: ModelFlag | None = None, pair: int = 0) -> ModelFlag:
    """Merge the Z flag with the (V5, V7) of one pairwise T flag (pair 0: PQ, 1: PR, 2: QR)."""
    zf = z_flag(omega, P, Q, R, rng) if zf is None else zf
    fr = zf.extra["frames"][pair]
    spaces = [zf.space(1), zf.space(3), fr.U5_space, zf.space(6), fr.V7_space]
    return _certified(omega, "X", spaces)


def adapted_basis(spaces, n: int, q: int) -> tuple[np.ndarray, list[int]]:
    """Basis of V9 running through the given nested spaces; returns rows and level sizes."""
    chain = list(spaces) + [Subspace.full(n, q)]
    rows = [chain[0].basis]
    for a, b in zip(chain, chain[1:]):
        rows.append(extend_basis(a, b))
    return np.vstack(rows), [len(r) for r in rows]


def triple_cover_enumerate(omega: Trivector, zf: ModelFlag, certify: bool = True) -> list[tuple[Subspace, Subspace]]:
    """All (V5, V7) with V3 < V5 < V6 < V7 that complete the Z flag to an X flag.

    Exhaustive over Gr(2, V6/V3) x P(V9/V6): a 2-plane is the kernel of a
    covector beta on V6/V3 and the line is c in V9/V6.  The X condition is that
    the A2 x B3 x C3 part gamma of omega, contracted with beta, lies in A2 x <c>.
    """
    n, q = omega.n, omega.q
    if q > SUBSPACE_SCAN_MAX_Q:
        raise FieldTooLarge(f"P^2 x P^2 scan is limited to q <= {SUBSPACE_SCAN_MAX_Q}")
    V1, V3, V6 = zf.space(1), zf.space(3), zf.space(6)
    B, sizes = adapted_basis([V1, V3, V6], n, q)
    Cw = omega.in_basis(B)
    gamma = Cw[1:3, 3:6, 6:9]  # a in V3/V1, b in V6/V3, c in V9/V6
    betas = projective_points(3, q)
    lines = projective_points(3, q)
    W = np.einsum("kb,abc->kac", betas, gamma) % q  # (beta, a, c)
    cross = np.mod(np.cross(W[:, None, :, :], lines[None, :, None, :]), q)  # (beta, line, a, 3)
    ok = ~cross.reshape(len(betas), len(lines), -1).any(axis=2)
    out = []
    Fq = PrimeField.of(q)
    Bb, Bc = B[3:6], B[6:9]
    for k, j in zip(*np.nonzero(ok)):
        U2 = Fq.kernel(betas[k][None, :])  # coordinates of the 2-plane in V6/V3
        V5 = V3 + _span(n, q, U2 @ Bb % q)
        V7 = V6 + _span(n, q, lines[j] @ Bc % q)
        if certify:
            mf = ModelFlag("X", Flag([V1, V3, V5, V6, V7]))
            if not verify_membership(omega, mf):
                raise MembershipFailed("enumerated pair fails the X membership")
        out.append((V5, V7))
    return out


def z_flag_points(omega: Trivector, zf: ModelFlag) -> np.ndarray:
    """Points of A whose hyperplane contains V6 (at most three for a generic flag), by a P^2 scan."""
    q = omega.q
    ann = Subspace(omega.n, q, zf.space(6).basis, role="V").perp().basis
    pts = subspace_points(ann, q)
    return pts[rank_batch(omega, pts) <= 4]


def dy6_image(ctx: GroupContext, P) -> np.ndarray:
    """[omega(P, R, .)] for the tangent third point R of P (the chord (P, P, R))."""
    R = ctx.tangent_third(P)
    if np.array_equal(R, normalize(P, ctx.q)):
        raise DegenerateChord("P is its own tangent third point")
    try:
        return sigma_image(ctx.omega, P, R)
    except ZeroContraction:
        raise DegenerateChord("the tangent third point lies on C_P") from None


# -- stratum labels -------------------------------------------------------------


@dataclass
class Calibration:
    """Multiplicities of the sextic measured on constructed witnesses.

    m3: points of P(P4) (inside D_Y3); m4: contraction images of chords;
    m6: contraction images of tangent chords.
    """

    q: int
    m3: int
    m4: int
    m6: int
    samples: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"q": self.q, "m3": self.m3, "m4": self.m4, "m6": self.m6, "samples": self.samples}

    @classmethod
    def from_json(cls, doc: dict) -> "Calibration":
        return cls(doc["q"], doc["m3"], doc["m4"], doc["m6"], doc.get("samples", {}))


def _mode(values) -> int:
    values = list(values)
    return max(set(values), key=lambda v: (values.count(v), -v))


def calibrate(omega: Trivector, C6: HomogeneousForm, ctx: GroupContext, rng: np.random.Generator, count: int = 10) -> Calibration:
    """Measure m3, m4, m6 as the most frequent multiplicity on each witness family."""
    pool = ctx.pool
    m3s, m4s, m6s = [], [], []
    for P in pool[:count]:
        for x in p4_points(omega, P, 2, rng):
            m3s.append(multiplicity(C6, x, rng=rng))
    while len(m4s) < count:
        i, j = rng.choice(len(pool), 2, replace=False)
        if double_contract(omega, pool[i], pool[j]).any():
            m4s.append(multiplicity(C6, sigma_image(omega, pool[i], pool[j]), rng=rng))
    for P in pool:
        if len(m6s) >= count:
            break
        try:
            m6s.append(multiplicity(C6, dy6_image(ctx, P), rng=rng))
        except DegenerateChord:
            continue
    samples = {"m3": m3s, "m4": m4s, "m6": m6s}
    return Calibration(omega.q, _mode(m3s), _mode(m4s), _mode(m6s), samples)


@dataclass
class StratumLabel:
    label: str
    multiplicity: int
    evidence: dict = field(default_factory=dict)


def find_chord_witness(omega: Trivector, x, pool) -> tuple | None:
    """A pair of known A-points whose contraction line is x, if the pool has one."""
    q = omega.q
    x = normalize(x, q)
    on_h = [P for P in pool if not int(np.dot(P, x) % q)]
    for i in range(len(on_h)):
        for j in range(i + 1, len(on_h)):
            v = double_contract(omega, on_h[i], on_h[j])
            if v.any() and np.array_equal(normalize(v, q), x):
                return on_h[i], on_h[j]
    return None


def classify_point(omega: Trivector, x, C6: HomogeneousForm, calib: Calibration, pool=None, trials: int = 8) -> StratumLabel:
    """Stratum of x in P(V9) from the sextic's multiplicity and, when multiplicity
    cannot separate D_Y3 from D_Y4, a certified T flag through a known chord.
    """
    m = multiplicity(C6, x, trials)
    ev: dict = {"m3": calib.m3, "m4": calib.m4, "m6": calib.m6}
    if m == 0:
        return StratumLabel("OffSextic", m, ev)
    if m == 1:
        return StratumLabel("SexticSmooth", m, ev)
    if calib.m6 > calib.m4 and m >= calib.m6:
        return StratumLabel("DY6", m, ev)
    if calib.m4 > calib.m3 and m >= calib.m4:
        return StratumLabel("DY4", m, ev)
    if m >= calib.m3:
        if pool is not None:
            w = find_chord_witness(omega, x, pool)
            if w is not None:
                try:
                    t_flag(omega, w[0], w[1])
                    ev["witness"] = [[int(c) for c in w[0]], [int(c) for c in w[1]]]
                    return StratumLabel("DY4", m, ev)
                except (MembershipFailed, DegenerateChord, ZeroContraction):
                    pass
        return StratumLabel("DY3", m, ev)
    return StratumLabel("Undetermined", m, ev)


def torsion_census(ctx: GroupContext, points, C6: HomogeneousForm | None = None) -> dict:
    """Exploratory: 3-torsion of the E-group, flexes (P = tangent third of P),
    and the sextic's multiplicity at tangent-chord images."""
    E = ctx.E
    three = [P for P in points if np.array_equal(ctx.scalar_mul(3, P), E)]
    flexes, mults, on_curve = [], [], 0
    for P in points:
        R = ctx.tangent_third(P)
        v = double_contract(ctx.omega, P, R)
        if np.array_equal(R, P):
            flexes.append(P)
        elif not v.any():
            on_curve += 1
        elif C6 is not None:
            mults.append(multiplicity(C6, normalize(v, ctx.q)))
    out = {"three_torsion": len(three), "flexes": len(flexes), "tangent_third_on_C_P": on_curve, "points": len(points)}
    if mults:
        deepest = max(mults)
        out.update({"tangent_image_multiplicities": np.bincount(mults).tolist(), "deepest": deepest, "deepest_count": mults.count(deepest)})
    return out
