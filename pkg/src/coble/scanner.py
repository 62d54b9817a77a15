"""Exhaustive scans of projective spaces over small prime fields.

The full P^8 scan for the rank <= 4 locus evaluates a few 6 x 6 principal
Pfaffian cubics on every normalized point.  Points are grouped into lines
parallel to the last coordinate axis; along each line a cubic is advanced by
finite differences, so the inner loop costs three additions per point.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import FieldTooLarge
from .exterior import Trivector
from .field import PrimeField, projective_points
from .forms import HomogeneousForm, exponents
from .pfaffloci import coble_cubic, kernel5, principal_pfaffians, rank_batch

FULL_SCAN_MAX_Q = 13
SUBSPACE_SCAN_MAX_Q = 31


@dataclass
class ScanReport:
    q: int
    predicate: str
    count: int
    points: np.ndarray | None = None
    millis: float = 0.0
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        doc = {"q": self.q, "predicate": self.predicate, "count": int(self.count), "millis": round(self.millis, 3)}
        doc["points"] = [] if self.points is None else [[int(x) for x in p] for p in self.points]
        doc.update(self.extra)
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "ScanReport":
        pts = np.array(doc.get("points", []), dtype=np.int64).reshape(-1, 9) if doc.get("points") else None
        return cls(doc["q"], doc["predicate"], doc["count"], pts, doc.get("millis", 0.0))


def sort_points(P: np.ndarray) -> np.ndarray:
    if len(P) == 0:
        return P.reshape(0, P.shape[1] if P.ndim == 2 else 9)
    return P[np.lexsort(P.T[::-1])]


def _dense_cube(f: HomogeneousForm) -> np.ndarray:
    """Coefficient tensor A with f = sum A[e] x^e over e in {0..3}^n."""
    A = np.zeros((4,) * f.n, dtype=np.int64)
    E = exponents(f.degree, f.n)
    A[tuple(E.T)] = f.coeffs
    return A


class LineScanner:
    """Finite-difference evaluation of cubics on all points of one normalized block.

    Block ``lead`` holds the points (0, .., 0, 1, x_{lead+1}, .., x_{n-1}).
    """

    def __init__(self, forms: list[HomogeneousForm], q: int):
        if any(f.degree != 3 for f in forms):
            raise ValueError("line scanner handles cubics only")
        self.q = q
        self.n = forms[0].n
        self.cubes = [_dense_cube(f) for f in forms]
        self.vander = np.mod(np.arange(q)[:, None] ** np.arange(4)[None, :], q)

    def _line_coeffs(self, cube: np.ndarray, lead: int, prefix: tuple) -> np.ndarray:
        """Coefficients (c0..c3) in t of the cubic along lines, over the free grid.

        ``prefix`` fixes the first few free coordinates after the lead.
        Returns shape (q,)*m + (4,), m = number of remaining middle coordinates.
        """
        q = self.q
        A = cube[(0,) * lead].sum(axis=0) % q  # x_lead = 1
        for val in prefix:
            A = np.tensordot(self.vander[val], A, axes=([0], [0])) % q
        # remaining axes: middle coordinates then the last one
        m = A.ndim - 1
        for _ in range(m):
            # contract the leading exponent axis with the Vandermonde, move the new value axis to the back
            A = np.tensordot(A, self.vander, axes=([0], [1])) % q
        # A now has axes (e_last, x_mid_1, .., x_mid_m); put e_last at the end
        return np.moveaxis(A, 0, -1)

    def zeros_in_block(self, lead: int, prefix: tuple = ()) -> np.ndarray:
        """Points of the block (with the given prefix) where all cubics vanish."""
        q, n = self.q, self.n
        if lead == n - 1:
            pt = np.zeros((1, n), dtype=np.int64)
            pt[0, lead] = 1
            vals = [int(c[(0,) * (n - 1)][3]) for c in self.cubes]
            return pt if all(v == 0 for v in vals) else pt[:0]
        coeffs = [self._line_coeffs(c, lead, prefix) for c in self.cubes]
        shape = coeffs[0].shape[:-1]
        # sums of two residues must fit the state dtype
        dtype = np.int8 if q < 64 else np.int32
        states = []
        for c in coeffs:
            c = c.reshape(-1, 4)
            f = c[:, 0].astype(dtype)
            d1 = ((c[:, 1] + c[:, 2] + c[:, 3]) % q).astype(dtype)
            d2 = ((2 * c[:, 2] + 6 * c[:, 3]) % q).astype(dtype)
            d3 = ((6 * c[:, 3]) % q).astype(dtype)
            states.append([f, d1, d2, d3])
        hits_base, hits_t = [], []
        for t in range(q):
            mask = states[0][0] == 0
            for st in states[1:]:
                mask &= st[0] == 0
            nz = np.flatnonzero(mask)
            if nz.size:
                hits_base.append(nz)
                hits_t.append(np.full(nz.size, t, dtype=np.int64))
            if t == q - 1:
                break
            for st in states:
                f, d1, d2, d3 = st
                f += d1
                f[f >= q] -= q
                d1 += d2
                d1[d1 >= q] -= q
                d2 += d3
                d2[d2 >= q] -= q
        if not hits_base:
            return np.zeros((0, n), dtype=np.int64)
        base = np.concatenate(hits_base)
        tt = np.concatenate(hits_t)
        pts = np.zeros((base.size, n), dtype=np.int64)
        pts[:, lead] = 1
        for i, val in enumerate(prefix):
            pts[:, lead + 1 + i] = val
        mid = np.unravel_index(base, shape) if shape else ()
        start = lead + 1 + len(prefix)
        for i, arr in enumerate(mid):
            pts[:, start + i] = arr
        pts[:, n - 1] = tt
        return pts

    def tasks(self, chunk_dims: int = 6):
        """(lead, prefix) work items; each covers at most q^chunk_dims lines."""
        n, q = self.n, self.q
        out = []
        for lead in range(n - 1, -1, -1):
            middle = n - lead - 2
            fixed = max(0, middle - chunk_dims)
            for prefix in np.ndindex(*(q,) * fixed):
                out.append((lead, tuple(int(x) for x in prefix)))
        return out

    def zeros(self, workers: int = 1, chunk_dims: int = 6, refine=None) -> np.ndarray:
        """All common zeros, optionally passed through ``refine`` per chunk, in lexicographic order."""

        def run(task):
            pts = self.zeros_in_block(*task)
            return refine(pts) if refine is not None and len(pts) else pts

        tasks = self.tasks(chunk_dims)
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(run, tasks))
        else:
            parts = [run(t) for t in tasks]
        parts = [p for p in parts if len(p)]
        if not parts:
            return np.zeros((0, self.n), dtype=np.int64)
        return sort_points(np.concatenate(parts))


# index sets overlapping in at most three places; Pfaffians sharing a 5 x 5
# block vanish together far more often than independent cubics would
_SPREAD_SETS = (
    (0, 1, 2, 3, 4, 5),
    (3, 4, 5, 6, 7, 8),
    (0, 1, 2, 6, 7, 8),
    (0, 1, 3, 4, 6, 7),
    (1, 2, 4, 5, 7, 8),
    (0, 2, 3, 5, 6, 8),
)


def prefilter_cubics(omega: Trivector, count: int = 4) -> list[HomogeneousForm]:
    """A few nonzero 6 x 6 principal Pfaffians, a cheap necessary condition for rank <= 4."""
    pfs = principal_pfaffians(omega, 6)
    order = [s for s in _SPREAD_SETS if s in pfs] + [s for s in pfs if s not in _SPREAD_SETS]
    out = []
    for s in order:
        if len(out) == count:
            break
        if not pfs[s].is_zero():
            out.append(pfs[s])
    return out


def _check_full_scan(q: int):
    if q > FULL_SCAN_MAX_Q:
        raise FieldTooLarge(f"full P^8 scan is limited to q <= {FULL_SCAN_MAX_Q}, got {q}")


def enumerate_A(omega: Trivector, workers: int = 1, prefilter: int = 3, max_rank: int = 4) -> ScanReport:
    """All points of P^8(F_q) with rank M(p) <= max_rank."""
    q = omega.q
    _check_full_scan(q)
    t0 = time.perf_counter()
    chosen = prefilter_cubics(omega, prefilter + 4)
    forms, others = chosen[:prefilter], chosen[prefilter:]

    def refine(pts):
        for f in others:
            pts = pts[f(pts) == 0]
            if not len(pts):
                return pts
        return pts[rank_batch(omega, pts) <= max_rank]

    if forms:
        pts = LineScanner(forms, q).zeros(workers=workers, refine=refine)
    else:
        P = projective_points(omega.n, q)
        pts = P[rank_batch(omega, P) <= max_rank]
    return ScanReport(q, f"rank<={max_rank}", len(pts), pts, (time.perf_counter() - t0) * 1e3)


def enumerate_rank_reference(omega: Trivector, max_rank: int = 4) -> ScanReport:
    """No-prefilter reference scan: exact rank at every point.  Slow; meant for q = 5."""
    q = omega.q
    _check_full_scan(q)
    t0 = time.perf_counter()
    P = projective_points(omega.n, q)
    keep = []
    for s in range(0, len(P), 50000):
        chunk = P[s:s + 50000]
        keep.append(chunk[rank_batch(omega, chunk) <= max_rank])
    pts = sort_points(np.concatenate(keep))
    return ScanReport(q, f"rank<={max_rank}", len(pts), pts, (time.perf_counter() - t0) * 1e3)


def rank_census(omega: Trivector, workers: int = 1) -> dict[int, int]:
    """Number of points of P^8(F_q) of each rank.

    Rank 8 happens exactly off the Coble cubic, so only the cubic's zeros
    need an explicit rank computation.
    """
    q = omega.q
    _check_full_scan(q)
    total = (q ** omega.n - 1) // (q - 1)
    C = coble_cubic(omega)
    counts = {r: 0 for r in range(0, omega.n + 1, 2)}

    def refine(pts):
        r = rank_batch(omega, pts)
        return np.concatenate([pts, r[:, None]], axis=1)

    scanner = LineScanner([C], q)
    rows = scanner.zeros(workers=workers, refine=refine)
    ranks = rows[:, -1] if len(rows) else np.zeros(0, dtype=np.int64)
    for r in range(0, omega.n + 1, 2):
        counts[r] = int((ranks == r).sum())
    counts[8] = total - int(len(ranks))
    return counts


def subspace_points(basis: np.ndarray, q: int) -> np.ndarray:
    """All normalized points of the projectivization of a row space given in reduced echelon form."""
    coeffs = projective_points(basis.shape[0], q)
    return np.mod(coeffs @ basis, q)


def curve_points(omega: Trivector, p) -> ScanReport:
    """Points of A inside P(kernel5(p)), the curve C_P through p."""
    q = omega.q
    if q > SUBSPACE_SCAN_MAX_Q:
        raise FieldTooLarge(f"P^4 scan is limited to q <= {SUBSPACE_SCAN_MAX_Q}")
    t0 = time.perf_counter()
    K = kernel5(omega, p).basis
    pts = subspace_points(K, q)
    keep = []
    for s in range(0, len(pts), 50000):
        chunk = pts[s:s + 50000]
        keep.append(chunk[rank_batch(omega, chunk) <= 4])
    found = sort_points(np.concatenate(keep))
    return ScanReport(q, "curve", len(found), found, (time.perf_counter() - t0) * 1e3)


def hyperplane_section(omega: Trivector, v, a_points) -> ScanReport:
    """Points of A (given as a full scan) on the hyperplane {p : p(v) = 0}."""
    q = omega.q
    _check_full_scan(q)
    v = np.asarray(v, dtype=np.int64)
    if not np.mod(v, q).any():
        raise ValueError("hyperplane needs a nonzero vector")
    t0 = time.perf_counter()
    P = np.asarray(a_points, dtype=np.int64)
    pts = P[(P @ v) % q == 0]
    return ScanReport(q, "hyperplane", len(pts), pts, (time.perf_counter() - t0) * 1e3)


def field_of(omega: Trivector) -> PrimeField:
    return PrimeField.of(omega.q)
