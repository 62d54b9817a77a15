"""Trivectors in eight variables: normal forms, transport, and rank fingerprints.

A fingerprint is the census of rank(phi -| y) over every phi in P^7(F_q).  It is
invariant under GL_8(F_q), cheap at q = 5, and separates the orbit closures we
care about there.  Over F_q the open orbit splits into several rational forms,
so the database keeps every generic fingerprint it has seen.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import FieldTooLarge, MembershipFailed, UnknownLabel
from .exterior import Flag, Subspace, Trivector, extend_basis, in_sum_of_spans, skew_matrix, wedge_space
from .field import PrimeField, projective_points
from .generate import random_invertible

FINGERPRINT_MAX_Q = 11
DEFAULT_Q = 5
GENERIC_SAMPLES = 24
UNKNOWN = "Unknown"

# one-based index triples
_NORMAL_FORMS = {
    "Y3": ((1, 2, 3), (4, 5, 6), (1, 4, 7), (2, 6, 8), (3, 5, 8)),
    "Y4": ((4, 5, 6), (1, 4, 7), (2, 5, 7), (2, 6, 8), (3, 5, 8), (3, 6, 7)),
    "Y6": ((4, 5, 6), (1, 4, 7), (2, 5, 7), (2, 6, 8), (3, 5, 8)),
}


def normal_form(label: str, q: int = DEFAULT_Q) -> Trivector:
    try:
        terms = _NORMAL_FORMS[label]
    except KeyError:
        raise UnknownLabel(label) from None
    return Trivector.from_terms(8, q, {tuple(i - 1 for i in t): 1 for t in terms})


def span8(q: int, *vectors) -> Subspace:
    """Span of vectors given as {one-based index: coefficient} dicts or index ints."""
    rows = []
    for v in vectors:
        row = np.zeros(8, dtype=np.int64)
        for i, c in ({v: 1} if isinstance(v, int) else v).items():
            row[i - 1] = c % q
        rows.append(row)
    return Subspace(8, q, np.array(rows), role="V")


def transport_matrix(seed: int, q: int, n: int = 8) -> np.ndarray:
    return random_invertible(n, q, np.random.default_rng(seed))


def transport(y: Trivector, seed: int) -> Trivector:
    return y.act(transport_matrix(seed, y.q, y.n))


# -- fingerprints ---------------------------------------------------------------


@dataclass(frozen=True)
class Fingerprint:
    q: int
    counts: tuple  # number of phi with rank 0, 2, 4, 6, 8

    @property
    def total(self) -> int:
        return sum(self.counts)

    def as_dict(self) -> dict:
        return {str(2 * i): c for i, c in enumerate(self.counts)}


def fingerprint(y: Trivector, q: int | None = None, chunk: int = 50000) -> Fingerprint:
    q = y.q if q is None else q
    if q != y.q:
        y = Trivector(y.n, q, y.coeffs)
    if q > FINGERPRINT_MAX_Q:
        raise FieldTooLarge(f"fingerprint scan is limited to q <= {FINGERPRINT_MAX_Q}")
    F = PrimeField.of(q)
    P = projective_points(y.n, q)
    counts = np.zeros(y.n + 1, dtype=np.int64)
    for s in range(0, len(P), chunk):
        counts += np.bincount(F.batch_rank(skew_matrix(y, P[s:s + chunk])), minlength=y.n + 1)
    return Fingerprint(q, tuple(int(c) for c in counts[::2]))


@dataclass
class FingerprintDB:
    q: int
    entries: list  # (label, Fingerprint)

    def labels_for(self, fp: Fingerprint) -> set:
        return {lab for lab, f in self.entries if f == fp}

    def collisions(self) -> list:
        seen: dict = {}
        for lab, f in self.entries:
            seen.setdefault(f.counts, set()).add(lab)
        return [sorted(v) for v in seen.values() if len(v) > 1]

    def to_json(self) -> dict:
        return {"q": self.q, "entries": [{"label": lab, "counts": list(f.counts)} for lab, f in self.entries]}

    @classmethod
    def from_json(cls, doc: dict) -> "FingerprintDB":
        q = doc["q"]
        return cls(q, [(e["label"], Fingerprint(q, tuple(e["counts"]))) for e in doc["entries"]])

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)


def build_database(q: int = DEFAULT_Q, generic_samples: int = GENERIC_SAMPLES, seed: int = 0, escalate: tuple = (7,)) -> FingerprintDB:
    """Fingerprints of the normal forms plus every distinct generic fingerprint
    among ``generic_samples`` seeded random trivectors.  If two labels share a
    fingerprint, rebuild at the next prime in ``escalate``.
    """
    entries = [(lab, fingerprint(normal_form(lab, q))) for lab in sorted(_NORMAL_FORMS)]
    rng = np.random.default_rng(seed)
    seen = set()
    for _ in range(generic_samples):
        f = fingerprint(Trivector.random(8, q, rng))
        if f.counts not in seen:
            seen.add(f.counts)
            entries.append(("generic", f))
    db = FingerprintDB(q, entries)
    if db.collisions() and escalate:
        return build_database(escalate[0], generic_samples, seed, escalate[1:])
    return db


@lru_cache(maxsize=4)
def default_database(q: int = DEFAULT_Q) -> FingerprintDB:
    return build_database(q)


def classify8(y: Trivector, db: FingerprintDB | None = None) -> str:
    """Label of the unique database fingerprint equal to y's, else Unknown."""
    db = default_database() if db is None else db
    labels = db.labels_for(fingerprint(y, db.q))
    return labels.pop() if len(labels) == 1 else UNKNOWN


# -- flag anchors ---------------------------------------------------------------


def flag_sum(pattern, spaces: dict) -> list[Subspace]:
    """Wedge spaces V_a ^ V_b ^ V_c for each (a, b, c) in pattern; ``spaces`` maps dimension to subspace."""
    return [wedge_space(spaces[a], spaces[b], spaces[c]) for a, b, c in pattern]


def in_flag_sum(y: Trivector, pattern, spaces) -> bool:
    d = {s.dim: s for s in spaces}
    d.setdefault(y.n, Subspace.full(y.n, y.q))
    Flag(sorted(d.values(), key=lambda s: s.dim))
    return in_sum_of_spans(y, flag_sum(pattern, d))


def reference_flags(q: int = DEFAULT_Q) -> dict:
    """Known flags for the normal forms, each with the wedge-sum pattern it certifies."""
    s = lambda *v: span8(q, *v)  # noqa: E731
    return {
        "Y3_first": ("Y3", ((1, 8, 8), (4, 4, 8)), [s(1), s(1, 5, 6, 8)]),
        "Y3_second": ("Y3", ((1, 8, 8), (4, 4, 8)), [s(4), s(2, 3, 4, 8)]),
        "Y4_W1": ("Y4", ((5, 5, 5), (2, 5, 8)), [s(7, 8), s(4, 5, 6, 7, 8)]),
        "Y4_W2_a": ("Y4", ((4, 4, 8), (6, 6, 6)), [s(5, 6, 7, 8), s(1, 4, 5, 6, 7, 8)]),
        "Y4_W2_b": ("Y4", ((4, 4, 8), (6, 6, 6)), [s(4, {5: 1, 6: -1}, 7, 8), s({2: 1, 3: 1}, 4, 5, 6, 7, 8)]),
        "Y4_W2_c": ("Y4", ((4, 4, 8), (6, 6, 6)), [s(4, {5: 1, 6: 1}, 7, 8), s({2: 1, 3: -1}, 4, 5, 6, 7, 8)]),
        "Y6_unique": (
            "Y6",
            ((1, 4, 8), (1, 6, 6), (3, 3, 7), (3, 4, 6)),
            [s(8), s(4, 7, 8), s(4, 5, 7, 8), s(2, 4, 5, 6, 7, 8), s(1, 2, 4, 5, 6, 7, 8)],
        ),
    }


def y4_three_flags(y: Trivector, V2: Subspace, V5: Subspace) -> list[tuple[Subspace, Subspace]]:
    """Flags U4 < U6 with V2 < U4 < V5 < U6 and y in Lambda^2 U4 ^ V8 + Lambda^3 U6.

    For each U6 = V5 + <x> (x over P(V8/V5)) the map (eta, phi) -> y(eta, phi, .)
    from U6-perp x V2-dual into V5/V2 must have rank two; U4 is V2 plus its image.
    """
    n, q = y.n, y.q
    if not in_flag_sum(y, ((5, 5, 5), (2, 5, 8)), [V2, V5]):
        raise MembershipFailed("y is not in Lambda^3 V5 + V2 ^ V5 ^ V8")
    F = PrimeField.of(q)
    c5 = extend_basis(V2, V5)  # 3 rows spanning V5 / V2
    c8 = extend_basis(V5, Subspace.full(n, q))  # 3 rows spanning V8 / V5
    B = np.vstack([V2.basis, c5, c8])
    Binv = F.inverse(B)
    # covector coordinates: row i of Binv.T is the dual basis element to B[i]
    dual = Binv.T % q
    T = y.tensor
    out = []
    for x in projective_points(3, q):
        U6 = V5 + Subspace(n, q, (x @ c8 % q)[None, :], role="V")
        perp = U6.perp().basis  # 2 covectors
        images = []
        for eta in perp:
            for phi in dual[:2]:  # duals of the V2 basis
                v = np.einsum("i,j,ijk->k", eta, phi, T) % q
                images.append(v)
        img = Subspace(n, q, np.array(images), role="V")
        U4 = V2 + img
        if U4.dim != 4 or not U4.issubspace(V5):
            continue
        if in_flag_sum(y, ((4, 4, 8), (6, 6, 6)), [U4, U6]):
            out.append((U4, U6))
    return out
