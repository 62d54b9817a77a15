"""Exterior algebra over F_q in a handful of variables.

A k-vector in n variables is a dense coefficient vector over the increasing
k-tuples of range(n), ordered lexicographically.  Trivectors additionally
carry their full antisymmetric n x n x n tensor, which is what contractions
and basis changes use.

Conventions: the interior product is
    i_phi(v1 ^ ... ^ vk) = sum_j (-1)^(j-1) phi(vj) v1 ^ .. vj^ .. ^ vk,
and a 2-vector sum c_ij e_i ^ e_j corresponds to the skew matrix with
A[i, j] = c_ij = -A[j, i].
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations, permutations

import numpy as np

from .errors import DimensionMismatch, NotNested, OddSize
from .field import PrimeField


# -- index tables -------------------------------------------------------------


@lru_cache(maxsize=None)
def basis(n: int, k: int) -> tuple[tuple[int, ...], ...]:
    return tuple(combinations(range(n), k))


@lru_cache(maxsize=None)
def basis_index(n: int, k: int) -> dict:
    return {t: i for i, t in enumerate(basis(n, k))}


def _perm_sign(seq) -> int:
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


@lru_cache(maxsize=None)
def _wedge_table(n: int, k: int, l: int):
    """(a, b, target, sign) arrays for all disjoint basis pairs."""
    a_idx, b_idx, tgt, sgn = [], [], [], []
    index = basis_index(n, k + l)
    for a, I in enumerate(basis(n, k)):
        for b, J in enumerate(basis(n, l)):
            if set(I) & set(J):
                continue
            merged = I + J
            a_idx.append(a)
            b_idx.append(b)
            tgt.append(index[tuple(sorted(merged))])
            sgn.append(_perm_sign(merged))
    return tuple(np.array(x, dtype=np.int64) for x in (a_idx, b_idx, tgt, sgn))


@lru_cache(maxsize=None)
def _contract_table(n: int, k: int):
    """(source, variable, target, sign) for i_phi on k-vectors."""
    src, var, tgt, sgn = [], [], [], []
    index = basis_index(n, k - 1)
    for s, I in enumerate(basis(n, k)):
        for j, v in enumerate(I):
            src.append(s)
            var.append(v)
            tgt.append(index[I[:j] + I[j + 1:]])
            sgn.append(1 if j % 2 == 0 else -1)
    return tuple(np.array(x, dtype=np.int64) for x in (src, var, tgt, sgn))


def wedge(x, k: int, y, l: int, n: int, q: int) -> np.ndarray:
    """Wedge product of a k-vector and an l-vector."""
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    if x.shape[-1] != len(basis(n, k)) or y.shape[-1] != len(basis(n, l)):
        raise DimensionMismatch("coefficient vector length does not match (n, k)")
    out = np.zeros(len(basis(n, k + l)), dtype=np.int64)
    if k + l > n:
        return out
    a, b, t, s = _wedge_table(n, k, l)
    np.add.at(out, t, s * (x[a] * y[b] % q))
    return np.mod(out, q)


def contract(phi, m, k: int, n: int, q: int) -> np.ndarray:
    """Interior product of a covector with a k-vector."""
    phi = np.asarray(phi, dtype=np.int64)
    m = np.asarray(m, dtype=np.int64)
    if phi.shape != (n,) or m.shape != (len(basis(n, k)),):
        raise DimensionMismatch("covector and multivector must share the ambient dimension")
    out = np.zeros(len(basis(n, k - 1)), dtype=np.int64)
    s, v, t, sg = _contract_table(n, k)
    np.add.at(out, t, sg * (phi[v] * m[s] % q))
    return np.mod(out, q)


def vector_wedge(vectors, n: int, q: int) -> np.ndarray:
    """v1 ^ ... ^ vk for explicit vectors (rows)."""
    V = np.mod(np.atleast_2d(np.asarray(vectors, dtype=np.int64)), q)
    out = V[0]
    for k in range(1, V.shape[0]):
        out = wedge(out, k, V[k], 1, n, q)
    return out


def two_form_to_matrix(x, n: int, q: int) -> np.ndarray:
    A = np.zeros((n, n), dtype=np.int64)
    for c, (i, j) in zip(x, basis(n, 2)):
        A[i, j] = c
        A[j, i] = -c
    return np.mod(A, q)


def matrix_to_two_form(A, n: int, q: int) -> np.ndarray:
    A = np.asarray(A, dtype=np.int64)
    return np.mod(np.array([A[i, j] for i, j in basis(n, 2)], dtype=np.int64), q)


# -- trivectors ---------------------------------------------------------------


@lru_cache(maxsize=None)
def _tensor_scatter(n: int):
    """For each of the 6 permutations of a triple: flat tensor positions and sign."""
    pos, sgn = [], []
    for perm in permutations(range(3)):
        s = _perm_sign(perm)
        rows = [n * n * t[perm[0]] + n * t[perm[1]] + t[perm[2]] for t in basis(n, 3)]
        pos.append(rows)
        sgn.append(s)
    return np.array(pos, dtype=np.int64), np.array(sgn, dtype=np.int64)


class Trivector:
    """An alternating 3-form coefficient table in n variables over F_q."""

    __slots__ = ("n", "q", "coeffs", "_tensor")

    def __init__(self, n: int, q: int, coeffs=None):
        self.n = int(n)
        self.q = int(q)
        size = len(basis(self.n, 3))
        if coeffs is None:
            coeffs = np.zeros(size, dtype=np.int64)
        c = np.mod(np.asarray(coeffs, dtype=np.int64), self.q)
        if c.shape != (size,):
            raise DimensionMismatch(f"expected {size} coefficients for n={n}")
        self.coeffs = c
        self.coeffs.setflags(write=False)
        self._tensor = None

    @classmethod
    def from_terms(cls, n: int, q: int, terms) -> "Trivector":
        """From {(i, j, k): value}; indices need not be sorted (sign applied)."""
        c = np.zeros(len(basis(n, 3)), dtype=np.int64)
        idx = basis_index(n, 3)
        for t, v in dict(terms).items():
            t = tuple(int(x) for x in t)
            if len(set(t)) < 3:
                continue
            c[idx[tuple(sorted(t))]] += _perm_sign(t) * int(v)
        return cls(n, q, c)

    @classmethod
    def from_tensor(cls, T, q: int) -> "Trivector":
        T = np.asarray(T, dtype=np.int64)
        n = T.shape[0]
        return cls(n, q, [T[i, j, k] for i, j, k in basis(n, 3)])

    @classmethod
    def random(cls, n: int, q: int, rng: np.random.Generator) -> "Trivector":
        return cls(n, q, rng.integers(0, q, len(basis(n, 3))))

    @property
    def tensor(self) -> np.ndarray:
        if self._tensor is None:
            n = self.n
            pos, sgn = _tensor_scatter(n)
            T = np.zeros(n ** 3, dtype=np.int64)
            for p, s in zip(pos, sgn):
                T[p] = s * self.coeffs
            T = np.mod(T, self.q).reshape(n, n, n)
            T.setflags(write=False)
            self._tensor = T
        return self._tensor

    def terms(self) -> dict:
        return {t: int(c) for t, c in zip(basis(self.n, 3), self.coeffs) if c}

    def __eq__(self, other):
        return (
            isinstance(other, Trivector)
            and (self.n, self.q) == (other.n, other.q)
            and np.array_equal(self.coeffs, other.coeffs)
        )

    def __hash__(self):
        return hash((self.n, self.q, self.coeffs.tobytes()))

    def __repr__(self):
        return f"Trivector(n={self.n}, q={self.q}, terms={self.terms()})"

    def __add__(self, other):
        return Trivector(self.n, self.q, self.coeffs + other.coeffs)

    def __sub__(self, other):
        return Trivector(self.n, self.q, self.coeffs - other.coeffs)

    def scale(self, c):
        return Trivector(self.n, self.q, self.coeffs * (int(c) % self.q))

    def is_zero(self) -> bool:
        return not self.coeffs.any()

    def act(self, g) -> "Trivector":
        """Image under the linear map with matrix g acting on vectors: e_i -> sum_a g[a, i] e_a."""
        g = np.mod(np.asarray(g, dtype=np.int64), self.q)
        return Trivector.from_tensor(transform_tensor(self.tensor, g.T, self.q), self.q)

    def in_basis(self, B) -> np.ndarray:
        """Full coefficient tensor C with omega = sum C[a,b,c] b_a ^ b_b ^ b_c, where b_a are the rows of B."""
        D = PrimeField.of(self.q).inverse(B)
        return transform_tensor(self.tensor, D, self.q)

    def to_json(self) -> dict:
        return {
            "prime": self.q,
            "dim": self.n,
            "coeffs": [{"idx": list(t), "val": int(c)} for t, c in zip(basis(self.n, 3), self.coeffs) if c],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "Trivector":
        n = int(doc["dim"])
        q = int(doc["prime"])
        idx = basis_index(n, 3)
        c = np.zeros(len(basis(n, 3)), dtype=np.int64)
        for entry in doc["coeffs"]:
            t = tuple(int(x) for x in entry["idx"])
            if t not in idx:
                raise ValueError(f"index triple {t} is not strictly increasing in range({n})")
            c[idx[t]] = int(entry["val"])
        return cls(n, q, c)


def transform_tensor(T, D, q: int) -> np.ndarray:
    """C[a,b,c] = sum T[i,j,k] D[i,a] D[j,b] D[k,c], reduced mod q after each contraction."""
    D = np.mod(np.asarray(D, dtype=np.int64), q)
    C = np.mod(np.tensordot(T, D, axes=([2], [0])), q)
    C = np.mod(np.einsum("ijc,jb->ibc", C, D), q)
    C = np.mod(np.einsum("ibc,ia->abc", C, D), q)
    return C


def double_contract(omega: Trivector, p, r) -> np.ndarray:
    """The vector omega(p, r, .) for covectors p, r."""
    p = np.asarray(p, dtype=np.int64)
    r = np.asarray(r, dtype=np.int64)
    if p.shape != (omega.n,) or r.shape != (omega.n,):
        raise DimensionMismatch("covectors must match the trivector dimension")
    q = omega.q
    M = skew_matrix(omega, p)
    return np.mod(r @ M, q)


def skew_matrix(omega: Trivector, p) -> np.ndarray:
    """M(p)[i, j] = sum_l p_l T[l, i, j], the 2-form obtained by contracting p into omega."""
    p = np.mod(np.asarray(p, dtype=np.int64), omega.q)
    if p.shape[-1] != omega.n:
        raise DimensionMismatch("covector must match the trivector dimension")
    return np.mod(np.tensordot(p, omega.tensor, axes=([-1], [0])), omega.q)


def pfaffian(M, q: int) -> int:
    """Pfaffian of an even skew matrix by first-row expansion."""
    M = np.mod(np.asarray(M, dtype=np.int64), q)
    n = M.shape[0]
    if n % 2:
        raise OddSize(f"Pfaffian needs even size, got {n}")
    memo: dict = {}

    def pf(idx: tuple) -> int:
        if not idx:
            return 1
        if idx in memo:
            return memo[idx]
        i0 = idx[0]
        total = 0
        for pos in range(1, len(idx)):
            j = idx[pos]
            if M[i0, j]:
                rest = idx[1:pos] + idx[pos + 1:]
                term = int(M[i0, j]) * pf(rest)
                total += term if pos % 2 == 1 else -term
        memo[idx] = total % q
        return memo[idx]

    return pf(tuple(range(n)))


# -- subspaces ---------------------------------------------------------------


class Subspace:
    """A linear subspace of F_q^n given by a reduced-echelon row basis."""

    __slots__ = ("n", "q", "basis", "role")

    def __init__(self, n: int, q: int, rows=None, role: str = "V"):
        self.n = int(n)
        self.q = int(q)
        self.role = role
        if rows is None or len(rows) == 0:
            self.basis = np.zeros((0, self.n), dtype=np.int64)
        else:
            R = np.atleast_2d(np.asarray(rows, dtype=np.int64))
            if R.shape[1] != self.n:
                raise DimensionMismatch("basis rows must have the ambient dimension")
            self.basis = PrimeField.of(self.q).rref(R)[0]
        self.basis.setflags(write=False)

    @classmethod
    def full(cls, n, q, role="V"):
        return cls(n, q, np.eye(n, dtype=np.int64), role)

    @classmethod
    def coordinate(cls, n, q, indices, role="V"):
        E = np.eye(n, dtype=np.int64)
        return cls(n, q, E[list(indices)], role)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def __repr__(self):
        return f"Subspace(n={self.n}, dim={self.dim}, role={self.role!r})"

    def __eq__(self, other):
        return (
            isinstance(other, Subspace)
            and (self.n, self.q) == (other.n, other.q)
            and np.array_equal(self.basis, other.basis)
        )

    def __hash__(self):
        return hash((self.n, self.q, self.basis.tobytes()))

    def contains(self, v) -> bool:
        v = np.atleast_2d(np.asarray(v, dtype=np.int64))
        F = PrimeField.of(self.q)
        return F.rank(np.vstack([self.basis, v])) == self.dim

    def issubspace(self, other: "Subspace") -> bool:
        return self.dim == 0 or other.contains(self.basis)

    def __add__(self, other: "Subspace") -> "Subspace":
        return Subspace(self.n, self.q, np.vstack([self.basis, other.basis]), self.role)

    def perp(self) -> "Subspace":
        """Annihilator in the dual space."""
        role = {"V": "V*", "V*": "V"}.get(self.role, self.role)
        if self.dim == 0:
            return Subspace.full(self.n, self.q, role)
        return Subspace(self.n, self.q, PrimeField.of(self.q).kernel(self.basis), role)

    def intersect(self, other: "Subspace") -> "Subspace":
        s = (self.perp() + other.perp()).perp()
        s.role = self.role
        return s

    def complement_basis(self) -> np.ndarray:
        """Standard basis vectors completing self.basis to a basis of F_q^n."""
        F = PrimeField.of(self.q)
        rows = [r for r in self.basis]
        extra = []
        for i in range(self.n):
            e = np.zeros(self.n, dtype=np.int64)
            e[i] = 1
            if F.rank(np.array(rows + [e])) > len(rows):
                rows.append(e)
                extra.append(e)
        return np.array(extra, dtype=np.int64).reshape(-1, self.n)

    def image(self, g) -> "Subspace":
        """Image under the vector map e_i -> sum_a g[a, i] e_a."""
        g = np.asarray(g, dtype=np.int64)
        return Subspace(self.n, self.q, np.mod(self.basis @ g.T, self.q), self.role)


class Flag:
    """A chain of strictly increasing nested subspaces."""

    def __init__(self, spaces):
        self.spaces = list(spaces)
        for a, b in zip(self.spaces, self.spaces[1:]):
            if a.dim >= b.dim or not a.issubspace(b):
                raise NotNested(f"dimension {a.dim} space is not properly contained in the next member")

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(s.dim for s in self.spaces)

    def __getitem__(self, i):
        return self.spaces[i]

    def __len__(self):
        return len(self.spaces)

    def __eq__(self, other):
        return isinstance(other, Flag) and self.spaces == other.spaces


def extend_basis(sub: Subspace, sup: Subspace) -> np.ndarray:
    """Rows completing a basis of ``sub`` to one of ``sup``."""
    F = PrimeField.of(sub.q)
    rows = list(sub.basis)
    extra = []
    for v in sup.basis:
        if F.rank(np.array(rows + [v])) > len(rows):
            rows.append(v)
            extra.append(v)
    return np.array(extra, dtype=np.int64).reshape(-1, sub.n)


def wedge_space(Sa: Subspace, Sb: Subspace, Sc: Subspace) -> Subspace:
    """Span of a ^ b ^ c (a in Sa, b in Sb, c in Sc) inside the trivector space."""
    if not (Sa.issubspace(Sb) and Sb.issubspace(Sc)):
        raise NotNested("wedge_space expects nested inputs")
    n, q = Sa.n, Sa.q
    rows = []
    for a in Sa.basis:
        for b in Sb.basis:
            ab = wedge(a, 1, b, 1, n, q)
            if not ab.any():
                continue
            for c in Sc.basis:
                rows.append(wedge(ab, 2, c, 1, n, q))
    return Subspace(len(basis(n, 3)), q, rows, role="L3")


def in_sum_of_spans(m: Trivector, spaces) -> bool:
    """Whether m lies in the sum of the given trivector subspaces (one rank comparison)."""
    F = PrimeField.of(m.q)
    S = np.vstack([s.basis for s in spaces])
    r = F.rank(S) if S.size else 0
    return F.rank(np.vstack([S, m.coeffs[None, :]])) == r
