"""Arithmetic in F_q and dense linear algebra over it.

All matrices are numpy int64 arrays holding canonical residues in [0, q).
Pivoting always takes the first nonzero entry in column order, so echelon
forms (and every subspace built from them) are canonical.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import Inconsistent, ZeroInverse

_INT64_MAX = np.iinfo(np.int64).max
_FLOAT_EXACT = 2**53
# matrices with more entries than this go through the blocked eliminator
_BLOCKED_THRESHOLD = 250_000


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class PrimeField:
    q: int

    def __post_init__(self):
        q = self.q
        if not isinstance(q, (int, np.integer)) or not (5 <= q < 2**31) or not _is_prime(int(q)):
            raise ValueError(f"modulus must be an odd prime in [5, 2^31), got {q!r}")

    @staticmethod
    @lru_cache(maxsize=None)
    def of(q: int) -> "PrimeField":
        return PrimeField(int(q))

    # -- scalars -------------------------------------------------------------

    def __call__(self, a) -> np.ndarray:
        return np.mod(np.asarray(a, dtype=np.int64), self.q)

    def inv(self, a: int) -> int:
        a = int(a) % self.q
        if a == 0:
            raise ZeroInverse(f"0 has no inverse mod {self.q}")
        return pow(a, self.q - 2, self.q)

    def inv_array(self, a) -> np.ndarray:
        """Elementwise inverse; zeros map to zero."""
        base = self(a)
        out = np.ones_like(base)
        e = self.q - 2
        while e:
            if e & 1:
                out = out * base % self.q
            base = base * base % self.q
            e >>= 1
        return np.where(self(a) == 0, 0, out)

    def neg(self, a):
        return self(-np.asarray(a, dtype=np.int64))

    def _inner_chunk(self) -> int:
        return max(1, _INT64_MAX // ((self.q - 1) ** 2 + 1))

    def matmul(self, A, B) -> np.ndarray:
        """Exact product mod q without int64 overflow."""
        A = self(A)
        B = self(B)
        k = A.shape[-1]
        if k * (self.q - 1) ** 2 < _FLOAT_EXACT and k > 16:
            return self(np.rint(A.astype(np.float64) @ B.astype(np.float64)).astype(np.int64))
        step = self._inner_chunk()
        if step >= k:
            return self(A @ B)
        out = np.zeros(A.shape[:-1] + B.shape[1:], dtype=np.int64)
        for s in range(0, k, step):
            out = self(out + self(A[..., s:s + step] @ B[s:s + step]))
        return out

    def dot(self, a, b) -> int:
        return int(self.matmul(np.asarray(a)[None, :], np.asarray(b)[:, None])[0, 0])

    # -- elimination ---------------------------------------------------------

    def rref(self, M) -> tuple[np.ndarray, list[int]]:
        """Reduced row echelon form; returns the nonzero rows and pivot columns."""
        A = self(np.atleast_2d(M)).copy()
        m, n = A.shape
        q = self.q
        pivots: list[int] = []
        r = 0
        for c in range(n):
            if r == m:
                break
            nz = np.flatnonzero(A[r:, c])
            if nz.size == 0:
                continue
            i = r + int(nz[0])
            if i != r:
                A[[r, i]] = A[[i, r]]
            A[r] = A[r] * self.inv(A[r, c]) % q
            col = A[:, c].copy()
            col[r] = 0
            rows = np.flatnonzero(col)
            if rows.size:
                A[rows] = (A[rows] - np.outer(col[rows], A[r]) % q) % q
            pivots.append(c)
            r += 1
        return A[:r], pivots

    def echelon(self, M, block: int = 64) -> tuple[np.ndarray, list[int]]:
        """Row echelon form (not reduced) by blocked elimination.

        Panel factorisation with first-nonzero pivoting followed by a single
        trailing update per panel.  The pivot sequence and the resulting rows
        coincide with plain column-by-column elimination.
        """
        A = self(np.atleast_2d(M)).copy()
        m, n = A.shape
        q = self.q
        r = 0
        for c0 in range(0, n, block):
            if r == m:
                break
            c1 = min(c0 + block, n)
            r0 = r
            pcols: list[int] = []
            for c in range(c0, c1):
                if r == m:
                    break
                nz = np.flatnonzero(A[r:, c])
                if nz.size == 0:
                    continue
                i = r + int(nz[0])
                if i != r:
                    A[[r, i]] = A[[i, r]]
                lam = A[r + 1:, c] * self.inv(A[r, c]) % q
                A[r + 1:, c] = lam
                if c + 1 < c1 and r + 1 < m:
                    A[r + 1:, c + 1:c1] = (A[r + 1:, c + 1:c1] - np.outer(lam, A[r, c + 1:c1]) % q) % q
                pcols.append(c)
                r += 1
            k = len(pcols)
            if k and c1 < n:
                # forward substitution through the unit lower factor of the panel
                for j in range(k - 1):
                    lam = A[r0 + j + 1:r0 + k, pcols[j]]
                    A[r0 + j + 1:r0 + k, c1:] = (
                        A[r0 + j + 1:r0 + k, c1:] - np.outer(lam, A[r0 + j, c1:]) % q
                    ) % q
                if r < m:
                    L21 = A[r:, pcols]
                    U12 = A[r0:r, c1:]
                    A[r:, c1:] = self(A[r:, c1:] - self.matmul(L21, U12))
            for j, c in enumerate(pcols):
                A[r0 + j + 1:, c] = 0
        return A[:r], pivots_from(A[:r])

    def _echelon(self, M) -> tuple[np.ndarray, list[int]]:
        M = np.atleast_2d(M)
        if M.size > _BLOCKED_THRESHOLD:
            return self.echelon(M)
        return self.rref(M)

    def rank(self, M) -> int:
        M = np.atleast_2d(M)
        if M.size == 0:
            return 0
        return len(self._echelon(M)[1])

    def _back_substitute(self, U, pivots, n, rhs=None, free=None) -> np.ndarray:
        """Solve the echelon system for pivot unknowns, bottom row first.

        ``free`` is an (n, k) array of prescribed values (nonzero only on free
        columns); ``rhs`` an (r, k) right-hand side.
        """
        q = self.q
        r = len(pivots)
        k = free.shape[1] if free is not None else rhs.shape[1]
        X = np.zeros((n, k), dtype=np.int64) if free is None else free.copy()
        for i in range(r - 1, -1, -1):
            p = pivots[i]
            acc = self.matmul(U[i:i + 1, p + 1:n], X[p + 1:])[0]
            if rhs is not None:
                acc = self(rhs[i] - acc)
            else:
                acc = self(-acc)
            X[p] = acc * self.inv(U[i, p]) % q
        return X

    def _kernel_from_echelon(self, U, pivots, n) -> np.ndarray:
        pivset = set(pivots)
        free_cols = [c for c in range(n) if c not in pivset]
        if not free_cols:
            return np.zeros((0, n), dtype=np.int64)
        F = np.zeros((n, len(free_cols)), dtype=np.int64)
        F[free_cols, range(len(free_cols))] = 1
        X = self._back_substitute(U, pivots, n, free=F)
        return self.rref(X.T)[0]

    def kernel(self, M) -> np.ndarray:
        """Basis of {x : M x = 0} as rows, in reduced echelon form."""
        M = self(np.atleast_2d(M))
        U, pivots = self._echelon(M)
        return self._kernel_from_echelon(U, pivots, M.shape[1])

    def solve(self, M, B) -> tuple[np.ndarray, np.ndarray]:
        """Particular solution X of M X = B (free unknowns set to 0) and the kernel of M."""
        M = self(np.atleast_2d(M))
        B = self(B)
        vector = B.ndim == 1
        if vector:
            B = B[:, None]
        m, n = M.shape
        if B.shape[0] != m:
            raise ValueError("row count mismatch")
        U, pivots = self._echelon(np.hstack([M, B]))
        if pivots and pivots[-1] >= n:
            raise Inconsistent("right-hand side not in the column span")
        X = self._back_substitute(U[:, :n], pivots, n, rhs=U[:, n:])
        K = self._kernel_from_echelon(U[:, :n], pivots, n)
        return (X[:, 0] if vector else X), K

    def inverse(self, M) -> np.ndarray:
        M = self(M)
        n = M.shape[0]
        if M.shape != (n, n):
            raise ValueError("square matrix expected")
        R, pivots = self.rref(np.hstack([M, np.eye(n, dtype=np.int64)]))
        if len(pivots) < n or pivots[n - 1] != n - 1:
            raise ZeroInverse("singular matrix")
        return R[:, n:]

    def det(self, M) -> int:
        A = self(M).copy()
        n = A.shape[0]
        q = self.q
        d = 1
        for c in range(n):
            nz = np.flatnonzero(A[c:, c])
            if nz.size == 0:
                return 0
            i = c + int(nz[0])
            if i != c:
                A[[c, i]] = A[[i, c]]
                d = -d
            d = d * int(A[c, c]) % q
            lam = A[c + 1:, c] * self.inv(A[c, c]) % q
            A[c + 1:] = (A[c + 1:] - np.outer(lam, A[c]) % q) % q
        return d % q

    # -- batched small matrices ----------------------------------------------

    def batch_rank(self, mats) -> np.ndarray:
        """Ranks of a stack of small matrices, shape (N, m, n)."""
        A = self(mats).copy()
        N, m, n = A.shape
        q = self.q
        rank = np.zeros(N, dtype=np.int64)
        idx = np.arange(N)
        for k in range(min(m, n)):
            sub = A[:, k:, k:].reshape(N, -1) != 0
            has = sub.any(axis=1)
            if not has.any():
                break
            flat = sub.argmax(axis=1)
            w = n - k
            r = k + flat // w
            c = k + flat % w
            # bring the pivot to (k, k)
            rows_k = A[idx, k].copy()
            A[idx, k] = A[idx, r]
            A[idx, r] = rows_k
            cols_k = A[idx, :, k].copy()
            A[idx, :, k] = A[idx, :, c]
            A[idx, :, c] = cols_k
            piv_inv = self.inv_array(A[:, k, k])
            lam = A[:, k + 1:, k] * piv_inv[:, None] % q
            A[:, k + 1:, k:] = (A[:, k + 1:, k:] - lam[:, :, None] * A[:, None, k, k:] % q) % q
            rank += has
        return rank


def pivots_from(U: np.ndarray) -> list[int]:
    return [int(np.flatnonzero(row)[0]) for row in U]


def normalize(v, q: int) -> np.ndarray:
    """Scale a nonzero vector so its first nonzero coordinate is 1."""
    v = np.mod(np.asarray(v, dtype=np.int64), q)
    nz = np.flatnonzero(v)
    if nz.size == 0:
        raise ValueError("zero vector has no projective class")
    return v * pow(int(v[nz[0]]), q - 2, q) % q


def normalize_rows(V, q: int) -> np.ndarray:
    """Row-wise version of :func:`normalize`; zero rows stay zero."""
    V = np.mod(np.asarray(V, dtype=np.int64), q)
    lead = np.argmax(V != 0, axis=1)
    s = V[np.arange(V.shape[0]), lead]
    return V * PrimeField.of(q).inv_array(s)[:, None] % q


def projective_points(k: int, q: int) -> np.ndarray:
    """All normalized points of P^{k-1}(F_q), in lexicographic order."""
    blocks = []
    for lead in range(k - 1, -1, -1):
        free = k - lead - 1
        grid = np.indices((q,) * free).reshape(free, -1).T if free else np.zeros((1, 0), dtype=np.int64)
        block = np.zeros((grid.shape[0], k), dtype=np.int64)
        block[:, lead] = 1
        block[:, lead + 1:] = grid
        blocks.append(block)
    return np.concatenate(blocks)
