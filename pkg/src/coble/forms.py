"""Dense homogeneous forms over F_q.

Monomials of degree d in n variables are ordered lexicographically on their
exponent vectors with x0^d first (descending lex).  A form is a coefficient
vector over that ordering.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .field import PrimeField


def _compositions(d: int, n: int):
    if n == 1:
        yield (d,)
        return
    for first in range(d, -1, -1):
        for rest in _compositions(d - first, n - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def exponents(d: int, n: int = 9) -> np.ndarray:
    """Exponent vectors of all degree-d monomials, shape (C(d+n-1, d), n)."""
    E = np.array(list(_compositions(d, n)), dtype=np.int64).reshape(-1, n)
    E.setflags(write=False)
    return E


@lru_cache(maxsize=None)
def monomial_index(d: int, n: int = 9) -> dict:
    return {tuple(int(x) for x in e): i for i, e in enumerate(exponents(d, n))}


@lru_cache(maxsize=None)
def _shift_table(d: int, n: int) -> np.ndarray:
    """T[v, m] = index of x_v * (monomial m of degree d) among degree d+1 monomials."""
    idx = monomial_index(d + 1, n)
    E = exponents(d, n)
    T = np.empty((n, len(E)), dtype=np.int64)
    for v in range(n):
        for m, e in enumerate(E):
            f = list(e)
            f[v] += 1
            T[v, m] = idx[tuple(f)]
    T.setflags(write=False)
    return T


@lru_cache(maxsize=None)
def _derivative_table(d: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """For each variable v: target index of d/dx_v of monomial m (or -1) and the exponent factor."""
    E = exponents(d, n)
    tgt = np.full((n, len(E)), -1, dtype=np.int64)
    fac = np.zeros((n, len(E)), dtype=np.int64)
    if d == 0:
        return tgt, fac
    idx = monomial_index(d - 1, n)
    for v in range(n):
        for m, e in enumerate(E):
            if e[v]:
                f = list(e)
                f[v] -= 1
                tgt[v, m] = idx[tuple(f)]
                fac[v, m] = e[v]
    return tgt, fac


def monomial_values(points, d: int, q: int, n: int | None = None) -> np.ndarray:
    """Values of every degree-d monomial at each point, shape (N, #monomials)."""
    P = np.mod(np.atleast_2d(np.asarray(points, dtype=np.int64)), q)
    n = P.shape[1] if n is None else n
    E = exponents(d, n)
    powers = np.ones((P.shape[0], n, d + 1), dtype=np.int64)
    for e in range(1, d + 1):
        powers[:, :, e] = powers[:, :, e - 1] * P % q
    out = np.ones((P.shape[0], len(E)), dtype=np.int64)
    for v in range(n):
        out = out * powers[:, v, :][:, E[:, v]] % q
    return out


class HomogeneousForm:
    """A degree-d form in n variables with coefficients in F_q."""

    __slots__ = ("q", "degree", "n", "coeffs")

    def __init__(self, q: int, degree: int, coeffs, n: int = 9):
        self.q = int(q)
        self.degree = int(degree)
        self.n = int(n)
        c = np.mod(np.asarray(coeffs, dtype=np.int64), self.q)
        if c.shape != (len(exponents(self.degree, self.n)),):
            raise ValueError(
                f"degree {degree} in {n} variables needs {len(exponents(self.degree, self.n))} coefficients"
            )
        self.coeffs = c

    @classmethod
    def zero(cls, q, degree, n=9):
        return cls(q, degree, np.zeros(len(exponents(degree, n)), dtype=np.int64), n)

    @classmethod
    def linear(cls, q, coeffs):
        coeffs = np.asarray(coeffs)
        return cls(q, 1, coeffs, len(coeffs))

    def __repr__(self):
        return f"HomogeneousForm(q={self.q}, degree={self.degree}, nonzero={int(np.count_nonzero(self.coeffs))})"

    def __eq__(self, other):
        return (
            isinstance(other, HomogeneousForm)
            and (self.q, self.degree, self.n) == (other.q, other.degree, other.n)
            and np.array_equal(self.coeffs, other.coeffs)
        )

    def __hash__(self):
        return hash((self.q, self.degree, self.coeffs.tobytes()))

    def is_zero(self) -> bool:
        return not self.coeffs.any()

    def __add__(self, other):
        return HomogeneousForm(self.q, self.degree, self.coeffs + other.coeffs, self.n)

    def __sub__(self, other):
        return HomogeneousForm(self.q, self.degree, self.coeffs - other.coeffs, self.n)

    def __neg__(self):
        return HomogeneousForm(self.q, self.degree, -self.coeffs, self.n)

    def scale(self, c: int):
        return HomogeneousForm(self.q, self.degree, self.coeffs * (int(c) % self.q), self.n)

    def mul_linear(self, lin) -> "HomogeneousForm":
        """Product with the linear form sum(lin[v] * x_v)."""
        lin = np.mod(np.asarray(lin, dtype=np.int64), self.q)
        T = _shift_table(self.degree, self.n)
        out = np.zeros(len(exponents(self.degree + 1, self.n)), dtype=np.int64)
        for v in np.flatnonzero(lin):
            np.add.at(out, T[v], self.coeffs * lin[v] % self.q)
        return HomogeneousForm(self.q, self.degree + 1, out, self.n)

    def divide_by_variable(self, v: int) -> "HomogeneousForm | None":
        """Exact quotient by x_v, or None when some monomial lacks x_v."""
        E = exponents(self.degree, self.n)
        nz = np.flatnonzero(self.coeffs)
        if (E[nz, v] == 0).any():
            return None
        tgt, _ = _derivative_table(self.degree, self.n)
        out = np.zeros(len(exponents(self.degree - 1, self.n)), dtype=np.int64)
        out[tgt[v, nz]] = self.coeffs[nz]
        return HomogeneousForm(self.q, self.degree - 1, out, self.n)

    def derivative(self, v: int) -> "HomogeneousForm":
        tgt, fac = _derivative_table(self.degree, self.n)
        out = np.zeros(len(exponents(max(self.degree - 1, 0), self.n)), dtype=np.int64)
        keep = tgt[v] >= 0
        np.add.at(out, tgt[v, keep], self.coeffs[keep] * fac[v, keep] % self.q)
        return HomogeneousForm(self.q, max(self.degree - 1, 0), out, self.n)

    def gradient_forms(self) -> list["HomogeneousForm"]:
        return [self.derivative(v) for v in range(self.n)]

    def __call__(self, points):
        """Evaluate at one point (returns int) or a stack of points (returns array)."""
        P = np.asarray(points, dtype=np.int64)
        single = P.ndim == 1
        vals = monomial_values(P, self.degree, self.q, self.n)
        out = PrimeField.of(self.q).matmul(vals, self.coeffs[:, None])[:, 0]
        return int(out[0]) if single else out

    def gradient(self, points) -> np.ndarray:
        """Gradient at one point (shape (n,)) or a stack of points (shape (N, n))."""
        P = np.asarray(points, dtype=np.int64)
        single = P.ndim == 1
        G = np.stack([d.coeffs for d in self.gradient_forms()], axis=1)
        vals = monomial_values(P, self.degree - 1, self.q, self.n)
        out = PrimeField.of(self.q).matmul(vals, G)
        return out[0] if single else out

    def normalized(self) -> "HomogeneousForm":
        """Scale so the lex-first nonzero coefficient is 1."""
        nz = np.flatnonzero(self.coeffs)
        if nz.size == 0:
            return self
        return self.scale(PrimeField.of(self.q).inv(self.coeffs[nz[0]]))

    def proportional_to(self, other: "HomogeneousForm") -> int | None:
        """The scalar c with self = c * other, or None."""
        if other.degree != self.degree or other.is_zero():
            return None
        i = int(np.flatnonzero(other.coeffs)[0])
        c = int(self.coeffs[i]) * PrimeField.of(self.q).inv(other.coeffs[i]) % self.q
        if np.array_equal(self.coeffs, other.coeffs * c % self.q):
            return c
        return None

    def restrict_to_line(self, x, y) -> np.ndarray:
        """Coefficients a_0..a_d of F(x + t y) in t, exact.

        Uses interpolation at t = 0..d, which needs q > d.
        """
        q = self.q
        d = self.degree
        if q <= d:
            raise ValueError("line restriction needs q > degree")
        x = np.asarray(x, dtype=np.int64)
        y = np.asarray(y, dtype=np.int64)
        ts = np.arange(d + 1)
        vals = self((x[None, :] + ts[:, None] * y[None, :]) % q)
        V = np.mod(ts[:, None] ** np.arange(d + 1)[None, :], q)
        return PrimeField.of(q).solve(V, vals)[0]

    def to_json(self) -> dict:
        return {"prime": self.q, "degree": self.degree, "vars": self.n, "coeffs": [int(c) for c in self.coeffs]}

    @classmethod
    def from_json(cls, doc: dict) -> "HomogeneousForm":
        return cls(doc["prime"], doc["degree"], doc["coeffs"], doc.get("vars", 9))
