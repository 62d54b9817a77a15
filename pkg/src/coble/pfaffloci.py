"""Rank stratification of P(V*) by the skew form p -> omega(p, ., .).

The locus where the rank drops to four is the abelian surface A; the locus
where it drops to six is the Coble cubic, extracted here from the 8 x 8
principal Pfaffians of the linear skew matrix.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations

import numpy as np

from .errors import KernelNotOneDim, NotDivisible, RankTooHigh, SingularSurfacePoint
from .exterior import Subspace, Trivector, skew_matrix
from .field import PrimeField, normalize
from .forms import HomogeneousForm, exponents, monomial_index, monomial_values


def rank_at(omega: Trivector, p) -> int:
    return PrimeField.of(omega.q).rank(skew_matrix(omega, p))


def rank_batch(omega: Trivector, points) -> np.ndarray:
    """Ranks of M(p) for a stack of points."""
    P = np.atleast_2d(np.asarray(points, dtype=np.int64))
    F = PrimeField.of(omega.q)
    out = np.empty(len(P), dtype=np.int64)
    step = 20000
    for s in range(0, len(P), step):
        out[s:s + step] = F.batch_rank(skew_matrix(omega, P[s:s + step]))
    return out


def on_abelian(omega: Trivector, p) -> bool:
    return rank_at(omega, p) <= 4


@lru_cache(maxsize=64)
def principal_pfaffians(omega: Trivector, size: int) -> dict:
    """Principal size x size sub-Pfaffians of M(x) as forms of degree size/2, keyed by index tuple."""
    q, n = omega.q, omega.n
    T = omega.tensor
    memo: dict = {(): HomogeneousForm(q, 0, [1], n)}

    def pf(idx: tuple) -> HomogeneousForm:
        if idx in memo:
            return memo[idx]
        i0 = idx[0]
        acc = HomogeneousForm.zero(q, len(idx) // 2, n)
        for pos in range(1, len(idx)):
            j = idx[pos]
            lin = T[:, i0, j] if pos % 2 == 1 else -T[:, i0, j]
            if not lin.any():
                continue
            acc = acc + pf(idx[1:pos] + idx[pos + 1:]).mul_linear(lin)
        memo[idx] = acc
        return acc

    return {idx: pf(idx) for idx in combinations(range(n), size)}


def pfaffian_vector(omega: Trivector) -> list[HomogeneousForm]:
    """Pf_i(x): Pfaffian of M(x) with row and column i deleted, i = 0..n-1."""
    n = omega.n
    pfs = principal_pfaffians(omega, n - 1)
    return [pfs[tuple(j for j in range(n) if j != i)] for i in range(n)]


@lru_cache(maxsize=64)
def coble_cubic_data(omega: Trivector) -> tuple[HomogeneousForm, tuple[int, ...]]:
    """The normalized cubic C and scalars s_i with Pf_i = s_i * C * x_i."""
    if omega.n != 9:
        raise ValueError("the Coble cubic lives in nine variables")
    C = None
    quotients = []
    for i, P in enumerate(pfaffian_vector(omega)):
        Qi = P.divide_by_variable(i)
        if Qi is None:
            raise NotDivisible(f"Pf_{i} has a monomial free of x_{i}")
        quotients.append(Qi)
        if C is None and not Qi.is_zero():
            C = Qi.normalized()
    if C is None:
        raise NotDivisible("all 8 x 8 Pfaffians vanish identically")
    scalars = []
    for i, Qi in enumerate(quotients):
        s = Qi.proportional_to(C)
        if s is None:
            if Qi.is_zero():
                s = 0
            else:
                raise NotDivisible(f"Pf_{i} / x_{i} is not proportional to the common cubic")
        scalars.append(int(s))
    if any(s == 0 for s in scalars):
        raise NotDivisible("some Pfaffian vanishes identically")
    return C, tuple(scalars)


def coble_cubic(omega: Trivector) -> HomogeneousForm:
    return coble_cubic_data(omega)[0]


def verify_pfaffian_identity(omega: Trivector) -> bool:
    """Check Pf_i = s_i * C * x_i coefficient-wise, for every i."""
    C, s = coble_cubic_data(omega)
    for i, P in enumerate(pfaffian_vector(omega)):
        e = np.zeros(omega.n, dtype=np.int64)
        e[i] = s[i]
        if not C.mul_linear(e) == P:
            return False
    return True


def kernel5(omega: Trivector, p) -> Subspace:
    """Covectors r with omega(p, r, .) = 0."""
    F = PrimeField.of(omega.q)
    M = skew_matrix(omega, p)
    K = F.kernel(M)
    if K.shape[0] < omega.n - 4:
        raise RankTooHigh(f"rank {omega.n - K.shape[0]} > 4")
    return Subspace(omega.n, omega.q, K, role="V*")


def p4_of(omega: Trivector, p) -> Subspace:
    """Span of the vectors omega(p, r, .) over all covectors r."""
    M = skew_matrix(omega, p)
    S = Subspace(omega.n, omega.q, M, role="V")
    if S.dim > 4:
        raise RankTooHigh(f"rank {S.dim} > 4")
    return S


@lru_cache(maxsize=64)
def _sixbysix_jacobian(omega: Trivector) -> np.ndarray:
    """Coefficients of all partial derivatives of the 84 principal 6 x 6 Pfaffians, shape (45, 84*9)."""
    forms = principal_pfaffians(omega, 6)
    cols = []
    for f in forms.values():
        for g in f.gradient_forms():
            cols.append(g.coeffs)
    J = np.stack(cols, axis=1)
    J.setflags(write=False)
    return J


def tangent_A(omega: Trivector, p) -> Subspace:
    """Affine tangent cone of A at p: kernel of the Jacobian of the 6 x 6 Pfaffian cubics."""
    q = omega.q
    F = PrimeField.of(q)
    vals = monomial_values(np.asarray(p)[None, :], 2, q, omega.n)
    grads = F.matmul(vals, _sixbysix_jacobian(omega)).reshape(-1, omega.n)
    K = F.kernel(grads)
    if K.shape[0] != 3:
        raise SingularSurfacePoint(f"tangent space has dimension {K.shape[0]}")
    return Subspace(omega.n, q, K, role="V*")


def tangent_A_contraction(omega: Trivector, p) -> Subspace:
    """Tangent cone of A at p computed from the contraction instead of Pfaffians.

    Moving p to p + t x keeps the rank at most four to first order iff x
    kills omega(a, b, .) for all a, b in the kernel of M(p).
    """
    q = omega.q
    K = kernel5(omega, p).basis
    rows = []
    for i in range(len(K)):
        for j in range(i + 1, len(K)):
            rows.append(skew_matrix(omega, K[i]) @ K[j] % q)
    ker = PrimeField.of(q).kernel(np.array(rows))
    return Subspace(omega.n, q, ker, role="V*")


def cubic_by_interpolation(points, q: int, n: int = 9) -> HomogeneousForm:
    """The cubic singular at every given point, provided it is unique up to scale."""
    P = np.mod(np.atleast_2d(np.asarray(points, dtype=np.int64)), q)
    E = exponents(3, n)
    vals2 = monomial_values(P, 2, q, n)
    idx2 = monomial_index(2, n)
    blocks = [monomial_values(P, 3, q, n)]
    for v in range(n):
        # d/dx_v of x^e is e_v x^(e - 1_v)
        cols = np.zeros((len(P), len(E)), dtype=np.int64)
        for m, e in enumerate(E):
            if e[v]:
                f = list(e)
                f[v] -= 1
                cols[:, m] = vals2[:, idx2[tuple(f)]] * e[v] % q
        blocks.append(cols)
    A = np.vstack(blocks)
    K = PrimeField.of(q).kernel(A)
    if K.shape[0] != 1:
        raise KernelNotOneDim(K.shape[0])
    return HomogeneousForm(q, 3, K[0], n).normalized()


def normalized_point(p, q: int) -> np.ndarray:
    return normalize(p, q)
