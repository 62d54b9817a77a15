import numpy as np
from hypothesis import given, strategies as st

from coble.forms import HomogeneousForm, exponents, monomial_index

seeds = st.integers(0, 2**32 - 1)


def random_form(q, d, n, rng):
    return HomogeneousForm(q, d, rng.integers(0, q, len(exponents(d, n))), n)


def test_monomial_counts():
    assert len(exponents(3, 9)) == 165
    assert len(exponents(6, 9)) == 3003
    idx = monomial_index(2, 3)
    assert len(idx) == 6 and all(sum(e) == 2 for e in idx)


@given(seeds)
def test_euler_identity(s):
    rng = np.random.default_rng(s)
    q, d, n = 11, 3, 5
    f = random_form(q, d, n, rng)
    x = rng.integers(0, q, n)
    assert int(x @ f.gradient(x)) % q == d * f(x) % q


@given(seeds)
def test_homogeneity(s):
    rng = np.random.default_rng(s)
    q = 13
    f = random_form(q, 3, 4, rng)
    x = rng.integers(0, q, 4)
    c = int(rng.integers(1, q))
    assert f(c * x % q) == pow(c, 3, q) * f(x) % q


@given(seeds)
def test_mul_linear_and_divide(s):
    rng = np.random.default_rng(s)
    q = 7
    f = random_form(q, 2, 4, rng)
    lin = rng.integers(0, q, 4)
    g = f.mul_linear(lin)
    X = rng.integers(0, q, (10, 4))
    assert np.array_equal(g(X), f(X) * (X @ lin) % q)
    x0 = np.zeros(4, dtype=np.int64)
    x0[0] = 1
    assert f.mul_linear(x0).divide_by_variable(0) == f


@given(seeds)
def test_restrict_to_line(s):
    rng = np.random.default_rng(s)
    q = 11
    f = random_form(q, 3, 4, rng)
    x, y = rng.integers(0, q, (2, 4))
    a = f.restrict_to_line(x, y)
    for t in range(q):
        assert sum(int(c) * t**k for k, c in enumerate(a)) % q == f((x + t * y) % q)


@given(seeds)
def test_proportional_and_json(s):
    rng = np.random.default_rng(s)
    q = 23
    f = random_form(q, 3, 9, rng)
    if f.is_zero():
        return
    c = int(rng.integers(1, q))
    assert f.scale(c).proportional_to(f) == c
    assert f.scale(c).normalized() == f.normalized()
    assert HomogeneousForm.from_json(f.to_json()) == f
    assert (f + f.scale(q - 1)).is_zero()
