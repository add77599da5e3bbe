"""Tests for exact rationals, generalized binomials and the linear algebra helpers."""

from fractions import Fraction as F
from math import comb

import hypothesis.strategies as st
from hypothesis import given, settings

from affinekit.exact import (
    Poly,
    det,
    gen_binom,
    gen_multinom,
    integer_solve,
    kernel,
    mat_rank,
    multinom_convolution_check,
    solve_unique,
)

# ------------------------------------------------------------------ oracle
# Truncated multivariate power series for (1 + x_1 + ... + x_k)^n.
# Positive powers by repeated multiplication, negative powers by series
# inversion order by order.  No binomial formula is used anywhere here, so
# this is an independent check of gen_multinom and of the convolution
# identity.


def _exps_of_degree(d, k):
    if k == 1:
        yield (d,)
        return
    for first in range(d + 1):
        for rest in _exps_of_degree(d - first, k - 1):
            yield (first,) + rest


def _series_mul(a, b, k, tot):
    out = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            if sum(e) <= tot:
                out[e] = out.get(e, F(0)) + ca * cb
    return {e: c for e, c in out.items() if c != 0}


def series_pow_one_plus_sum(n, k, tot):
    """Coefficient table of (1 + x_1 + ... + x_k)^n up to total degree tot."""
    zero = (0,) * k
    base = {zero: F(1)}
    for i in range(k):
        e = [0] * k
        e[i] = 1
        base[tuple(e)] = F(1)

    def power(m):
        acc = {zero: F(1)}
        for _ in range(m):
            acc = _series_mul(acc, base, k, tot)
        return acc

    if n >= 0:
        return power(n)
    p = power(-n)
    s = {zero: F(1)}
    for d in range(1, tot + 1):
        for e in _exps_of_degree(d, k):
            acc = F(0)
            for ep, cp in p.items():
                if ep == zero:
                    continue
                rem = tuple(x - y for x, y in zip(e, ep))
                if min(rem) >= 0:
                    acc += cp * s.get(rem, F(0))
            s[e] = -acc
    return {e: c for e, c in s.items() if c != 0}


# ------------------------------------------------------------- gen_binom


def test_gen_binom_examples():
    assert gen_binom(F(5), 2) == 10
    assert gen_binom(F(-3), 2) == 6
    assert gen_binom(F(1, 2), 2) == F(-1, 8)
    assert gen_binom(F(7, 3), 0) == 1


def test_gen_binom_matches_classical():
    for n in range(21):
        for i in range(n + 1):
            assert gen_binom(F(n), i) == comb(n, i)


@given(
    st.fractions(min_value=-50, max_value=50, max_denominator=40),
    st.integers(min_value=1, max_value=10),
)
@settings(max_examples=100, deadline=None)
def test_gen_binom_pascal(x, i):
    assert gen_binom(x, i) == gen_binom(x - 1, i) + gen_binom(x - 1, i - 1)


# ---------------------------------------------------------- gen_multinom


def test_gen_multinom_examples():
    assert gen_multinom(4, [1, 1]) == 12
    assert gen_multinom(-2, [1]) == -2
    # (-1)(-2)/2! = 1, also the x^2 coefficient of 1/(1+x) = 1 - x + x^2 - ...
    assert gen_multinom(-1, [2]) == 1
    assert gen_multinom(3, []) == 1


def test_gen_multinom_against_series_oracle():
    for n in (-4, -3, -2, -1, 0, 1, 2, 3, 5):
        for k in (1, 2, 3):
            table = series_pow_one_plus_sum(n, k, 5)
            for d in range(6):
                for e in _exps_of_degree(d, k):
                    assert gen_multinom(n, list(e)) == table.get(e, F(0))


# ------------------------------------------------- convolution identity


def test_multinom_convolution_examples():
    assert multinom_convolution_check(0, 3, 2)
    assert multinom_convolution_check(2, 3, 1)
    assert multinom_convolution_check(3, 5, 3)


def test_multinom_convolution_against_series_oracle():
    # (1+s)^{-N} (1+s)^{N+K} = (1+s)^K as truncated series, s = x_1+...+x_k
    for N in (1, 2, 3):
        for K in (0, 2, 4):
            for k in (1, 2):
                tot = 4
                a = series_pow_one_plus_sum(-N, k, tot)
                b = series_pow_one_plus_sum(N + K, k, tot)
                c = series_pow_one_plus_sum(K, k, tot)
                assert _series_mul(a, b, k, tot) == c


# ------------------------------------------------------------------ Poly


def test_poly_arithmetic():
    x = Poly.x()
    p = x * x - Poly.const(F(3)) * x + Poly.const(F(2))
    assert p(F(1)) == 0
    assert p(F(2)) == 0
    assert p(F(0)) == 2
    assert p.degree() == 2
    assert (p - p).is_zero()
    assert Poly.const(F(5)).is_constant()
    assert not p.is_constant()


def test_poly_mul_eval_compat():
    p = Poly([F(1), F(2), F(1)])
    q = Poly([F(-1), F(1)])
    r = p * q
    for v in (F(0), F(1), F(-2), F(3, 7)):
        assert r(v) == p(v) * q(v)


# ---------------------------------------------------------- linear algebra


def test_solve_unique_and_det():
    A = [[F(2), F(1)], [F(1), F(3)]]
    b = [F(5), F(10)]
    x = solve_unique(A, b)
    assert x == [F(1), F(3)]
    assert det(A) == 5
    assert mat_rank(A) == 2


def test_kernel():
    A = [[F(1), F(2), F(3)], [F(2), F(4), F(6)]]
    ker = kernel(A)
    assert len(ker) == 2
    for v in ker:
        for row in A:
            assert sum(r * c for r, c in zip(row, v)) == 0


def test_singular_solve_returns_none():
    A = [[F(1), F(2)], [F(2), F(4)]]
    assert solve_unique(A, [F(1), F(3)]) is None
    assert solve_unique(A, [F(1), F(2)]) is None  # consistent but not unique


def test_integer_solve():
    A = [[2, 0], [0, 3]]
    assert integer_solve(A, [4, 9]) == [2, 3]
    assert integer_solve(A, [3, 9]) is None
    # underdetermined with integer solution
    A2 = [[1, 2, 4]]
    x = integer_solve(A2, [7])
    assert x is not None
    assert x[0] + 2 * x[1] + 4 * x[2] == 7


@given(st.lists(st.integers(min_value=-6, max_value=6), min_size=4, max_size=4))
@settings(max_examples=60, deadline=None)
def test_integer_solve_roundtrip(entries):
    A = [[entries[0], entries[1]], [entries[2], entries[3]]]
    # pick a known integer solution and ask for it back
    x0 = [3, -2]
    b = [A[0][0] * 3 + A[0][1] * (-2), A[1][0] * 3 + A[1][1] * (-2)]
    x = integer_solve(A, b)
    assert x is not None
    assert [A[0][0] * x[0] + A[0][1] * x[1], A[1][0] * x[0] + A[1][1] * x[1]] == b
