"""Exact scalar arithmetic and small exact linear algebra.

Everything in this package computes over the rationals: the scalar type is
the stdlib Fraction (arbitrary precision, always in lowest terms, positive
denominator), aliased as Rat.  This module adds generalized binomials with
an arbitrary rational upper argument, generalized multinomials, dense
univariate polynomials for identity checking, and exact Gaussian
elimination / integer lattice solving used throughout the package.

No floating point is used anywhere.
"""

from __future__ import annotations

from fractions import Fraction
from math import factorial

Rat = Fraction


def rat(p, q=1) -> Fraction:
    return Fraction(p, q)


# ----------------------------------------------------------------- binomials


def gen_binom(x, i: int) -> Fraction:
    """x(x-1)...(x-i+1)/i! for any rational x and integer i >= 0."""
    if i < 0:
        raise ValueError("lower index must be nonnegative")
    x = Fraction(x)
    acc = Fraction(1)
    for j in range(i):
        acc *= x - j
    return acc / factorial(i)


def gen_multinom(n, ks) -> Fraction:
    """Chained generalized binomials binom(n,k1) binom(n-k1,k2) ...

    For integer n >= 0 this is the coefficient of x1^k1...xj^kj in
    (1 + x1 + ... + xj)^n; the same holds for negative n with the
    series interpretation.
    """
    acc = Fraction(1)
    rem = Fraction(n)
    for k in ks:
        acc *= gen_binom(rem, k)
        rem -= k
    return acc


def _tuples_with_sum_at_most(total: int, k: int):
    if k == 0:
        yield ()
        return
    for first in range(total + 1):
        for rest in _tuples_with_sum_at_most(total - first, k - 1):
            yield (first,) + rest


def multinom_convolution_check(N: int, K: int, k: int) -> bool:
    """Check sum over splittings i_t + j_t = l_t of
    multinom(-N; i) * multinom(N+K; j) == multinom(K; l)
    for every tuple l with sum(l) <= N + K.

    This is the coefficient identity behind the loop-localization map.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    for l in _tuples_with_sum_at_most(N + K, k):
        target = gen_multinom(K, l)
        acc = Fraction(0)
        for i in _splittings(l):
            j = tuple(a - b for a, b in zip(l, i))
            acc += gen_multinom(-N, i) * gen_multinom(N + K, j)
        if acc != target:
            return False
    return True


def _splittings(l):
    if not l:
        yield ()
        return
    for first in range(l[0] + 1):
        for rest in _splittings(l[1:]):
            yield (first,) + rest


# -------------------------------------------------------------- polynomials


class Poly:
    """Dense univariate polynomial over the rationals, ascending degree."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        cs = [Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def const(cls, c) -> "Poly":
        return cls([Fraction(c)])

    @classmethod
    def x(cls) -> "Poly":
        return cls([Fraction(0), Fraction(1)])

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        return len(self.coeffs) <= 1

    def degree(self) -> int:
        # degree of the zero polynomial reported as -1
        return len(self.coeffs) - 1

    def __call__(self, v) -> Fraction:
        v = Fraction(v)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * v + c
        return acc

    def __add__(self, other):
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        return Poly(
            [
                (a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)
                for i in range(n)
            ]
        )

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return Poly([-c for c in self.coeffs])

    def __mul__(self, other):
        if not self.coeffs or not other.coeffs:
            return Poly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Poly(out)

    def scale(self, c) -> "Poly":
        c = Fraction(c)
        return Poly([c * a for a in self.coeffs])

    def __eq__(self, other):
        return isinstance(other, Poly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        if not self.coeffs:
            return "Poly(0)"
        terms = [f"{c}*x^{i}" for i, c in enumerate(self.coeffs) if c != 0]
        return "Poly(" + " + ".join(terms) + ")"


# ----------------------------------------------------------- linear algebra
# Dense exact elimination over Fraction.  Matrices are lists of row lists.


def _copy(mat):
    return [[Fraction(v) for v in row] for row in mat]


def rref(mat):
    """Reduced row echelon form; returns (rows, pivot_columns)."""
    m = _copy(mat)
    if not m:
        return m, []
    rows, cols = len(m), len(m[0])
    pivots = []
    r = 0
    for c in range(cols):
        pivot = None
        for i in range(r, rows):
            if m[i][c] != 0:
                pivot = i
                break
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        pv = m[r][c]
        m[r] = [v / pv for v in m[r]]
        for i in range(rows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return m, pivots


def mat_rank(mat) -> int:
    return len(rref(mat)[1])


def det(mat) -> Fraction:
    m = _copy(mat)
    n = len(m)
    sign = 1
    acc = Fraction(1)
    for c in range(n):
        pivot = None
        for i in range(c, n):
            if m[i][c] != 0:
                pivot = i
                break
        if pivot is None:
            return Fraction(0)
        if pivot != c:
            m[c], m[pivot] = m[pivot], m[c]
            sign = -sign
        pv = m[c][c]
        acc *= pv
        for i in range(c + 1, n):
            if m[i][c] != 0:
                f = m[i][c] / pv
                m[i] = [a - f * b for a, b in zip(m[i], m[c])]
    return acc * sign


def solve_unique(A, b):
    """Solve A x = b; returns the solution iff it exists and is unique."""
    if not A:
        return None
    cols = len(A[0])
    aug = [list(row) + [bv] for row, bv in zip(A, b)]
    m, pivots = rref(aug)
    if cols in pivots:
        return None  # inconsistent
    if len(pivots) < cols:
        return None  # not unique
    sol = [Fraction(0)] * cols
    for r, c in enumerate(pivots):
        sol[c] = m[r][cols]
    return sol


def solve_any(A, b):
    """Some solution of A x = b, or None if inconsistent."""
    if not A:
        return None
    cols = len(A[0])
    aug = [list(row) + [bv] for row, bv in zip(A, b)]
    m, pivots = rref(aug)
    if cols in pivots:
        return None
    sol = [Fraction(0)] * cols
    for r, c in enumerate(pivots):
        sol[c] = m[r][cols]
    return sol


def kernel(A):
    """Basis of the nullspace of A."""
    if not A:
        return []
    cols = len(A[0])
    m, pivots = rref(A)
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * cols
        v[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -m[r][fc]
        basis.append(v)
    return basis


def invert(mat):
    """Exact inverse of a square matrix, or None if singular."""
    n = len(mat)
    aug = [list(map(Fraction, row)) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(mat)]
    m, pivots = rref(aug)
    if pivots != list(range(n)):
        return None
    return [row[n:] for row in m]


# ----------------------------------------------------- integer lattice solve


def integer_solve(A, b):
    """Integer solution x of A x = b, or None.

    Column-style Hermite reduction: M = A U with U unimodular, M lower
    staircase, then forward substitution with divisibility checks.
    """
    if not A:
        return None
    rows = len(A)
    cols = len(A[0])
    M = [[int(v) for v in row] for row in A]
    U = [[int(i == j) for j in range(cols)] for i in range(cols)]

    def col_combine(i, j, a, bcoef, c, d):
        # (col_i, col_j) <- (a*col_i + bcoef*col_j, c*col_i + d*col_j)
        for mat, height in ((M, rows), (U, cols)):
            for r in range(height):
                vi, vj = mat[r][i], mat[r][j]
                mat[r][i] = a * vi + bcoef * vj
                mat[r][j] = c * vi + d * vj

    def ext_gcd(a, bb):
        if bb == 0:
            return a, 1, 0
        g, x, y = ext_gcd(bb, a % bb)
        return g, y, x - (a // bb) * y

    pivot_of_row = {}
    c0 = 0
    for r in range(rows):
        live = [c for c in range(c0, cols) if M[r][c] != 0]
        if not live:
            continue
        # sweep all nonzero entries in row r (from column c0 on) into one gcd
        base = live[0]
        for c in live[1:]:
            a, bb = M[r][base], M[r][c]
            g, x, y = ext_gcd(abs(a), abs(bb))
            sa = 1 if a >= 0 else -1
            sb = 1 if bb >= 0 else -1
            # x*|a| + y*|b| = g ; build unimodular 2x2
            col_combine(base, c, x * sa, y * sb, -(bb // g), a // g)
        if base != c0:
            col_combine(base, c0, 0, 1, 1, 0)
        pivot_of_row[r] = c0
        c0 += 1
        if c0 == cols:
            break
    # forward substitution
    y = [0] * cols
    for r in range(rows):
        acc = b[r] - sum(M[r][c] * y[c] for c in range(cols))
        if r in pivot_of_row:
            c = pivot_of_row[r]
            p = M[r][c]
            if acc % p != 0:
                return None
            y[c] = acc // p
        elif acc != 0:
            return None
    return [sum(U[i][j] * y[j] for j in range(cols)) for i in range(cols)]
