"""Finite-dimensional simple Lie algebras realized by matrices in the defining rep.

Supported types: A1, A2, A3 (traceless matrices) and C2 (symplectic 4x4).
Structure constants and the invariant form are computed once from the
matrices; the form is tr(xy), which already gives (alpha, alpha) = 2 on
long roots for these realizations.

Weights are stored in fw-coordinates: the tuple of values on the simple
coroots h_1..h_rank.  The j-th column of the Cartan matrix is then the
coordinate vector of alpha_j.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from .exact import invert, solve_unique


class LieElt:
    """Sparse Lie algebra element, keyed by basis name."""

    __slots__ = ("c",)

    def __init__(self, coeffs=None):
        self.c = {}
        if coeffs:
            for k, v in coeffs.items():
                v = Fraction(v)
                if v:
                    self.c[k] = v

    def __add__(self, other):
        out = dict(self.c)
        for k, v in other.c.items():
            w = out.get(k, 0) + v
            if w:
                out[k] = w
            else:
                out.pop(k, None)
        return LieElt(out)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, s):
        s = Fraction(s)
        return LieElt({k: v * s for k, v in self.c.items()})

    def is_zero(self):
        return not self.c

    def __eq__(self, other):
        return isinstance(other, LieElt) and self.c == other.c

    def __hash__(self):
        return hash(frozenset(self.c.items()))

    def __repr__(self):
        if not self.c:
            return "LieElt(0)"
        parts = " + ".join(f"{v}*{k}" for k, v in sorted(self.c.items()))
        return f"LieElt({parts})"


# ----------------------------------------------------------------- matrices


def _unit(n, i, j):
    return tuple(
        tuple(Fraction(1) if (r, c) == (i, j) else Fraction(0) for c in range(n))
        for r in range(n)
    )


def _madd(*ms):
    n = len(ms[0])
    return tuple(
        tuple(sum((m[r][c] for m in ms), Fraction(0)) for c in range(n)) for r in range(n)
    )


def _mneg(m):
    return tuple(tuple(-x for x in row) for row in m)

def _msub(a, b):
    return _madd(a, _mneg(b))


def _mmul(a, b):
    n = len(a)
    return tuple(
        tuple(sum((a[r][k] * b[k][c] for k in range(n)), Fraction(0)) for c in range(n))
        for r in range(n)
    )


def _trace_prod(a, b):
    n = len(a)
    return sum((a[i][j] * b[j][i] for i in range(n) for j in range(n)), Fraction(0))


def _vec(m):
    return [x for row in m for x in row]


# ----------------------------------------------------------------- algebra


class SimpleLieAlgebra:
    """Simple Lie algebra with tabulated brackets, form, roots and weights."""

    def __init__(self, label, rank, names, mats, cartan, chevalley):
        self.label = label
        self.rank = rank
        self.basis = names
        self.dim = len(names)
        self.mats = mats
        self.cartan = cartan            # names of the simple coroots h_1..h_rank
        self._chevalley = chevalley     # i -> (e name, f name)
        self._tabulate()

    # -- construction helpers

    def _expand(self, m):
        """Coordinates of matrix m in the chosen basis."""
        cols = [_vec(self.mats[a]) for a in self.basis]
        rows = len(cols[0])
        A = [[cols[j][i] for j in range(self.dim)] for i in range(rows)]
        x = solve_unique(A, _vec(m))
        if x is None:
            raise ValueError("matrix not in the algebra")
        return x

    def _tabulate(self):
        self.bracket_table = {}
        self.form_table = {}
        for a in self.basis:
            for b in self.basis:
                z = _msub(_mmul(self.mats[a], self.mats[b]), _mmul(self.mats[b], self.mats[a]))
                coords = self._expand(z)
                self.bracket_table[(a, b)] = {
                    n: c for n, c in zip(self.basis, coords) if c
                }
                self.form_table[(a, b)] = _trace_prod(self.mats[a], self.mats[b])
        # weights: eigenvalue of ad h_i on each basis vector
        self.weight_of = {}
        for a in self.basis:
            w = []
            for hn in self.cartan:
                br = self.bracket_table[(hn, a)]
                if not br:
                    w.append(Fraction(0))
                elif set(br) == {a}:
                    w.append(br[a])
                else:
                    raise ValueError(f"basis vector {a} is not an ad-eigenvector")
            self.weight_of[a] = tuple(w)
        zero = tuple([Fraction(0)] * self.rank)
        self.roots = sorted(
            {w for a, w in self.weight_of.items() if w != zero}
        )
        self.root_vector = {}
        for a, w in self.weight_of.items():
            if w != zero:
                if w in self.root_vector:
                    raise ValueError(f"root space of {w} is not one-dimensional")
                self.root_vector[w] = a
        self.cartan_matrix = [
            [int(self.weight_of[self._chevalley[j + 1][0]][i]) for j in range(self.rank)]
            for i in range(self.rank)
        ]
        self.simple_roots = [
            self.weight_of[self._chevalley[j + 1][0]] for j in range(self.rank)
        ]
        gram = [
            [self.form_table[(a, b)] for b in self.cartan] for a in self.cartan
        ]
        self._gram_inv = invert(gram)

    # -- public operations

    def bracket(self, x, y):
        out = {}
        for a, xa in x.c.items():
            for b, yb in y.c.items():
                for n, c in self.bracket_table[(a, b)].items():
                    w = out.get(n, 0) + xa * yb * c
                    if w:
                        out[n] = w
                    else:
                        out.pop(n, None)
        return LieElt(out)

    def form(self, x, y):
        tot = Fraction(0)
        for a, xa in x.c.items():
            for b, yb in y.c.items():
                tot += xa * yb * self.form_table[(a, b)]
        return tot

    def weight_form(self, v, w):
        """Invariant form on weights given in fw-coordinates."""
        bw = [
            sum((self._gram_inv[i][j] * Fraction(w[j]) for j in range(self.rank)), Fraction(0))
            for i in range(self.rank)
        ]
        return sum((Fraction(v[i]) * bw[i] for i in range(self.rank)), Fraction(0))

    def chevalley_triple(self, i):
        """(e_i, f_i, h_i) for the i-th simple root, i = 1..rank."""
        en, fn = self._chevalley[i]
        e, f = LieElt({en: 1}), LieElt({fn: 1})
        return e, f, self.bracket(e, f)

    def coroot(self, root):
        """Coroot h_beta = [e_beta, f_beta] as a Cartan element."""
        neg = tuple(-Fraction(c) for c in root)
        e = LieElt({self.root_vector[tuple(Fraction(c) for c in root)]: 1})
        f = LieElt({self.root_vector[neg]: 1})
        return self.bracket(e, f)


def build_simple(label):
    """Construct one of the supported simple Lie algebras by type label."""
    if label in ("A1", "A2", "A3"):
        n = int(label[1]) + 1
        names, mats, chev = [], {}, {}
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                if i != j:
                    nm = f"E{i}{j}"
                    names.append(nm)
                    mats[nm] = _unit(n, i - 1, j - 1)
        cartan = []
        for i in range(1, n):
            nm = f"H{i}"
            names.append(nm)
            mats[nm] = _msub(_unit(n, i - 1, i - 1), _unit(n, i, i))
            cartan.append(nm)
            chev[i] = (f"E{i}{i + 1}", f"E{i + 1}{i}")
        return SimpleLieAlgebra(label, n - 1, names, mats, cartan, chev)
    if label == "C2":
        # sp4 with J = [[0, I], [-I, 0]]; blocks [[A, B], [C, -A^T]], B, C symmetric
        mats = {
            "Xe1-e2": _msub(_unit(4, 0, 1), _unit(4, 3, 2)),
            "Ye1-e2": _msub(_unit(4, 1, 0), _unit(4, 2, 3)),
            "Xe1+e2": _madd(_unit(4, 0, 3), _unit(4, 1, 2)),
            "Ye1+e2": _madd(_unit(4, 3, 0), _unit(4, 2, 1)),
            "X2e1": _unit(4, 0, 2),
            "Y2e1": _unit(4, 2, 0),
            "X2e2": _unit(4, 1, 3),
            "Y2e2": _unit(4, 3, 1),
            # simple coroots: h1 = diag(1,-1,-1,1), h2 = diag(0,1,0,-1)
            "H1": _madd(
                _unit(4, 0, 0), _mneg(_unit(4, 1, 1)), _mneg(_unit(4, 2, 2)), _unit(4, 3, 3)
            ),
            "H2": _msub(_unit(4, 1, 1), _unit(4, 3, 3)),
        }
        names = [
            "Xe1-e2", "Ye1-e2", "Xe1+e2", "Ye1+e2",
            "X2e1", "Y2e1", "X2e2", "Y2e2", "H1", "H2",
        ]
        chev = {1: ("Xe1-e2", "Ye1-e2"), 2: ("X2e2", "Y2e2")}
        return SimpleLieAlgebra("C2", 2, names, mats, ["H1", "H2"], chev)
    raise ValueError(f"unsupported type label: {label}")


# ----------------------------------------------------------------- sigma


class DiagramAut:
    """Automorphism given by a signed permutation of the basis."""

    def __init__(self, order, mapping):
        self.order = order
        self.mapping = mapping  # name -> (image name, sign)

    def apply(self, x):
        out = {}
        for a, v in x.c.items():
            b, s = self.mapping[a]
            out[b] = out.get(b, 0) + s * v
        return LieElt(out)

    def eigenbasis(self, g):
        """Bases of the fixed and anti-fixed subspaces (order 2 only)."""
        if self.order == 1:
            return [LieElt({a: 1}) for a in g.basis], []
        fixed, anti = [], []
        seen = set()
        for a in g.basis:
            if a in seen:
                continue
            b, s = self.mapping[a]
            if b == a:
                (fixed if s == 1 else anti).append(LieElt({a: 1}))
                seen.add(a)
            else:
                fixed.append(LieElt({a: 1, b: s}))
                anti.append(LieElt({a: 1, b: -s}))
                seen.update((a, b))
        return fixed, anti


def sigma_aut(g):
    """Order-2 diagram automorphism of A2: swaps the two simple sl2 triples."""
    if g.label != "A2":
        raise ValueError("the diagram involution is defined for A2 only")
    mapping = {
        "E12": ("E23", 1), "E23": ("E12", 1),
        "E21": ("E32", 1), "E32": ("E21", 1),
        "H1": ("H2", 1), "H2": ("H1", 1),
        "E13": ("E13", -1), "E31": ("E31", -1),
    }
    return DiagramAut(2, mapping)


def identity_aut(g):
    return DiagramAut(1, {a: (a, 1) for a in g.basis})


def sigma_a2(g, x):
    return sigma_aut(g).apply(x)


# ----------------------------------------------------------------- Weyl


def _refl_matrix(g, i):
    """Matrix of the i-th simple reflection on fw-coordinates (1-based i)."""
    alpha = g.simple_roots[i - 1]
    mat = []
    for k in range(g.rank):
        row = []
        for j in range(g.rank):
            v = Fraction(1 if k == j else 0)
            if j == i - 1:
                v -= Fraction(alpha[k])
            row.append(v)
        mat.append(tuple(row))
    return tuple(mat)


def _matvec(m, v):
    return tuple(
        sum((m[i][j] * Fraction(v[j]) for j in range(len(v))), Fraction(0))
        for i in range(len(m))
    )


def weyl_group(g, indices=None, cap=100000):
    """All elements of the Weyl group (or parabolic subgroup) as fw-matrices."""
    if indices is None:
        indices = range(1, g.rank + 1)
    gens = [_refl_matrix(g, i) for i in indices]
    ident = tuple(
        tuple(Fraction(1 if i == j else 0) for j in range(g.rank)) for i in range(g.rank)
    )
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for m in frontier:
            for s in gens:
                p = tuple(tuple(row) for row in _mmul_sq(s, m))
                if p not in seen:
                    seen.add(p)
                    nxt.append(p)
                    if len(seen) > cap:
                        raise ValueError("group generation exceeded cap")
        frontier = nxt
    return sorted(seen)


def _mmul_sq(a, b):
    n = len(a)
    return [
        [sum((a[i][k] * b[k][j] for k in range(n)), Fraction(0)) for j in range(n)]
        for i in range(n)
    ]


def weyl_orbit(g, elements, v):
    """Orbit of the fw-weight v under the given list of group elements."""
    vv = tuple(Fraction(c) for c in v)
    return {_matvec(m, vv) for m in elements}
