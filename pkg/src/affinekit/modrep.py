"""Weight modules over finite and affine Lie algebras on degree windows.

Every module here is a GradedModule: a finite labelled basis, a weight for
each label, and tabulated generator actions with exact rational entries.
Truncation is handled by a boundary mask: while tabulating, any action term
that falls outside the stored basis is dropped and the source label is
masked.  Structural identities (bracket compatibility, weight additivity)
are therefore asserted only at unmasked labels whose one-step images stay
unmasked; inside that region the stored action is complete and the checks
hold exactly.

The dense sl2 family is normalised by two requirements that pin the action
uniquely: [e, f] w_j = (b + 2j) w_j forces mu_{j-1} - mu_j = b + 2j for the
coefficients in e w_j = mu_j w_{j+1}, and c is declared to be mu_0.  Summing
the recurrence gives mu_j = c - j(b + j + 1), and the Casimir ef + fe +
h^2/2 then acts by the constant 2c + b + b^2/2.
"""

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .affine import (
    AffElt,
    AffRoot,
    AffWeight,
    DegreeWindow,
    aff_bracket,
    build_affine,
    is_positive_root,
    root_space,
    roots_window,
    sl2_triple,
)
from .exact import Poly, invert, kernel, solve_unique
from .finlie import LieElt, build_simple

_Z = Fraction(0)
_ONE = Fraction(1)


class IncompatibleData(ValueError):
    """Input data does not satisfy a structural compatibility condition."""


# ----------------------------------------------------------- sparse vectors


def _acc(out, vec, c=_ONE):
    for key, v in vec.items():
        w = out.get(key, _Z) + v * c
        if w:
            out[key] = w
        else:
            out.pop(key, None)
    return out


def _scaled(vec, c):
    if not c:
        return {}
    return {key: v * c for key, v in vec.items()}


# ----------------------------------------------------------- graded modules


@dataclass
class GradedModule:
    """Finite-basis weight module with tabulated generator actions.

    kind is "fin" (module over a SimpleLieAlgebra) or "aff" (module over an
    AffineAlgebra).  Generators are keyed ("fin", name) for kind "fin" and
    ("t", label, m), "D", "K" for kind "aff".  action maps (gen, label) to a
    sparse vector over labels.  boundary is the truncation mask: the set of
    labels whose tabulated action lost at least one term to the window.
    """

    algebra: object
    kind: str
    window: object
    weight_of: dict
    action: dict
    boundary: set
    k_value: Fraction
    gens: list
    gen_disp: dict

    @cached_property
    def weights(self):
        out = {}
        for lab, w in self.weight_of.items():
            out.setdefault(w, []).append(lab)
        for labs in out.values():
            labs.sort()
        return out

    def labels(self):
        return list(self.weight_of)

    def weight(self, lab):
        return self.weight_of[lab]

    def apply_gen(self, gen, vec):
        out = {}
        for lab, c in vec.items():
            try:
                row = self.action[(gen, lab)]
            except KeyError:
                raise ValueError(f"generator {gen!r} is not tabulated")
            _acc(out, row, c)
        return out

    def apply_elt(self, elt, vec):
        out = {}
        if self.kind == "fin":
            for name, c in elt.c.items():
                _acc(out, self.apply_gen(("fin", name), vec), c)
            return out
        for (lab, m), c in elt.c.items():
            _acc(out, self.apply_gen(("t", lab, m), vec), c)
        if elt.d:
            _acc(out, self.apply_gen("D", vec), elt.d)
        if elt.k:
            _acc(out, _scaled(vec, self.k_value), elt.k)
        return out

    def multiplicity_table(self):
        return {w: len(labs) for w, labs in self.weights.items()}

    def support_sorted(self):
        return sorted(self.weights, key=lambda w: (w.fin, w.d, w.k))


# ------------------------------------------------------- structural checks


def _clean_labels(M, gen):
    out = set()
    for lab in M.weight_of:
        if lab in M.boundary:
            continue
        if all(t not in M.boundary for t in M.action[(gen, lab)]):
            out.add(lab)
    return out


def check_bracket_compat(M, max_report=10):
    """Exact [X,Y].v = X.(Y.v) - Y.(X.v) on the two-step interior.

    Affine generator pairs whose bracket involves an untabulated generator
    are skipped; everything else is compared exactly.  Returns a list of
    violations, empty when the identity holds.
    """
    gens = [g for g in M.gens]
    clean = {g: _clean_labels(M, g) for g in gens}
    tgens = {g[1:] for g in gens if isinstance(g, tuple) and g[0] == "t"}

    def elt_of(g):
        if M.kind == "fin":
            return LieElt({g[1]: _ONE})
        if g == "D":
            return AffElt(d=1)
        if g == "K":
            return AffElt(k=1)
        return AffElt({(g[1], g[2]): _ONE})

    bad = []
    for i, X in enumerate(gens):
        for Y in gens[i + 1 :]:
            if M.kind == "fin":
                br = M.algebra.bracket(elt_of(X), elt_of(Y))
            else:
                br = aff_bracket(M.algebra, elt_of(X), elt_of(Y))
                if any(key not in tgens for key in br.c):
                    continue
            for lab in clean[X] & clean[Y]:
                v = {lab: _ONE}
                lhs = M.apply_elt(br, v)
                rhs = _acc(
                    M.apply_gen(X, M.apply_gen(Y, v)),
                    M.apply_gen(Y, M.apply_gen(X, v)),
                    -_ONE,
                )
                if lhs != rhs:
                    bad.append((X, Y, lab))
                    if len(bad) >= max_report:
                        return bad
    return bad


def check_weight_additivity(M, max_report=10):
    bad = []
    for (gen, lab), vec in M.action.items():
        expect = M.weight_of[lab] + M.gen_disp[gen]
        for tgt in vec:
            if M.weight_of[tgt] != expect:
                bad.append((gen, lab, tgt))
                if len(bad) >= max_report:
                    return bad
    return bad


def check_level(M, max_report=10):
    if M.kind != "aff":
        return []
    bad = []
    for lab in M.weight_of:
        got = M.action[("K", lab)]
        if got != _scaled({lab: _ONE}, M.k_value):
            bad.append(lab)
            if len(bad) >= max_report:
                return bad
    return bad


# ------------------------------------------------------------ sl2 families


@dataclass(frozen=True)
class DenseSL2Params:
    b: Fraction
    c: Fraction


def dense_sl2(params, window):
    """Dense weight line over sl2: h-spectrum b + 2Z, all multiplicities 1.

    e w_j = mu_j w_{j+1} with mu_j = c - j(b + j + 1), f w_j = w_{j-1},
    h w_j = (b + 2j) w_j.  e (resp. f) is injective on the interior exactly
    where mu_j != 0 (f is injective outright).
    """
    g = build_simple("A1")
    b, c = Fraction(params.b), Fraction(params.c)
    labels = [("w", j) for j in window]
    weight_of = {("w", j): AffWeight((b + 2 * j,), _Z, _Z) for j in window}
    action, boundary = {}, set()
    for j in window:
        lab = ("w", j)
        mu = c - j * (b + j + 1)
        if j + 1 in window:
            action[(("fin", "E12"), lab)] = {("w", j + 1): mu} if mu else {}
        else:
            action[(("fin", "E12"), lab)] = {}
            boundary.add(lab)
        if j - 1 in window:
            action[(("fin", "E21"), lab)] = {("w", j - 1): _ONE}
        else:
            action[(("fin", "E21"), lab)] = {}
            boundary.add(lab)
        action[(("fin", "H1"), lab)] = {lab: b + 2 * j}
    gens = [("fin", n) for n in g.basis]
    gen_disp = {("fin", n): AffWeight(g.weight_of[n], _Z, _Z) for n in g.basis}
    return GradedModule(g, "fin", window, weight_of, action, boundary, _Z, gens, gen_disp)


def finite_dim_sl2(m):
    """The (m+1)-dimensional simple sl2 module; exact, no truncation."""
    g = build_simple("A1")
    weight_of = {("u", i): AffWeight((Fraction(m - 2 * i),), _Z, _Z) for i in range(m + 1)}
    action = {}
    for i in range(m + 1):
        lab = ("u", i)
        action[(("fin", "E12"), lab)] = {("u", i - 1): Fraction(i * (m - i + 1))} if i else {}
        action[(("fin", "E21"), lab)] = {("u", i + 1): _ONE} if i < m else {}
        action[(("fin", "H1"), lab)] = {lab: Fraction(m - 2 * i)}
    gens = [("fin", n) for n in g.basis]
    gen_disp = {("fin", n): AffWeight(g.weight_of[n], _Z, _Z) for n in g.basis}
    return GradedModule(g, "fin", None, weight_of, action, set(), _Z, gens, gen_disp)


def natural_rep(g):
    """Defining matrix representation, read off from the stored matrices."""
    dim = len(next(iter(g.mats.values())))
    cart = [g.mats[h] for h in g.cartan]
    weight_of = {
        ("x", i): AffWeight(tuple(Fraction(h[i][i]) for h in cart), _Z, _Z)
        for i in range(dim)
    }
    action = {}
    for name in g.basis:
        mat = g.mats[name]
        for j in range(dim):
            vec = {}
            for i in range(dim):
                if mat[i][j]:
                    vec[("x", i)] = Fraction(mat[i][j])
            action[(("fin", name), ("x", j))] = vec
    gens = [("fin", n) for n in g.basis]
    gen_disp = {("fin", n): AffWeight(g.weight_of[n], _Z, _Z) for n in g.basis}
    return GradedModule(g, "fin", None, weight_of, action, set(), _Z, gens, gen_disp)


def adjoint_rep(g):
    weight_of = {("a", n): AffWeight(g.weight_of[n], _Z, _Z) for n in g.basis}
    action = {}
    for x in g.basis:
        for y in g.basis:
            br = g.bracket(LieElt({x: _ONE}), LieElt({y: _ONE}))
            action[(("fin", x), ("a", y))] = {("a", n): c for n, c in br.c.items()}
    gens = [("fin", n) for n in g.basis]
    gen_disp = {("fin", n): AffWeight(g.weight_of[n], _Z, _Z) for n in g.basis}
    return GradedModule(g, "fin", None, weight_of, action, set(), _Z, gens, gen_disp)


def tensor_product(M1, M2):
    """Tensor product of two "fin" modules over the same algebra."""
    if M1.kind != "fin" or M2.kind != "fin":
        raise ValueError("tensor_product expects finite-algebra modules")
    g = M1.algebra
    if M2.algebra is not g and M2.algebra.label != g.label:
        raise ValueError("factors live over different algebras")
    weight_of = {}
    for l1 in M1.weight_of:
        for l2 in M2.weight_of:
            weight_of[(l1, l2)] = M1.weight_of[l1] + M2.weight_of[l2]
    action = {}
    boundary = set()
    for (l1, l2) in weight_of:
        if l1 in M1.boundary or l2 in M2.boundary:
            boundary.add((l1, l2))
        for name in g.basis:
            vec = {}
            for t1, c in M1.action[(("fin", name), l1)].items():
                vec[(t1, l2)] = c
            for t2, c in M2.action[(("fin", name), l2)].items():
                _acc(vec, {(l1, t2): c})
            action[(("fin", name), (l1, l2))] = vec
    gens = [("fin", n) for n in g.basis]
    gen_disp = {("fin", n): AffWeight(g.weight_of[n], _Z, _Z) for n in g.basis}
    return GradedModule(
        g, "fin", None, weight_of, action, boundary, M1.k_value + M2.k_value, gens, gen_disp
    )


# ------------------------------------------------------------ loop modules


def loop_module(A, factors, scalars, window, gen_window=2):
    """Loop module on a tensor product of evaluation factors.

    (X t^n) acts on (v_1 x ... x v_k) t^s as sum_i a_i^n (... X v_i ...)
    t^{n+s}; D reads the loop degree s and K acts by zero.  Scalars must be
    nonzero.  For a twisted algebra use twisted_loop_fixed_points, which
    enforces the pairing condition on factors and scalars.
    """
    if A.s != 1:
        raise ValueError("loop_module is for untwisted algebras")
    if len(factors) != len(scalars) or not factors:
        raise ValueError("need matching nonempty factors and scalars")
    scalars = [Fraction(a) for a in scalars]
    if any(a == 0 for a in scalars):
        raise ValueError("evaluation points must be nonzero")
    g = A.g
    for Fm in factors:
        if Fm.kind != "fin":
            raise ValueError("loop factors must be finite-algebra modules")

    tlabels = list(itertools.product(*[list(Fm.weight_of) for Fm in factors]))
    weight_of, action, boundary = {}, {}, set()
    for tlab in tlabels:
        fins = [factors[i].weight_of[tlab[i]].fin for i in range(len(factors))]
        fin = tuple(sum(col) for col in zip(*fins))
        taint0 = any(tlab[i] in factors[i].boundary for i in range(len(factors)))
        for s in window:
            lab = (tlab, s)
            weight_of[lab] = AffWeight(fin, Fraction(s), _Z)
            if taint0:
                boundary.add(lab)

    gens = []
    for m in range(-gen_window, gen_window + 1):
        gens.extend(("t", name, m) for name in g.basis)
    gens += ["D", "K"]
    gen_disp = {}
    for gk in gens:
        if gk in ("D", "K"):
            gen_disp[gk] = AffWeight(tuple([_Z] * A.fin_rank), _Z, _Z)
        else:
            gen_disp[gk] = AffWeight(A.fin_weight(gk[2], gk[1]), Fraction(gk[2]), _Z)

    for (tlab, s) in weight_of:
        lab = (tlab, s)
        action[("D", lab)] = {lab: Fraction(s)} if s else {}
        action[("K", lab)] = {}
        for m in range(-gen_window, gen_window + 1):
            for name in g.basis:
                if s + m not in window:
                    action[(("t", name, m), lab)] = {}
                    boundary.add(lab)
                    continue
                vec = {}
                for i, Fm in enumerate(factors):
                    an = scalars[i] ** m
                    for tgt, c in Fm.action[(("fin", name), tlab[i])].items():
                        nl = (tlab[:i] + (tgt,) + tlab[i + 1 :], s + m)
                        _acc(vec, {nl: c * an})
                action[(("t", name, m), lab)] = vec
    return GradedModule(A, "aff", window, weight_of, action, boundary, _Z, gens, gen_disp)


# ------------------------------------------------- twisted loop fixed points


def sigma_intertwiner(g, aut, M):
    """Involutive T with T(X.v) = aut(X).(T v), normalised to T^2 = 1.

    Solves the intertwining equations exactly; raises IncompatibleData when
    no nonzero solution exists or when no rational rescaling makes the
    solution an involution.
    """
    labs = sorted(M.weight_of)
    n = len(labs)
    idx = {l: i for i, l in enumerate(labs)}

    def rep(name):
        mat = [[_Z] * n for _ in range(n)]
        for j, l in enumerate(labs):
            for tgt, c in M.action[(("fin", name), l)].items():
                mat[idx[tgt]][j] = c
        return mat

    rows = []
    for name in g.basis:
        rx = rep(name)
        sig = aut.apply(LieElt({name: _ONE}))
        rs = [[_Z] * n for _ in range(n)]
        for nm, c in sig.c.items():
            rn = rep(nm)
            for i in range(n):
                for j in range(n):
                    if rn[i][j]:
                        rs[i][j] += c * rn[i][j]
        # equation (i, j): sum_k T[i][k] rx[k][j] - rs[i][k] T[k][j] = 0
        for i in range(n):
            for j in range(n):
                row = [_Z] * (n * n)
                for k in range(n):
                    if rx[k][j]:
                        row[i * n + k] += rx[k][j]
                    if rs[i][k]:
                        row[k * n + j] -= rs[i][k]
                if any(row):
                    rows.append(row)
    sols = kernel(rows)
    if not sols:
        raise IncompatibleData("no intertwiner onto the twisted structure")
    T = [sols[0][i * n : (i + 1) * n] for i in range(n)]
    # T^2 must be scalar; rescale by a rational square root to reach T^2 = 1
    sq = [
        [sum(T[i][k] * T[k][j] for k in range(n)) for j in range(n)]
        for i in range(n)
    ]
    c = sq[0][0]
    if any(sq[i][j] != (c if i == j else 0) for i in range(n) for j in range(n)):
        raise IncompatibleData("intertwiner does not square to a scalar")
    if c == 0:
        raise IncompatibleData("intertwiner is not invertible")
    num, den = c.numerator, c.denominator
    if num < 0:
        raise IncompatibleData("intertwiner squares to a negative scalar")
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn != num or rd * rd != den:
        raise IncompatibleData("no rational normalisation to an involution")
    s = Fraction(rn, rd)
    T = [[v / s for v in row] for row in T]
    first = next(v for row in T for v in row if v)
    if first < 0:
        T = [[-v for v in row] for row in T]
    return {labs[j]: {labs[i]: T[i][j] for i in range(n) if T[i][j]} for j in range(n)}


def twisted_loop_fixed_points(At, factors, scalars, window, gen_window=2, return_involution=False):
    """Fixed points of the order-2 loop involution on a paired tensor module.

    Factors must be two copies of one module and the evaluation scalars an
    opposite pair (a, -a); the involution swaps the slots through the
    diagram intertwiner.  Because the slot scalars already differ by the
    sign of the twist, this involution commutes with every generator of the
    twisted algebra with no extra grade factor, so its fixed subspace is a
    module over the twisted algebra, graded by loop degree.
    """
    if At.s != 2:
        raise ValueError("expected a twisted affine algebra")
    if len(factors) != 2 or len(scalars) != 2:
        raise IncompatibleData("twisted pairing needs exactly two factors")
    V, V2 = factors
    a, b = Fraction(scalars[0]), Fraction(scalars[1])
    if a == 0 or b != -a:
        raise IncompatibleData("evaluation scalars must form an opposite pair")
    if (
        V2.weight_of != V.weight_of
        or V2.action != V.action
        or V.kind != "fin"
        or V2.kind != "fin"
    ):
        raise IncompatibleData("factors must be two copies of one module")
    g = At.g
    T = sigma_intertwiner(g, At.aut, V)

    vlabs = sorted(V.weight_of)
    pairs = [(l1, l2) for l1 in vlabs for l2 in vlabs]
    pidx = {p: i for i, p in enumerate(pairs)}
    n = len(pairs)
    S = [[_Z] * n for _ in range(n)]
    for j, (l1, l2) in enumerate(pairs):
        for m1, c1 in T[l2].items():
            for m2, c2 in T[l1].items():
                S[pidx[(m1, m2)]][j] = c1 * c2
    for i in range(n):
        for j in range(n):
            v = sum(S[i][k] * S[k][j] for k in range(n))
            if v != (1 if i == j else 0):
                raise IncompatibleData("loop involution failed to square to one")

    eye = [[_ONE if i == j else _Z for j in range(n)] for i in range(n)]
    plus = kernel([[S[i][j] - eye[i][j] for j in range(n)] for i in range(n)])
    minus = kernel([[S[i][j] + eye[i][j] for j in range(n)] for i in range(n)])
    basis = plus + minus
    C = [[basis[j][i] for j in range(n)] for i in range(n)]
    Cinv = invert(C)
    if Cinv is None:
        raise IncompatibleData("eigenspaces do not span the tensor square")

    def expand(vec):
        """Coordinates of a pair-indexed vector in the fixed eigenbasis."""
        coords = []
        for i in range(n):
            coords.append(sum(Cinv[i][pidx[p]] * c for p, c in vec.items()))
        for i in range(len(plus), n):
            if coords[i]:
                raise IncompatibleData("action left the fixed subspace")
        return coords[: len(plus)]

    # hbeta eigenvalues give the finite weight coordinates
    def pair_fin(p):
        out = []
        for h in At.tw_coroots:
            tot = _Z
            for l in p:
                res = V.apply_elt(h, {l: _ONE})
                if set(res) - {l}:
                    raise IncompatibleData("coroot action is not diagonal")
                tot += res.get(l, _Z)
            out.append(tot)
        return tuple(out)

    weight_of, combos, boundary = {}, {}, set()
    for s in window:
        for i, v in enumerate(plus):
            lab = ("s", s, i)
            combo = {pairs[j]: v[j] for j in range(n) if v[j]}
            fins = {pair_fin(p) for p in combo}
            if len(fins) != 1:
                raise IncompatibleData("eigenvector mixes finite weights")
            combos[lab] = combo
            weight_of[lab] = AffWeight(fins.pop(), Fraction(s), _Z)
            if any(l1 in V.boundary or l2 in V.boundary for (l1, l2) in combo):
                boundary.add(lab)

    gens = []
    for m in range(-gen_window, gen_window + 1):
        gens.extend(("t", cl, m) for cl in At.class_labels(m))
    gens += ["D", "K"]
    gen_disp = {}
    for gk in gens:
        if gk in ("D", "K"):
            gen_disp[gk] = AffWeight(tuple([_Z] * At.fin_rank), _Z, _Z)
        else:
            gen_disp[gk] = AffWeight(At.fin_weight(gk[2], gk[1]), Fraction(gk[2]), _Z)

    by_grade_index = {}
    for lab in weight_of:
        by_grade_index.setdefault(lab[1], []).append(lab)

    action = {}
    for lab, combo in combos.items():
        _, s, _ = lab
        action[("D", lab)] = {lab: Fraction(s)} if s else {}
        action[("K", lab)] = {}
        for gk in gens:
            if gk in ("D", "K"):
                continue
            _, cl, m = gk
            if s + m not in window:
                action[(gk, lab)] = {}
                boundary.add(lab)
                continue
            u = At.label_elt(m, cl)
            out_pairs = {}
            for (l1, l2), c in combo.items():
                r1 = V.apply_elt(u, {l1: _ONE})
                for t1, c1 in r1.items():
                    _acc(out_pairs, {(t1, l2): c * c1 * a**m})
                r2 = V.apply_elt(u, {l2: _ONE})
                for t2, c2 in r2.items():
                    _acc(out_pairs, {(l1, t2): c * c2 * (-a) ** m})
            coords = expand(out_pairs)
            vec = {}
            for i, tl in enumerate(sorted(by_grade_index.get(s + m, []))):
                if coords[tl[2]]:
                    vec[tl] = coords[tl[2]]
            action[(gk, lab)] = vec
    M = GradedModule(At, "aff", window, weight_of, action, boundary, _Z, gens, gen_disp)
    M.combos = combos
    if return_involution:
        return M, S
    return M


# ------------------------------------------------------- imaginary Verma


def imaginary_verma(lam, depth, length_cap, mode_cap=None, gen_window=2, algebra=None):
    """Truncated imaginary Verma module over the affine sl2.

    The vacuum is killed by every e t^n and by h t^n for n != 0, carries
    h-eigenvalue lam, degree 0 and level 0.  The basis consists of ordered
    monomials in the f t^k (all k), recorded as tuples of (mode, power).
    Three caps truncate: |degree| <= depth, total length <= length_cap,
    |mode| <= mode_cap (default depth).  Actions follow from the relations
    [e_m, f_k] = h_{m+k} (+ central term), [h_p, f_k] = -2 f_{p+k}:

      f_m: insert a mode-m factor
      h_m (m != 0): sum_k (-2 n_k) (replace one f_k by f_{k+m})
      h_0: lam - 2 L, D: degree, K: 0
      e_m: sum over unordered occurrence pairs {a, b}:
             -2 (drop f_{k_a}, f_{k_b}; insert f_{m+k_a+k_b})
           plus lam n_{-m} (drop one f_{-m})
    """
    lam = Fraction(lam)
    if mode_cap is None:
        mode_cap = depth
    A = algebra or build_affine(build_simple("A1"))

    modes = list(range(-mode_cap, mode_cap + 1))
    mons = []

    def rec(i, cur, length):
        if i == len(modes):
            grade = sum(k * nk for k, nk in cur)
            if abs(grade) <= depth:
                mons.append(tuple(cur))
            return
        k = modes[i]
        rec(i + 1, cur, length)
        for nk in range(1, length_cap - length + 1):
            cur.append((k, nk))
            rec(i + 1, cur, length + nk)
            cur.pop()

    rec(0, [], 0)
    basis = {("m", mon) for mon in mons}

    def grade_of(mon):
        return sum(k * nk for k, nk in mon)

    def length_of(mon):
        return sum(nk for _, nk in mon)

    def bump(mon, k, delta):
        """mon with the multiplicity of mode k changed by delta, or None."""
        d = dict(mon)
        d[k] = d.get(k, 0) + delta
        if d[k] < 0:
            return None
        return tuple(sorted((m, n) for m, n in d.items() if n))

    weight_of = {
        ("m", mon): AffWeight((lam - 2 * length_of(mon),), Fraction(grade_of(mon)), _Z)
        for mon in mons
    }
    action, boundary = {}, set()

    def put(vec, mon, coeff, drops):
        if ("m", mon) in basis:
            _acc(vec, {("m", mon): coeff})
        else:
            drops.append(mon)

    for mon in mons:
        lab = ("m", mon)
        L = length_of(mon)
        action[("D", lab)] = {lab: Fraction(grade_of(mon))} if grade_of(mon) else {}
        action[("K", lab)] = {}
        drops = []
        for m in range(-gen_window, gen_window + 1):
            # f_m inserts a factor
            vec = {}
            nm = bump(mon, m, +1)
            put(vec, nm, _ONE, drops)
            action[(("t", "E21", m), lab)] = vec
            # h_m
            if m == 0:
                action[(("t", "H1", 0), lab)] = {lab: lam - 2 * L} if lam != 2 * L else {}
            else:
                vec = {}
                for k, nk in mon:
                    nm = bump(bump(mon, k, -1), k + m, +1)
                    put(vec, nm, Fraction(-2 * nk), drops)
                action[(("t", "H1", m), lab)] = vec
            # e_m
            vec = {}
            occ = dict(mon)
            if occ.get(-m, 0) and lam:
                nm = bump(mon, -m, -1)
                put(vec, nm, lam * occ[-m], drops)
            ks = sorted(occ)
            for ai in range(len(ks)):
                for bi in range(ai, len(ks)):
                    ka, kb = ks[ai], ks[bi]
                    if ai == bi:
                        cnt = occ[ka] * (occ[ka] - 1) // 2
                    else:
                        cnt = occ[ka] * occ[kb]
                    if not cnt:
                        continue
                    nm = bump(bump(bump(mon, ka, -1), kb, -1), m + ka + kb, +1)
                    put(vec, nm, Fraction(-2 * cnt), drops)
            action[(("t", "E12", m), lab)] = vec
        if drops:
            boundary.add(lab)

    gens = []
    for m in range(-gen_window, gen_window + 1):
        gens.extend((("t", "E12", m), ("t", "E21", m), ("t", "H1", m)))
    gens += ["D", "K"]
    gen_disp = {}
    for gk in gens:
        if gk in ("D", "K"):
            gen_disp[gk] = AffWeight((_Z,), _Z, _Z)
        else:
            gen_disp[gk] = AffWeight(A.fin_weight(gk[2], gk[1]), Fraction(gk[2]), _Z)
    window = DegreeWindow(-depth, depth)
    M = GradedModule(A, "aff", window, weight_of, action, boundary, _Z, gens, gen_disp)
    # construction data, kept so a localization can rebuild the same truncation
    M.verma_data = dict(
        lam=lam, depth=depth, length_cap=length_cap, mode_cap=mode_cap,
        gen_window=gen_window, algebra=A,
    )
    return M


# ----------------------------------------------------- parabolic induction


def _cartan_value(A, x, fin):
    """Value of a degree-zero Cartan element on a weight with coordinates fin."""
    carts = A.cartan_labels(0)
    cols = []
    for h in A.tw_coroots:
        cols.append([h.c.get(lab, _Z) for lab in carts])
    vec = [_Z] * len(carts)
    for (lab, m), c in x.c.items():
        if m != 0 or lab not in carts:
            raise ValueError("not a degree-zero Cartan element")
        vec[carts.index(lab)] += c
    mat = [[cols[j][i] for j in range(len(cols))] for i in range(len(carts))]
    coeffs = solve_unique(mat, vec)
    if coeffs is None:
        raise ValueError("element is not in the coroot span")
    return sum(cf * fv for cf, fv in zip(coeffs, fin))


def levi_dense_module(P, params, jwindow, base_fin, base_d=0):
    """Dense sl2 module over the Levi of a standard parabolic.

    The Levi must have exactly one positive real root gamma; the module is
    the dense line for its sl2 triple, extended to the full degree-zero
    Cartan by the weight string base_fin + j gamma.  base_fin must evaluate
    to params.b on the coroot of gamma.
    """
    A = P.algebra
    real_levi = [k for k in P.levi_keys() if any(c for c in k[0])]
    if len(real_levi) != 2:
        raise ValueError("levi_dense_module needs an sl2 Levi")
    pos = [k for k in real_levi if is_positive_root(A, k[0], k[1])]
    if len(pos) != 1:
        raise ValueError("degenerate Levi root data")
    gfin, gn = pos[0]
    root = AffRoot("real", gfin, gn)
    e, f, h = sl2_triple(A, root)
    b, c = Fraction(params.b), Fraction(params.c)
    base_fin = tuple(Fraction(v) for v in base_fin)
    if _cartan_value(A, AffElt({k: v for k, v in h.c.items()}), base_fin) != b:
        raise ValueError("base_fin disagrees with b on the Levi coroot")

    weight_of = {}
    for j in jwindow:
        fin = tuple(bf + j * gc for bf, gc in zip(base_fin, gfin))
        weight_of[("w", j)] = AffWeight(fin, Fraction(base_d + j * gn), _Z)

    ((ekey, ec),) = e.c.items()
    ((fkey, fc),) = f.c.items()
    action, boundary = {}, set()
    carts = A.cartan_labels(0)
    for j in jwindow:
        lab = ("w", j)
        mu = c - j * (b + j + 1)
        if j + 1 in jwindow:
            action[(("t", ekey[0], ekey[1]), lab)] = (
                {("w", j + 1): mu / ec} if mu else {}
            )
        else:
            action[(("t", ekey[0], ekey[1]), lab)] = {}
            boundary.add(lab)
        if j - 1 in jwindow:
            action[(("t", fkey[0], fkey[1]), lab)] = {("w", j - 1): _ONE / fc}
        else:
            action[(("t", fkey[0], fkey[1]), lab)] = {}
            boundary.add(lab)
        for hl in carts:
            val = _cartan_value(A, AffElt({(hl, 0): _ONE}), weight_of[lab].fin)
            action[(("t", hl, 0), lab)] = {lab: val} if val else {}
        action[("D", lab)] = (
            {lab: weight_of[lab].d} if weight_of[lab].d else {}
        )
        action[("K", lab)] = {}

    gens = [("t", ekey[0], ekey[1]), ("t", fkey[0], fkey[1])]
    gens += [("t", hl, 0) for hl in carts] + ["D", "K"]
    gen_disp = {}
    for gk in gens:
        if gk in ("D", "K"):
            gen_disp[gk] = AffWeight(tuple([_Z] * A.fin_rank), _Z, _Z)
        else:
            gen_disp[gk] = AffWeight(A.fin_weight(gk[2], gk[1]), Fraction(gk[2]), _Z)
    return GradedModule(A, "aff", jwindow, weight_of, action, boundary, _Z, gens, gen_disp)


def induced_truncated(P, N, depth, gen_window=None):
    """Parabolically induced module, truncated at monomial length depth.

    P must be standard with a defining flag.  The coefficient module N is a
    module for the Levi generators (both Levi root directions, the full
    degree-zero Cartan, D and K).  The negative radical supplies the letter
    alphabet; the basis is (nondecreasing letter monomial, N-label) and the
    action is computed by pushing generators through monomials with exact
    brackets.  N must be supported in a single coset of the Levi root
    lattice.
    """
    from .rootpar import classify_parabolic

    A = P.algebra
    if classify_parabolic(P) != "standard":
        raise ValueError("induction here needs a standard parabolic")
    if gen_window is None:
        gen_window = max(abs(P.window.nmin), abs(P.window.nmax))

    def member(fin, n):
        return P.member(fin, n)

    letters = []
    for r in P.roots:
        key = (r.fin, r.n)
        neg = (tuple(-c for c in r.fin), -r.n)
        if not member(*key) and member(*neg):
            letters.extend(root_space(A, r))
    letters.sort(key=lambda t: (t[1], t[0]))
    lset = set(letters)
    lorder = {l: i for i, l in enumerate(letters)}

    levi_cols = []
    for k in P.levi_keys():
        if any(c for c in k[0]) or k[1] != 0:
            levi_cols.append(list(k[0]) + [Fraction(k[1])])
    nlabs = list(N.weight_of)
    w0 = N.weight_of[nlabs[0]]
    for nl in nlabs[1:]:
        w = N.weight_of[nl]
        dvec = [a - c for a, c in zip(w.fin, w0.fin)] + [w.d - w0.d]
        if levi_cols:
            mat = [[col[i] for col in levi_cols] for i in range(len(dvec))]
            if _no_solution(mat, dvec):
                raise ValueError("N is supported on several Levi root lattice cosets")
        elif any(dvec):
            raise ValueError("N is supported on several Levi root lattice cosets")

    def disp(key):
        return AffWeight(A.fin_weight(key[1], key[0]), Fraction(key[1]), _Z)

    def classify(lab, m):
        fin = A.fin_weight(m, lab)
        if not any(fin) and m == 0:
            return "levi"
        key_in = member(fin, m)
        neg_in = member(tuple(-c for c in fin), -m)
        if key_in and neg_in:
            return "levi"
        if key_in:
            return "nplus"
        return "letter"

    mons = [()]
    for r in range(1, depth + 1):
        mons.extend(itertools.combinations_with_replacement(letters, r))
    weight_of = {}
    for mon in mons:
        wl = AffWeight(tuple([_Z] * A.fin_rank), _Z, _Z)
        for l in mon:
            wl = wl + disp(l)
        for nl in nlabs:
            weight_of[(mon, nl)] = wl + N.weight_of[nl]

    cache_act, cache_ins = {}, {}

    def insert_letter(l, mon, nl):
        key = (l, mon, nl)
        if key in cache_ins:
            return cache_ins[key]
        if len(mon) >= depth:
            res = ({}, True)
        elif not mon or lorder[l] <= lorder[mon[0]]:
            res = ({((l,) + mon, nl): _ONE}, False)
        else:
            l1 = mon[0]
            out, taint = {}, False
            sub, t1 = insert_letter(l, mon[1:], nl)
            taint |= t1
            for (mon2, nl2), c in sub.items():
                v2, t2 = insert_letter(l1, mon2, nl2)
                taint |= t2
                _acc(out, v2, c)
            br = aff_bracket(A, AffElt({l: _ONE}), AffElt({l1: _ONE}))
            v3, t3 = act_elt(br, mon[1:], nl)
            taint |= t3
            _acc(out, v3)
            res = (out, taint)
        cache_ins[key] = res
        return res

    def act_key(lab, m, mon, nl):
        key = (lab, m, mon, nl)
        if key in cache_act:
            return cache_act[key]
        cls = classify(lab, m)
        if cls == "letter":
            if (lab, m) in lset:
                res = insert_letter((lab, m), mon, nl)
            else:
                res = ({}, True)  # letter root outside the stored window
        elif not mon:
            if cls == "nplus":
                res = ({}, False)
            else:
                gk = ("t", lab, m)
                if (gk, nl) not in N.action:
                    raise ValueError(f"Levi generator {gk!r} is not tabulated in N")
                vec = {((), t): c for t, c in N.action[(gk, nl)].items()}
                res = (vec, nl in N.boundary)
        else:
            l1 = mon[0]
            out, taint = {}, False
            sub, t1 = act_key(lab, m, mon[1:], nl)
            taint |= t1
            for (mon2, nl2), c in sub.items():
                v2, t2 = insert_letter(l1, mon2, nl2)
                taint |= t2
                _acc(out, v2, c)
            br = aff_bracket(A, AffElt({(lab, m): _ONE}), AffElt({l1: _ONE}))
            v3, t3 = act_elt(br, mon[1:], nl)
            taint |= t3
            _acc(out, v3)
            res = (out, taint)
        cache_act[key] = res
        return res

    def act_elt(x, mon, nl):
        out, taint = {}, False
        for (lab, m), c in x.c.items():
            v, t = act_key(lab, m, mon, nl)
            taint |= t
            _acc(out, v, c)
        if x.d:
            w = weight_of.get((mon, nl))
            if w is None:
                w = AffWeight(tuple([_Z] * A.fin_rank), _Z, _Z)
                for l in mon:
                    w = w + disp(l)
                w = w + N.weight_of[nl]
            if w.d:
                _acc(out, {(mon, nl): w.d}, x.d)
        if x.k and N.k_value:
            _acc(out, {(mon, nl): N.k_value}, x.k)
        return out, taint

    gens = []
    for m in range(-gen_window, gen_window + 1):
        gens.extend(("t", lab, m) for lab in A.class_labels(m))
    gens += ["D", "K"]
    gen_disp = {}
    for gk in gens:
        if gk in ("D", "K"):
            gen_disp[gk] = AffWeight(tuple([_Z] * A.fin_rank), _Z, _Z)
        else:
            gen_disp[gk] = AffWeight(A.fin_weight(gk[2], gk[1]), Fraction(gk[2]), _Z)

    action, boundary = {}, set()
    for (mon, nl) in weight_of:
        lab = (mon, nl)
        w = weight_of[lab]
        action[("D", lab)] = {lab: w.d} if w.d else {}
        action[("K", lab)] = _scaled({lab: _ONE}, N.k_value)
        if nl in N.boundary:
            boundary.add(lab)
        for gk in gens:
            if gk in ("D", "K"):
                continue
            vec, taint = act_key(gk[1], gk[2], mon, nl)
            action[(gk, lab)] = dict(vec)
            if taint:
                boundary.add(lab)
    M = GradedModule(
        A, "aff", P.window, weight_of, action, boundary, N.k_value, gens, gen_disp
    )
    M.letters = letters
    return M


def _no_solution(mat, vec):
    from .exact import solve_any

    return solve_any(mat, vec) is None


# ------------------------------------------------ degree-pairing matrices


def prop42_matrix(n, lam):
    """Pairing matrix ((h_k h_{n-k}) . (e_{-l} f_{l-n}) vacuum coefficient).

    The vacuum is a level-zero highest weight vector: e t^m (m >= 0),
    f t^m (m > 0) and h t^m (m > 0) kill it, h_0 reads lam, K reads 0.
    Words are normal ordered by moving the rightmost annihilating or
    diagonal letter to the right with exact bracket corrections.  The
    (lam, 0) weight space is spanned by the vacuum alone, so the scalar
    is the full image.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    lam = Fraction(lam)
    memo = {}

    def creates(sym, m):
        return (sym == "e" and m < 0) or (sym == "f" and m <= 0) or (sym == "h" and m < 0)

    def bracket(a, b):
        (sa, ma), (sb, mb) = a, b
        if sa == "K" or sb == "K":
            return []
        if sa == "e" and sb == "f":
            out = [(("h", ma + mb), _ONE)]
            if ma + mb == 0 and ma:
                out.append((("K", 0), Fraction(ma)))
            return out
        if sa == "f" and sb == "e":
            return [(g, -c) for g, c in bracket(b, a)]
        if sa == "h" and sb == "e":
            return [(("e", ma + mb), Fraction(2))]
        if sa == "e" and sb == "h":
            return [(("e", ma + mb), Fraction(-2))]
        if sa == "h" and sb == "f":
            return [(("f", ma + mb), Fraction(-2))]
        if sa == "f" and sb == "h":
            return [(("f", ma + mb), Fraction(2))]
        if sa == "h" and sb == "h":
            return [(("K", 0), Fraction(2 * ma))] if ma + mb == 0 and ma else []
        return []

    def val(word):
        if not word:
            return _ONE
        if word in memo:
            return memo[word]
        sym, m = word[-1]
        if sym == "K":
            res = _Z
        elif sym == "h" and m == 0:
            res = lam * val(word[:-1])
        elif not creates(sym, m):
            res = _Z
        else:
            # trailing creation letter: move the rightmost non-creation right
            i = len(word) - 1
            while i >= 0 and creates(*word[i]):
                i -= 1
            if i < 0:
                res = _Z
            else:
                a, b = word[i], word[i + 1]
                swapped = word[:i] + (b, a) + word[i + 2 :]
                res = val(swapped)
                for g, c in bracket(a, b):
                    res += c * val(word[:i] + (g,) + word[i + 2 :])
        memo[word] = res
        return res

    out = []
    for k in range(1, n):
        row = []
        for l in range(1, n):
            word = (("h", k), ("h", n - k), ("e", -l), ("f", l - n))
            row.append(val(word))
        out.append(row)
    return out


# ------------------------------------------------------------ shadow tags


@dataclass
class ShadowReport:
    tag: str
    start: object
    steps: int


def shadow_detect(M, fin, n):
    """Classify a real root direction as f-type or i-type from the support.

    Walks every ray weight + k (fin, n) through the support.  A ray that
    dies at an unmasked weight is conclusive f-type evidence (the generator
    truly vanished there); rays that only ever die at masked weights are
    consistent with injectivity, giving i-type.
    """
    disp = AffWeight(tuple(Fraction(c) for c in fin), Fraction(n), _Z)
    supp = M.weights
    interior, edge = None, None
    for w0 in M.support_sorted():
        k = 1
        w = w0 + disp
        while w in supp and k <= len(supp) + 1:
            k += 1
            w = w + disp
        prev = w0
        for _ in range(k - 1):
            prev = prev + disp
        labs = supp[prev]
        if all(l in M.boundary for l in labs):
            if edge is None:
                edge = ShadowReport("i", w0, k - 1)
        else:
            if interior is None or k - 1 > interior.steps:
                interior = ShadowReport("f", w0, k - 1)
    if interior is not None:
        return interior
    if edge is not None:
        return edge
    return ShadowReport("inconclusive", None, 0)


def build_PM(A, table, window):
    """Parabolic set attached to a shadow table on the windowed real roots.

    When every root string through the window mixes both tags, the f-part
    must accumulate at one end of each string; membership is then tag(r)=f
    or tag(-r)=i, with the imaginary line oriented to the f-side.  When some
    string is pure, whole strings are sorted into f, i and mixed families
    and the set is (f union -i union mixed) + full imaginary line.  The
    result must pass the windowed parabolic axioms.
    """
    from .rootpar import ParabolicSet, check_parabolic_axioms

    reals = [r for r in roots_window(A, window) if r.kind == "real"]
    for r in reals:
        t = table.get((r.fin, r.n))
        if t not in ("f", "i"):
            raise ValueError(f"shadow table misses root ({r.fin}, {r.n})")

    fams = {}
    for r in reals:
        fams.setdefault(r.fin, []).append(r.n)
    kinds = {}
    for fin, ns in fams.items():
        ns.sort()
        tags = [table[(fin, n)] for n in ns]
        if all(t == "f" for t in tags):
            kinds[fin] = "pure_f"
        elif all(t == "i" for t in tags):
            kinds[fin] = "pure_i"
        else:
            up = all(
                tags[i] != "f" or tags[i + 1] == "f" for i in range(len(tags) - 1)
            )
            down = all(
                tags[i + 1] != "f" or tags[i] == "f" for i in range(len(tags) - 1)
            )
            if up and not down:
                kinds[fin] = "mix_up"
            elif down and not up:
                kinds[fin] = "mix_down"
            else:
                raise ValueError("shadow table is not convex along a root string")

    members = {}
    if all(k in ("mix_up", "mix_down") for k in kinds.values()):
        ups = {fin for fin, k in kinds.items() if k == "mix_up"}
        downs = {fin for fin, k in kinds.items() if k == "mix_down"}
        if ups and downs:
            raise ValueError("shadow table orients root strings inconsistently")
        sign = 1 if ups else -1
        for r in reals:
            neg = (tuple(-c for c in r.fin), -r.n)
            members[(r.fin, r.n)] = table[(r.fin, r.n)] == "f" or table[neg] == "i"
        for r in roots_window(A, window):
            if r.kind == "imaginary":
                members[(r.fin, r.n)] = sign * r.n > 0
    else:
        pf = {fin for fin, k in kinds.items() if k == "pure_f"}
        pi = {fin for fin, k in kinds.items() if k == "pure_i"}
        mixed = {fin for fin, k in kinds.items() if k.startswith("mix")}
        if mixed:
            raise ValueError("pure and mixed root strings cannot coexist here")
        pring = pf | {tuple(-c for c in fin) for fin in pi}
        for r in reals:
            members[(r.fin, r.n)] = r.fin in pring
        for r in roots_window(A, window):
            if r.kind == "imaginary":
                members[(r.fin, r.n)] = True

    P = ParabolicSet(A, None, window, members=members)
    if not check_parabolic_axioms(P):
        raise ValueError("shadow table does not assemble into a parabolic set")

    if all(members.values()):
        P.tag = "all"
        return P
    im_keys = [k for k in members if not any(k[0])]
    if all(members[k] for k in im_keys):
        P.tag = "imaginary"
    else:
        radical_strings = False
        for fin in fams:
            neg = tuple(-c for c in fin)
            if all(
                members[(fin, n)] and not members[(neg, -n)] for n in fams[fin]
            ):
                radical_strings = True
        P.tag = "mixed" if radical_strings else "standard"
    return P


def find_extreme_weight(M, td):
    """First support weight with no positive-root successor in the support.

    Candidates are weights carrying at least one unmasked label; masked-only
    weights sit at the truncation edge and cannot witness extremality.
    Returns None when every candidate has a successor.
    """
    disps = [AffWeight(r.fin, Fraction(r.n), _Z) for r in td.plus]
    supp = M.weights
    for w in M.support_sorted():
        if all(l in M.boundary for l in supp[w]):
            continue
        if all(w + d not in supp for d in disps):
            return w
    return None


# ------------------------------------------------------- exp-polynomials


@dataclass(frozen=True)
class ExpPolynomial:
    """Finite sum of p_{i,h}(n) lambda_i^n with distinct nonzero bases."""

    terms: tuple

    def __post_init__(self):
        seen = set()
        for lam, polys in self.terms:
            lam = Fraction(lam)
            if lam == 0:
                raise ValueError("exponential bases must be nonzero")
            if lam in seen:
                raise ValueError("exponential bases must be distinct")
            seen.add(lam)
            for h, p in polys.items():
                if not isinstance(p, Poly):
                    raise ValueError("coefficients must be polynomials")


def exp_poly_eval(L, h_index, n):
    tot = _Z
    for lam, polys in L.terms:
        p = polys.get(h_index)
        if p is not None:
            tot += p(Fraction(n)) * Fraction(lam) ** n
    return tot


def is_purely_exponential(L):
    return all(
        p.is_constant() for _, polys in L.terms for p in polys.values()
    )


# ------------------------------------------------------------- boundedness


def boundedness_probe(make_module, sizes=(3, 6, 9)):
    """Track the largest weight multiplicity across a family of windows."""
    maxima = []
    for N in sizes:
        M = make_module(N)
        mx = max(len(labs) for labs in M.weights.values())
        maxima.append(mx)
    return {
        "bounded": len(set(maxima)) == 1,
        "max_mult": list(zip(sizes, maxima)),
    }
