"""Twisted localization: conjugation series, twisted modules, inverse letters.

Oracles: the three-term lowering chain on the dense sl2 line is evaluated by
hand (ad(f)e = -h, ad(f)^2 e = -2f, ad(f)^3 e = 0), the twist parameter
quadratics are checked against their closed forms, and the loop isomorphism
is pinned by explicit multinomial expansions plus the defining property that
the honest generator undoes one formal inverse letter.
"""

from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from affinekit.exact import Poly, gen_binom
from affinekit.finlie import build_simple
from affinekit.affine import (
    AffElt,
    AffRoot,
    AffWeight,
    DegreeWindow,
    build_affine,
    sl2_triple,
)
from affinekit.rootpar import assemble_parabolic, make_flag
from affinekit.modrep import (
    DenseSL2Params,
    IncompatibleData,
    check_bracket_compat,
    check_level,
    check_weight_additivity,
    dense_sl2,
    finite_dim_sl2,
    imaginary_verma,
    levi_dense_module,
)
from affinekit.locfun import (
    BandError,
    efloc_admissible,
    efloc_product,
    efloc_quadratic,
    f_power,
    find_twist_parameter,
    induction_commutes_probe,
    localize,
    loop_loc_iso,
    loop_loc_iso_inv,
    loop_pair_act,
    make_loop_data,
    make_twist_spec,
    theta_action,
    twist_module,
)

_Z = F(0)
A1 = build_simple("A1")
A1aff = build_affine(A1)
ALPHA = AffRoot("real", (F(2),), 0)


def _dense(b, c, lo=-6, hi=6):
    return dense_sl2(DenseSL2Params(F(b), F(c)), DegreeWindow(lo, hi))


def _vac_loc(n0_ext=3, depth=2):
    M = imaginary_verma(F(3), depth=depth, length_cap=2, gen_window=1)
    return localize(M, ALPHA, n0_ext=n0_ext)


# ------------------------------------------------------------ theta series


def test_twist_spec_dense():
    M = _dense(F(1, 2), 3)
    spec = make_twist_spec(M, (F(2),), F(5, 2))
    assert spec.x == F(5, 2)
    assert spec.f_elt.c == {"E21": 1}
    assert spec.e_elt.c == {"E12": 1}
    assert spec.weight == AffWeight((F(2),), _Z, _Z)


def test_f_power_dense():
    M = _dense(F(1, 2), 3)
    spec = make_twist_spec(M, (F(2),), _Z)
    v = {("w", 0): F(1)}
    assert f_power(M, spec.f_elt, v, 2) == {("w", -2): F(1)}
    assert f_power(M, spec.f_elt, v, -2) == {("w", 2): F(1)}
    down = f_power(M, spec.f_elt, v, -3)
    assert f_power(M, spec.f_elt, down, 3) == v


def test_theta_x_zero_is_plain_action():
    M = _dense(F(1, 2), 3)
    spec = make_twist_spec(M, (F(2),), _Z)
    v = {("w", 0): F(1)}
    for name in ("E12", "E21", "H1"):
        assert theta_action(M, spec, ("fin", name), v) == M.apply_gen(
            ("fin", name), v
        )


def test_theta_integer_is_conjugation():
    # Theta_x(u) v = f^x (u (f^{-x} v)) for integer x, and the twisted module
    # rows agree with that conjugation label by label
    M = _dense(F(1, 2), 3)
    for x in (1, 2):
        spec = make_twist_spec(M, (F(2),), F(x))
        T = twist_module(M, spec)
        for j in (-2, -1, 0, 1):
            v = {("w", j): F(1)}
            for name in ("E12", "E21", "H1"):
                lhs = theta_action(M, spec, ("fin", name), v)
                inner = M.apply_gen(("fin", name), f_power(M, spec.f_elt, v, -x))
                assert lhs == f_power(M, spec.f_elt, inner, x)
                assert T.action[(("fin", name), ("w", j))] == lhs


def test_theta_half_integer_pin():
    # b = 1/2, c = 3, x = 5/2 at w_0:
    #   e w_0 = 3 w_1, binom(5/2,1)(-h)w_1 = -(5/2)(5/2) w_1,
    #   binom(5/2,2)(-2f)w_2 = (15/8)(-2) w_1, total -7 w_1
    M = _dense(F(1, 2), 3)
    spec = make_twist_spec(M, (F(2),), F(5, 2))
    out = theta_action(M, spec, ("fin", "E12"), {("w", 0): F(1)})
    assert out == {("w", 1): F(-7)}


def test_theta_additive_in_the_argument():
    M = _dense(F(1, 2), 3)
    spec = make_twist_spec(M, (F(2),), F(5, 2))
    v = {("w", 0): F(1)}
    e = theta_action(M, spec, ("fin", "E12"), v)
    h = theta_action(M, spec, ("fin", "H1"), v)
    from affinekit.finlie import LieElt

    both = theta_action(M, spec, LieElt({"E12": 1, "H1": 1}), v)
    merged = dict(e)
    for k, c in h.items():
        merged[k] = merged.get(k, _Z) + c
    assert both == {k: c for k, c in merged.items() if c}


def test_theta_band_exhaustion_raises():
    M = _dense(F(1, 2), 3)
    spec = make_twist_spec(M, (F(2),), F(1, 2))
    with pytest.raises(BandError):
        theta_action(M, spec, ("fin", "E12"), {("w", 5): F(1)})


# ---------------------------------------------------------- twisted modules


def test_twist_zero_changes_nothing():
    M = _dense(F(1, 2), 3)
    T = twist_module(M, make_twist_spec(M, (F(2),), _Z))
    assert T.weight_of == M.weight_of
    assert T.action == M.action
    assert T.boundary == M.boundary


def test_twist_module_dense_structure():
    M = _dense(F(1, 2), 3)
    T = twist_module(M, make_twist_spec(M, (F(2),), F(1, 3)))
    for j in range(-6, 7):
        assert T.weight_of[("w", j)] == AffWeight((F(1, 2) + 2 * j + F(2, 3),), _Z, _Z)
    assert check_bracket_compat(T) == []
    assert check_weight_additivity(T) == []
    assert M.boundary <= T.boundary


@settings(max_examples=12, deadline=None)
@given(
    st.fractions(min_value=-2, max_value=2, max_denominator=2),
    st.fractions(min_value=-2, max_value=2, max_denominator=2),
)
def test_twist_composition(x, y):
    # twisting by x then y matches twisting by x + y wherever both stay clean
    M = _dense(F(1, 2), 3)
    T1 = twist_module(twist_module(M, make_twist_spec(M, (F(2),), x)),
                      make_twist_spec(M, (F(2),), y))
    T2 = twist_module(M, make_twist_spec(M, (F(2),), x + y))
    assert T1.weight_of == T2.weight_of
    for lab in M.weight_of:
        if lab in T1.boundary or lab in T2.boundary:
            continue
        for name in ("E12", "E21", "H1"):
            assert T1.action[(("fin", name), lab)] == T2.action[(("fin", name), lab)]


# ---------------------------------------------------------------- localize


def test_localize_bijective_returns_module():
    M = _dense(F(1, 2), 3)
    assert localize(M, (F(2),)) is M


def test_localize_rejects_noninjective():
    with pytest.raises(IncompatibleData):
        localize(finite_dim_sl2(2), (F(2),))


def test_localize_imverma_basis_oracle():
    # basis (n0, mon): mon over nonzero modes |k| <= 2, sum of powers <= 2,
    # |degree| <= 2, n0 >= -3, n0 + length <= 2; weights read lam - 2(n0 + L)
    M = imaginary_verma(F(3), depth=2, length_cap=2, gen_window=1)
    L = localize(M, ALPHA, n0_ext=3)
    assert L is not M
    assert L.window.nmin == -2 and L.window.nmax == 2

    mons = [()]
    for k in (-2, -1, 1, 2):
        mons.append(((k, 1),))
        mons.append(((k, 2),))
    for i, ka in enumerate((-2, -1, 1, 2)):
        for kb in (-2, -1, 1, 2)[i + 1:]:
            mons.append(tuple(sorted([(ka, 1), (kb, 1)])))
    expected = {}
    for mon in mons:
        g = sum(k * n for k, n in mon)
        ln = sum(n for _, n in mon)
        if abs(g) > 2 or ln > 2:
            continue
        for n0 in range(-3, 2 - ln + 1):
            w = AffWeight((F(3) - 2 * (n0 + ln),), F(g), _Z)
            expected[w] = expected.get(w, 0) + 1
    assert L.multiplicity_table() == expected

    # the n0 >= 0 slice carries the multiplicities of the unlocalized module
    slice_table = {}
    for lab, w in L.weight_of.items():
        if lab[1] >= 0:
            slice_table[w] = slice_table.get(w, 0) + 1
    assert slice_table == M.multiplicity_table()

    assert check_bracket_compat(L) == []
    assert check_weight_additivity(L) == []
    assert check_level(L) == []


def test_localize_idempotent():
    L = _vac_loc()
    assert localize(L, ALPHA, n0_ext=3) is L


def test_localized_commutation_line():
    # e_0 f_0^{n0} vac = n0 (lam + 1 - n0) f_0^{n0-1} vac for any integer n0
    L = _vac_loc()
    for n0 in (-2, -1, 0, 1):
        out = L.apply_gen(("t", "E12", 0), {("m", n0, ()): F(1)})
        c = n0 * (F(3) + 1 - n0)
        assert out == ({("m", n0 - 1, ()): F(c)} if c else {})


def test_localize_needs_a_rule():
    # non-bijective lowering with no rebuild recipe must fail loudly
    M = imaginary_verma(F(3), depth=2, length_cap=2, gen_window=1)
    del M.verma_data
    with pytest.raises(IncompatibleData):
        localize(M, ALPHA)


# ------------------------------------------------------- twist parameters


def test_find_twist_parameter_dense():
    # e(f^x w_0) carries c + (b+1)x - x^2; b = 1/2, c = 55/16 has roots
    # -5/4 and 11/4 with discriminant 16
    M = _dense(F(1, 2), F(55, 16))
    lam = AffWeight((F(1, 2),), _Z, _Z)
    roots = find_twist_parameter(M, (F(2),), lam, ("w", 0))
    assert list(roots) == [F(-5, 4), F(11, 4)]
    assert roots.quadratic == Poly([F(55, 16), F(3, 2), F(-1)])
    assert roots.discriminant == 16
    for x0 in roots:
        spec = make_twist_spec(M, (F(2),), -x0)
        assert theta_action(M, spec, ("fin", "E12"), {("w", 0): F(1)}) == {}


def test_find_twist_parameter_irrational():
    M = _dense(F(0), F(1))
    lam = AffWeight((F(0),), _Z, _Z)
    roots = find_twist_parameter(M, (F(2),), lam, ("w", 0))
    assert list(roots) == []
    assert roots.discriminant == 5
    assert roots.quadratic.degree() == 2


def test_find_twist_parameter_vacuum():
    # e_0 vac = 0, so x = 0 must be a root; the other is lam + 1
    L = _vac_loc()
    lam = AffWeight((F(3),), _Z, _Z)
    roots = find_twist_parameter(L, ALPHA, lam, ("m", 0, ()))
    assert list(roots) == [F(0), F(4)]
    assert roots.quadratic == Poly([F(0), F(4), F(-1)])
    assert roots.discriminant == 16


# ------------------------------------------------------------ e-f products


def test_efloc_quadratic_closed_form():
    assert efloc_quadratic(F(3)) == Poly([F(0), F(4), F(-1)])
    assert efloc_quadratic(F(0)) == Poly([F(0), F(1), F(-1)])


def test_efloc_product_values():
    x = F(5, 2)
    assert efloc_product(F(3), x, 0) == 1
    assert efloc_product(F(3), x, 1) == F(15, 4)
    assert efloc_product(F(3), x, 2) == F(225, 16)
    assert efloc_product(F(3), x, 3) == F(1575, 64)
    assert efloc_product(F(3), x, 4) == F(-14175, 256)


def test_efloc_admissible():
    assert efloc_admissible(F(3), F(5, 2)) is True
    assert efloc_admissible(F(3), F(1, 2)) is True
    assert efloc_admissible(F(3), F(4)) is False   # 4 = (lam + 1) + 0
    assert efloc_admissible(F(3), F(-2)) is False  # -2 = 0 - 2


def test_efloc_two_paths_agree():
    # walk e_0 through the twisted localized module and compare each step
    # against the closed product of quadratic values
    x = F(5, 2)
    L = _vac_loc(n0_ext=8)
    T = twist_module(L, make_twist_spec(L, ALPHA, -x))
    vec = {("m", 0, ()): F(1)}
    for k in range(1, 5):
        vec = T.apply_gen(("t", "E12", 0), vec)
        assert vec == {("m", -k, ()): efloc_product(F(3), x, k)}


# --------------------------------------------------- loop module inversion


def _loop_data(r):
    L0 = dense_sl2(DenseSL2Params(F(1, 2), F(3)), DegreeWindow(-8, 8))
    F1 = finite_dim_sl2(2)
    return make_loop_data(
        A1aff, [L0, F1], [F(3), F(2)], (F(2),), r,
        DegreeWindow(-6, 6), gen_window=3,
    )


def test_loop_iso_nonpositive_is_honest():
    data = _loop_data(1)
    w = ((("w", 0), ("u", 0)), 0)
    assert loop_loc_iso(data, 0, {w: F(1)}) == {w: F(1)}
    two = data.M.apply_elt(data.F_aff, data.M.apply_elt(data.F_aff, {w: F(1)}))
    assert loop_loc_iso(data, -2, {w: F(1)}) == two


def test_loop_iso_single_inverse_pin():
    # (f t)^{-1}(w_0 x u_0 x t^0) expands along f-powers in the second factor:
    # multinom(-1; i) = (-1)^i, evaluation scalars 3 and 2
    data = _loop_data(1)
    w = ((("w", 0), ("u", 0)), 0)
    out = loop_loc_iso(data, 1, {w: F(1)})
    assert out == {
        ((("w", 1), ("u", 0)), -1): F(1, 3),
        ((("w", 2), ("u", 1)), -1): F(-2, 9),
        ((("w", 3), ("u", 2)), -1): F(4, 27),
    }
    # the honest generator undoes the formal inverse
    assert data.M.apply_elt(data.F_aff, out) == {w: F(1)}


def test_loop_iso_equivariance():
    # u . iso(N, w) = iso(pair action of u on (N, w)) over a grid of
    # generators and basis vectors (243 checks at r = 1, 54 at r = 0)
    for r, js, ss in ((1, (-1, 0, 1), (-1, 0, 1)), (0, (0,), (-1, 0, 1))):
        data = _loop_data(r)
        for name in ("E12", "E21", "H1"):
            for n in (-1, 0, 1):
                u = AffElt({(name, n): F(1)})
                for j in js:
                    for i in (0, 1, 2):
                        for s in ss:
                            w = ((("w", j), ("u", i)), s)
                            rhs = data.M.apply_elt(
                                u, loop_loc_iso(data, 1, {w: F(1)})
                            )
                            lhs = {}
                            for Np, vec in loop_pair_act(data, u, 1, {w: F(1)}):
                                for lab, c in loop_loc_iso(data, Np, vec).items():
                                    q = lhs.get(lab, _Z) + c
                                    if q:
                                        lhs[lab] = q
                                    else:
                                        del lhs[lab]
                            assert lhs == rhs


def test_loop_iso_inverse_roundtrip():
    # iso_inv picks N' = (nilpotency of the finite factor) + n = 3 and lands
    # on the pair (3, F w), equivalent to (2, w); iso sends it back
    data = _loop_data(1)
    w = ((("w", 0), ("u", 0)), 1)
    v = loop_loc_iso(data, 2, {w: F(1)})
    Np, w2 = loop_loc_iso_inv(data, v)
    assert Np == 3
    assert w2 == data.M.apply_elt(data.F_aff, {w: F(1)})
    assert loop_loc_iso(data, Np, w2) == v


def test_loop_pair_act_formal_rule():
    # the lowering generator itself commutes with its inverse letters
    data = _loop_data(1)
    w = ((("w", 0), ("u", 0)), 0)
    pairs = loop_pair_act(data, data.F_aff, 2, {w: F(1)})
    assert pairs == [(2, data.M.apply_elt(data.F_aff, {w: F(1)}))]


# ------------------------------------------------- induction and twisting


A2 = build_simple("A2")
A2aff = build_affine(A2)


def _probe_setup(jlo=-3, jhi=3):
    P = assemble_parabolic(
        A2aff, make_flag(A2aff, (F(1), F(2), F(5))), DegreeWindow(-1, 1)
    )
    S = levi_dense_module(
        P, DenseSL2Params(F(1, 2), F(3)), DegreeWindow(jlo, jhi),
        base_fin=(F(1, 2), F(4)),
    )
    return P, S


def test_induction_commutes_zero_and_integer():
    P, S = _probe_setup()
    assert induction_commutes_probe(P, S, F(0), 3) is True
    assert induction_commutes_probe(P, S, F(1), 3) is True


def test_induction_commutes_half():
    P, S = _probe_setup()
    assert induction_commutes_probe(P, S, F(1, 2), 3) is True


def test_induction_probe_needs_depth():
    P, S = _probe_setup(-1, 1)
    with pytest.raises(IncompatibleData):
        induction_commutes_probe(P, S, F(1, 2), 2)


# ------------------------------------------------------- support geometry


def test_twisted_localized_support():
    # Supp of the twisted localization sits in (Supp M + Z_{>=0} alpha) + x alpha
    x = F(1, 3)
    M = imaginary_verma(F(3), depth=2, length_cap=2, gen_window=1)
    L = localize(M, ALPHA, n0_ext=3)
    T = twist_module(L, make_twist_spec(L, ALPHA, x))
    allowed = set()
    for w in M.weights:
        for k in range(0, 4):
            allowed.add(AffWeight((w.fin[0] + 2 * k + 2 * x,), w.d, w.k))
    assert set(T.weights) <= allowed
    assert check_bracket_compat(T) == []
    assert check_weight_additivity(T) == []
