import random
from fractions import Fraction

import pytest

from ffpoisson.cyclic_algebra import (
    AlgebraDescriptor,
    AlgebraElement,
    AlgebraJet,
    AlgebraTestFunction,
    RecipeCharPolyCoset,
    RecipeConst,
    RecipePsiTrace,
    alg_mul,
    basis_element,
    charpoly_jet,
    default_pair_list,
    dual_jet_window,
    element_to_jet,
    fourier_D,
    fourier_D_value,
    integral_test,
    invariant_fn,
    invariant_records,
    is_regular_semisimple,
    jet_from_index,
    jet_index,
    matched_pair,
    matched_pair_L,
    random_unit_jet,
    reduced_char_poly,
    reduced_norm,
    reduced_trace,
    residue_algebra_class,
    s0_test,
    splitting_matrix,
    target_s_charpoly,
    theorem_a_report,
    w_valuation,
)
from ffpoisson import linalg
from ffpoisson.localfield import Window
from ffpoisson.place import Place
from ffpoisson.poly import Poly, RationalFn
from ffpoisson.scalars import CycScalar, make_field

F2 = make_field(2)
D3 = AlgebraDescriptor(F2, 3, 1)
D3dot = AlgebraDescriptor(F2, 3, 2)


def L_elem(desc, code):
    z = desc.L.from_code(code)
    return AlgebraElement.from_L(
        desc,
        [RationalFn.constant(desc.base, desc.base.from_code(c)) for c in desc.coords(z)],
    )


def test_descriptor_rejects_bad_parameters():
    with pytest.raises(ValueError):
        AlgebraDescriptor(F2, 4, 1)
    with pytest.raises(ValueError):
        AlgebraDescriptor(F2, 3, 3)


def test_defining_relation_s_times_a():
    s = AlgebraElement.s(D3)
    for code in range(1, D3.L.q):
        a = L_elem(D3, code)
        ga = L_elem(D3, D3.gpow(1, code))
        assert alg_mul(s, a) == alg_mul(ga, s)


def test_s_cubed_is_t():
    s = AlgebraElement.s(D3)
    t_el = AlgebraElement.central(D3, RationalFn.t(F2))
    assert alg_mul(alg_mul(s, s), s) == t_el


def test_associativity_random_triples():
    rng = random.Random(100)

    def rand_elem():
        table = []
        for i in range(3):
            row = []
            for j in range(3):
                row.append(RationalFn(Poly(F2, [rng.randrange(2) for _ in range(3)])))
            table.append(row)
        return AlgebraElement(D3, table)

    for _ in range(100):
        x, y, z = rand_elem(), rand_elem(), rand_elem()
        assert alg_mul(alg_mul(x, y), z) == alg_mul(x, alg_mul(y, z))


def test_distributivity_random():
    rng = random.Random(101)

    def rand_elem():
        return AlgebraElement(
            D3,
            [
                [RationalFn(Poly(F2, [rng.randrange(2) for _ in range(2)])) for _ in range(3)]
                for _ in range(3)
            ],
        )

    for _ in range(50):
        x, y, z = rand_elem(), rand_elem(), rand_elem()
        assert alg_mul(x, y + z) == alg_mul(x, y) + alg_mul(x, z)


def test_splitting_matrix_identity():
    M = splitting_matrix(AlgebraElement.one(D3))
    for r in range(3):
        for c in range(3):
            expected = RationalFn.one(D3.L) if r == c else RationalFn.zero(D3.L)
            assert M[r][c] == expected


def test_splitting_matrix_s_determinant():
    M = splitting_matrix(AlgebraElement.s(D3))
    det = linalg.determinant(M, RationalFn.zero(D3.L), RationalFn.one(D3.L))
    assert det == RationalFn.t(D3.L)


def test_splitting_matrix_is_homomorphism():
    rng = random.Random(7)

    def rand_elem():
        return AlgebraElement(
            D3,
            [
                [RationalFn(Poly(F2, [rng.randrange(2) for _ in range(2)])) for _ in range(3)]
                for _ in range(3)
            ],
        )

    for _ in range(10):
        x, y = rand_elem(), rand_elem()
        lhs = splitting_matrix(alg_mul(x, y))
        rhs = linalg.mat_mul(splitting_matrix(x), splitting_matrix(y))
        assert lhs == rhs


def test_reduced_char_poly_of_s():
    cp = reduced_char_poly(AlgebraElement.s(D3))
    t = RationalFn.t(F2)
    assert cp.coeffs == [-t, RationalFn.zero(F2), RationalFn.zero(F2), RationalFn.one(F2)]
    assert reduced_norm(AlgebraElement.s(D3)) == t


def test_reduced_char_poly_of_bs():
    # X^3 - N(b) t; every norm from F_8^* is 1 over F_2
    t = RationalFn.t(F2)
    for code in range(1, 8):
        b = D3.L.from_code(code)
        pair = matched_pair(D3, D3dot, b)
        assert pair.charpoly.coeffs[0] == -t
        assert pair.is_regular_semisimple()


def test_reduced_char_poly_of_central_scalar():
    f = RationalFn(Poly(F2, (1, 1)))
    x = AlgebraElement.central(D3, f)
    cp = reduced_char_poly(x)
    # (X - f)^3
    from ffpoisson.cyclic_algebra import XPoly

    lin = XPoly([-f, RationalFn.one(F2)])
    expected = lin * lin * lin
    assert cp == expected
    assert not is_regular_semisimple(x)


def test_reduced_trace_matches_matrix_trace():
    rng = random.Random(3)
    for _ in range(10):
        x = AlgebraElement(
            D3,
            [
                [RationalFn(Poly(F2, [rng.randrange(2) for _ in range(2)])) for _ in range(3)]
                for _ in range(3)
            ],
        )
        M = splitting_matrix(x)
        tr = M[0][0] + M[1][1] + M[2][2]
        from ffpoisson.cyclic_algebra import _descend_rational

        assert _descend_rational(tr, F2, D3.L) == reduced_trace(x)


def test_integrality():
    s = AlgebraElement.s(D3)
    v = Place.at(F2, 1)
    assert integral_test(s, v)
    assert s0_test(s)
    bad = AlgebraElement.zero(D3)
    bad.x[0][0] = RationalFn(Poly.one(F2), Poly(F2, (1, 1)))
    bad = AlgebraElement(D3, bad.x)
    assert not integral_test(bad, v)
    poly_el = AlgebraElement.central(D3, RationalFn(Poly(F2, (1, 0, 1))))
    assert s0_test(poly_el)
    with pytest.raises(ValueError):
        integral_test(s, Place.at(F2, 0))  # v(t) != 0 there


def test_w_valuation_basics():
    assert w_valuation(AlgebraElement.s(D3)) == 1
    assert w_valuation(AlgebraElement.central(D3, RationalFn.t(F2))) == 3
    assert w_valuation(basis_element(D3, 0, 1)) == 0
    assert w_valuation(AlgebraElement.zero(D3)) is None


def test_w_valuation_additive_on_jets():
    rng = random.Random(42)
    hi = 12
    for _ in range(1000):
        a = AlgebraJet(D3, 0, hi, [rng.randrange(8) for _ in range(hi)])
        b = AlgebraJet(D3, 0, hi, [rng.randrange(8) for _ in range(hi)])
        wa, wb = w_valuation(a), w_valuation(b)
        if wa is None or wb is None or wa + wb >= hi:
            continue
        assert w_valuation(a * b) == wa + wb


def test_w_zero_iff_unit_residue():
    for idx in range(8**3):
        jet = jet_from_index(D3, 0, 3, idx)
        if jet.is_zero():
            continue
        assert (w_valuation(jet) == 0) == jet.is_unit()


def test_unit_residues_by_exhaustive_multiplication():
    # units of the level-1 quotient are exactly the jets with invertible
    # L-component: verify by searching for two-sided inverses
    jets = [jet_from_index(D3, 0, 3, i) for i in range(8**3)]
    one = jet_from_index(D3, 0, 3, jet_index(AlgebraJet(D3, 0, 3, [1, 0, 0])))
    for u in jets:
        has_inverse = False
        if u.codes[0] != 0:
            v = u.inverse()
            has_inverse = (u * v).codes == [1, 0, 0] and (v * u).codes == [1, 0, 0]
        assert has_inverse == (u.codes[0] != 0)


def test_residue_algebra_class():
    s = AlgebraElement.s(D3)
    r = residue_algebra_class(s)
    assert r.codes == [0, 1, 0]
    cubed = (r * r) * r
    assert all(c == 0 for c in cubed.codes[: cubed.hi - cubed.lo])
    d1 = basis_element(D3, 0, 1)
    assert residue_algebra_class(d1).codes[0] == D3.d_basis[1].code
    nonint = AlgebraElement.central(D3, RationalFn(Poly.one(F2), Poly.x(F2)))
    with pytest.raises(ValueError):
        residue_algebra_class(nonint)


def test_element_to_jet_multiplicative():
    s = AlgebraElement.s(D3)
    x = L_elem(D3, 5) + alg_mul(s, s)
    y = L_elem(D3, 3) + s
    jx = element_to_jet(x, 0, 6)
    jy = element_to_jet(y, 0, 6)
    jxy = element_to_jet(alg_mul(x, y), 0, 6)
    prod = jx * jy
    assert prod.codes == jxy.truncate(prod.lo, prod.hi).codes


def test_matched_pair_b_one():
    pair = matched_pair(D3, D3dot, D3.L.one())
    t = RationalFn.t(F2)
    assert pair.charpoly.coeffs[0] == -t
    assert pair.provenance == "bs-form"


def test_matched_pair_L_common():
    coeffs = [
        RationalFn.zero(F2),
        RationalFn(Poly(F2, (1, 1))),
        RationalFn.zero(F2),
    ]
    pair = matched_pair_L(D3, D3dot, coeffs)
    assert pair.provenance == "L-common"
    assert pair.c.x == pair.c_dot.x
    assert pair.is_regular_semisimple()


def test_matched_pair_rejects_zero():
    with pytest.raises(ValueError):
        matched_pair(D3, D3dot, D3.L.zero())


def test_charpoly_jet_matches_exact():
    rng = random.Random(5)
    for _ in range(25):
        table = [
            [RationalFn(Poly(F2, [rng.randrange(2) for _ in range(2)])) for _ in range(3)]
            for _ in range(3)
        ]
        x = AlgebraElement(D3, table)
        M = 2
        jet = element_to_jet(x, 0, 3 * M)
        cp_jet = charpoly_jet(D3, jet, M)
        cp = reduced_char_poly(x)
        pd = D3._pd0
        for j in range(3):
            series = pd.expand(cp.coeffs[j], M)
            assert tuple(series.at(m).code for m in range(M)) == cp_jet[j]


def test_invariant_recipe_conjugation():
    rng = random.Random(6)
    win = Window(0, 1)
    for recipe in (RecipeConst(), RecipePsiTrace(), RecipeCharPolyCoset(target_s_charpoly(D3, 1))):
        phi = invariant_fn(D3, recipe, win)
        for _ in range(60):
            u = random_unit_jet(D3, 6, rng)
            jx = jet_from_index(D3, 0, 3, rng.randrange(8**3))
            xc = jx.conjugate_by(u)
            assert phi.value_at(jx) == phi.value_at(xc.truncate(0, 3))


def test_invariant_fn_rejects_pole_window():
    with pytest.raises(ValueError):
        invariant_fn(D3, RecipeConst(), Window(1, 1))


def test_fourier_D_indicator():
    ones = [CycScalar.one(2)] * (8**3)
    phi = AlgebraTestFunction(D3, 0, 3, ones)
    out = fourier_D(phi)
    lo, hi = dual_jet_window(D3, 0, 3)
    assert (out.lo, out.hi) == (lo, hi)
    # the transform concentrates on the dual lattice {w >= -2}: within the
    # window [-5, -2) that is only the zero jet, with mass vol * |table|
    nonzero = [i for i, v in enumerate(out.values) if not v.is_zero()]
    assert nonzero == [0]
    assert out.values[0] == CycScalar.rational(2, Fraction(1, 8))


def test_fourier_D_zero():
    z = AlgebraTestFunction(D3, 0, 3, [CycScalar.zero(2)] * 512)
    assert all(v.is_zero() for v in fourier_D(z).values)


def test_fourier_D_inversion_on_deltas():
    for k in range(0, 512, 7):
        vals = [CycScalar.zero(2)] * 512
        vals[k] = CycScalar.one(2)
        phi = AlgebraTestFunction(D3, 0, 3, vals)
        ff = fourier_D(fourier_D(phi))
        assert (ff.lo, ff.hi) == (0, 3)
        for idx, v in enumerate(ff.values):
            expect = CycScalar.one(2) if idx == k else CycScalar.zero(2)
            assert v == expect  # char 2: -x = x


def test_fourier_D_value_matches_table():
    rng = random.Random(9)
    vals = [CycScalar.rational(2, rng.randrange(-3, 4)) for _ in range(512)]
    phi = AlgebraTestFunction(D3, 0, 3, vals)
    full = fourier_D(phi)
    for _ in range(25):
        k = rng.randrange(512)
        jet = jet_from_index(D3, full.lo, full.hi, k)
        assert fourier_D_value(phi, jet) == full.values[k]


def test_fourier_D_invariance_transport():
    rng = random.Random(10)
    phi = invariant_fn(D3, RecipePsiTrace(), Window(0, 1))
    out = fourier_D(phi)
    for _ in range(60):
        u = random_unit_jet(D3, 10, rng)
        jx = jet_from_index(D3, out.lo, out.hi, rng.randrange(512))
        xc = jx.conjugate_by(u)
        assert out.value_at(jx) == out.value_at(xc.truncate(out.lo, out.hi))


def test_nu_D_matches_gram_determinant():
    assert D3.nu_D == 6
    assert D3dot.nu_D == 6


def test_theorem_a_small_window():
    pairs = default_pair_list(D3, D3dot, count=12, seed=3)
    assert len(pairs) >= 12
    for recipe in (RecipeConst(), RecipePsiTrace()):
        rows = theorem_a_report(D3, D3dot, recipe, pairs, Window(0, 1))
        ok = [r for r in rows if r["status"] == "ok"]
        assert ok and all(r["equal"] for r in ok)


def test_theorem_a_skips_non_regular():
    central = AlgebraElement.central(D3, RationalFn.one(F2))
    central_dot = AlgebraElement.central(D3dot, RationalFn.one(F2))
    from ffpoisson.cyclic_algebra import MatchedPair

    pair = MatchedPair(central, central_dot, "L-common")
    rows = theorem_a_report(D3, D3dot, RecipeConst(), [pair], Window(0, 1))
    assert rows[0]["status"].startswith("skipped")


def test_theorem_a_deep_twist_agreement():
    # scale matched pairs by the central t^-2: the evaluation points then
    # pair nontrivially against S_0/t, a sharper cross-form comparison
    t2 = RationalFn(Poly.one(F2), Poly(F2, (0, 0, 1)))
    phi = invariant_fn(D3, RecipePsiTrace(), Window(0, 1))
    phi_dot = invariant_fn(D3dot, RecipePsiTrace(), Window(0, 1))
    lo, hi = dual_jet_window(D3, 0, 3)
    nontrivial = 0
    for code in range(1, 8):
        pair = matched_pair(D3, D3dot, D3.L.from_code(code))
        c = pair.c.scale(t2)
        c_dot = pair.c_dot.scale(t2)
        jc = element_to_jet(c, lo, hi)
        jd = element_to_jet(c_dot, lo, hi)
        if not jc.is_zero():
            nontrivial += 1
        assert fourier_D_value(phi, jc) == fourier_D_value(phi_dot, jd)
    assert nontrivial == 7


def test_invariant_records_distinct_counts_match_across_forms():
    # matching masses: the multiset of invariant records agrees form to form
    from collections import Counter

    r1 = Counter(invariant_records(D3, 1))
    r2 = Counter(invariant_records(D3dot, 1))
    assert r1 == r2


def test_splitting_matrix_injective_on_nonzero():
    rng = random.Random(31)
    zero = RationalFn.zero(D3.L)
    for _ in range(20):
        table = [
            [RationalFn(Poly(F2, [rng.randrange(2) for _ in range(2)])) for _ in range(3)]
            for _ in range(3)
        ]
        x = AlgebraElement(D3, table)
        M = splitting_matrix(x)
        nonzero_matrix = any(not M[r][c].is_zero() for r in range(3) for c in range(3))
        assert nonzero_matrix == (not x.is_zero())
