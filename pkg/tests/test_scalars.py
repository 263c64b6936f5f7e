import random
from fractions import Fraction

import pytest

from ffpoisson.scalars import (
    CycScalar,
    cyc_normalize,
    make_field,
    psi,
    trace,
)


def test_prime_field_f2():
    F2 = make_field(2, 1)
    assert [e.code for e in F2.elements()] == [0, 1]


def test_f8_multiplicative_group_cyclic_order_7():
    F8 = make_field(2, 3)
    g = F8.gen()
    seen = set()
    x = F8.one()
    for _ in range(7):
        x = x * g
        seen.add(x.code)
    assert len(seen) == 7
    assert x == F8.one()


def test_f9_contains_f3():
    F9 = make_field(3, 2)
    F3 = make_field(3, 1)
    image = {F9.embed(x).code for x in F3.elements()}
    assert len(image) == 3
    # closed under addition and multiplication
    for a in image:
        for b in image:
            assert F9.add_code(a, b) in image
            assert F9.mul_code(a, b) in image


def test_make_field_rejects_nonprime():
    with pytest.raises(ValueError):
        make_field(6)
    with pytest.raises(ValueError):
        make_field(2, 0)


def test_trace_zero_and_identity():
    F4 = make_field(2, 2)
    assert trace(F4.zero(), 1).is_zero()
    for x in F4.elements():
        assert trace(x, 2) == x


def test_trace_f4_generator():
    # x a root of X^2+X+1: trace = x + x^2 = 1
    F4 = make_field(2, 2)
    x = F4.gen()
    assert trace(x, 1).code == 1


def test_trace_rejects_bad_degree():
    F8 = make_field(2, 3)
    with pytest.raises(ValueError):
        trace(F8.gen(), 2)


@pytest.mark.parametrize("p,e", [(2, 1), (3, 1), (2, 2), (2, 3), (3, 2)])
def test_psi_additive_exhaustive(p, e):
    F = make_field(p, e)
    for a in F.elements():
        for b in F.elements():
            assert psi(a + b) == psi(a) * psi(b)


@pytest.mark.parametrize("p,e", [(2, 1), (3, 1), (2, 2), (2, 3), (3, 2)])
def test_psi_sums_to_zero(p, e):
    F = make_field(p, e)
    total = CycScalar.zero(p)
    for x in F.elements():
        total = total + psi(x)
    assert total.is_zero()


def test_psi_f2_values():
    F2 = make_field(2)
    assert psi(F2.zero()) == CycScalar.rational(2, 1)
    assert psi(F2.one()) == CycScalar.rational(2, -1)


def test_psi_sum_of_squares_f3():
    # by direct count: squares over F_3 are {0:1, 1:2}: 1 + 2 zeta
    F3 = make_field(3)
    total = CycScalar.zero(3)
    for x in F3.elements():
        total = total + psi(x * x)
    assert total == cyc_normalize(3, [1, 2, 0])


@pytest.mark.parametrize("p", [2, 3])
def test_trace_transitive_towers(p):
    for e in (2, 3, 6):
        F = make_field(p, e)
        for d in (dd for dd in (2, 3) if e % dd == 0 and dd != e):
            for x in F.elements():
                assert trace(trace(x, d), 1) == trace(x, 1)


def test_cyc_normalize_vanishing_sum():
    assert cyc_normalize(3, [1, 1, 1]).is_zero()
    assert cyc_normalize(2, [1, 1]).is_zero()


def test_cyc_normalize_top_power():
    p = 5
    v = cyc_normalize(p, [0, 0, 0, 0, 1])
    assert v.coeffs == tuple(Fraction(-1) for _ in range(p - 1))


def test_cyc_normalize_idempotent_random():
    rng = random.Random(11)
    for p in (2, 3, 5):
        for _ in range(50):
            raw = [Fraction(rng.randrange(-9, 10), rng.randrange(1, 7)) for _ in range(p)]
            once = cyc_normalize(p, raw)
            again = cyc_normalize(p, list(once.coeffs) + [0])
            assert once == again


def test_cyc_arithmetic_and_serialization():
    a = cyc_normalize(3, [1, 2, 0])
    b = cyc_normalize(3, [0, 1, 1])
    assert (a + b) - b == a
    assert a * CycScalar.one(3) == a
    assert a * CycScalar.zero(3) == CycScalar.zero(3)
    back = CycScalar.from_json(3, a.to_json())
    assert back == a


def test_zeta_power_relation():
    # zeta^p = 1 and 1 + zeta + ... + zeta^(p-1) = 0
    for p in (2, 3, 5):
        z = CycScalar.zeta_power
        total = CycScalar.zero(p)
        for k in range(p):
            total = total + z(p, k)
        assert total.is_zero()
        assert z(p, p) == CycScalar.one(p)


def test_subfield_embedding_is_ring_hom():
    F4 = make_field(2, 2)
    F64 = make_field(2, 6)
    for a in F4.elements():
        for b in F4.elements():
            assert F64.embed(a * b) == F64.embed(a) * F64.embed(b)
            assert F64.embed(a + b) == F64.embed(a) + F64.embed(b)


def test_field_element_codes_roundtrip():
    F9 = make_field(3, 2)
    for x in F9.elements():
        assert F9.code_of(x.coeffs()) == x.code
        if not x.is_zero():
            assert (x * x.inverse()) == F9.one()
