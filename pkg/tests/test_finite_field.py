import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmreduce.errors import ContextMismatch, FieldDivisionByZero, RangeOverflow
from cmreduce.finite_field import (
    FieldContext,
    fiber_count,
    field,
    find_irreducible,
    is_irreducible,
    is_squarefree_mod_p,
)

SMALL_FIELDS = [(p, k) for p in (2, 3, 5, 7, 11) for k in (1, 2, 3, 4) if p**k <= 121]


def _has_root_or_factor(f, p):
    """Brute force: does monic f of degree <= 3 over F_p have a root?"""
    return any(sum(c * x**i for i, c in enumerate(f)) % p == 0 for x in range(p))


@pytest.mark.parametrize("p,k,expected", [
    (2, 2, (1, 1, 1)),   # x^2 + x + 1
    (3, 2, (1, 0, 1)),   # x^2 + 1
    (5, 2, (2, 0, 1)),   # x^2 + 2
])
def test_find_irreducible_examples(p, k, expected):
    assert find_irreducible(p, k) == expected


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_irreducibility_matches_root_test_for_low_degree(p):
    # degree 2 and 3 polynomials are irreducible iff rootless
    for k in (2, 3):
        for idx in range(p**k):
            f = [(idx // p**j) % p for j in range(k)] + [1]
            assert is_irreducible(f, p) == (not _has_root_or_factor(f, p))


def test_find_irreducible_is_lexicographically_first():
    p, k = 3, 3
    first = find_irreducible(p, k)
    for idx in range(p**k):
        f = tuple((idx // p**j) % p for j in range(k)) + (1,)
        if f == first:
            break
        assert not is_irreducible(f, p)


def test_arith_examples():
    F4 = FieldContext(2, 2)
    x = F4.gen
    assert x * x == F4((1, 1))
    F9 = FieldContext(3, 2)
    assert F9.gen ** 2 == F9(2)
    for ctx in (field(7), F4, F9):
        assert ctx.one.inverse() == ctx.one


def test_errors():
    F4 = FieldContext(2, 2)
    with pytest.raises(FieldDivisionByZero):
        F4.zero.inverse()
    with pytest.raises(ContextMismatch):
        F4.one + FieldContext(3, 2).one
    with pytest.raises(RangeOverflow):
        FieldContext(2, 70)
    with pytest.raises(ValueError):
        FieldContext(4, 1)
    with pytest.raises(ValueError):
        FieldContext(3, 2, modulus=(2, 0, 1))  # x^2 + 2 = (x-1)(x+1) over F_3


def test_enumerate_order():
    assert [e.coeffs for e in field(2).elements()] == [(0,), (1,)]
    F4 = FieldContext(2, 2)
    assert [e.coeffs for e in F4.elements()] == [(0, 0), (1, 0), (0, 1), (1, 1)]
    F9 = list(FieldContext(3, 2).elements())
    assert len(F9) == 9 and len(set(F9)) == 9
    assert [e.coeffs for e in F9[:3]] == [(0, 0), (1, 0), (2, 0)]


@pytest.mark.parametrize("p,k", SMALL_FIELDS)
def test_field_axioms_and_frobenius(p, k):
    ctx = field(p, k)
    elems = list(ctx.elements())
    for a in elems[:12]:
        assert a ** ctx.q == a
        if not a.is_zero():
            assert a * a.inverse() == ctx.one
        for b in elems[-8:]:
            assert (a + b).frobenius() == a.frobenius() + b.frobenius()
            assert (a * b).frobenius() == a.frobenius() * b.frobenius()
            assert a * b == b * a
            assert (a - b) + b == a


@pytest.mark.parametrize("p,k", SMALL_FIELDS)
def test_vectorised_matches_scalar(p, k):
    ctx = field(p, k)
    xs = ctx.vindices(0, ctx.q)
    assert np.array_equal(ctx.vencode(xs), np.arange(ctx.q))
    ys = xs[::-1].copy()
    prod = ctx.vmul(xs, ys)
    cube = ctx.vpow(xs, 3)
    for i, a in enumerate(ctx.elements()):
        b = ctx.element(ctx.q - 1 - i)
        assert tuple(prod[i]) == (a * b).coeffs
        assert tuple(cube[i]) == (a * a * a).coeffs


def test_fiber_count_examples():
    F7, F5 = field(7), field(5)
    assert fiber_count(F7.zero, 3) == 1
    assert fiber_count(F7(2), 2) == 2
    assert fiber_count(F7(2), 3) == 0
    assert fiber_count(F5(2), 3) == 1
    # enumeration oracle for the F_7 cases
    assert sum(1 for y in range(7) if y * y % 7 == 2) == 2
    assert sum(1 for y in range(7) if y**3 % 7 == 2) == 0


@pytest.mark.parametrize("p,k", SMALL_FIELDS)
@pytest.mark.parametrize("m", range(2, 8))
def test_fiber_count_partitions_and_matches_enumeration(p, k, m):
    ctx = field(p, k)
    elems = list(ctx.elements())
    naive = {}
    for y in elems:
        c = y
        for _ in range(m - 1):
            c = c * y
        naive[c] = naive.get(c, 0) + 1
    d = math.gcd(m, ctx.q - 1)
    total = 0
    vec = ctx.vfiber_count(ctx.vindices(0, ctx.q), m)
    for i, c in enumerate(elems):
        n = fiber_count(c, m)
        assert n == naive.get(c, 0)
        assert n in (0, 1, d)
        assert vec[i] == n
        total += n
    assert total == ctx.q


def test_squarefree_mod_p():
    assert is_squarefree_mod_p([0, 1, -1], 19)
    assert not is_squarefree_mod_p([0, 0, 1], 5)
    assert not is_squarefree_mod_p([-343, 392, -98, 0, 1], 7)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([(3, 3), (5, 2), (2, 5), (7, 2)]), st.data())
def test_vpow_matches_scalar_pow(pk, data):
    ctx = field(*pk)
    i = data.draw(st.integers(0, ctx.q - 1))
    e = data.draw(st.integers(0, 10**6))
    a = ctx.element(i)
    got = ctx.vpow(ctx.vindices(i, i + 1), e)
    assert tuple(got[0]) == (a ** e).coeffs
