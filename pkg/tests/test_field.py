from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from lmcanon.errors import DivisionByZero, FieldMismatch, ParseError
from lmcanon.field import QQ, FieldElement, Ordering, arith, cmp_order, get_field, is_prime

F7 = get_field("F7")

rationals = st.fractions(max_denominator=50).filter(lambda x: abs(x.numerator) < 10**6)


def test_rational_addition():
    assert arith(QQ.element("1/2"), QQ.element("1/3"), "+") == QQ.element("5/6")


def test_prime_field_product():
    assert arith(F7.element(3), F7.element(5), "*").value == 1


def test_zero_divided():
    assert arith(QQ.element(0), QQ.element(7), "/") == 0
    assert arith(F7.element(0), F7.element(4), "/").value == 0


def test_division_by_zero():
    with pytest.raises(DivisionByZero):
        arith(QQ.element(1), QQ.element(0), "/")
    with pytest.raises(DivisionByZero):
        F7.element(3) / 7


def test_field_mismatch():
    with pytest.raises(FieldMismatch):
        arith(QQ.element(1), F7.element(1), "+")
    with pytest.raises(FieldMismatch):
        cmp_order(QQ.element(1), F7.element(1))


def test_order_examples():
    assert cmp_order(QQ.element("1/2"), QQ.element("2/3")) is Ordering.LESS
    assert cmp_order(QQ.element(5), QQ.element(5)) is Ordering.EQUAL
    assert cmp_order(F7.element(3), F7.element(5)) is Ordering.LESS
    # representative order, not the order of the integers they came from
    assert cmp_order(F7.element(-1), F7.element(2)) is Ordering.GREATER


def test_normalisation():
    assert QQ.coerce("4/6") == Fraction(2, 3)
    assert F7.coerce(-1) == 6
    assert F7.coerce(Fraction(1, 2)) == 4


def test_parse_rejects():
    for bad in ("1.5", "1/0", "x", "", "1/-2"):
        with pytest.raises(ParseError):
            QQ.parse(bad)
    with pytest.raises(ParseError):
        F7.parse("7")
    with pytest.raises(ParseError):
        get_field("F8")
    with pytest.raises(TypeError):
        QQ.coerce(0.5)


def test_field_specs():
    assert get_field("Q") is QQ
    assert get_field("F7") is get_field(7)
    assert [p for p in range(40) if is_prime(p)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]
    assert is_prime(2**61 - 1) and not is_prime(2**61 + 1)


@given(rationals, rationals, rationals)
def test_rational_axioms(a, b, c):
    x, y, z = (QQ.element(v) for v in (a, b, c))
    assert (x + y) + z == x + (y + z)
    assert x * (y + z) == x * y + x * z
    if b:
        assert (x / y) * y == x


@given(st.integers(0, 6), st.integers(0, 6), st.integers(0, 6))
def test_prime_field_axioms(a, b, c):
    x, y, z = (F7.element(v) for v in (a, b, c))
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    if b:
        assert (x / y) * y == x
        assert y * F7.element(F7.inv(y.value)) == 1


@given(rationals, rationals, rationals)
def test_order_is_total(a, b, c):
    x, y, z = (QQ.element(v) for v in (a, b, c))
    assert cmp_order(x, y) == -cmp_order(y, x)
    assert (cmp_order(x, y) == Ordering.EQUAL) == (x == y)
    if cmp_order(x, y) <= 0 and cmp_order(y, z) <= 0:
        assert cmp_order(x, z) <= 0


@given(rationals)
def test_render_parse_round_trip(a):
    assert QQ.parse(QQ.render(a)) == a


@given(st.integers(0, 6))
def test_residue_round_trip(a):
    assert F7.parse(F7.render(a)) == a


def test_element_hash_and_repr():
    assert len({QQ.element("1/2"), QQ.element("2/4")}) == 1
    assert str(FieldElement(F7, 10)) == "3"
