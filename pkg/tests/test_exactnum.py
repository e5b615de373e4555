from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from services.errors import DivisionByZero, FieldError
from services.exactnum import (
    CirclePoint,
    NumberField,
    Vec,
    character,
    circle_dist,
    field_eval,
    mat_inv,
    mat_mul,
    identity,
    matrix_of,
    parse_rational,
    rational_sqrt_upper,
)


GOLDEN = NumberField((-1, -1, 1), (Fraction(1), Fraction(2)))
SQRT2 = NumberField((-2, 0, 1), (Fraction(1), Fraction(2)))

rationals = st.fractions(min_value=-50, max_value=50, max_denominator=60)
elements = st.lists(rationals, min_size=2, max_size=2).map(GOLDEN.element)


@given(elements, elements, elements)
@settings(max_examples=60, deadline=None)
def test_ring_laws(x, y, z):
    assert x + y == y + x
    assert x * y == y * x
    assert (x + y) + z == x + (y + z)
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z


@given(elements)
@settings(max_examples=60, deadline=None)
def test_inverse(x):
    if x.is_zero():
        with pytest.raises(DivisionByZero):
            x.inverse()
    else:
        assert x * x.inverse() == GOLDEN.one()


@given(elements)
@settings(max_examples=40, deadline=None)
def test_sign_matches_embedding(x):
    lo, hi = x.embed(40)
    assert hi - lo <= Fraction(1, 2 ** 40)
    s = x.sign()
    if s > 0:
        assert hi > 0
    elif s < 0:
        assert lo < 0
    else:
        assert x.is_zero()


def test_golden_ratio_identities():
    tau = GOLDEN.gen()
    assert tau * tau == tau + 1
    assert tau.sign() == 1
    assert (tau - 2).sign() == -1
    assert tau.floor() == 1
    lo, hi = tau.embed(30)
    assert lo <= Fraction(1618033988, 10 ** 9) + Fraction(1, 10 ** 8)
    assert hi >= Fraction(1618033988, 10 ** 9)


def test_sqrt2_sign_is_certified():
    r = SQRT2.gen()
    # 99/70 ≈ 1.4142857 > √2, 140/99 ≈ 1.41414 < √2
    assert (r - Fraction(99, 70)).sign() == -1
    assert (r - Fraction(140, 99)).sign() == 1


def test_trace():
    tau = GOLDEN.gen()
    assert tau.trace() == 1
    assert GOLDEN.scalar(3).trace() == 6
    assert (tau * tau).trace() == 3


def test_mixing_fields_is_an_error():
    with pytest.raises(FieldError):
        GOLDEN.gen() + SQRT2.gen()


def test_reducible_min_poly_rejected():
    with pytest.raises(FieldError):
        NumberField((-1, 0, 1), (Fraction(0), Fraction(2)))


def test_interval_must_isolate_one_root():
    with pytest.raises(FieldError):
        NumberField((-1, -1, 1), (Fraction(-2), Fraction(2)))


def test_parse_rational():
    assert parse_rational("3/4") == Fraction(3, 4)
    assert parse_rational("-0.25") == Fraction(-1, 4)
    with pytest.raises(FieldError):
        parse_rational("1/0")
    with pytest.raises(FieldError):
        parse_rational("theta")


def test_field_eval():
    tau = GOLDEN.gen()
    assert field_eval(GOLDEN, "theta**2 - theta") == GOLDEN.one()
    assert field_eval(GOLDEN, "theta**-1") == tau - 1
    assert field_eval(GOLDEN, "1/2 + theta/2") == (tau + 1) / 2
    with pytest.raises(FieldError):
        field_eval(GOLDEN, "sqrt(theta)")
    with pytest.raises(FieldError):
        field_eval(GOLDEN, "x + 1")


def test_matrix_inverse():
    m = matrix_of(GOLDEN, [[[0, 1], "1"], ["1", "0"]])
    assert mat_mul(m, mat_inv(m)) == identity(GOLDEN, 2)
    singular = matrix_of(GOLDEN, [["1", "2"], ["2", "4"]])
    with pytest.raises(DivisionByZero):
        mat_inv(singular)


# === CIRCLE ===

@given(rationals, rationals)
@settings(max_examples=80, deadline=None)
def test_circle_dist_is_a_metric_on_rationals(p, q):
    Q = NumberField.rational()
    a, b = CirclePoint.of(Q.scalar(p)), CirclePoint.of(Q.scalar(q))
    d = circle_dist(a, b)
    assert d == circle_dist(b, a)
    assert Q.zero() <= d <= Q.scalar(Fraction(1, 2))
    naive = min(abs(p - q - n) for n in range(int(p - q) - 2, int(p - q) + 3))
    assert d == Q.scalar(naive)


def test_circle_dist_irrational():
    tau = GOLDEN.gen()
    d = circle_dist(CirclePoint.of(tau), CirclePoint.of(GOLDEN.zero()))
    # frac(τ) = τ - 1 ≈ 0.618 → расстояние 2 - τ
    assert d == 2 - tau


def test_character():
    Q = NumberField.rational()
    a = Vec((Q.scalar(Fraction(1, 2)), Q.zero()))
    assert character(a, Vec((Q.scalar(2), Q.scalar(7)))).is_identity()
    assert not character(a, Vec((Q.scalar(1), Q.zero()))).is_identity()


@given(st.fractions(min_value=0, max_value=10_000, max_denominator=1000))
def test_rational_sqrt_upper(q):
    r = rational_sqrt_upper(q, 30)
    assert r * r >= q
    assert r - Fraction(1, 2 ** 29) <= 0 or (r - Fraction(1, 2 ** 29)) ** 2 <= q
