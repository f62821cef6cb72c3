from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from qhc.scalars import (
    NumericValue,
    PoleOnInterval,
    QScalar,
    ScalarField,
    pole_free_on_unit_interval,
)


F1 = ScalarField(1)
F2 = ScalarField(2)


def q_laurent(field, *pairs):
    """Sum of c * q**m terms, for readable expected values."""
    acc = field.zero
    for c, m in pairs:
        acc = acc + field.scalar(c) * field.q_pow(m)
    return acc


# --- canonical form -----------------------------------------------------

def test_zero_and_one_are_canonical():
    assert QScalar(0) == QScalar(Fraction(0), 5, (3, 1), (2, 7))
    assert QScalar(1) == QScalar(Fraction(2), 0, (3,), (6,))
    assert not QScalar(0)
    assert QScalar(1)


def test_normalization_strips_valuation_and_content():
    # 6 s^3 (s+1) / (2 s) == 3 s^2 (s+1)
    x = QScalar(6, 0, (0, 0, 0, 1, 1), (0, 2))
    assert x == QScalar(3, 2, (1, 1), (1,))
    assert x.e == 2 and x.c == 3


def test_common_factors_cancel():
    # (s^2-1)/(s-1) == s+1
    x = QScalar(1, 0, (-1, 0, 1), (-1, 1))
    assert x == QScalar(1, 0, (1, 1), (1,))


small = st.integers(-6, 6)


@st.composite
def scalars(draw):
    num = draw(st.lists(small, min_size=1, max_size=4))
    den = draw(st.lists(small, min_size=1, max_size=3).filter(lambda p: any(p)))
    return QScalar(Fraction(draw(st.integers(-5, 5)), draw(st.integers(1, 4))),
                   draw(st.integers(-3, 3)), tuple(num), tuple(den))


@given(scalars(), scalars(), scalars())
@settings(max_examples=120, deadline=None)
def test_field_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + b == b + a
    assert a * b == b * a
    assert a - a == QScalar(0)
    if a:
        assert a * a.inverse() == QScalar(1)


@given(scalars())
@settings(max_examples=60, deadline=None)
def test_powers_match_repeated_products(a):
    assert a ** 3 == a * a * a
    if a:
        assert a ** -2 == (a * a).inverse()
    assert a ** 0 == QScalar(1)


@given(scalars(), st.integers(1, 3))
@settings(max_examples=60, deadline=None)
def test_subst_pow_is_a_homomorphism(a, k):
    b = QScalar(1, 1, (2, 1), (1, 0, 3))
    assert (a * b).subst_pow(k) == a.subst_pow(k) * b.subst_pow(k)
    assert (a + b).subst_pow(k) == a.subst_pow(k) + b.subst_pow(k)


def test_derivative_product_rule():
    a = QScalar(1, -1, (1, 2), (3, 1))
    b = QScalar(Fraction(1, 2), 2, (1, 0, 1), (1,))
    assert (a * b).dds() == a.dds() * b + a * b.dds()


# --- q-combinatorics -----------------------------------------------------

def test_q_int_small_values():
    assert F1.q_int(1) == F1.one
    assert F1.q_int(2) == q_laurent(F1, (1, 1), (1, -1))
    assert F1.q_int(3) == q_laurent(F1, (1, 2), (1, 0), (1, -2))
    assert F1.q_int(-3) == -F1.q_int(3)
    assert F1.q_int(0) == F1.zero


def test_q_int_respects_base():
    # [2] in base q^2 equals q^2 + q^-2
    assert F1.q_int(2, d=2) == q_laurent(F1, (1, 2), (1, -2))


def test_q_binom_values():
    assert F1.q_binom(2, 1) == F1.q_int(2)
    assert F1.q_binom(3, 1) == F1.q_int(3)
    assert F1.q_binom(3, 0) == F1.one
    assert F1.q_binom(4, 2) == q_laurent(F1, (1, 4), (1, 2), (2, 0), (1, -2), (1, -4))
    with pytest.raises(ValueError):
        F1.q_binom(2, 3)


def test_q_binom_is_laurent():
    for m in range(7):
        for n in range(m + 1):
            assert F2.q_binom(m, n, d=2).is_laurent()


def test_q_pascal_identity():
    for d in (1, 2):
        for m in range(1, 7):
            for n in range(1, m):
                lhs = F1.q_binom(m, n, d)
                rhs = (F1.q_pow(d * n) * F1.q_binom(m - 1, n, d)
                       + F1.q_pow(d * (n - m)) * F1.q_binom(m - 1, n - 1, d))
                assert lhs == rhs


# --- pole detection -------------------------------------------------------

def test_pole_free_examples():
    q = F1.q_pow(1)
    ok, wit = pole_free_on_unit_interval((q - F1.scalar(2)).inverse())
    assert ok and wit is None
    ok, wit = pole_free_on_unit_interval((q - F1.one).inverse())
    assert not ok
    lo, hi = wit
    assert lo <= 1 <= hi
    ok, _ = pole_free_on_unit_interval(F1.q_int(5) * F1.q_pow(-3))
    assert ok


def test_pole_inside_interval_is_isolated():
    q = F2.q_pow(1)
    x = (q - F2.scalar(Fraction(1, 4))).inverse()  # pole at s = 1/2
    ok, (lo, hi) = pole_free_on_unit_interval(x)
    assert not ok and lo <= Fraction(1, 2) <= hi and hi - lo < Fraction(1, 4)


# --- numerics --------------------------------------------------------------

def test_evaluate_exact_cases():
    v = F1.evaluate(F1.q_int(2), Fraction(1, 2))
    assert v.exact and v.value == Fraction(5, 2)
    v = F2.evaluate(F2.s_pow(1), Fraction(1, 4))
    assert v.exact and v.value == Fraction(1, 2)
    v = F1.evaluate(F1.one, Fraction(3, 7))
    assert v.value == 1


def test_evaluate_detects_pole():
    q = F1.q_pow(1)
    with pytest.raises(PoleOnInterval):
        F1.evaluate((q - F1.scalar(Fraction(1, 3))).inverse(), Fraction(1, 3))


def test_evaluate_is_multiplicative():
    x = F2.q_int(3) + F2.s_pow(1)
    y = F2.q_int(2, d=2) - F2.s_pow(-1)
    for q0 in (Fraction(1, 3), Fraction(2, 5), Fraction(9, 10)):
        vx = F2.evaluate(x, q0)
        vy = F2.evaluate(y, q0)
        vxy = F2.evaluate(x * y, q0)
        assert vxy.close_to(NumericValue(vx.value * vy.value, False, 128),
                            tol=Fraction(1, 2 ** 90))


def test_evaluate_irrational_root_accuracy():
    # s = sqrt(1/2): s**2 must come back as 1/2 up to the root approximation
    v = F2.evaluate(F2.s_pow(2), Fraction(1, 2))
    assert not v.exact
    assert v.close_to(Fraction(1, 2))


# --- serialization ----------------------------------------------------------

def test_serialize_round_trip():
    samples = [
        F1.zero, F1.one, F1.q_int(3),
        QScalar(Fraction(3, 2), -2, (1, 1), (2, 0, 1)),
        QScalar(Fraction(-7, 3), 4, (5,), (1, 2)),
    ]
    for x in samples:
        assert F1.parse(F1.serialize(x)) == x


def test_serialize_format_shape():
    assert F1.serialize(F1.one) == "1/1@1"
    assert F1.serialize(F1.zero) == "0/1@1"
    assert F2.serialize(F2.s_pow(-1)) == "1/0,1@2"


def test_parse_accepts_rational_tokens():
    # every split point of "1/2/1" yields the same value, so it is accepted
    assert F1.parse("1/2/1@1") == QScalar(Fraction(1, 2))


def test_parse_rejects_garbage():
    for bad in ("", "1,2@1", "1/1@3", "x/1@1"):
        with pytest.raises(ValueError):
            F1.parse(bad)
    # distinct readings of the same literal are refused, not guessed at
    with pytest.raises(ValueError):
        F1.parse("1/2,1/1@1")
