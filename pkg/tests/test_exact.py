import math
from fractions import Fraction

import pytest

from kmsflow.exact import ExactWeight, WeightSum, as_fraction, is_exact


def test_canonical_form_folds_integer_part():
    w = ExactWeight.power(Fraction(1, 2), Fraction(5, 2))
    assert w.coeff == Fraction(1, 4) and w.exponent == Fraction(1, 2)
    assert math.isclose(float(w), 0.5**2.5)


def test_negative_exponent():
    w = ExactWeight.power(Fraction(1, 2), Fraction(-1, 2))
    assert w.coeff == 2 and w.exponent == Fraction(1, 2)
    assert math.isclose(float(w), math.sqrt(2))


def test_multiplication_adds_exponents():
    lam = Fraction(2, 3)
    a = ExactWeight.power(lam, Fraction(1, 3))
    b = ExactWeight.power(lam, Fraction(2, 3))
    assert (a * b).as_sum() == WeightSum(lam, {0: lam})


def test_mismatched_bases():
    with pytest.raises(ValueError):
        ExactWeight.power(Fraction(1, 2), 1) * ExactWeight.power(Fraction(1, 3), 1)


def test_sum_cancellation_is_exact():
    lam = Fraction(1, 2)
    r = ExactWeight.power(lam, Fraction(-1, 2))
    s = r + ExactWeight.power(lam, 0) - r
    assert s == 1
    assert (s - 1).is_zero()


def test_quadratic_sign():
    lam = Fraction(1, 2)
    root = ExactWeight.power(lam, Fraction(-1, 2))  # sqrt 2
    assert (root - Fraction(141, 100)).sign() == 1
    assert (root - Fraction(142, 100)).sign() == -1
    assert (root * root).as_sum() == 2


def test_high_precision_sign():
    lam = Fraction(2, 3)
    w = ExactWeight.power(lam, Fraction(1, 3))
    approx = Fraction(float(w)).limit_denominator(10**12)
    assert (w - approx).sign() in (-1, 1)
    assert (w - (approx - Fraction(1, 10**9))).sign() == 1


def test_from_counts_matches_direct_sum():
    lam = Fraction(1, 2)
    counts = {Fraction(-3, 2): 2, Fraction(0): 5, Fraction(7, 2): 1, Fraction(4): 3}
    direct = sum((n * ExactWeight.power(lam, e) for e, n in counts.items()), WeightSum(lam))
    assert WeightSum.from_counts(lam, counts) == direct


def test_json_round_trip():
    w = ExactWeight(Fraction(3, 7), Fraction(1, 2), Fraction(1, 2))
    assert ExactWeight.from_json(w.to_json()) == w
    assert w.to_json()["coeff"] == "3/7"


def test_as_fraction_refuses_floats():
    assert as_fraction("3/4") == Fraction(3, 4)
    with pytest.raises(TypeError):
        as_fraction(0.5)
    assert is_exact(3) and is_exact(Fraction(1, 2)) and not is_exact(0.5) and not is_exact(True)
