import math
from fractions import Fraction

import pytest

from kmsflow.kms import (
    Beta,
    admissible_beta,
    affine_beta,
    derive,
    gicar_solve,
    in_admissible_range,
    parse_beta,
    pf1_pf2_check,
)
from kmsflow.measure import bernoulli_for


def test_derived_quantities_exact():
    p = derive(5, 3, "log(5/2)")
    assert p.t == 2 and p.lam == Fraction(2, 3)
    assert p.p == Fraction(1, 2)
    assert p.trace_mass == Fraction(1, 2)
    assert p.rn == (Fraction(6, 5), Fraction(4, 5))
    assert p.branch == "2<=t<s"


def test_q_float_matches_formula():
    p = derive(5, 3, 0.9)
    expected = (math.log(3) - 0.9) / (math.log(3) - math.log(2))
    assert p.q == pytest.approx(expected, rel=1e-15)


def test_affine_beta_gives_exact_q():
    p = derive(3, 2, "affine(1/2)")
    assert p.q == Fraction(1, 2)
    assert p.beta.value == pytest.approx(0.5 * math.log(2))
    assert p.beta.exp_exact is None  # sqrt 2


def test_log_beta_detects_affine_coordinate():
    p = derive(3, 2, "log(2)")
    assert p.beta.affine_x == 1 and p.q == 0
    p = derive(10, 9, "log(3)")
    assert p.beta.affine_x == Fraction(1, 2) and p.q == Fraction(1, 2)


def test_affine_rational_root():
    b = affine_beta(Fraction(1, 2), 8, 2)
    assert b.exp_exact == 4


@pytest.mark.parametrize("spec", ["log(3/2)", {"log_of": "3/2"}, Beta.log_of("3/2")])
def test_parse_beta_forms(spec):
    assert parse_beta(spec, 2, 0).exp_exact == Fraction(3, 2)


@pytest.mark.parametrize(
    "d,s,beta",
    [(1, 1, 1.0), (4, 1, 1.0), (5, 2, 1.0), (2, 1, "log(1)"), (3, 2, 0.0)],
)
def test_derive_rejects(d, s, beta):
    with pytest.raises(ValueError):
        derive(d, s, beta)


def test_admissible_ranges():
    assert admissible_beta(2, 2).describe() == "(-inf, log 2], beta != 0"
    assert admissible_beta(4, 3).describe() == "(0, log 3]"
    assert admissible_beta(5, 3).describe() == "[log 2, log 3]"
    assert admissible_beta(4, 2).describe() == "{log 2}"


def test_in_range_exact():
    assert in_admissible_range(derive(5, 3, "log(2)"))
    assert in_admissible_range(derive(5, 3, "log(3)"))
    assert not in_admissible_range(derive(5, 3, "log(7/2)"))
    assert not in_admissible_range(derive(4, 2, "log(3)"))
    assert in_admissible_range(derive(2, 2, "log(1/5)"))


def test_pf_check_bernoulli_exact():
    p = derive(5, 3, "log(5/2)")
    rep = pf1_pf2_check(p, bernoulli_for(p))
    assert rep.pf1_residual == 0 and rep.pf2_residual == 0 and rep.mode == "exact"


def test_pf1_wrong_mass_detected():
    p = derive(5, 3, "log(5/2)")
    rep = pf1_pf2_check(p, bernoulli_for(p), trace_mass=Fraction(1, 3))
    assert rep.pf1_residual == Fraction(1, 3) and not rep.passed()


def test_gicar():
    g = gicar_solve(derive(4, 3, "log(2)"))
    assert g.r == Fraction(1, 2) and g.type_lambda == Fraction(1, 2)
    g2 = gicar_solve(derive(4, 2, "log(2)"))
    assert g2.tracial_simplex and g2.type_lambda == Fraction(1, 2)
    with pytest.raises(ValueError):
        gicar_solve(derive(4, 3, "log(4)"))


def test_params_json_round_trip():
    p = derive(3, 2, "affine(1/3)")
    assert derive(p.d, p.s, p.to_json()["beta"]) == p
