"""Worked examples and invariants attached to each operation."""

import json
import math
from fractions import Fraction

import pytest
from sympy import Matrix

from kmsflow.classify import KmsDatum, PeriodicOrbit, check_condition_C, classify
from kmsflow.cli import main
from kmsflow.cocycle import (
    bound_scan,
    c,
    check_cocycle_identity,
    solve_transfer,
)
from kmsflow.exact import ExactWeight
from kmsflow.kms import derive, gicar_solve, pf1_pf2_check
from kmsflow.markov import (
    MarkovOp,
    cycle_operator,
    harmonic_fixed_space,
    simulate_P_convergence,
    tail_decomposition,
)
from kmsflow.measure import (
    Atomic,
    Bernoulli,
    bernoulli_for,
    coboundary_measure,
    dirac,
    integrate,
    m_p_y,
    nu_aperiodic_truncated,
    nu_periodic,
    periodic_orbit_table,
    pf4_residual,
    quasi_invariance_residual,
    tv_distance,
    word_distribution,
)
from kmsflow.symbolic import EventuallyPeriodic, constant, minimal_period, periodic, step_sequence, thue_morse, toeplitz_words

H = Fraction(1, 2)


# symbolic


def test_left_tail_of_eventually_periodic():
    z = EventuallyPeriodic((0,), (), (0, 1))
    assert z.coord(-5) == 0


def test_periodic_shift_by_period():
    assert periodic("01").shift(2).word_at(-10, 10) == periodic("01").word_at(-10, 10)


def test_thue_morse_has_no_period_up_to_64():
    assert minimal_period(thue_morse(), 64) is None


def test_toeplitz_level_zero_and_two():
    assert toeplitz_words((3,), 0) == ((1,), (0,), 1)
    a, _, length = toeplitz_words((3, 3), 2)
    assert length == 9 and sum(a) == 5


def test_toeplitz_nesting_to_level_eight():
    for ks in ((3,) * 9, tuple(j + 2 for j in range(1, 10))):
        for n in range(8):
            a_n, _, ln = toeplitz_words(ks, n)
            assert toeplitz_words(ks, n + 1)[0][:ln] == a_n


# cocycle


def test_thue_morse_first_values():
    assert [c(thue_morse(), n, H).value for n in (0, 1, 2, 3)] == [0, -H, 0, H]


def test_trivial_identity_pairs():
    assert all(ch.holds for ch in check_cocycle_identity(thue_morse(), [(0, 5), (3, -3)], H))


@pytest.mark.parametrize("z,q", [(constant(0), 0), (constant(1), 1)])
def test_constant_bound(z, q):
    assert bound_scan(z, Fraction(q), 100) == (0, 0)


def test_periodic_vanishing():
    for w in ("01", "011", "00101", "1110"):
        z = periodic(w)
        q = Fraction(w.count("1"), len(w))
        assert c(z, len(w), q).value == 0
        assert c(z, -len(w), q).value == 0


def test_radon_nikodym_chain():
    z, q, lam = thue_morse(), H, Fraction(2, 3)
    for k in range(-64, 65):
        lhs = ExactWeight.power(lam, c(z, k + 1, q).value)
        rhs = ExactWeight.power(lam, c(z, k, q).value) * ExactWeight.power(lam, z.coord(k) - q)
        assert lhs.as_sum() == rhs.as_sum()


def test_transfer_constant_sequence():
    h = solve_transfer([constant(0)], Fraction(0), 4, span=32, check_points=5, check_n=8)
    assert set(h.table.values()) == {0.0} and h.residual == 0


def test_transfer_periodic_two_values_residual_zero():
    h = solve_transfer([periodic("01")], H, 4, span=64, check_points=10, check_n=16)
    values = sorted(h.table.values())
    assert values[-1] - values[0] == pytest.approx(0.5) and h.residual < 1e-12


# kms


def test_derive_half_log_two():
    p = derive(3, 2, "affine(1/2)")
    assert p.lam == H and p.q == H
    assert float(p.p) == pytest.approx(math.sqrt(2) - 1)
    assert float(p.trace_mass) == pytest.approx(math.sqrt(2) / 3)


def test_derive_s_equals_t():
    p = derive(4, 2, "log(2)")
    assert p.lam == 1 and p.q is None and p.trace_mass == H


def test_derive_s_equals_d():
    p = derive(2, 2, "log(2)")
    assert p.lam is None and p.q is None and p.p is None and p.trace_mass == 1


def test_wrong_bernoulli_pf2_lower_bound():
    params = derive(5, 3, "log(5/2)")
    for p_other in (Fraction(1, 4), Fraction(3, 5), Fraction(9, 10)):
        rep = pf1_pf2_check(params, Bernoulli(p_other))
        bound = (params.s - params.t) * abs(params.p - p_other) * params.exp_neg_beta
        assert rep.pf2_residual >= bound


def test_depth_one_marginal_close_to_p():
    params = derive(9, 5, "log(9/2)")
    for p_other in (Fraction(1, 3), Fraction(2, 3)):
        eps = pf4_residual(Bernoulli(p_other), params, 3)
        assert abs(p_other - params.p) <= eps * params.exp_beta / (params.s - params.t)


def test_q_decreasing_in_beta():
    qs = [derive(5, 3, math.log(2) + i * (math.log(1.5)) / 10).q for i in range(11)]
    assert all(a > b for a, b in zip(qs, qs[1:]))
    assert qs[0] == pytest.approx(1) and qs[-1] == pytest.approx(0, abs=1e-12)


def test_gicar_top_endpoint():
    g = gicar_solve(derive(4, 3, "log(3)"))
    assert g.r == 1 and g.type_lambda == Fraction(1, 3)


# measure


def test_integrate_examples():
    assert integrate(Bernoulli(H), 0, {(0,): 1}) == H
    assert integrate(dirac(constant(0), two_sided=False), 0, {(1,): 1}) == 0
    mu = m_p_y(H, constant(1))
    assert integrate(mu, 0, {(0,): 1}) == H and integrate(mu, 0, {(1,): 1}) == H


def test_m_p_y_weights_at_three_quarters():
    mu = m_p_y(Fraction(3, 4), constant(1), n_terms=6)
    assert [w for _, w in mu.atoms] == [Fraction(1, 4) * Fraction(3, 4) ** n for n in range(6)]


def test_bernoulli_endpoints():
    assert derive(5, 3, "log(3)").p == 1
    assert derive(5, 3, "log(2)").p == 0


def test_nu_periodic_constant_points():
    nu, params = nu_periodic(constant(0), 5, 3)
    assert len(nu.atoms) == 1 and params.beta.exp_exact == 3
    nu, params = nu_periodic(constant(1), 5, 3)
    assert len(nu.atoms) == 1 and params.beta.exp_exact == 2


def test_truncated_single_atom():
    params = derive(3, 2, "affine(1/2)")
    z = thue_morse()
    nu, defect = nu_aperiodic_truncated(z, params, 0)
    expected = 1 + float(params.lam) ** float(c(z, 1, H).value)
    assert len(nu.atoms) == 1 and defect == pytest.approx(expected)


def test_tv_between_consecutive_truncations():
    params = derive(3, 2, "affine(1/2)")
    z = step_sequence()
    lam = float(params.lam)
    for n in (2, 5, 9):
        nu_n, _ = nu_aperiodic_truncated(z, params, n)
        nu_next, _ = nu_aperiodic_truncated(z, params, n + 1)
        norm = float(nu_n.exact_total())
        bound = (lam ** float(c(z, -(n + 1), H).value) + lam ** float(c(z, n + 1, H).value)) / norm
        assert tv_distance(nu_n, nu_next, 0) <= bound + 1e-15


def test_shift_invariant_is_quasi_invariant_at_lambda_one():
    table = periodic_orbit_table((0, 1, 1, 0, 1), -3, 6)
    for q in (Fraction(0), Fraction(1, 3), Fraction(1)):
        assert quasi_invariance_residual(table, 1, q, 5) == 0


def test_swapped_weights_fail():
    nu, params = nu_periodic(periodic("011"), 5, 3)
    (x0, w0), (x1, w1), rest = nu.atoms[0], nu.atoms[1], nu.atoms[2:]
    swapped = Atomic(((x0, w1), (x1, w0)) + tuple(rest))
    assert quasi_invariance_residual(swapped, params.lam, params.q, 4) > 0


def test_s_equals_t_extension_is_natural():
    from kmsflow.measure import extend_to_two_sided

    params = derive(4, 2, "log(2)")
    mu = Bernoulli(Fraction(1, 3))
    table = extend_to_two_sided(mu, params, 2, 2)
    assert table.masses == word_distribution(Bernoulli(Fraction(1, 3), two_sided=True), -2, 4)


def test_coboundary_with_zero_h_returns_nu0():
    h = solve_transfer([periodic("01")], H, 2, span=16, check_points=2, check_n=4)
    zero = type(h)(h.depth, h.q, {w: 0.0 for w in h.table}, h.base, 0.0)
    nu0 = periodic_orbit_table((0, 1), -2, 4)
    out = coboundary_measure(nu0, zero, H)
    assert all(out.masses[w] == pytest.approx(float(m)) for w, m in nu0.masses.items())


def test_coboundary_on_two_cycle_reproduces_orbit_measure():
    params = derive(3, 2, "affine(1/2)")
    h = solve_transfer([periodic("01")], H, 2, span=32, check_points=5, check_n=8)
    nu0 = periodic_orbit_table((0, 1), -2, 4)
    got = coboundary_measure(nu0, h, params.lam)
    nu, _ = nu_periodic(periodic("01"), 3, 2)
    want = word_distribution(nu, -2, 4)
    assert set(got.masses) == set(want)
    for w in want:
        assert got.masses[w] == pytest.approx(float(want[w]), rel=1e-12)


# classify


def test_classify_invariant_under_basepoint():
    params = derive(5, 3, "affine(2/3)")
    verdicts = {classify(KmsDatum(params, PeriodicOrbit(periodic("001").shift(k)))).to_json().__repr__() for k in range(6)}
    assert len(verdicts) == 1


def test_condition_c_step_sequence_at_root_six():
    cert = check_condition_C(step_sequence(), derive(5, 3, "affine(1/2)"), 2048)
    assert cert.verdict == "satisfied-within-window"


# markov


def test_identity_fixes_everything():
    assert len(harmonic_fixed_space(MarkovOp([[1, 0, 0], [0, 1, 0], [0, 0, 1]]))) == 3


def test_tail_of_power_is_sigma_power():
    P = MarkovOp([[0, 1, 0, 0], [0, 0, 1, 0], [1, 0, 0, 0], [H, 0, 0, H]])
    a = tail_decomposition(P)
    for k in range(1, 5):
        b = tail_decomposition(P.power(k))
        assert b.basis == a.basis
        assert Matrix(b.translation) == Matrix(a.translation) ** k


def test_constants_converge_immediately():
    rep = simulate_P_convergence(cycle_operator(3), [2, 2, 2], [3, 3, 3])
    assert rep.converged and rep.steps == 0 and rep.limit == [6.0, 6.0, 6.0]


def test_aperiodic_chain_converges_to_stationary_mean():
    rows = [[H, H, 0], [0, H, H], [H, 0, H]]
    f, g = [1, 2, 3], [2, 0, 1]
    rep = simulate_P_convergence(MarkovOp(rows), f, g)
    mean = sum(a * b for a, b in zip(f, g)) / 3  # uniform stationary vector
    assert rep.converged and rep.limit == pytest.approx([mean] * 3)


# cli


def run_json(capsys, *argv):
    code = main(list(argv))
    return code, json.loads(capsys.readouterr().out)


def test_cli_range_examples(capsys):
    assert run_json(capsys, "range", "--d", "2", "--s", "2")[1]["text"] == "(-inf, log 2], beta != 0"
    assert run_json(capsys, "range", "--d", "4", "--s", "2")[1]["text"] == "{log 2}"


def test_cli_construct_examples(capsys):
    _, out = run_json(capsys, "construct", "periodic", "--word", "01", "--d", "3", "--s", "2")
    assert out["forced_beta"] == {"affine": {"x": "1/2"}}
    assert out["forced_beta_value"] == pytest.approx(0.5 * math.log(2))
    _, out = run_json(capsys, "construct", "bernoulli", "--d", "3", "--s", "2", "--beta", "log(3/2)")
    assert out["measure"]["p"] == "1/2"
    _, out = run_json(capsys, "construct", "toeplitz", "--k", "3,3,3", "--n", "2")
    assert out["checks"]["passed"] and out["defect_within_bound"]
    assert Fraction(out["defect_bound"]) <= 1


def test_bernoulli_for_matches_cli_default():
    params = derive(3, 2, "log(3/2)")
    assert bernoulli_for(params).p == H
