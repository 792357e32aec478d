import pytest

from kmsflow.symbolic import (
    CylinderSet,
    EventuallyPeriodic,
    OneSided,
    SubstitutionPoint,
    ToeplitzSeed,
    constant,
    is_primitive,
    minimal_period,
    period_certificate,
    periodic,
    step_sequence,
    thue_morse,
    toeplitz_lengths,
    toeplitz_words,
    word,
    word_str,
)


def test_word_round_trip():
    assert word("0110") == (0, 1, 1, 0)
    assert word_str((1, 0, 1)) == "101"


def test_periodic_coordinates():
    y = periodic("01")
    assert y.word_at(-4, 4) == (0, 1, 0, 1, 0, 1, 0, 1)
    assert y.shift(1).word_at(0, 4) == (1, 0, 1, 0)


def test_shift_composes():
    z = thue_morse()
    assert z.shift(3).shift(-5).word_at(-10, 10) == z.shift(-2).word_at(-10, 10)
    assert z.shift(7).coord(2) == z.coord(9)


def test_step_sequence():
    z = step_sequence()
    assert z.word_at(-3, 3) == (0, 0, 0, 1, 1, 1)


def test_eventually_periodic_core():
    z = EventuallyPeriodic((0,), (1, 1, 0), (1,), origin=2)
    assert z.word_at(0, 7) == (0, 0, 1, 1, 0, 1, 1)


def test_rejects_non_binary():
    with pytest.raises(ValueError):
        EventuallyPeriodic((2,), (), (1,))
    with pytest.raises(ValueError):
        EventuallyPeriodic((), (), (1,))


def test_cylinder_contains():
    z = thue_morse()
    assert CylinderSet(0, (0, 1, 1, 0)).contains(z)
    assert not CylinderSet(0, (1,)).contains(z)
    assert CylinderSet(5, ()).contains(z)


def test_thue_morse_right_half():
    assert thue_morse().word_at(0, 8) == (0, 1, 1, 0, 1, 0, 0, 1)


def test_thue_morse_matches_binary_digit_parity():
    # independent oracle: z_j is the parity of the number of ones in j
    z = thue_morse().word_at(0, 2**12)
    assert all(z[j] == bin(j).count("1") % 2 for j in range(2**12))


def test_thue_morse_left_half_is_fixed_point_of_square():
    # seed (0, 0): the left half reads ... zeta^{2k}(0) ending at -1
    left = thue_morse().word_at(-16, 0)
    assert left == thue_morse().word_at(0, 16)


def test_substitution_seed_must_be_fixed():
    with pytest.raises(ValueError):
        SubstitutionPoint(((0, 1), (1, 0)), (0, 2))


def test_toeplitz_k33():
    assert ToeplitzSeed((3, 3)).word_at(0, 9) == (1, 0, 1, 1, 0, 0, 1, 0, 1)
    assert ToeplitzSeed((3, 3)).word_at(-3, 0) == (0, 0, 0)


def test_toeplitz_words_recursion():
    a, b, length = toeplitz_words((3,), 1)
    assert (a, b, length) == ((1, 0, 1), (1, 0, 0), 3)
    a2, b2, l2 = toeplitz_words((3, 3), 2)
    assert a2 == a + b + a and b2 == a + b + b and l2 == 9


def test_toeplitz_prefix_consistency():
    ks = (3, 4, 5, 6)
    for n in range(1, 4):
        a_n, _, ln = toeplitz_words(ks, n)
        a_next, _, _ = toeplitz_words(ks, n + 1)
        assert a_next[:ln] == a_n


def test_toeplitz_seed_repeats_last_k():
    z = ToeplitzSeed((3,))
    a, _, _ = toeplitz_words((3,) * 5, 5)
    assert z.word_at(0, len(a)) == a


def test_toeplitz_rejects_small_k():
    with pytest.raises(ValueError):
        toeplitz_words((2, 3), 2)


def test_toeplitz_lengths():
    assert toeplitz_lengths((3, 4, 5), 3) == [1, 3, 12, 60]


@pytest.mark.parametrize(
    "z,period",
    [(periodic("01"), 2), (constant(1), 1), (periodic("0101"), 2), (periodic("011").shift(5), 3)],
)
def test_period_certificate_periodic(z, period):
    cert = period_certificate(z, 16)
    assert cert.period == period and cert.exact


def test_period_certificate_aperiodic():
    assert minimal_period(thue_morse(), 32) is None
    assert minimal_period(step_sequence(), 8) is None
    # the jump is far from 0 but still rules out periodicity exactly
    assert minimal_period(step_sequence().shift(100), 8) is None


def test_atom_keys():
    assert periodic("01").key() == periodic("01").shift(2).key()
    assert periodic("01").key() != periodic("01").shift(1).key()
    assert step_sequence().shift(20).key() != step_sequence().shift(21).key()


def test_one_sided_prefixes_zeros():
    y = OneSided(periodic("1"))
    assert y.shift(-3).word_at(0, 5) == (0, 0, 0, 1, 1)
    assert y.word_at(-2, 2) == (0, 0, 1, 1)


@pytest.mark.parametrize("w,expected", [((0, 1), True), ((0, 1, 0, 1), False), ((1,), True), ((), False)])
def test_is_primitive(w, expected):
    assert is_primitive(w) is expected
