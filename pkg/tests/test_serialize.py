from fractions import Fraction

import pytest

from kmsflow.kms import derive
from kmsflow.measure import Bernoulli, CylinderTable, m_p_y, nu_periodic, word_distribution
from kmsflow.serialize import (
    InputError,
    datum_from_json,
    dec_num,
    dumps,
    enc_num,
    matrix_from_json,
    measure_from_json,
    measure_to_json,
    params_from_json,
    sequence_from_json,
    sequence_to_json,
    validate,
)
from kmsflow.symbolic import OneSided, ToeplitzSeed, constant, periodic, step_sequence, thue_morse


def test_numbers():
    assert enc_num(Fraction(3, 4)) == "3/4" and dec_num("3/4") == Fraction(3, 4)
    assert isinstance(dec_num(0.25), float)
    with pytest.raises(InputError):
        dec_num("x/y")


@pytest.mark.parametrize(
    "z",
    [periodic("011").shift(4), step_sequence(), thue_morse(seed=(1, 0)), ToeplitzSeed((3, 4), 3), OneSided(constant(1))],
)
def test_sequence_round_trip(z):
    back = sequence_from_json(sequence_to_json(z))
    assert back.word_at(-40, 40) == z.word_at(-40, 40)


def test_periodic_kind():
    assert sequence_from_json({"kind": "periodic", "word": "01"}).word_at(0, 4) == (0, 1, 0, 1)


@pytest.mark.parametrize(
    "obj",
    [
        {"kind": "periodic", "word": "012"},
        {"kind": "nope"},
        {"kind": "toeplitz", "k": [2]},
        {"kind": "substitution", "rule": ["01", "10"], "seed": [0, 2]},
    ],
)
def test_bad_sequences(obj):
    with pytest.raises(InputError):
        sequence_from_json(obj)


def test_measure_round_trips():
    nu, _ = nu_periodic(periodic("01"), 3, 2)
    back = measure_from_json(measure_to_json(nu))
    assert word_distribution(back, -2, 4) == word_distribution(nu, -2, 4)
    mu = m_p_y(Fraction(1, 2), constant(1), n_terms=8)
    back = measure_from_json(measure_to_json(mu))
    assert word_distribution(back, 0, 6) == word_distribution(mu, 0, 6)
    for m in (Bernoulli(0.3), CylinderTable(-1, 1, {(0,): Fraction(1, 3), (1,): Fraction(2, 3)})):
        assert measure_to_json(measure_from_json(measure_to_json(m))) == measure_to_json(m)


def test_measure_schema_violation():
    with pytest.raises(InputError):
        measure_from_json({"kind": "bernoulli", "version": 1})
    with pytest.raises(InputError):
        measure_from_json({"kind": "cylinder-table", "version": 1, "start": 0, "depth": 1, "masses": {"0": "1/2"}})


def test_params():
    p = params_from_json({"d": 5, "s": 3, "beta": {"log_of": "5/2"}})
    assert p == derive(5, 3, "log(5/2)")
    with pytest.raises(InputError):
        params_from_json({"d": 5, "s": 1, "beta": 1.0})


def test_datum():
    obj = {
        "params": {"d": 3, "s": 2, "beta": {"affine": {"x": "1/2"}}},
        "family": {"kind": "periodic-orbit", "y": {"kind": "periodic", "word": "01"}},
    }
    datum = datum_from_json(obj)
    assert datum.family.y.word_at(0, 2) == (0, 1)


def test_matrix():
    P = matrix_from_json({"rows": [["1/2", "1/2"], [0, 1]]})
    assert P.exact
    with pytest.raises(InputError):
        matrix_from_json({"rows": [["1/2", "1/3"], [0, 1]]})


def test_verdict_schema():
    validate({"type": "II_1", "reduced_flow": {"kind": "translation"}, "time_direction": "forward"}, "verdict")
    with pytest.raises(InputError):
        validate({"type": "II_7", "reduced_flow": {}, "time_direction": "up"}, "verdict")


def test_dumps_deterministic():
    assert dumps({"b": 1, "a": [1, 2]}) == dumps({"a": [1, 2], "b": 1})
