"""JSON encoding of sequences, measures, parameters, data and matrices.

Rationals travel as ``"num/den"`` strings and floats as JSON numbers, so a
round trip never changes the arithmetic mode.  Every loader validates
against the versioned schemas shipped in ``kmsflow/schemas`` and raises
:class:`InputError` on malformed input.
"""

from __future__ import annotations

import json
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from typing import Any, Union

import jsonschema
from referencing import Registry, Resource

from .classify import (
    AperiodicOrbit,
    BernoulliPoint,
    BoundaryPoint,
    Gicar,
    KmsDatum,
    PeriodicOrbit,
    ShiftInvariant,
    thue_morse_coboundary,
)
from .exact import ExactWeight
from .kms import KmsParams, derive
from .markov import MarkovOp
from .measure import Atomic, Bernoulli, CylinderTable, MeasureRep
from .symbolic import BiSeq, EventuallyPeriodic, OneSided, SubstitutionPoint, ToeplitzSeed, periodic, word, word_str

SCHEMA_VERSION = 1
SCHEMA_NAMES = ("common", "sequence", "params", "measure", "datum", "verdict", "matrix")


class InputError(ValueError):
    """Malformed or schema-violating input."""


# ---------------------------------------------------------------------------
# schemas


@lru_cache(maxsize=None)
def schema(name: str) -> dict:
    text = resources.files("kmsflow").joinpath("schemas", f"{name}.json").read_text()
    return json.loads(text)


@lru_cache(maxsize=None)
def _registry() -> Registry:
    pairs = []
    for name in SCHEMA_NAMES:
        doc = schema(name)
        pairs.append((doc["$id"], Resource.from_contents(doc)))
    return Registry().with_resources(pairs)


def validate(obj: Any, name: str) -> None:
    validator = jsonschema.Draft202012Validator(schema(name), registry=_registry())
    errors = sorted(validator.iter_errors(obj), key=lambda e: list(e.path))
    if errors:
        e = errors[0]
        where = "/".join(map(str, e.path)) or "<root>"
        raise InputError(f"{name} JSON invalid at {where}: {e.message}")


# ---------------------------------------------------------------------------
# numbers


def enc_num(x) -> Union[str, float, int]:
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, bool):
        raise TypeError("bool is not a number")
    if isinstance(x, int):
        return f"{x}/1"
    return float(x)


def dec_num(x) -> Union[Fraction, float]:
    if isinstance(x, str):
        try:
            return Fraction(x)
        except ValueError as err:
            raise InputError(f"not a rational: {x!r}") from err
    if isinstance(x, int):
        return Fraction(x)
    return float(x)


# ---------------------------------------------------------------------------
# sequences


def sequence_to_json(z: BiSeq, with_offset: bool = True) -> dict:
    if isinstance(z, EventuallyPeriodic):
        out = {
            "kind": "eventually-periodic",
            "left": word_str(z.left),
            "core": word_str(z.core),
            "right": word_str(z.right),
            "origin": z.origin,
        }
    elif isinstance(z, SubstitutionPoint):
        out = {"kind": "substitution", "rule": [word_str(img) for img in z.rule], "seed": list(z.seed)}
    elif isinstance(z, ToeplitzSeed):
        out = {"kind": "toeplitz", "k": list(z.k_seq), "depth": z.depth}
    elif isinstance(z, OneSided):
        out = {"kind": "one-sided", "base": sequence_to_json(z.base)}
    else:
        raise TypeError(f"cannot serialise {type(z).__name__}")
    if with_offset:
        out["offset"] = z.offset
    return out


def sequence_from_json(obj: dict, validated: bool = False) -> BiSeq:
    if not validated:
        validate(obj, "sequence")
    kind, off = obj["kind"], obj.get("offset", 0)
    try:
        if kind == "periodic":
            return periodic(obj["word"], offset=off)
        if kind == "eventually-periodic":
            return EventuallyPeriodic(
                word(obj["left"]), word(obj.get("core", "")), word(obj["right"]), obj.get("origin", 0), offset=off
            )
        if kind == "substitution":
            rule = tuple(tuple(int(c) for c in img) for img in obj["rule"])
            return SubstitutionPoint(rule, tuple(obj["seed"]), offset=off)
        if kind == "toeplitz":
            return ToeplitzSeed(tuple(obj["k"]), obj.get("depth", 1), offset=off)
        if kind == "one-sided":
            return OneSided(sequence_from_json(obj["base"], True), offset=off)
    except ValueError as err:
        raise InputError(str(err)) from err
    raise InputError(f"unknown sequence kind {kind!r}")


# ---------------------------------------------------------------------------
# measures


def _weight_to_json(w):
    return w.to_json() if isinstance(w, ExactWeight) else enc_num(w)


def _weight_from_json(obj):
    if isinstance(obj, dict):
        return ExactWeight.from_json(obj)
    return dec_num(obj)


def measure_to_json(mu: MeasureRep) -> dict:
    if isinstance(mu, Atomic):
        out = {
            "kind": "atomic",
            "version": SCHEMA_VERSION,
            "normalized": mu.normalized,
            "two_sided": mu.two_sided,
            "atoms": [
                {"point": sequence_to_json(x, with_offset=False), "shift": x.offset, "weight": _weight_to_json(w)}
                for x, w in mu.atoms
            ],
        }
        if mu.tail_mass:
            out["tail"] = {"mass": enc_num(mu.tail_mass), "prefix": word_str(mu.tail_prefix)}
        if mu.defect:
            out["defect"] = enc_num(mu.defect)
        return out
    if isinstance(mu, Bernoulli):
        return {"kind": "bernoulli", "version": SCHEMA_VERSION, "p": enc_num(mu.p), "two_sided": mu.two_sided}
    if isinstance(mu, CylinderTable):
        return {
            "kind": "cylinder-table",
            "version": SCHEMA_VERSION,
            "start": mu.start,
            "depth": mu.depth,
            "masses": {word_str(w): enc_num(m) for w, m in sorted(mu.masses.items())},
        }
    raise TypeError(f"not a measure: {type(mu).__name__}")


def measure_from_json(obj: dict) -> MeasureRep:
    validate(obj, "measure")
    kind = obj["kind"]
    try:
        if kind == "atomic":
            atoms = []
            for a in obj["atoms"]:
                x = sequence_from_json(a["point"], True)
                atoms.append((x.shift(a.get("shift", 0)), _weight_from_json(a["weight"])))
            tail = obj.get("tail")
            return Atomic(
                tuple(atoms),
                normalized=obj.get("normalized", True),
                tail_mass=dec_num(tail["mass"]) if tail else 0,
                tail_prefix=word(tail["prefix"]) if tail else (),
                defect=dec_num(obj["defect"]) if "defect" in obj else 0,
                two_sided=obj.get("two_sided", True),
            )
        if kind == "bernoulli":
            return Bernoulli(dec_num(obj["p"]), obj.get("two_sided", False))
        if kind == "cylinder-table":
            masses = {word(w): dec_num(m) for w, m in obj["masses"].items()}
            return CylinderTable(obj["start"], obj["depth"], masses)
    except (ValueError, TypeError) as err:
        raise InputError(str(err)) from err
    raise InputError(f"unknown measure kind {kind!r}")


# ---------------------------------------------------------------------------
# parameters, data, matrices


def params_to_json(p: KmsParams) -> dict:
    return p.to_json()


def params_from_json(obj: dict) -> KmsParams:
    validate(obj, "params")
    try:
        return derive(obj["d"], obj["s"], obj["beta"])
    except (ValueError, ZeroDivisionError) as err:
        raise InputError(str(err)) from err


def datum_from_json(obj: dict) -> KmsDatum:
    validate(obj, "datum")
    params = params_from_json(obj["params"])
    fam = obj["family"]
    kind = fam["kind"]
    try:
        if kind == "periodic-orbit":
            family = PeriodicOrbit(sequence_from_json(fam["y"], True))
        elif kind == "aperiodic-orbit":
            family = AperiodicOrbit(sequence_from_json(fam["z"], True), fam.get("window", 4096))
        elif kind == "bernoulli-point":
            family = BernoulliPoint()
        elif kind == "shift-invariant":
            family = ShiftInvariant(fam["description"], fam.get("period"))
        elif kind == "coboundary":
            family, _ = thue_morse_coboundary(params, depth=fam.get("depth", 8))
        elif kind == "boundary-point":
            family = BoundaryPoint(sequence_from_json(fam["y"], True) if "y" in fam else None)
        else:
            family = Gicar()
    except ValueError as err:
        raise InputError(str(err)) from err
    return KmsDatum(params, family)


def matrix_from_json(obj) -> MarkovOp:
    validate(obj, "matrix")
    try:
        return MarkovOp.from_json(obj)
    except (ValueError, TypeError) as err:
        raise InputError(str(err)) from err


def dumps(obj: Any) -> str:
    """Deterministic JSON text (sorted keys, fixed separators)."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
