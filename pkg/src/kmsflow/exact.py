"""Exact arithmetic for weights of the form ``coeff * lam**e``.

``lam`` is a fixed positive rational and ``e`` a rational exponent.  Weights
are kept in a canonical form with the exponent reduced into ``[0, 1)``; the
integer part of the exponent is folded into the rational coefficient.  A
:class:`WeightSum` is a finite sum of such terms over one base.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Union

import mpmath

Number = Union[int, Fraction, float]


def as_fraction(x: Number | str) -> Fraction:
    if isinstance(x, float):
        raise TypeError(f"refusing to convert float {x!r} to an exact fraction")
    return Fraction(x)


def is_exact(x: object) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def _split(lam: Fraction, exponent: Fraction) -> tuple[Fraction, Fraction]:
    """(lam**floor(e), frac(e))."""
    if lam == 1:
        return Fraction(1), Fraction(0)
    whole = math.floor(exponent)
    return lam**whole, exponent - whole


@dataclass(frozen=True)
class ExactWeight:
    coeff: Fraction
    lam: Fraction
    exponent: Fraction

    def __post_init__(self) -> None:
        lam = Fraction(self.lam)
        if lam <= 0:
            raise ValueError("lambda must be positive")
        coeff, exp = Fraction(self.coeff), Fraction(self.exponent)
        if coeff < 0:
            raise ValueError("weights are nonnegative")
        scale, exp = _split(lam, exp)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "coeff", coeff * scale)
        object.__setattr__(self, "exponent", exp)

    @classmethod
    def power(cls, lam: Number, exponent: Number) -> "ExactWeight":
        return cls(Fraction(1), Fraction(lam), Fraction(exponent))

    def __mul__(self, other: "ExactWeight | int | Fraction") -> "ExactWeight":
        if isinstance(other, ExactWeight):
            if other.lam != self.lam:
                raise ValueError("cannot multiply weights with different bases")
            return ExactWeight(self.coeff * other.coeff, self.lam, self.exponent + other.exponent)
        if is_exact(other):
            return ExactWeight(self.coeff * other, self.lam, self.exponent)
        return NotImplemented

    __rmul__ = __mul__

    def __float__(self) -> float:
        if self.exponent == 0:
            return float(self.coeff)
        return float(self.coeff) * float(self.lam) ** float(self.exponent)

    def as_sum(self) -> "WeightSum":
        return WeightSum(self.lam, {self.exponent: self.coeff})

    def __add__(self, other):
        return self.as_sum() + other

    __radd__ = __add__

    def __sub__(self, other):
        return self.as_sum() - other

    def __rsub__(self, other):
        return other - self.as_sum()

    def to_json(self) -> dict:
        return {"coeff": _frac_str(self.coeff), "lambda": _frac_str(self.lam), "exponent": _frac_str(self.exponent)}

    @classmethod
    def from_json(cls, obj: Mapping) -> "ExactWeight":
        return cls(Fraction(obj["coeff"]), Fraction(obj["lambda"]), Fraction(obj["exponent"]))


def _frac_str(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


class WeightSum:
    """Formal sum ``sum_e c_e lam**e`` with canonical exponents in [0, 1).

    Two sums that are equal as formal expressions are equal as numbers, so
    ``is_zero`` certifies vanishing.  For exponents with denominator <= 2
    the sign is decided exactly; otherwise 60-digit arithmetic is used.
    """

    __slots__ = ("lam", "terms")

    def __init__(self, lam: Number, terms: Mapping[Fraction, Fraction] | None = None):
        self.lam = Fraction(lam)
        self.terms: dict[Fraction, Fraction] = {}
        for e, c in (terms or {}).items():
            self._add_term(Fraction(e), Fraction(c))

    def _add_term(self, e: Fraction, c: Fraction) -> None:
        scale, e = _split(self.lam, e)
        c = c * scale
        v = self.terms.get(e, Fraction(0)) + c
        if v == 0:
            self.terms.pop(e, None)
        else:
            self.terms[e] = v

    @classmethod
    def zero(cls, lam: Number) -> "WeightSum":
        return cls(lam)

    @classmethod
    def from_counts(cls, lam: Number, counts: Mapping[Fraction, int]) -> "WeightSum":
        """``sum count_e * lam**e``, grouped so each residue class costs one division."""
        lam = Fraction(lam)
        out = cls(lam)
        by_frac: dict[Fraction, list[tuple[int, int]]] = {}
        for e, n in counts.items():
            e = Fraction(e)
            whole = math.floor(e) if lam != 1 else 0
            frac = e - whole if lam != 1 else Fraction(0)
            by_frac.setdefault(frac, []).append((whole, int(n)))
        a, b = lam.numerator, lam.denominator
        for frac, items in by_frac.items():
            lo = min(w for w, _ in items)
            hi = max(w for w, _ in items)
            # lam**w = a**w / b**w ; scale everything by a**-lo b**hi to stay integral
            total = sum(n * a ** (w - lo) * b ** (hi - w) for w, n in items)
            out._add_term(frac, total * Fraction(a) ** lo / Fraction(b) ** hi)
        return out

    def copy(self) -> "WeightSum":
        out = WeightSum(self.lam)
        out.terms = dict(self.terms)
        return out

    def _coerce(self, other) -> "WeightSum":
        if isinstance(other, WeightSum):
            if other.lam != self.lam:
                raise ValueError("cannot combine sums with different bases")
            return other
        if isinstance(other, ExactWeight):
            if other.lam != self.lam:
                raise ValueError("cannot combine sums with different bases")
            return other.as_sum()
        if is_exact(other):
            return WeightSum(self.lam, {Fraction(0): Fraction(other)})
        raise TypeError(f"cannot combine WeightSum with {type(other).__name__}")

    def __add__(self, other) -> "WeightSum":
        other = self._coerce(other)
        out = self.copy()
        for e, c in other.terms.items():
            out._add_term(e, c)
        return out

    __radd__ = __add__

    def __neg__(self) -> "WeightSum":
        return WeightSum(self.lam, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "WeightSum":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "WeightSum":
        return self._coerce(other) - self

    def __mul__(self, other) -> "WeightSum":
        other = self._coerce(other)
        out = WeightSum(self.lam)
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                out._add_term(e1 + e2, c1 * c2)
        return out

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not self.terms

    def __float__(self) -> float:
        lam = float(self.lam)
        return math.fsum(float(c) * lam ** float(e) for e, c in self.terms.items())

    def sign(self) -> int:
        if not self.terms:
            return 0
        exps = set(self.terms)
        if all(e.denominator <= 2 for e in exps):
            return _quadratic_sign(
                self.terms.get(Fraction(0), Fraction(0)),
                self.terms.get(Fraction(1, 2), Fraction(0)),
                self.lam,
            )
        with mpmath.workdps(60):
            lam = mpmath.mpf(self.lam.numerator) / self.lam.denominator
            v = mpmath.fsum(
                mpmath.mpf(c.numerator) / c.denominator * lam ** (mpmath.mpf(e.numerator) / e.denominator)
                for e, c in self.terms.items()
            )
        return int(mpmath.sign(v))

    def __eq__(self, other) -> bool:
        try:
            return (self - other).is_zero()
        except (TypeError, ValueError):
            return NotImplemented

    def __le__(self, other) -> bool:
        return (self - other).sign() <= 0

    def __lt__(self, other) -> bool:
        return (self - other).sign() < 0

    def __ge__(self, other) -> bool:
        return (self - other).sign() >= 0

    def __gt__(self, other) -> bool:
        return (self - other).sign() > 0

    __hash__ = None  # mutable-looking container; compare, don't hash

    def __repr__(self) -> str:
        parts = [f"{c}*{self.lam}^{e}" if e else str(c) for e, c in sorted(self.terms.items())]
        return "WeightSum(" + (" + ".join(parts) or "0") + ")"


def _quadratic_sign(a: Fraction, b: Fraction, lam: Fraction) -> int:
    """Sign of a + b*sqrt(lam), exactly."""
    sa = (a > 0) - (a < 0)
    sb = (b > 0) - (b < 0)
    if sb == 0:
        return sa
    if sa == 0 or sa == sb:
        return sb
    # opposite signs: compare a^2 with b^2 lam
    d = a * a - b * b * lam
    return sa if d > 0 else (sb if d < 0 else 0)


def weight_sum(weights: Iterable[ExactWeight], lam: Number) -> WeightSum:
    out = WeightSum(lam)
    for w in weights:
        out._add_term(w.exponent, w.coeff)
    return out
