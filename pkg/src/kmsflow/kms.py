"""Parameter algebra of the binary correspondence families.

The family is fixed by integers ``d >= 2`` and ``d/2 <= s <= d`` with
``t = d - s``; an inverse temperature ``beta`` then determines

* ``lam = t/s``                                   (defined iff t >= 1)
* ``q = (log s - beta) / (log s - log t)``        (defined iff 1 <= t < s)
* ``p = (e^beta - t) / (s - t)``                  (defined iff 1 <= t < s)
* ``trace_mass = e^beta / d``

``beta`` can be carried symbolically so that these stay exact rationals
whenever that is possible (see :class:`Beta`).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from sympy import integer_nthroot

Real = Union[int, Fraction, float]

_MAX_ROOT = 24


def _rational_root(x: Fraction, n: int) -> Optional[Fraction]:
    """The rational n-th root of x >= 0, if there is one."""
    num, exact_n = integer_nthroot(x.numerator, n)
    den, exact_d = integer_nthroot(x.denominator, n)
    if exact_n and exact_d:
        return Fraction(int(num), int(den))
    return None


def _rational_log_ratio(target: Fraction, base: Fraction) -> Optional[Fraction]:
    """Rational x with base**x == target, searching denominators up to 24."""
    if target <= 0 or base <= 0 or base == 1:
        return None
    approx = math.log(target) / math.log(base)
    for j in range(1, _MAX_ROOT + 1):
        i = round(approx * j)
        x = Fraction(i, j)
        if x.denominator != j:
            continue
        if i >= 0 and base**i == target**j:
            return x
        if i < 0 and (1 / base) ** (-i) == target**j:
            return x
    return None


@dataclass(frozen=True)
class Beta:
    """Inverse temperature with optional exact structure.

    ``exp_exact`` is e^beta when that is rational.  ``affine_x`` is the
    rational x with ``beta = x log s + (1 - x) log t`` when known; it makes
    ``q = 1 - x`` exact.
    """

    value: float
    exp_exact: Optional[Fraction] = None
    affine_x: Optional[Fraction] = None
    text: str = ""

    def __post_init__(self) -> None:
        if not math.isfinite(self.value):
            raise ValueError("beta must be finite")

    @classmethod
    def of(cls, value: float) -> "Beta":
        return cls(float(value), text=repr(float(value)))

    @classmethod
    def log_of(cls, r: Real | str) -> "Beta":
        r = Fraction(r)
        if r <= 0:
            raise ValueError("log argument must be positive")
        return cls(math.log(r), exp_exact=r, text=f"log({_fs(r)})")

    def __float__(self) -> float:
        return self.value

    def to_json(self):
        if self.affine_x is not None and self.text.startswith("affine"):
            return {"affine": {"x": _fs(self.affine_x)}}
        if self.exp_exact is not None:
            return {"log_of": _fs(self.exp_exact)}
        return self.value


def _fs(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


_LOG_RE = re.compile(r"^\s*log\s*\(?\s*([0-9/]+)\s*\)?\s*$")
_AFFINE_RE = re.compile(r"^\s*affine\s*\(\s*([-0-9/]+)\s*\)\s*$")


def parse_beta(spec, s: int, t: int) -> Beta:
    """Accept a float, ``"log(3/2)"``, ``"affine(1/2)"``, or the params-JSON forms."""
    if isinstance(spec, Beta):
        return resolve_beta(spec, s, t)
    if isinstance(spec, dict):
        if "log_of" in spec:
            return resolve_beta(Beta.log_of(spec["log_of"]), s, t)
        if "affine" in spec:
            return affine_beta(Fraction(spec["affine"]["x"]), s, t)
        raise ValueError(f"unrecognised beta object {spec!r}")
    if isinstance(spec, str):
        m = _LOG_RE.match(spec)
        if m:
            return resolve_beta(Beta.log_of(m.group(1)), s, t)
        m = _AFFINE_RE.match(spec)
        if m:
            return affine_beta(Fraction(m.group(1)), s, t)
        return Beta.of(float(spec))
    if isinstance(spec, Fraction):
        return Beta.of(float(spec))
    return Beta.of(float(spec))


def affine_beta(x: Fraction, s: int, t: int) -> Beta:
    """beta = x log s + (1 - x) log t."""
    x = Fraction(x)
    if t == 0:
        if x != 1:
            raise ValueError("affine beta needs t >= 1 unless x = 1")
        value = math.log(s)
    else:
        value = float(x) * math.log(s) + float(1 - x) * math.log(t)
    # e^beta = s^x t^(1-x), rational iff the j-th root below is
    j = x.denominator
    power = Fraction(s) ** x.numerator * (Fraction(t) ** (j - x.numerator) if t else 1)
    exp_exact = _rational_root(power, j) if t or x == 1 else None
    if x == 1:
        exp_exact = Fraction(s)
    return Beta(value, exp_exact=exp_exact, affine_x=x, text=f"affine({_fs(x)})")


def resolve_beta(beta: Beta, s: int, t: int) -> Beta:
    """Detect the affine coordinate of an exactly known e^beta."""
    if beta.affine_x is not None or beta.exp_exact is None or t < 1 or t == s:
        return beta
    r = beta.exp_exact
    if t == 1:
        x = _rational_log_ratio(r, Fraction(s))
    else:
        x = _rational_log_ratio(r / t, Fraction(s, t))
    if x is None:
        return beta
    return Beta(beta.value, exp_exact=r, affine_x=x, text=beta.text)


@dataclass(frozen=True)
class KmsParams:
    d: int
    s: int
    beta: Beta

    @property
    def t(self) -> int:
        return self.d - self.s

    @property
    def lam(self) -> Optional[Fraction]:
        if self.t < 1:
            return None
        return Fraction(self.t, self.s)

    @property
    def exact(self) -> bool:
        return self.beta.exp_exact is not None

    @property
    def exp_beta(self) -> Real:
        return self.beta.exp_exact if self.beta.exp_exact is not None else math.exp(self.beta.value)

    @property
    def exp_neg_beta(self) -> Real:
        e = self.exp_beta
        return 1 / e if isinstance(e, Fraction) else math.exp(-self.beta.value)

    @property
    def q(self) -> Optional[Real]:
        if not (1 <= self.t < self.s):
            return None
        if self.beta.affine_x is not None:
            return 1 - self.beta.affine_x
        ls, lt = math.log(self.s), math.log(self.t)
        return (ls - self.beta.value) / (ls - lt)

    @property
    def p(self) -> Optional[Real]:
        # for t = 0 the geometric parameter of m_{p,y} is trace_mass instead
        if not (1 <= self.t < self.s):
            return None
        return (self.exp_beta - self.t) / (self.s - self.t)

    @property
    def trace_mass(self) -> Real:
        return self.exp_beta / self.d

    @property
    def rn(self) -> tuple[Real, Real]:
        """(r0(0), r0(1)) = (s e^-beta, t e^-beta) = lam^(x0 - q) at x0 = 0, 1."""
        en = self.exp_neg_beta
        return self.s * en, self.t * en

    @property
    def branch(self) -> str:
        if self.t == 0:
            return "t=0"
        if self.t == self.s:
            return "t=s"
        if self.t == 1:
            return "t=1"
        return "2<=t<s"

    def to_json(self) -> dict:
        return {"d": self.d, "s": self.s, "beta": self.beta.to_json()}

    def derived_json(self) -> dict:
        def enc(x):
            if x is None:
                return None
            if isinstance(x, Fraction):
                return _fs(x)
            return float(x)

        return {
            "d": self.d,
            "s": self.s,
            "t": self.t,
            "beta": self.beta.value,
            "lambda": enc(self.lam),
            "q": enc(self.q),
            "p": enc(self.p),
            "trace_mass": enc(self.trace_mass),
            "mode": "exact" if self.exact else "float",
        }


def _check_ds(d: int, s: int) -> None:
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    if not (d <= 2 * s and s <= d):
        raise ValueError(f"s must satisfy d/2 <= s <= d, got d={d}, s={s}")
    if d == 2 and s == 1:
        raise ValueError("d=2, s=1 forces beta = log(d/2) = 0, which is excluded")


def derive(d: int, s: int, beta) -> KmsParams:
    """Build a validated :class:`KmsParams`; ``beta`` as in :func:`parse_beta`."""
    _check_ds(d, s)
    b = parse_beta(beta, s, d - s)
    if b.value == 0 or b.exp_exact == 1:
        raise ValueError("beta must be nonzero")
    return KmsParams(d, s, b)


@dataclass(frozen=True)
class BetaRange:
    """Interval of admissible beta; ``lower=None`` means -infinity."""

    lower: Optional[float]
    upper: float
    lower_closed: bool
    upper_closed: bool
    lower_text: str
    upper_text: str
    excludes_zero: bool = True

    @property
    def is_point(self) -> bool:
        return self.lower is not None and self.lower == self.upper

    def contains(self, beta: Beta | float, tol: float = 1e-12) -> bool:
        v = float(beta)
        if self.excludes_zero and v == 0:
            return False
        if v > self.upper + (tol if self.upper_closed else -tol):
            return False
        if self.lower is not None and v < self.lower - (tol if self.lower_closed else -tol):
            return False
        return True

    def describe(self) -> str:
        if self.is_point:
            return "{" + self.upper_text + "}"
        lo = "(-inf" if self.lower is None else ("[" if self.lower_closed else "(") + self.lower_text
        hi = self.upper_text + ("]" if self.upper_closed else ")")
        out = f"{lo}, {hi}"
        if self.excludes_zero and (self.lower is None or self.lower < 0) and self.upper > 0:
            out += ", beta != 0"
        return out

    def to_json(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "lower_closed": self.lower_closed,
            "upper_closed": self.upper_closed,
            "lower_text": self.lower_text,
            "upper_text": self.upper_text,
            "excludes_zero": self.excludes_zero,
            "text": self.describe(),
        }


def admissible_beta(d: int, s: int) -> BetaRange:
    """Temperatures at which infinite-type KMS states exist."""
    _check_ds(d, s)
    t = d - s
    if t == 0:
        return BetaRange(None, math.log(d), False, True, "-inf", f"log {d}")
    if t == s:
        v = math.log(Fraction(d, 2))
        return BetaRange(v, v, True, True, f"log {s}", f"log {s}")
    if t == 1:
        return BetaRange(0.0, math.log(s), False, True, "0", f"log {s}")
    return BetaRange(math.log(t), math.log(s), True, True, f"log {t}", f"log {s}")


def in_admissible_range(params: KmsParams) -> bool:
    """Exact when e^beta is rational, else within 1e-12."""
    rng = admissible_beta(params.d, params.s)
    e = params.beta.exp_exact
    if e is None:
        return rng.contains(params.beta)
    if e == 1:
        return False
    t, s, d = params.t, params.s, params.d
    if t == 0:
        return e <= d
    if t == s:
        return e == s
    return t <= e <= s


@dataclass(frozen=True)
class PFReport:
    pf1_residual: Real
    pf2_residual: Real
    depth: int
    mode: str

    def passed(self, tol: float = 1e-12) -> bool:
        return float(self.pf1_residual) <= tol and float(self.pf2_residual) <= tol


def pf1_pf2_check(params: KmsParams, mu, depth: int = 8, trace_mass: Real | None = None) -> PFReport:
    """Residuals of the two trace conditions for tau = trace_mass * mu.

    PF1 is ``|e^-beta d tau(1) - 1|``; PF2 reduces to the cylinder equation
    checked by :func:`kmsflow.measure.pf4_residual`.
    """
    from .measure import pf4_residual

    tm = params.trace_mass if trace_mass is None else trace_mass
    pf1 = abs(params.exp_neg_beta * params.d * tm - 1)
    pf2 = pf4_residual(mu, params, depth)
    exact = all(isinstance(v, (int, Fraction)) for v in (pf1, pf2))
    return PFReport(pf1, pf2, depth, "exact" if exact else "float")


@dataclass(frozen=True)
class GicarReport:
    r: Optional[Real]
    type_label: str
    type_lambda: Real
    trace_mass: Real
    tracial_simplex: bool


def gicar_solve(params: KmsParams) -> GicarReport:
    """Solve s r + t (1 - r) = e^beta for the gauge-invariant CAR variant."""
    s, t, d = params.s, params.t, params.d
    if t == s:
        if not in_admissible_range(params):
            raise ValueError(f"for s = t the only admissible beta is log({s})")
        return GicarReport(None, "III_lambda", Fraction(2, d), params.trace_mass, True)
    if params.beta.value == 0 or not in_admissible_range(params):
        raise ValueError("beta outside [log t, log s] (beta != 0)")
    r = (params.exp_beta - t) / (s - t)
    return GicarReport(r, "III_lambda", params.exp_neg_beta, params.trace_mass, False)
