"""Factor type and reduced flow of weights for the extreme KMS states.

A :class:`KmsDatum` names one extreme state by its parameters and the
family of its measure; :func:`classify` assembles the known results into a
:class:`FactorVerdict`.  Where the type is not determined, the verdict says
so (``semifinite-open``, ``descriptor-only``) instead of guessing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from .cocycle import TransferFunction, signed_prefix, solve_transfer
from .exact import is_exact
from .kms import KmsParams, gicar_solve, in_admissible_range
from .measure import CylinderTable, coboundary_measure, periodic_orbit_table, quasi_invariance_residual
from .symbolic import BiSeq, Word, period_certificate, thue_morse

Real = Union[Fraction, float]

TYPE_LABELS = ("III_lambda", "III_0", "II_1", "semifinite-open", "not-extreme-semifinite", "descriptor-only")

# ---------------------------------------------------------------------------
# datum families


@dataclass(frozen=True)
class PeriodicOrbit:
    y: BiSeq
    max_period: int = 64


@dataclass(frozen=True)
class AperiodicOrbit:
    z: BiSeq
    window: int = 4096


@dataclass(frozen=True)
class BernoulliPoint:
    pass


@dataclass(frozen=True)
class ShiftInvariant:
    """An ergodic shift-invariant measure at s = t; ``period`` set when it is a periodic orbit."""

    description: str
    period: Optional[int] = None


@dataclass(frozen=True)
class CoboundaryMeasure:
    """``lam^h nu0`` on an aperiodic minimal subshift with a checked transfer function."""

    subshift: str
    h: Optional[TransferFunction] = None
    qi_residual: Optional[float] = None
    aperiodic: bool = True
    tol: float = 1e-6

    @property
    def certified(self) -> bool:
        if self.h is None or self.qi_residual is None:
            return False
        return self.aperiodic and self.h.residual < self.tol and self.qi_residual < max(self.tol, 10 * self.h.residual)


@dataclass(frozen=True)
class BoundaryPoint:
    """s = d: the state built from m_{e^beta/d, y}; ``y`` is None at beta = log d."""

    y: Optional[BiSeq] = None


@dataclass(frozen=True)
class Gicar:
    pass


Family = Union[PeriodicOrbit, AperiodicOrbit, BernoulliPoint, ShiftInvariant, CoboundaryMeasure, BoundaryPoint, Gicar]


@dataclass(frozen=True)
class KmsDatum:
    params: KmsParams
    family: Family


@dataclass(frozen=True)
class FactorVerdict:
    type_label: str
    reduced_flow: dict
    time_direction: str
    lam: Optional[Real] = None
    trace_mass: Optional[Real] = None
    notes: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.type_label not in TYPE_LABELS:
            raise ValueError(f"unknown type label {self.type_label!r}")
        if self.type_label == "III_lambda" and not (0 < self.lam < 1):
            raise ValueError("III_lambda needs 0 < lambda < 1")

    def to_json(self) -> dict:
        out: dict = {"type": self.type_label}
        if self.lam is not None:
            out["lambda"] = _enc(self.lam)
        out["reduced_flow"] = self.reduced_flow
        out["time_direction"] = self.time_direction
        if self.trace_mass is not None:
            out["trace_mass"] = _enc(self.trace_mass)
        if self.notes:
            out["notes"] = list(self.notes)
        return out


def _enc(x: Real):
    if isinstance(x, Fraction) or isinstance(x, int):
        x = Fraction(x)
        return f"{x.numerator}/{x.denominator}"
    return float(x)


# ---------------------------------------------------------------------------
# condition (C)


@dataclass(frozen=True)
class ConditionCCertificate:
    """Finite-window evidence about ``sum_n lam^c_n(z) < inf``; never a proof."""

    verdict: str  # satisfied-within-window | violated-within-window | inconclusive
    window: int
    partial_sum: float
    min_c_outer: Real  # min of c_n over window/4 < |n| <= window
    left_average_max: float
    right_average_min: float
    q: Real

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "window": self.window,
            "partial_sum": self.partial_sum,
            "min_c_outer": _enc(self.min_c_outer),
            "left_average_max": self.left_average_max,
            "right_average_min": self.right_average_min,
            "q": _enc(self.q),
        }


def check_condition_C(z: BiSeq, params: KmsParams, window: int) -> ConditionCCertificate:
    """Window test of (C) via the Cesaro sufficient condition.

    Violated when some ``c_n <= 0`` with ``window/4 < |n| <= window`` (a
    term ``lam^c_n >= 1`` far out).  Satisfied when the left digit averages
    over lengths in ``[window/2, window]`` stay below q and the right ones
    above q, which makes ``c_n`` grow linearly in both directions.
    """
    if not (1 <= params.t < params.s):
        raise ValueError("condition (C) is defined for 1 <= t < s")
    if window < 4:
        raise ValueError("window must be >= 4")
    q = params.q
    S = signed_prefix(z, -window, window)
    ns = np.arange(-window, window + 1, dtype=np.int64)
    lam = float(params.lam)
    if is_exact(q):
        q = Fraction(q)
        scaled = S * q.denominator - ns * q.numerator
        cf = scaled / q.denominator
    else:
        scaled = None
        cf = S - float(q) * ns
    outer = np.abs(ns) > window // 4
    if scaled is not None:
        min_outer = Fraction(int(scaled[outer].min()), q.denominator)
    else:
        min_outer = float(cf[outer].min())
    with np.errstate(over="ignore"):
        partial = float(np.sum(lam**cf))

    lengths = np.arange(max(window // 2, 1), window + 1)
    right_sums = S[window + lengths]  # sum_{j<m} z_j
    left_sums = -S[window - lengths]  # sum_{j=1..m} z_{-j}
    right_min = float(np.min(right_sums / lengths))
    left_max = float(np.max(left_sums / lengths))
    qf = float(q)

    if min_outer <= 0:
        verdict = "violated-within-window"
    elif left_max < qf < right_min:
        verdict = "satisfied-within-window"
    else:
        verdict = "inconclusive"
    return ConditionCCertificate(verdict, window, partial, min_outer, left_max, right_min, q)


# ---------------------------------------------------------------------------
# periodic orbits


def periodic_type_lambda(period_word: Word, s: int, t: int) -> Fraction:
    """``prod_k 1/(s^(1-y_k) t^(y_k))`` over one period."""
    out = Fraction(1)
    for y in period_word:
        out /= t if y else s
    return out


def forced_type_lambda(period_word: Word, s: int, t: int) -> Fraction:
    """``e^(-n beta)`` at the forced temperature ``beta = x log s + (1-x) log t``, x = 1 - mean."""
    n = len(period_word)
    x = 1 - Fraction(sum(period_word), n)
    # e^(n beta) = s^(n x) t^(n (1-x)) and n x is an integer
    nx = x * n
    return Fraction(1, s ** int(nx) * t ** int(n - nx))


def _direction(params: KmsParams) -> str:
    return "forward" if params.beta.value > 0 else "reverse"


def _beta_matches_affine(params: KmsParams, x: Fraction) -> bool:
    if params.beta.affine_x is not None:
        return params.beta.affine_x == x
    forced = float(x) * math.log(params.s) + float(1 - x) * math.log(params.t)
    return abs(params.beta.value - forced) <= 1e-12 * max(1.0, abs(forced))


def classify(datum: KmsDatum) -> FactorVerdict:
    p, fam = datum.params, datum.family
    s, t, d = p.s, p.t, p.d
    direction = _direction(p)

    if isinstance(fam, Gicar):
        g = gicar_solve(p)
        return FactorVerdict("III_lambda", {"kind": "trivial"}, direction, lam=g.type_lambda)

    if not in_admissible_range(p):
        raise ValueError(f"beta = {p.beta.value} is outside the admissible range for (d, s) = ({d}, {s})")

    if t == 0:
        if not isinstance(fam, BoundaryPoint):
            raise ValueError("for s = d the datum must be a BoundaryPoint")
        at_top = p.beta.exp_exact == d if p.beta.exp_exact is not None else abs(p.beta.value - math.log(d)) < 1e-12
        if at_top:
            return FactorVerdict("III_lambda", {"kind": "trivial"}, direction, lam=Fraction(1, d))
        if fam.y is None or fam.y.coord(0) != 1:
            raise ValueError("below beta = log d the boundary point y must lie in C_1")
        e = p.exp_beta
        mass = e * (d - e) / (d - 1)
        return FactorVerdict("II_1", {"kind": "translation", "group": "Z"}, direction, trace_mass=mass)

    if t == s:
        if isinstance(fam, CoboundaryMeasure):
            return _coboundary_verdict(fam, direction)
        if not isinstance(fam, ShiftInvariant):
            raise ValueError("for s = t the datum must be ShiftInvariant or CoboundaryMeasure")
        if fam.period is not None:
            lam = Fraction(2, d) ** fam.period
            return FactorVerdict("III_lambda", {"kind": "cycle", "points": fam.period}, direction, lam=lam)
        return FactorVerdict(
            "descriptor-only",
            {"kind": "shift", "space": "{0,1}^Z", "measure": fam.description},
            direction,
            notes=("the reduced flow is identified; the type is not determined here",),
        )

    # 1 <= t < s
    if isinstance(fam, PeriodicOrbit):
        cert = period_certificate(fam.y, max(fam.max_period, len(getattr(fam.y, "right", ()))))
        if cert.period is None:
            raise ValueError("PeriodicOrbit datum is not periodic")
        w = fam.y.word_at(0, cert.period)
        x = 1 - Fraction(sum(w), len(w))
        if not _beta_matches_affine(p, x):
            raise ValueError("beta differs from the temperature forced by the orbit")
        lam = periodic_type_lambda(w, s, t)
        if lam != forced_type_lambda(w, s, t):
            raise AssertionError("orbit product and forced temperature disagree")
        return FactorVerdict("III_lambda", {"kind": "cycle", "points": cert.period}, direction, lam=lam)

    if isinstance(fam, AperiodicOrbit):
        if period_certificate(fam.z, min(fam.window // 4, 256)).period is not None:
            raise ValueError("AperiodicOrbit datum is periodic on the checked window")
        cert = check_condition_C(fam.z, p, fam.window)
        if cert.verdict != "satisfied-within-window":
            raise ValueError(f"condition (C) not certified on the window: {cert.verdict}")
        return FactorVerdict(
            "semifinite-open",
            {"kind": "shift-orbit", "condition_C": cert.to_json()},
            direction,
            notes=("the factor is semifinite; its type is an open problem",),
        )

    if isinstance(fam, BernoulliPoint):
        pp = p.p
        if not (0 < pp < 1):
            raise ValueError("BernoulliPoint needs beta strictly between log t and log s")
        return FactorVerdict(
            "not-extreme-semifinite",
            {"kind": "dissipative", "measure": f"b_p, p = {_enc(pp)}"},
            direction,
            notes=("the state from b_p is not extreme; its two-sided measure is dissipative",),
        )

    if isinstance(fam, CoboundaryMeasure):
        return _coboundary_verdict(fam, direction)

    raise ValueError(f"{type(fam).__name__} does not apply when 1 <= t < s")


def _coboundary_verdict(fam: CoboundaryMeasure, direction: str) -> FactorVerdict:
    if not fam.certified:
        raise ValueError("coboundary datum is not certified (transfer or quasi-invariance residual too large)")
    return FactorVerdict(
        "III_0",
        {
            "kind": "subshift",
            "subshift": fam.subshift,
            "transfer_residual": fam.h.residual,
            "qi_residual": float(fam.qi_residual),
        },
        direction,
    )


def thue_morse_coboundary(
    params: KmsParams, depth: int = 8, qi_depth: int = 6, orbit_exponent: int = 12
) -> tuple[CoboundaryMeasure, CylinderTable]:
    """Build and check the coboundary measure on the Thue-Morse subshift.

    ``nu0`` is the uniform measure on the periodic orbit of
    ``zeta^(orbit_exponent)(0)``: it is exactly shift invariant and, since
    ``00`` is a Thue-Morse word, charges only Thue-Morse cylinders.  It
    stands in for the unique invariant measure at the checked depths.
    """
    if params.q is None or abs(float(params.q) - 0.5) > 1e-12:
        raise ValueError("the Thue-Morse cocycle is bounded only at q = 1/2, i.e. beta = log sqrt(st)")
    q = Fraction(1, 2)
    samples = [thue_morse(seed=sd) for sd in ((0, 0), (0, 1), (1, 0), (1, 1))]
    h = solve_transfer(samples, q, depth)
    half = max(depth, qi_depth + 2)
    nu0 = periodic_orbit_table(thue_morse().word_at(0, 2**orbit_exponent), -half, 2 * half)
    nu = coboundary_measure(nu0, h, params.lam)
    res = quasi_invariance_residual(nu, params.lam, q, qi_depth)
    fam = CoboundaryMeasure("thue-morse", h=h, qi_residual=float(res), aperiodic=True)
    return fam, nu
