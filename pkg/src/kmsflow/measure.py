"""Probability measures on X = {0,1}^N0 and X~ = {0,1}^Z.

Three representations are supported:

* :class:`Atomic` -- finitely many atoms at symbolic points, weights either
  plain numbers or :class:`~kmsflow.exact.ExactWeight`.  A truncated series
  can park its remaining mass in a known cylinder (``tail_mass`` inside
  ``C(0, tail_prefix)``) so cylinder queries up to that depth stay exact,
  or report it as ``defect`` without renormalising.
* :class:`Bernoulli` -- the product measure with marginal ``(p, 1-p)``.
* :class:`CylinderTable` -- masses of all words on a fixed window.

Convention for the shift: ``(nu o sigma)(A) = nu(sigma(A))``.  For a
cylinder ``A`` on ``[a, a+L)`` the image ``sigma(A)`` is the cylinder with
the same word on ``[a-1, a-1+L)``.  Under this convention the
quasi-invariance condition reads ``nu(sigma(A)) = int_A lam^(x_0 - q) dnu``.
"""

from __future__ import annotations

import itertools
import math
from functools import cached_property
from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .cocycle import TransferFunction, central_span, cocycle_range, signed_prefix
from .exact import ExactWeight, WeightSum, is_exact
from .kms import KmsParams, affine_beta, derive
from .symbolic import BiSeq, OneSided, ToeplitzSeed, Word, period_certificate, toeplitz_lengths

Number = Union[int, Fraction, float]
Weight = Union[Number, ExactWeight]

NORMALIZATION_TOL = 1e-12


def _to_number(w: Weight) -> Number:
    return float(w) if isinstance(w, ExactWeight) else w


@dataclass(frozen=True, eq=False)
class Atomic:
    atoms: tuple[tuple[BiSeq, Weight], ...]
    normalized: bool = True
    tail_mass: Number = 0
    tail_prefix: Word = ()
    defect: Number = 0
    two_sided: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "atoms", tuple(self.atoms))
        for _, w in self.atoms:
            if _to_number(w) < 0:
                raise ValueError("atom weights must be nonnegative")
        if self.tail_mass < 0 or self.defect < 0:
            raise ValueError("tail mass and defect must be nonnegative")
        if not self.normalized:
            total = self.total()
            if abs(float(total) + float(self.defect) - 1) > NORMALIZATION_TOL:
                raise ValueError("unnormalised atomic measure must carry its missing mass as defect")

    @property
    def exact_weights(self) -> bool:
        return bool(self.atoms) and all(isinstance(w, ExactWeight) for _, w in self.atoms)

    @property
    def rational(self) -> bool:
        return all(is_exact(w) for _, w in self.atoms) and is_exact(self.tail_mass)

    def total(self) -> Number:
        if self.rational:
            return sum((w for _, w in self.atoms), Fraction(0)) + self.tail_mass
        return math.fsum(_to_number(w) for _, w in self.atoms) + float(self.tail_mass)

    def exact_total(self) -> WeightSum:
        lam = self.atoms[0][1].lam
        return sum((w for _, w in self.atoms), WeightSum(lam))

    def masses(self) -> list[tuple[BiSeq, Number]]:
        """Atoms with their (normalised when flagged) masses."""
        scale = self.total() if self.normalized else 1
        return [(x, _to_number(w) / scale) for x, w in self.atoms]


@dataclass(frozen=True)
class Bernoulli:
    """Product measure with ``P(x_j = 0) = p``; one-sided unless ``two_sided``."""

    p: Number
    two_sided: bool = False

    def __post_init__(self) -> None:
        if not (0 <= self.p <= 1):
            raise ValueError(f"p must lie in [0, 1], got {self.p}")


@dataclass(frozen=True, eq=False)
class CylinderTable:
    """Masses of the depth-``depth`` words on ``[start, start + depth)``.

    Only full-depth words are stored, so shallower masses are marginals and
    Kolmogorov consistency within one table holds by construction.
    """

    start: int
    depth: int
    masses: Mapping[Word, Number]

    def __post_init__(self) -> None:
        for w, m in self.masses.items():
            if len(w) != self.depth:
                raise ValueError(f"word {w} does not have length {self.depth}")
            if m < 0:
                raise ValueError("masses must be nonnegative")
        total = sum(self.masses.values())
        if is_exact(total) and all(is_exact(m) for m in self.masses.values()):
            if total != 1:
                raise ValueError(f"masses sum to {total}, not 1")
        elif abs(float(total) - 1) > NORMALIZATION_TOL:
            raise ValueError(f"masses sum to {float(total)}, not 1")

    @property
    def two_sided(self) -> bool:
        return self.start < 0


MeasureRep = Union[Atomic, Bernoulli, CylinderTable]


# ---------------------------------------------------------------------------
# cylinder evaluation


def _all_words(length: int) -> Iterable[Word]:
    return itertools.product((0, 1), repeat=length)


def word_distribution(mu: MeasureRep, start: int, length: int) -> dict[Word, Number]:
    """Masses of the cylinders on ``[start, start + length)`` (zero masses omitted)."""
    if length < 0:
        raise ValueError("length must be >= 0")
    if isinstance(mu, Bernoulli):
        if not mu.two_sided and start < 0:
            raise ValueError("one-sided Bernoulli measure has no negative coordinates")
        p, q = mu.p, 1 - mu.p
        out = {}
        for w in _all_words(length):
            zeros = w.count(0)
            m = p**zeros * q ** (length - zeros)
            if m:
                out[w] = m
        return out
    if isinstance(mu, CylinderTable):
        if start < mu.start or start + length > mu.start + mu.depth:
            raise ValueError(
                f"window [{start}, {start + length}) outside table window "
                f"[{mu.start}, {mu.start + mu.depth})"
            )
        i = start - mu.start
        out: dict[Word, Number] = defaultdict(int)
        for w, m in mu.masses.items():
            out[w[i : i + length]] += m
        return {w: m for w, m in out.items() if m}
    if isinstance(mu, Atomic):
        if not mu.two_sided and start < 0:
            raise ValueError("one-sided measure has no negative coordinates")
        scale = mu.total() if mu.normalized else 1
        out = defaultdict(int)
        for x, w in mu.atoms:
            out[x.word_at(start, start + length)] += _to_number(w)
        if mu.tail_mass:
            out[_tail_word(mu, start, length)] += mu.tail_mass
        return {w: m / scale for w, m in out.items() if m}
    raise TypeError(f"not a measure representation: {type(mu).__name__}")


def _tail_word(mu: Atomic, start: int, length: int) -> Word:
    if start < 0 or start + length > len(mu.tail_prefix):
        raise ValueError(
            f"window [{start}, {start + length}) deeper than the exactly known tail "
            f"(depth {len(mu.tail_prefix)})"
        )
    return mu.tail_prefix[start : start + length]


def raw_exact_weights(mu: Atomic, start: int, length: int) -> dict[Word, WeightSum]:
    """Unnormalised exact weight of each cylinder on ``[start, start+length)``."""
    if not mu.exact_weights or mu.tail_mass:
        raise ValueError("exact cylinder weights need ExactWeight atoms and no tail")
    lam = mu.atoms[0][1].lam
    out: dict[Word, WeightSum] = {}
    for x, w in mu.atoms:
        key = x.word_at(start, start + length)
        out[key] = out.get(key, WeightSum(lam)) + w
    return out


def cylinder_mass(mu: MeasureRep, start: int, w: Word) -> Number:
    return word_distribution(mu, start, len(w)).get(tuple(w), 0)


def integrate(mu: MeasureRep, start: int, f: Mapping[Word, Number]) -> Number:
    """Integral of the cylinder function ``sum_w f[w] 1_{C(start, w)}``."""
    if not f:
        return 0
    lengths = {len(w) for w in f}
    if len(lengths) != 1:
        raise ValueError("all words of a cylinder function must have the same length")
    dist = word_distribution(mu, start, lengths.pop())
    return sum(v * dist.get(tuple(w), 0) for w, v in f.items())


def as_table(mu: MeasureRep, start: int, depth: int) -> CylinderTable:
    return CylinderTable(start, depth, word_distribution(mu, start, depth))


# ---------------------------------------------------------------------------
# constructors


def bernoulli_b_p(p: Number) -> Bernoulli:
    return Bernoulli(p)


def bernoulli_for(params: KmsParams) -> Bernoulli:
    """b_p at p = (e^beta - t)/(s - t), the product solution of the PF equation."""
    if params.p is None:
        raise ValueError("b_p needs 1 <= t < s")
    return Bernoulli(params.p)


def dirac(x: BiSeq, two_sided: bool = True) -> Atomic:
    return Atomic(((x, 1),), two_sided=two_sided)


def m_p_y(p: Number, y: BiSeq, n_terms: int = 64, include_tail: bool = True) -> Atomic:
    """``(1-p) sum_n p^n delta_{0^n y}`` truncated after ``n_terms`` atoms.

    With ``include_tail`` the discarded mass ``p^n_terms`` is kept in the
    cylinder ``C_{0^n_terms}``, which makes cylinder masses of depth at most
    ``n_terms`` exact.  Otherwise it is returned as ``defect``.
    """
    if not (0 < p < 1):
        raise ValueError(f"need 0 < p < 1, got {p}")
    if y.coord(0) != 1:
        raise ValueError("y must lie in the cylinder C_1")
    y1 = y if isinstance(y, OneSided) else OneSided(y)
    atoms = tuple((y1.shift(-n), (1 - p) * p**n) for n in range(n_terms))
    tail = p**n_terms
    if include_tail:
        return Atomic(atoms, normalized=True, tail_mass=tail, tail_prefix=(0,) * n_terms, two_sided=False)
    return Atomic(atoms, normalized=False, defect=tail, two_sided=False)


def nu_periodic(y: BiSeq, d: int, s: int, max_period: int = 64) -> tuple[Atomic, KmsParams]:
    """The orbit measure of a periodic point and the temperature it forces.

    For minimal period n and digit mean m = (y_0 + ... + y_{n-1})/n the
    temperature is beta = log s - (log s - log t) m, i.e. the affine
    coordinate x = 1 - m, and the weights are lam^(c_k(y)), k < n.
    """
    t = d - s
    if not (1 <= t < s):
        raise ValueError("periodic orbit measures need 0 < t < s")
    if hasattr(y, "right"):
        max_period = max(max_period, len(y.right))
    cert = period_certificate(y, max_period)
    if cert.period is None:
        raise ValueError("y is not periodic (no period found)")
    n = cert.period
    mean = Fraction(sum(y.word_at(0, n)), n)
    params = derive(d, s, affine_beta(1 - mean, s, t))
    lam = Fraction(t, s)
    cs = cocycle_range(y, mean, 0, n - 1)
    atoms = tuple((y.shift(k), ExactWeight.power(lam, ck)) for k, ck in enumerate(cs))
    return Atomic(atoms), params


def _require_lam_q(params: KmsParams):
    if params.lam is None or params.q is None:
        raise ValueError("needs 1 <= t < s")
    return params.lam, params.q


def _orbit_weights(z: BiSeq, lam, q, kmin: int, kmax: int):
    cs = cocycle_range(z, q, kmin, kmax)
    if is_exact(q):
        return [ExactWeight.power(lam, ck) for ck in cs]
    lf = float(lam)
    return [lf ** float(ck) for ck in cs]


def nu_aperiodic_truncated(z: BiSeq, params: KmsParams, n: int) -> tuple[Atomic, float]:
    """Orbit measure on ``{shift(z, k) : |k| <= n}`` with its shift defect.

    The defect ``|| nu o sigma - lam^(c_1) nu ||`` (total-variation norm,
    not halved) equals ``(lam^c_{-n}(z) + lam^c_{n+1}(z)) / sum_{|k|<=n} lam^c_k(z)``;
    it is computed from that formula and checked against direct atom
    matching.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    lam, q = _require_lam_q(params)
    weights = _orbit_weights(z, lam, q, -n, n + 1)
    inner = weights[:-1]
    atoms = tuple((z.shift(k), w) for k, w in zip(range(-n, n + 1), inner))
    nu = Atomic(atoms)
    if is_exact(q):
        num = weights[0] + weights[-1]
        den = nu.exact_total()
        defect = float(num) / float(den)
    else:
        defect = (weights[0] + weights[-1]) / math.fsum(inner)
    direct = orbit_defect_direct(nu, lam, q)
    if abs(direct - defect) > 1e-9 * max(1.0, defect):
        raise RuntimeError(f"defect formula {defect} disagrees with direct evaluation {direct}")
    return nu, defect


def orbit_defect_direct(nu: Atomic, lam, q) -> float:
    """``|| nu o sigma - lam^(x_0 - q) nu ||`` by matching atoms (full TV norm)."""
    keys = [x.key() for x, _ in nu.atoms]
    if len(set(keys)) != len(keys):
        raise ValueError("repeated atoms; the orbit is periodic inside the window")
    total = float(nu.total()) if nu.normalized else 1.0
    diff: dict = defaultdict(float)
    lf, qf = float(lam), float(q)
    for x, w in nu.atoms:
        wf = float(w)
        diff[x.shift(-1).key()] += wf  # (nu o sigma)({x'}) = nu({sigma x'})
        diff[x.key()] -= wf * lf ** (x.coord(0) - qf)
    return math.fsum(abs(v) for v in diff.values()) / total


@dataclass(frozen=True, eq=False)
class ToeplitzTruncation:
    """``nu_n`` on ``{shift(z, j) : 0 <= j < l(n)}`` for the Toeplitz point z.

    The shift defect is ``(1 + lam^c_{l(n)}(z)) / sum_{j < l(n)} lam^c_j(z)``.
    Cocycle values are kept as multiplicities of ``den * c_j`` so the exact
    normaliser is only assembled when a comparison needs it.
    """

    z: ToeplitzSeed
    n: int
    length: int
    lam: Fraction
    q: Fraction
    numerator: WeightSum
    scaled_values: np.ndarray  # den * c_j, distinct values
    counts: np.ndarray
    den: int

    def partial_normalizer(self, cutoff: Optional[Fraction] = None) -> WeightSum:
        """Exact ``sum lam^c_j`` over the j with ``c_j <= cutoff`` (all j if None)."""
        keep = slice(None) if cutoff is None else self.scaled_values <= cutoff * self.den
        return WeightSum.from_counts(
            self.lam,
            {Fraction(int(v), self.den): int(c) for v, c in zip(self.scaled_values[keep], self.counts[keep])},
        )

    @cached_property
    def normalizer(self) -> WeightSum:
        return self.partial_normalizer()

    @property
    def defect(self) -> float:
        terms = self.counts * float(self.lam) ** (self.scaled_values / self.den)
        return float(self.numerator) / math.fsum(terms)

    def defect_at_most(self, bound: Fraction) -> bool:
        """Exact test of ``defect <= bound``.

        All terms are positive, so a partial normaliser that already
        satisfies the inequality certifies it.
        """
        target = self.numerator
        bound = Fraction(bound)
        for cutoff in (0, 8, 64):
            if target <= self.partial_normalizer(Fraction(cutoff)) * bound:
                return True
        return target <= self.normalizer * bound

    def measure(self) -> Atomic:
        weights = _orbit_weights(self.z, self.lam, self.q, 0, self.length - 1)
        return Atomic(tuple((self.z.shift(j), w) for j, w in enumerate(weights)))


def toeplitz_truncation(k_seq: Sequence[int], n: int, lam: Fraction, q: Fraction = Fraction(1, 2)) -> ToeplitzTruncation:
    lam, q = Fraction(lam), Fraction(q)
    z = ToeplitzSeed(tuple(k_seq), depth=n)
    length = toeplitz_lengths(z.ks(n), n)[-1]
    prefix = signed_prefix(z, 0, length)
    scaled = prefix * q.denominator - np.arange(length + 1, dtype=np.int64) * q.numerator
    values, counts = np.unique(scaled[:-1], return_counts=True)
    c_l = Fraction(int(scaled[-1]), q.denominator)
    numerator = 1 + ExactWeight.power(lam, c_l)
    return ToeplitzTruncation(z, n, length, lam, q, numerator, values, counts, q.denominator)


# ---------------------------------------------------------------------------
# functional equations


def _qi_windows(nu: MeasureRep, depth: int) -> list[tuple[int, int]]:
    """Cylinder windows ``[a, a+L)`` containing 0 whose shift image is evaluable."""
    out = []
    for length in range(1, depth + 1):
        for a in range(-(length - 1), 1):
            if isinstance(nu, CylinderTable):
                if a - 1 < nu.start or a + length > nu.start + nu.depth:
                    continue
            out.append((a, length))
    if not out:
        raise ValueError("no cylinder window fits the measure representation")
    return out


def quasi_invariance_residual(
    nu: MeasureRep,
    lam: Number,
    q: Number,
    depth: int,
    rn: Optional[tuple[Number, Number]] = None,
) -> Number:
    """``max_A |nu(sigma(A)) - int_A lam^(x_0 - q) dnu|`` over cylinders of length <= depth.

    ``rn`` overrides the derivative values ``(lam^-q, lam^(1-q))``, which is
    how an exactly rational derivative (``s e^-beta``, ``t e^-beta``) is
    supplied.  ExactWeight atoms with rational ``lam`` and ``q`` are checked
    formally and give ``Fraction(0)`` when the equation holds identically.
    """
    if not getattr(nu, "two_sided", False):
        raise ValueError("quasi-invariance is a condition on measures on X~")
    windows = _qi_windows(nu, depth)
    exact_atoms = (
        isinstance(nu, Atomic)
        and nu.exact_weights
        and rn is None
        and is_exact(lam)
        and is_exact(q)
        and nu.atoms[0][1].lam == Fraction(lam)
    )
    if exact_atoms:
        return _qi_exact_atoms(nu, Fraction(lam), Fraction(q), windows)
    if rn is None:
        rn = (float(lam) ** (-float(q)), float(lam) ** (1 - float(q)))
    worst: Number = 0
    for a, length in windows:
        image = word_distribution(nu, a - 1, length)
        base = word_distribution(nu, a, length)
        for w in set(image) | set(base):
            r = rn[w[-a]]
            worst = max(worst, abs(image.get(w, 0) - r * base.get(w, 0)))
    return worst


def _pure_exponent(w: ExactWeight, cache: dict) -> Optional[Fraction]:
    """``e`` with ``w = lam^e`` when the coefficient is an integer power of lam."""
    if w.coeff not in cache:
        m = round(math.log(w.coeff) / math.log(w.lam))
        cache[w.coeff] = m if w.lam**m == w.coeff else None
    m = cache[w.coeff]
    return None if m is None else w.exponent + m


def _qi_exact_atoms(nu: Atomic, lam: Fraction, q: Fraction, windows) -> Number:
    # Pure-power atoms: equal exponent multisets on both sides of every
    # cylinder certify the identity; WeightSum arithmetic decides the rest.
    cache: dict = {}
    exps = [_pure_exponent(w, cache) for _, w in nu.atoms]
    lo = min(a - 1 for a, _ in windows)
    hi = max(a + length for a, length in windows)
    words = [x.word_at(lo, hi) for x, _ in nu.atoms] if None not in exps else None
    r = (ExactWeight.power(lam, -q), ExactWeight.power(lam, 1 - q))
    total = None
    worst = 0.0
    all_zero = True
    for a, length in windows:
        if words is not None:
            image: dict = defaultdict(Counter)
            base: dict = defaultdict(Counter)
            i, j = a - 1 - lo, a - lo
            for wd, e in zip(words, exps):
                image[wd[i : i + length]][e] += 1
                b = wd[j : j + length]
                base[b][e + b[-a] - q] += 1
            if image == base:
                continue
        image_w = raw_exact_weights(nu, a - 1, length)
        base_w = raw_exact_weights(nu, a, length)
        for w in set(image_w) | set(base_w):
            diff = image_w.get(w, WeightSum(lam)) - base_w.get(w, WeightSum(lam)) * r[w[-a]]
            if not diff.is_zero():
                if total is None:
                    total = float(nu.exact_total())
                all_zero = False
                worst = max(worst, abs(float(diff)) / total)
    return Fraction(0) if all_zero else worst


def pf4_residual(mu: MeasureRep, params: KmsParams, depth: int) -> Number:
    """``max_f |e^-beta int (s chi_0 (x) f + t chi_1 (x) f) dmu - int f dmu|``.

    ``f`` runs over indicators of cylinders ``C(0, w)``, ``|w| <= depth``
    (the empty word is f = 1).  Exact when the masses and e^beta are.
    """
    en, s, t = params.exp_neg_beta, params.s, params.t
    worst: Number = 0
    for length in range(depth + 1):
        inner = word_distribution(mu, 0, length)
        outer = word_distribution(mu, 0, length + 1)
        for w in set(inner) | {v[1:] for v in outer}:
            lhs = en * (s * outer.get((0,) + w, 0) + t * outer.get((1,) + w, 0))
            worst = max(worst, abs(lhs - inner.get(w, 0)))
    return worst


def extend_to_two_sided(
    mu: MeasureRep, params: KmsParams, m: int, k: int, tol: float = 1e-12
) -> CylinderTable:
    """Table on ``[-m, k)`` of the two-sided extension of a PF solution.

    ``mass(w) = prod_{j=-m}^{-1} r0(w_j) * mu(C(0, w))`` with
    ``r0 = (s e^-beta) chi_0 + (t e^-beta) chi_1``.
    """
    if m < 0 or k < 0 or m + k == 0:
        raise ValueError("need m, k >= 0 and m + k >= 1")
    res = pf4_residual(mu, params, max(m + k - 1, 0))
    if res > tol:
        raise ValueError(f"PF residual {float(res):.3e} above tolerance {tol:.1e}; extension inconsistent")
    r0 = params.rn
    dist = word_distribution(mu, 0, m + k)
    masses = {}
    for w, mass in dist.items():
        weight = mass
        for sym in w[:m]:
            weight = weight * r0[sym]
        if weight:
            masses[w] = weight
    return CylinderTable(-m, m + k, _renormalize(masses))


def _renormalize(masses: dict[Word, Number]) -> dict[Word, Number]:
    """Absorb float rounding of order 1e-16 so the table invariant holds."""
    total = sum(masses.values())
    if is_exact(total) or abs(float(total) - 1) > NORMALIZATION_TOL:
        return masses
    return {w: v / total for w, v in masses.items()}


def extension_consistency(mu: MeasureRep, params: KmsParams, m: int, k: int) -> Number:
    """Max difference between the [-m, k) table marginalised to [-m+1, k) and the m-1 table."""
    big = extend_to_two_sided(mu, params, m, k)
    small = extend_to_two_sided(mu, params, m - 1, k)
    marg = word_distribution(big, -m + 1, m - 1 + k)
    return max(
        (abs(marg.get(w, 0) - small.masses.get(w, 0)) for w in set(marg) | set(small.masses)),
        default=0,
    )


def restrict_to_one_sided(nu: CylinderTable) -> CylinderTable:
    """Drop negative coordinates of a two-sided table."""
    if nu.start > 0:
        raise ValueError("table does not cover coordinate 0")
    return CylinderTable(0, nu.start + nu.depth, word_distribution(nu, 0, nu.start + nu.depth))


def tv_distance(nu1: MeasureRep, nu2: MeasureRep, depth: int, start: int = 0) -> float:
    """Total-variation distance (half the L1 norm).

    Atomic measures are compared atom by atom; anything else on the
    cylinders of ``[start, start + depth)``.
    """
    if isinstance(nu1, Atomic) and isinstance(nu2, Atomic):
        diff: dict = defaultdict(float)
        for sign, nu in ((1, nu1), (-1, nu2)):
            for x, m in nu.masses():
                diff[x.key()] += sign * float(m)
            if nu.tail_mass:
                scale = float(nu.total()) if nu.normalized else 1.0
                diff[("tail", nu.tail_prefix)] += sign * float(nu.tail_mass) / scale
        return 0.5 * math.fsum(abs(v) for v in diff.values())
    d1 = word_distribution(nu1, start, depth)
    d2 = word_distribution(nu2, start, depth)
    return 0.5 * math.fsum(abs(float(d1.get(w, 0)) - float(d2.get(w, 0))) for w in set(d1) | set(d2))


# ---------------------------------------------------------------------------
# coboundary measures


def periodic_orbit_table(period: Word, start: int, depth: int) -> CylinderTable:
    """Uniform measure on the shift orbit of ``(period)^Z`` as an exact table.

    The table is exactly shift invariant.  With ``period`` a long word of a
    minimal subshift whose square is still legal it approximates the
    subshift's invariant measure while staying supported on legal words.
    """
    n = len(period)
    counts: dict[Word, int] = defaultdict(int)
    ext = period * (depth // n + 2)
    for i in range(n):
        j = (i + start) % n
        counts[tuple(ext[j : j + depth])] += 1
    return CylinderTable(start, depth, {w: Fraction(c, n) for w, c in counts.items()})


def coboundary_measure(nu0: CylinderTable, h: TransferFunction, lam: Number) -> CylinderTable:
    """``lam^h nu0 / int lam^h dnu0`` as a table on the window of ``nu0``."""
    lo, hi = central_span(h.depth)
    if lo < nu0.start or hi > nu0.start + nu0.depth:
        raise ValueError("table window must contain the central window of h")
    i, j = lo - nu0.start, hi - nu0.start
    lf = float(lam)
    raw = {w: float(m) * lf ** h.value_of_word(w[i:j]) for w, m in nu0.masses.items()}
    total = math.fsum(raw.values())
    return CylinderTable(nu0.start, nu0.depth, {w: v / total for w, v in raw.items()})
