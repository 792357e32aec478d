"""The additive shift cocycle ``c_n(x)`` and coboundary witnesses.

    c_n(x) =  sum_{j=0}^{n-1} x_j - q n        n >= 1
              0                                n = 0
             -sum_{j=1}^{-n} x_{-j} - q n      n <= -1

With the signed prefix sum ``S(n)`` (``S(0) = 0``, ``S(n+1) - S(n) = x_n``
for every integer n) this is simply ``c_n = S(n) - q n``, which is how it is
evaluated here.  A rational ``q`` gives exact :class:`~fractions.Fraction`
values; a float ``q`` gives binary64.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np

from .exact import is_exact
from .symbolic import BiSeq, Word

Rat = Union[int, Fraction]
Value = Union[Fraction, float]


def _mode(q) -> str:
    return "exact" if is_exact(q) else "float"


@dataclass(frozen=True)
class CocycleValue:
    value: Value
    n: int
    window: tuple[int, int]
    mode: str


def signed_prefix(z: BiSeq, kmin: int, kmax: int) -> np.ndarray:
    """``S(k)`` for ``k = kmin, ..., kmax`` as int64."""
    lo, hi = min(kmin, 0), max(kmax, 0)
    w = z.window(lo, hi).astype(np.int64)
    right = np.concatenate(([0], np.cumsum(w[-lo:])))  # S(0..hi)
    left = -np.cumsum(w[:-lo][::-1]) if lo < 0 else np.zeros(0, dtype=np.int64)  # S(-1), S(-2), ...
    full = np.concatenate((left[::-1], right))  # S(lo..hi)
    return full[kmin - lo : kmax - lo + 1]


def c(z: BiSeq, n: int, q: Rat | float) -> CocycleValue:
    window = (min(0, n), max(0, n))
    s = int(signed_prefix(z, n, n)[0])
    if is_exact(q):
        return CocycleValue(s - Fraction(q) * n, n, window, "exact")
    return CocycleValue(s - float(q) * n, n, window, "float")


def cocycle_range(z: BiSeq, q: Rat | float, kmin: int, kmax: int) -> list[Value] | np.ndarray:
    """``[c_k(z) for k in kmin..kmax]``; Fractions when q is rational."""
    s = signed_prefix(z, kmin, kmax)
    ks = np.arange(kmin, kmax + 1, dtype=np.int64)
    if is_exact(q):
        q = Fraction(q)
        num = s * q.denominator - ks * q.numerator
        return [Fraction(int(v), q.denominator) for v in num]
    return s - float(q) * ks


def doubled_cocycle_counts(z: BiSeq, q: Rat, kmin: int, kmax: int) -> dict[Fraction, int]:
    """Multiplicities of the values ``c_k(z)``, ``kmin <= k <= kmax`` (exact q)."""
    q = Fraction(q)
    s = signed_prefix(z, kmin, kmax)
    ks = np.arange(kmin, kmax + 1, dtype=np.int64)
    num = s * q.denominator - ks * q.numerator
    vals, counts = np.unique(num, return_counts=True)
    return {Fraction(int(v), q.denominator): int(n) for v, n in zip(vals, counts)}


@dataclass(frozen=True)
class IdentityCheck:
    m: int
    n: int
    lhs: Value
    rhs: Value
    holds: bool
    residual: float


def check_cocycle_identity(
    z: BiSeq, pairs: Iterable[tuple[int, int]], q: Rat | float, tol: float = 1e-12
) -> list[IdentityCheck]:
    """Check ``c_{m+n}(z) = c_m(z) + c_n(shift(z, m))`` pair by pair."""
    out = []
    for m, n in pairs:
        lhs = c(z, m + n, q).value
        rhs = c(z, m, q).value + c(z.shift(m), n, q).value
        if is_exact(q):
            out.append(IdentityCheck(m, n, lhs, rhs, lhs == rhs, float(abs(lhs - rhs))))
        else:
            r = abs(lhs - rhs)
            out.append(IdentityCheck(m, n, lhs, rhs, r <= tol, r))
    return out


def bound_scan(z: BiSeq, q: Rat | float, window: int) -> tuple[Value, Value]:
    """(min, max) of ``c_k(z)`` over ``|k| <= window``."""
    if window < 1:
        raise ValueError("window must be >= 1")
    s = signed_prefix(z, -window, window)
    ks = np.arange(-window, window + 1, dtype=np.int64)
    if is_exact(q):
        q = Fraction(q)
        num = s * q.denominator - ks * q.numerator
        return Fraction(int(num.min()), q.denominator), Fraction(int(num.max()), q.denominator)
    vals = s - float(q) * ks
    return float(vals.min()), float(vals.max())


def central_span(depth: int) -> tuple[int, int]:
    """Coordinates ``[lo, hi)`` of the depth-``depth`` central word."""
    lo = -(depth // 2)
    return lo, lo + depth


@dataclass(frozen=True)
class TransferFunction:
    """Locally constant ``h`` with ``c_1(x) ~= h(shift(x, 1)) - h(x)``.

    ``table`` maps central words (coordinates ``central_span(depth)``) to
    values.  ``residual`` is the measured sup of
    ``|c_n(x) - (h(shift(x, n)) - h(x))|`` over the verification sample; it
    is never assumed to vanish.
    """

    depth: int
    q: Rat | float
    table: dict[Word, float]
    base: Word
    residual: float
    checked: int = 0
    lstsq_residual: float = 0.0

    def word_of(self, x: BiSeq) -> Word:
        lo, hi = central_span(self.depth)
        return x.word_at(lo, hi)

    def value_of_word(self, w: Word) -> float:
        try:
            return self.table[w]
        except KeyError:
            raise ValueError(f"central word {w} was not seen when solving for h") from None

    def __call__(self, x: BiSeq) -> float:
        return self.value_of_word(self.word_of(x))


def solve_transfer(
    samples: Sequence[BiSeq],
    q: Rat | float,
    depth: int,
    span: int = 512,
    bound: float = 16.0,
    check_points: int = 100,
    check_n: int = 64,
    seed: int = 0,
) -> TransferFunction:
    """Least-squares transfer function on depth-``depth`` central-word classes.

    Equations ``h(w(shift(x,1))) - h(w(x)) = x_0 - q`` are collected for
    ``x = shift(z, k)``, ``z`` in ``samples``, ``|k| < span`` and solved with
    ``h`` pinned to 0 on the class of ``samples[0]``.  The cocycle is first
    scanned over the same window; a sup above ``bound`` is rejected because
    an unbounded cocycle has no continuous transfer function.
    """
    if not samples:
        raise ValueError("need at least one sample")
    qf = float(q)
    for z in samples:
        lo_c, hi_c = bound_scan(z, q, span + check_n)
        if max(abs(float(lo_c)), abs(float(hi_c))) > bound:
            raise ValueError(
                f"cocycle reaches {max(abs(float(lo_c)), abs(float(hi_c)))} on the sample window "
                f"(bound {bound}); no coboundary"
            )

    lo, hi = central_span(depth)
    equations: dict[tuple[Word, Word], float] = {}
    classes: dict[Word, int] = {}
    base = samples[0].word_at(lo, hi)
    classes[base] = 0
    for z in samples:
        w = z.window(lo - span, hi + span + 1)
        for k in range(-span, span):
            i = k + span
            cur = tuple(int(v) for v in w[i : i + depth])
            nxt = tuple(int(v) for v in w[i + 1 : i + 1 + depth])
            x0 = int(w[i - lo])
            for cw in (cur, nxt):
                if cw not in classes:
                    classes[cw] = len(classes)
            equations[(cur, nxt)] = x0 - qf

    n_unknown = len(classes) - 1
    table: dict[Word, float] = {base: 0.0}
    lstsq_res = 0.0
    if n_unknown:
        rows = list(equations.items())
        a = np.zeros((len(rows), n_unknown))
        b = np.zeros(len(rows))
        for r, ((cur, nxt), rhs) in enumerate(rows):
            if classes[nxt]:
                a[r, classes[nxt] - 1] += 1.0
            if classes[cur]:
                a[r, classes[cur] - 1] -= 1.0
            b[r] = rhs
        sol, *_ = np.linalg.lstsq(a, b, rcond=None)
        lstsq_res = float(np.max(np.abs(a @ sol - b))) if len(rows) else 0.0
        for cw, idx in classes.items():
            if idx:
                table[cw] = float(sol[idx - 1])

    h = TransferFunction(depth, q, table, base, 0.0, 0, lstsq_res)
    res, checked = transfer_residual(h, samples, span - check_n - 1, check_points, check_n, seed)
    return TransferFunction(depth, q, table, base, res, checked, lstsq_res)


def transfer_residual(
    h: TransferFunction,
    samples: Sequence[BiSeq],
    span: int,
    points: int = 100,
    max_n: int = 64,
    seed: int = 0,
) -> tuple[float, int]:
    """sup |c_n(x) - (h(shift(x, n)) - h(x))| over sampled x and |n| <= max_n."""
    rng = random.Random(seed)
    span = max(span, 0)
    worst, count = 0.0, 0
    lo, hi = central_span(h.depth)
    qf = float(h.q)
    for i in range(points):
        z = samples[i % len(samples)]
        x = z.shift(rng.randint(-span, span))
        w = x.window(lo - max_n, hi + max_n)
        s = signed_prefix(x, -max_n, max_n)
        h0 = h.value_of_word(tuple(int(v) for v in w[max_n : max_n + h.depth]))
        for n in range(-max_n, max_n + 1):
            hn = h.value_of_word(tuple(int(v) for v in w[max_n + n : max_n + n + h.depth]))
            cn = float(s[n + max_n]) - qf * n
            worst = max(worst, abs(cn - (hn - h0)))
            count += 1
    return worst, count
