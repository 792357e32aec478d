"""Binary words, symbolic bi-infinite sequences and the shift.

Sequences are never materialised as a whole.  Every representation answers
``window(lo, hi)`` -- the coordinates ``z_lo, ..., z_{hi-1}`` -- by expanding
only what the window needs, so the inspected range is always explicit.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Optional

import numpy as np

Word = tuple[int, ...]


def word(symbols: Iterable[int] | str) -> Word:
    """Coerce ``"0110"`` or an iterable of ints to a :data:`Word`."""
    if isinstance(symbols, str):
        return tuple(int(c) for c in symbols)
    return tuple(int(c) for c in symbols)


def word_str(w: Iterable[int]) -> str:
    return "".join(str(int(c)) for c in w)


def _check_binary(w: Word, what: str) -> None:
    if any(c not in (0, 1) for c in w):
        raise ValueError(f"{what} must be a binary word, got {w!r}")


@dataclass(frozen=True)
class CylinderSet:
    """``{x : x[start + j] = word[j] for all j}``."""

    start: int
    word: Word

    def contains(self, z: "BiSeq") -> bool:
        if not self.word:
            return True
        got = z.window(self.start, self.start + len(self.word))
        return tuple(int(c) for c in got) == self.word


class BiSeq:
    """Base class of the symbolic sequence representations.

    Subclasses implement ``_raw(lo, hi)`` in their own coordinates; ``offset``
    records accumulated shifts, so ``shift(z, n).coord(j) == z.coord(j + n)``.
    """

    offset: int

    def _raw(self, lo: int, hi: int) -> np.ndarray:
        raise NotImplementedError

    def window(self, lo: int, hi: int) -> np.ndarray:
        if hi < lo:
            raise ValueError(f"empty window [{lo}, {hi})")
        if hi == lo:
            return np.zeros(0, dtype=np.uint8)
        return self._raw(lo + self.offset, hi + self.offset)

    def coord(self, j: int) -> int:
        return int(self.window(j, j + 1)[0])

    def word_at(self, lo: int, hi: int) -> Word:
        return tuple(int(c) for c in self.window(lo, hi))

    def shift(self, n: int) -> "BiSeq":
        if n == 0:
            return self
        return dataclasses.replace(self, offset=self.offset + n)

    def unshifted(self) -> "BiSeq":
        return dataclasses.replace(self, offset=0)

    def key(self) -> tuple:
        """Hashable identity used to match atoms of atomic measures.

        Purely periodic sequences are keyed by their content on one period,
        so ``shift(y, n)`` and ``y`` share a key.  Other sequences are keyed
        by representation and offset, which is exact for aperiodic points.
        """
        return (self.unshifted(), self.offset)


@dataclass(frozen=True)
class EventuallyPeriodic(BiSeq):
    """``... left left core right right ...`` with the core starting at ``origin``."""

    left: Word
    core: Word
    right: Word
    origin: int = 0
    offset: int = field(default=0, kw_only=True)

    def __post_init__(self) -> None:
        if not self.left or not self.right:
            raise ValueError("left and right periods must be nonempty")
        for name in ("left", "core", "right"):
            _check_binary(getattr(self, name), name)

    def _raw(self, lo: int, hi: int) -> np.ndarray:
        idx = np.arange(lo, hi, dtype=np.int64)
        left = np.frombuffer(bytes(self.left), dtype=np.uint8)
        right = np.frombuffer(bytes(self.right), dtype=np.uint8)
        end = self.origin + len(self.core)
        out = np.empty(hi - lo, dtype=np.uint8)
        m_left = idx < self.origin
        m_right = idx >= end
        out[m_left] = left[(idx[m_left] - self.origin) % len(left)]
        out[m_right] = right[(idx[m_right] - end) % len(right)]
        m_core = ~(m_left | m_right)
        if m_core.any():
            core = np.frombuffer(bytes(self.core), dtype=np.uint8)
            out[m_core] = core[idx[m_core] - self.origin]
        return out

    def exact_period_check(self, p: int) -> bool:
        """Decide ``shift(z, p) == z`` exactly from the finite description."""
        lo = self.origin - self.offset
        hi = lo + len(self.core)
        a = lo - p - len(self.left)
        b = hi + len(self.right)
        w = self.window(a, b + p)
        return bool(np.array_equal(w[: b - a], w[p:]))

    def key(self) -> tuple:
        # if the whole sequence is periodic its minimal period is that of ``right``
        r = self.right
        p = next(d for d in range(1, len(r) + 1) if len(r) % d == 0 and r == r[d:] + r[:d])
        if self.exact_period_check(p):
            return ("periodic", self.word_at(0, p))
        return super().key()


def periodic(period: Iterable[int] | str, offset: int = 0) -> EventuallyPeriodic:
    """The bi-infinite periodic sequence ``(period)^Z`` with ``period`` at 0."""
    w = word(period)
    return EventuallyPeriodic(w, (), w, 0, offset=offset)


def constant(symbol: int) -> EventuallyPeriodic:
    return periodic((symbol,))


def step_sequence(left: int = 0, right: int = 1) -> EventuallyPeriodic:
    """``... left left | right right ...`` with the switch at coordinate 0."""
    return EventuallyPeriodic((left,), (), (right,), 0)


@lru_cache(maxsize=256)
def _iterate(rule: tuple[Word, ...], letter: int, k: int) -> bytes:
    images = [bytes(img) for img in rule]
    w = bytes((letter,))
    for _ in range(k):
        w = b"".join(images[c] for c in w)
    return w


@dataclass(frozen=True)
class SubstitutionPoint(BiSeq):
    """Two-sided fixed point ``rho^inf(a) . rho^inf(b)`` of a substitution.

    ``rule[i]`` is the image of symbol ``i``.  The smallest power ``rho^p``
    (``p <= 6``) for which ``rho^p(a)`` ends with ``a`` and ``rho^p(b)``
    starts with ``b`` is used; the Thue-Morse rule needs ``p = 2``.
    """

    rule: tuple[Word, ...]
    seed: tuple[int, int]
    offset: int = field(default=0, kw_only=True)

    def __post_init__(self) -> None:
        if any(len(img) == 0 for img in self.rule):
            raise ValueError("substitution images must be nonempty")
        k = len(self.rule)
        if any(c not in range(k) for img in self.rule for c in img):
            raise ValueError("substitution image uses a symbol outside the alphabet")
        a, b = self.seed
        if a not in range(k) or b not in range(k):
            raise ValueError("seed symbols outside the alphabet")
        self.power  # validates the fixed-point condition

    @property
    def power(self) -> int:
        return _fixed_power(self.rule, tuple(self.seed))

    def _right(self, n: int) -> bytes:
        b, p, k = self.seed[1], self.power, 0
        while True:
            w = _iterate(self.rule, b, p * k)
            if len(w) >= n:
                return w
            k += 1

    def _left(self, n: int) -> bytes:
        a, p, k = self.seed[0], self.power, 0
        while True:
            w = _iterate(self.rule, a, p * k)
            if len(w) >= n:
                return w
            k += 1

    def _raw(self, lo: int, hi: int) -> np.ndarray:
        parts = []
        if lo < 0:
            left = self._left(-lo)
            parts.append(np.frombuffer(left, dtype=np.uint8)[len(left) + lo : len(left) + min(hi, 0)])
        if hi > 0:
            right = self._right(hi)
            parts.append(np.frombuffer(right, dtype=np.uint8)[max(lo, 0) : hi])
        return np.concatenate(parts) if len(parts) > 1 else parts[0].copy()


@lru_cache(maxsize=64)
def _fixed_power(rule: tuple[Word, ...], seed: tuple[int, int]) -> int:
    a, b = seed
    for p in range(1, 7):
        if _iterate(rule, a, p)[-1] == a and _iterate(rule, b, p)[0] == b:
            return p
    raise ValueError(f"seed {seed} is not a two-sided fixed point of any power <= 6 of the rule")


THUE_MORSE_RULE: tuple[Word, ...] = ((0, 1), (1, 0))


def thue_morse(seed: tuple[int, int] = (0, 0)) -> SubstitutionPoint:
    """Two-sided Thue-Morse point; the right half is the fixed point starting at 0."""
    return SubstitutionPoint(THUE_MORSE_RULE, seed)


def toeplitz_words(k_seq: Iterable[int], n: int) -> tuple[Word, Word, int]:
    """Return ``(a(n), b(n), l(n))`` of the nested Toeplitz construction.

    a(0) = 1, b(0) = 0 and for n >= 1
        a(n) = a(n-1) b(n-1) a(n-1)^(k(n)-2)
        b(n) = a(n-1) b(n-1)^(k(n)-1)
    so both words have length l(n) = k(1) ... k(n).
    """
    k_seq = tuple(int(k) for k in k_seq)
    if n < 0:
        raise ValueError("n must be >= 0")
    if len(k_seq) < n:
        raise ValueError(f"need {n} entries of k, got {len(k_seq)}")
    a, b = _toeplitz_bytes(k_seq[:n], n)
    return tuple(a), tuple(b), len(a)


def _validate_k(k_seq: tuple[int, ...]) -> None:
    bad = [k for k in k_seq if k < 3]
    if bad:
        raise ValueError(f"every k(n) must be >= 3, got {bad[0]}")


@lru_cache(maxsize=64)
def _toeplitz_bytes(k_seq: tuple[int, ...], n: int) -> tuple[bytes, bytes]:
    _validate_k(k_seq[:n])
    a, b = b"\x01", b"\x00"
    for m in range(n):
        k = k_seq[m]
        a, b = a + b + a * (k - 2), a + b * (k - 1)
    return a, b


def _toeplitz_prefix(k_seq: tuple[int, ...], n: int, length: int) -> bytes:
    """First ``length`` symbols of a(n) without building all of a(n)."""
    if n == 0:
        return b"\x01"[:length]
    a, b = _toeplitz_bytes(k_seq, n - 1)
    unit = len(a)
    if length <= unit:
        return a[:length]
    out = [a, b]
    got = 2 * unit
    while got < length:
        out.append(a)
        got += unit
    return b"".join(out)[:length]


def toeplitz_lengths(k_seq: Iterable[int], n: int) -> list[int]:
    ls = [1]
    for k in list(k_seq)[:n]:
        ls.append(ls[-1] * k)
    return ls


@dataclass(frozen=True)
class ToeplitzSeed(BiSeq):
    """``z_j = 0`` for ``j < 0`` and ``z_j = a(n)_j`` for ``j >= 0``, n large.

    Since a(n+1) starts with a(n), any finite window is read off the shortest
    a(n) covering it.  Past the end of ``k_seq`` the last entry is repeated;
    ``depth`` is the least level ever expanded.
    """

    k_seq: tuple[int, ...]
    depth: int = 1
    offset: int = field(default=0, kw_only=True)

    def __post_init__(self) -> None:
        if not self.k_seq:
            raise ValueError("k_seq must be nonempty")
        _validate_k(tuple(self.k_seq))
        if self.depth < 0:
            raise ValueError("depth must be >= 0")

    def k(self, m: int) -> int:
        """k(m) for m >= 1."""
        return self.k_seq[min(m, len(self.k_seq)) - 1]

    def ks(self, n: int) -> tuple[int, ...]:
        return tuple(self.k(m) for m in range(1, n + 1))

    def _raw(self, lo: int, hi: int) -> np.ndarray:
        out = np.zeros(hi - lo, dtype=np.uint8)
        if hi <= 0:
            return out
        n, length = self.depth, 1
        for m in range(1, n + 1):
            length *= self.k(m)
        while length < hi:
            n += 1
            length *= self.k(n)
        prefix = _toeplitz_prefix(self.ks(n), n, hi)
        start = max(lo, 0)
        out[start - lo :] = np.frombuffer(prefix, dtype=np.uint8)[start:hi]
        return out


@dataclass(frozen=True)
class OneSided(BiSeq):
    """A point of X = {0,1}^N0 embedded in X~ with zeros on negative coordinates.

    ``shift(OneSided(y), -n)`` is the one-sided point ``0^n y``.
    """

    base: BiSeq
    offset: int = field(default=0, kw_only=True)

    def _raw(self, lo: int, hi: int) -> np.ndarray:
        out = np.zeros(hi - lo, dtype=np.uint8)
        if hi > 0:
            start = max(lo, 0)
            out[start - lo :] = self.base.window(start, hi)
        return out


def coord(z: BiSeq, j: int) -> int:
    return z.coord(j)


def shift(z: BiSeq, n: int) -> BiSeq:
    return z.shift(n)


@dataclass(frozen=True)
class PeriodCertificate:
    period: Optional[int]
    exact: bool
    window: tuple[int, int]


def period_certificate(z: BiSeq, max_period: int) -> PeriodCertificate:
    """Smallest p <= max_period with shift(z, p) = z, with the evidence used.

    Eventually periodic inputs are decided exactly.  Otherwise the equality
    is only checked on the window ``[-2 max_period, 2 max_period)``.
    """
    if max_period < 1:
        raise ValueError("max_period must be >= 1")
    half = 2 * max_period
    w = z.window(-half, half + max_period)
    exact = isinstance(z, EventuallyPeriodic)
    for p in range(1, max_period + 1):
        if not np.array_equal(w[: 2 * half], w[p : p + 2 * half]):
            continue
        if exact and not z.exact_period_check(p):
            continue
        return PeriodCertificate(p, exact, (-half, half))
    return PeriodCertificate(None, exact, (-half, half))


def minimal_period(z: BiSeq, max_period: int) -> Optional[int]:
    return period_certificate(z, max_period).period


def is_primitive(w: Word) -> bool:
    n = len(w)
    return n > 0 and all(w != w[d:] + w[:d] for d in range(1, n) if n % d == 0)
