"""Finite Markov operators, harmonic functions and the tail boundary.

``P`` acts on functions by ``P(f)(x) = sum_y P[x, y] f(y)``.  A harmonic
sequence is ``(f_n)_{n >= 0}`` with ``P(f_n) = f_{n-1}``; on a finite state
space these are exactly the sequences living in the eventual image
``V = cap_n range(P^n)``, on which ``P`` is invertible.  The translation
``Sigma`` is ``P`` restricted to ``V`` and the Poisson boundary is its fixed
space ``ker(P - 1)``.

Rational input is handled exactly with sparse matrices over QQ; anything
else uses binary64 with SVD rank decisions at a relative threshold of 1e-10.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import numpy as np
from sympy import QQ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.sdm import SDM

from .exact import is_exact

Entry = Union[int, Fraction, float]
RANK_TOL = 1e-10
ROW_SUM_TOL = 1e-12


def _parse_entry(x) -> Entry:
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, bool):
        raise TypeError("boolean matrix entry")
    return x


def _to_qq(x: Entry):
    x = Fraction(x)
    return QQ(x.numerator, x.denominator)


def _from_qq(x) -> Fraction:
    return Fraction(int(x.numerator), int(x.denominator))


class MarkovOp:
    """Row-stochastic matrix on a finite state set, stored as sparse rows."""

    def __init__(
        self,
        matrix: Sequence[Sequence[Entry]],
        states: Optional[Sequence] = None,
        stationary: Optional[Sequence[Entry]] = None,
    ):
        n = len(matrix)
        if n == 0 or any(len(r) != n for r in matrix):
            raise ValueError("matrix must be square and nonempty")
        sparse = [{j: _parse_entry(v) for j, v in enumerate(r) if v} for r in matrix]
        self._init(sparse, n, states, stationary)

    @classmethod
    def from_sparse(
        cls, rows: Sequence[dict[int, Entry]], states: Optional[Sequence] = None, stationary=None
    ) -> "MarkovOp":
        op = cls.__new__(cls)
        op._init([{j: _parse_entry(v) for j, v in r.items() if v} for r in rows], len(rows), states, stationary)
        return op

    def _init(self, sparse, n, states, stationary) -> None:
        self.exact = all(is_exact(v) for r in sparse for v in r.values())
        for i, r in enumerate(sparse):
            if any(not (0 <= j < n) for j in r):
                raise ValueError(f"column index out of range in row {i}")
            if any(v < 0 for v in r.values()):
                raise ValueError(f"negative entry in row {i}")
            total = sum(r.values())
            if (total != 1) if self.exact else abs(float(total) - 1) > ROW_SUM_TOL:
                raise ValueError(f"row {i} sums to {total}, not 1")
        conv = Fraction if self.exact else float
        self.sparse = [{j: conv(v) for j, v in r.items()} for r in sparse]
        self.n = n
        self.states = list(states) if states is not None else list(range(n))
        if len(self.states) != n:
            raise ValueError("states and matrix size differ")
        self.stationary = None
        if stationary is not None:
            mu = [_parse_entry(v) for v in stationary]
            if len(mu) != n:
                raise ValueError("stationary vector has the wrong length")
            self.stationary = [Fraction(v) for v in mu] if all(is_exact(v) for v in mu) else [float(v) for v in mu]

    @property
    def mode(self) -> str:
        return "exact" if self.exact else "float"

    @property
    def rows(self) -> list[list]:
        zero = Fraction(0) if self.exact else 0.0
        return [[r.get(j, zero) for j in range(self.n)] for r in self.sparse]

    def dense(self) -> np.ndarray:
        m = np.zeros((self.n, self.n))
        for i, r in enumerate(self.sparse):
            for j, v in r.items():
                m[i, j] = float(v)
        return m

    def domain_matrix(self) -> DomainMatrix:
        if not self.exact:
            raise ValueError("float operator has no exact matrix")
        rep = {i: {j: _to_qq(v) for j, v in r.items()} for i, r in enumerate(self.sparse) if r}
        return DomainMatrix.from_rep(SDM(rep, (self.n, self.n), QQ))

    def power(self, k: int) -> "MarkovOp":
        if k < 1:
            raise ValueError("k must be >= 1")
        if self.exact:
            m = self.domain_matrix() ** k
            sdm = m.rep.to_sdm() if hasattr(m.rep, "to_sdm") else m.rep
            rows = [{j: _from_qq(v) for j, v in sdm.get(i, {}).items()} for i in range(self.n)]
            return MarkovOp.from_sparse(rows, self.states, self.stationary)
        return MarkovOp(np.linalg.matrix_power(self.dense(), k).tolist(), self.states, self.stationary)

    def apply(self, f: Sequence[Entry]) -> list:
        if self.exact and all(is_exact(v) for v in f):
            return [sum((p * Fraction(f[j]) for j, p in r.items()), Fraction(0)) for r in self.sparse]
        return (self.dense() @ np.asarray(f, dtype=float)).tolist()

    def stationary_ok(self) -> Optional[bool]:
        """Whether the supplied stationary vector is a probability vector with mu P = mu."""
        if self.stationary is None:
            return None
        mu = self.stationary
        if self.exact and all(isinstance(v, Fraction) for v in mu):
            if sum(mu) != 1 or any(v < 0 for v in mu):
                return False
            out = [Fraction(0)] * self.n
            for i, r in enumerate(self.sparse):
                for j, v in r.items():
                    out[j] += mu[i] * v
            return out == mu
        m = np.asarray(mu, dtype=float)
        return bool(abs(m.sum() - 1) < ROW_SUM_TOL and (m >= 0).all() and np.allclose(m @ self.dense(), m, atol=1e-12))

    def to_json(self) -> dict:
        enc = _fs if self.exact else float
        out = {"rows": [[enc(v) for v in r] for r in self.rows], "states": [str(s) for s in self.states]}
        if self.stationary is not None:
            out["stationary"] = [_fs(v) if isinstance(v, Fraction) else v for v in self.stationary]
        return out

    @classmethod
    def from_json(cls, obj) -> "MarkovOp":
        if isinstance(obj, list):
            return cls(obj)
        return cls(obj["rows"], obj.get("states"), obj.get("stationary"))

    @classmethod
    def from_tsv(cls, text: str) -> "MarkovOp":
        rows = [line.split("\t") for line in text.splitlines() if line.strip() and not line.startswith("#")]
        return cls([[_num(v.strip()) for v in r] for r in rows])


def _num(tok: str) -> Entry:
    try:
        return Fraction(tok)
    except ValueError:
        return float(tok)


def _fs(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------------------
# constructors


def permutation_operator(T: Sequence[int]) -> MarkovOp:
    """``P(f) = f o T`` for a permutation T of ``range(n)``."""
    n = len(T)
    if sorted(T) != list(range(n)):
        raise ValueError("T is not a permutation")
    return MarkovOp([[1 if j == T[i] else 0 for j in range(n)] for i in range(n)])


def cycle_operator(n: int) -> MarkovOp:
    return permutation_operator([(i + 1) % n for i in range(n)])


def bernoulli_shift_operator(k: int, weights: Optional[Sequence[Entry]] = None) -> MarkovOp:
    """One-sided shift on functions of ``k`` symbols, the new symbol averaged.

    ``P(f)(x_0..x_{k-1}) = sum_a w_a f(x_1..x_{k-1} a)``.  States are the
    words of length k in lexicographic order; the alphabet size is
    ``len(weights)`` (default two symbols with weight 1/2 each).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    weights = [Fraction(1, 2)] * 2 if weights is None else [_parse_entry(w) for w in weights]
    a = len(weights)
    words = list(itertools.product(range(a), repeat=k))
    index = {w: i for i, w in enumerate(words)}
    rows = []
    for w in words:
        row: dict[int, Entry] = {}
        for sym, p in enumerate(weights):
            j = index[w[1:] + (sym,)]
            row[j] = row.get(j, 0) + p
        rows.append(row)
    return MarkovOp.from_sparse(rows, ["".join(map(str, w)) for w in words])


# ---------------------------------------------------------------------------
# linear algebra back ends


def _exact_column_basis(m: DomainMatrix) -> tuple[DomainMatrix, list[int]]:
    """RREF basis of the column space (as columns) and its pivot rows."""
    r, piv = m.transpose().rref()
    k = len(piv)
    sdm = r.rep.to_sdm() if hasattr(r.rep, "to_sdm") else r.rep
    rows = {i: sdm[i] for i in range(k) if i in sdm}
    basis_t = DomainMatrix.from_rep(SDM(rows, (k, m.shape[0]), QQ))
    return basis_t.transpose(), list(piv)


def _dm_to_fractions(m: DomainMatrix) -> list[list[Fraction]]:
    sdm = m.rep.to_sdm() if hasattr(m.rep, "to_sdm") else m.rep
    rows, cols = m.shape
    return [[_from_qq(sdm.get(i, {}).get(j, QQ(0))) for j in range(cols)] for i in range(rows)]


def _float_rank_basis(m: np.ndarray) -> np.ndarray:
    if m.size == 0:
        return m
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    r = int(np.sum(s > RANK_TOL * max(1.0, s[0] if len(s) else 0.0)))
    return u[:, :r]


def _float_null_space(m: np.ndarray) -> np.ndarray:
    _, s, vt = np.linalg.svd(m)
    scale = max(1.0, s[0]) if len(s) else 1.0
    r = int(np.sum(s > RANK_TOL * scale))
    return vt[r:].T


def _exact_null_dim_and_basis(m: DomainMatrix) -> list[list[Fraction]]:
    ns = m.to_dense().nullspace()
    return _dm_to_fractions(ns) if ns.shape[0] else []


# ---------------------------------------------------------------------------
# operations


def harmonic_fixed_space(P: MarkovOp, method: str = "eventual") -> list[list]:
    """Basis of ``{f : P f = f}`` (always contains the constants).

    Fixed vectors lie in the eventual image, so by default the kernel of
    ``Sigma - 1`` is computed there and lifted; ``method="direct"`` takes the
    kernel of ``P - 1`` on the whole space instead.
    """
    if method not in ("eventual", "direct"):
        raise ValueError("method is 'eventual' or 'direct'")
    if not P.exact:
        return _float_null_space(P.dense() - np.eye(P.n)).T.tolist()
    if method == "direct":
        m = P.domain_matrix().to_dense() - DomainMatrix.eye(P.n, QQ).to_dense()
        return _exact_null_dim_and_basis(m)
    img = _exact_eventual_image(P)
    return _lift_fixed(img)


@dataclass
class _ExactImage:
    basis: DomainMatrix  # n x r, RREF columns
    pivots: list[int]
    ranks: list[int]
    steps: int
    sigma: DomainMatrix  # r x r with P B = B Sigma


def _exact_eventual_image(P: MarkovOp) -> _ExactImage:
    pm = P.domain_matrix()
    basis = DomainMatrix.eye(P.n, QQ).to_sparse()
    ranks, steps = [P.n], 0
    while True:
        new, piv = _exact_column_basis(pm * basis)
        steps += 1
        ranks.append(new.shape[1])
        stable = new.shape[1] == basis.shape[1]
        basis = new
        if stable:
            break
    r = basis.shape[1]
    # the RREF basis has an identity block on the pivot rows, so P B = B S reads S = (P B)[piv]
    pb = _dm_to_fractions(pm * basis) if r else []
    sigma = DomainMatrix([[_to_qq(v) for v in pb[i]] for i in piv], (r, r), QQ)
    return _ExactImage(basis, list(piv), ranks, steps, sigma)


def _lift_fixed(img: _ExactImage) -> list[list[Fraction]]:
    r = img.sigma.shape[0]
    if not r:
        return []
    ns = img.sigma.to_dense() - DomainMatrix.eye(r, QQ).to_dense()
    coords = _exact_null_dim_and_basis(ns)
    b = img.basis.to_dense()
    out = []
    for c in coords:
        v = b * DomainMatrix([[_to_qq(x)] for x in c], (r, 1), QQ)
        out.append([row[0] for row in _dm_to_fractions(v)])
    return out


@dataclass
class BoundaryReport:
    mode: str
    n_states: int
    tail_dim: int
    poisson_dim: int
    sigma_fixed_dim: int
    stabilization_steps: int
    rank_sequence: list[int]
    basis: list[list]  # columns of V, one list per basis vector
    translation: list[list]  # Sigma in that basis: P B = B Sigma
    translation_permutation: Optional[list[int]]
    harmonic_sequences: list[list[list]]  # per basis vector, f_0, f_1, ... (f_m = Sigma^-m)
    stationary_sigma_invariant: Optional[bool]
    tolerance: Optional[float]

    def to_json(self) -> dict:
        enc = _fs if self.mode == "exact" else float
        mat = lambda m: [[enc(v) for v in row] for row in m]  # noqa: E731
        return {
            "mode": self.mode,
            "tolerance": self.tolerance,
            "n_states": self.n_states,
            "tail_dim": self.tail_dim,
            "poisson_dim": self.poisson_dim,
            "sigma_fixed_dim": self.sigma_fixed_dim,
            "stabilization_steps": self.stabilization_steps,
            "rank_sequence": self.rank_sequence,
            "tail_basis": mat(self.basis),
            "translation": mat(self.translation),
            "translation_permutation": self.translation_permutation,
            "harmonic_sequences": [mat(seq) for seq in self.harmonic_sequences],
            "stationary_sigma_invariant": self.stationary_sigma_invariant,
        }


def _permutation_of(sigma: list[list], n: int) -> Optional[list[int]]:
    if len(sigma) != n:
        return None
    perm = []
    for row in sigma:
        ones = [j for j, v in enumerate(row) if v == 1]
        if len(ones) != 1 or any(v not in (0, 1) for v in row):
            return None
        perm.append(ones[0])
    return perm if sorted(perm) == list(range(n)) else None


def tail_decomposition(P: MarkovOp, sequence_terms: int = 3) -> BoundaryReport:
    """Eventual image, translation and Poisson dimension of ``P``."""
    return _tail_exact(P, sequence_terms) if P.exact else _tail_float(P, sequence_terms)


def _tail_exact(P: MarkovOp, terms: int) -> BoundaryReport:
    img = _exact_eventual_image(P)
    r = img.sigma.shape[0]
    sigma = _dm_to_fractions(img.sigma) if r else []
    b_cols = [list(col) for col in zip(*_dm_to_fractions(img.basis))] if r else []
    fixed = _lift_fixed(img)
    seqs: list[list[list]] = []
    if r:
        s_inv = img.sigma.inv()
        b_dense = img.basis.to_dense()
        for i in range(r):
            e = DomainMatrix([[QQ(int(j == i))] for j in range(r)], (r, 1), QQ)
            seq = []
            for _ in range(terms):
                seq.append([v[0] for v in _dm_to_fractions(b_dense * e)])
                e = s_inv * e
            seqs.append(seq)
    return BoundaryReport(
        "exact",
        P.n,
        r,
        len(fixed),
        len(fixed),
        img.steps,
        img.ranks,
        b_cols,
        sigma,
        _permutation_of(sigma, P.n) if r == P.n else None,
        seqs,
        _stationary_invariance(P, b_cols, sigma),
        None,
    )


def _tail_float(P: MarkovOp, terms: int) -> BoundaryReport:
    pm = P.dense()
    basis = np.eye(P.n)
    ranks = [P.n]
    steps = 0
    while True:
        new = _float_rank_basis(pm @ basis)
        steps += 1
        ranks.append(new.shape[1])
        if new.shape[1] == basis.shape[1]:
            break
        basis = new
    r = basis.shape[1]
    if r == P.n:
        basis = np.eye(P.n)
    sigma = np.linalg.lstsq(basis, pm @ basis, rcond=None)[0] if r else np.zeros((0, 0))
    sigma_fixed = _float_null_space(sigma - np.eye(r)).shape[1] if r else 0
    seqs = []
    if r:
        s_inv = np.linalg.inv(sigma)
        for i in range(r):
            e = np.eye(r)[:, i]
            seq = []
            for _ in range(terms):
                seq.append((basis @ e).tolist())
                e = s_inv @ e
            seqs.append(seq)
    sig_list = np.round(sigma, 15).tolist()
    b_cols = basis.T.tolist()
    perm = None
    if r == P.n and np.allclose(sigma, np.round(sigma), atol=RANK_TOL):
        perm = _permutation_of(np.round(sigma).astype(int).tolist(), P.n)
    return BoundaryReport(
        "float",
        P.n,
        r,
        len(harmonic_fixed_space(P)),
        sigma_fixed,
        steps,
        ranks,
        b_cols,
        sig_list,
        perm,
        seqs,
        _stationary_invariance(P, b_cols, sig_list),
        RANK_TOL,
    )


def _stationary_invariance(P: MarkovOp, b_cols: list[list], sigma: list[list]) -> Optional[bool]:
    """Is ``f -> mu(f)`` on V invariant under Sigma?  (None without a valid mu.)"""
    if not P.stationary_ok():
        return None
    mu = P.stationary
    r = len(b_cols)
    mu_b = [sum(m * v for m, v in zip(mu, col)) for col in b_cols]  # mu(B e_i)
    for i in range(r):
        # mu(Sigma-image of B e_i) = sum_k sigma[k][i] mu(B e_k)
        lhs = sum(sigma[k][i] * mu_b[k] for k in range(r))
        if isinstance(lhs, Fraction) and isinstance(mu_b[i], Fraction):
            if lhs != mu_b[i]:
                return False
        elif abs(float(lhs) - float(mu_b[i])) > 1e-9:
            return False
    return True


# ---------------------------------------------------------------------------
# backward shift on a truncated half-line


@dataclass
class PatternReport:
    window: int
    patterns_checked: int
    patterns_matched: int
    failures: list[str]
    independent_after_steps: Optional[bool]
    steps: int

    def to_json(self) -> dict:
        return dict(self.__dict__)


def backward_shift_operator(window: int) -> MarkovOp:
    """``P0(f)(n) = f(n+1)`` on ``{0, ..., window}`` with the last state absorbing."""
    n = window + 1
    return MarkovOp([[1 if j == min(i + 1, window) else 0 for j in range(n)] for i in range(n)])


def backward_shift_pattern_check(
    window: int,
    patterns: Optional[Sequence[tuple[str, Callable[[int], Fraction], Optional[int]]]] = None,
    steps: int = 10,
) -> PatternReport:
    """Check that ``f_k(n) = g(n - k)`` is harmonic for the truncated backward shift.

    Each pattern is ``(name, g, support)``; ``support = m`` means g vanishes
    outside ``[0, m)`` and the relation ``P0(f_{k+1}) = f_k`` is checked for
    every k keeping the support away from the truncation edge.  ``None``
    marks a pattern checked for all ``k < window`` (e.g. constants).
    """
    if window < 2:
        raise ValueError("window must be >= 2")
    if patterns is None:
        patterns = [
            ("delta_0", lambda n: Fraction(int(n == 0)), 1),
            ("constant", lambda n: Fraction(1), None),
            ("delta_0+2delta_1", lambda n: Fraction({0: 1, 1: 2}.get(n, 0)), 2),
        ]
    P0 = backward_shift_operator(window)
    matched, failures = 0, []
    fam = lambda g, k: [g(n - k) for n in range(window + 1)]  # noqa: E731
    for name, g, support in patterns:
        kmax = window - 1 if support is None else window - support
        ok = all(P0.apply(fam(g, k + 1)) == fam(g, k) for k in range(max(kmax, 0)))
        matched += ok
        if not ok:
            failures.append(name)
    independent = None
    finite = [(g, m) for _, g, m in patterns if m is not None]
    if len(finite) >= 2 and steps + max(m for _, m in finite) <= window:
        vecs = np.array([[float(v) for v in fam(g, steps)] for g, _ in finite[:2]])
        independent = bool(np.linalg.matrix_rank(vecs) == 2)
    return PatternReport(window, len(patterns), matched, failures, independent, steps)


# ---------------------------------------------------------------------------
# Poisson-boundary product


@dataclass
class ConvergenceReport:
    converged: bool
    steps: int
    limit: Optional[list[float]]
    defects: list[float]
    period: Optional[int]
    tolerance: float

    def to_json(self) -> dict:
        return dict(self.__dict__)


def simulate_P_convergence(
    P: MarkovOp, f: Sequence[float], g: Sequence[float], n_max: int = 1000, tol: float = 1e-10
) -> ConvergenceReport:
    """Iterate ``P^n(f g)``; report the limit, or the period of an oscillation."""
    pm = P.dense()
    v = np.asarray(f, dtype=float) * np.asarray(g, dtype=float)
    history = [v]
    defects = []
    for n in range(n_max):
        nxt = pm @ v
        d = float(np.max(np.abs(nxt - v)))
        defects.append(d)
        if d < tol:
            return ConvergenceReport(True, n, nxt.tolist(), defects, None, tol)
        v = nxt
        history.append(v)
    period = None
    last = history[-1]
    for p in range(1, min(P.n * P.n, len(history) - 1) + 1):
        if np.max(np.abs(history[-1 - p] - last)) < tol:
            period = p
            break
    return ConvergenceReport(False, n_max, None, defects, period, tol)
