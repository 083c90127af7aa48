"""The oracle-weighted distance between languages, exactly (truncated) and by sampling."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Protocol, Sequence

import numpy as np

from .automata import Dfa, StringBatch, Word, count_words, derivative_state, symmetric_difference, words
from .oracle import ConfidenceOracle


class EnumerationLimitError(ValueError):
    pass


class LanguageView(Protocol):
    def member(self, x: Sequence[int]) -> bool: ...


class OracleLanguage:
    """The sign language ``{x : Q(x) >= 0}`` of an oracle."""

    def __init__(self, oracle: ConfidenceOracle):
        self.oracle = oracle

    def member(self, x):
        return self.oracle.sign(x)

    def members(self, batch):
        return self.oracle.signs((), batch)

    def __repr__(self):
        return f"OracleLanguage({self.oracle!r})"


class Derivative:
    """The residual ``{y : u y in L}`` of another view."""

    def __init__(self, view, u: Sequence[int]):
        if isinstance(view, Derivative):
            u = view.prefix + tuple(u)
            view = view.view
        self.view = view
        self.prefix = tuple(u)

    def member(self, x):
        return self.view.member(self.prefix + tuple(x))

    def members(self, batch):
        if isinstance(self.view, OracleLanguage):
            return self.view.oracle.signs(self.prefix, batch)
        if isinstance(self.view, Dfa):
            dfa = self.view
            return dfa.with_initial(derivative_state(dfa, self.prefix)).members(batch)
        return np.array([self.member(y) for y in batch.rows()], dtype=bool)

    def __repr__(self):
        return f"Derivative({self.view!r}, {self.prefix})"


def members(view, batch: StringBatch) -> np.ndarray:
    if hasattr(view, "members"):
        return view.members(batch)
    return np.array([view.member(y) for y in batch.rows()], dtype=bool)


def dfa_form(view) -> tuple[Dfa, frozenset] | None:
    """``(dfa, toggles)`` with ``view = L(dfa) xor toggles``, when one is known."""
    if isinstance(view, Dfa):
        return view, frozenset()
    if isinstance(view, OracleLanguage) and hasattr(view.oracle, "language_form"):
        return view.oracle.language_form()
    if isinstance(view, Derivative):
        inner = dfa_form(view.view)
        if inner is None:
            return None
        dfa, toggles = inner
        u = view.prefix
        shifted = dfa.with_initial(derivative_state(dfa, u))
        return shifted, frozenset(t[len(u):] for t in toggles if t[:len(u)] == u)
    return None


def _length_counts(dfa: Dfa, k: int) -> list[int]:
    """Number of accepted words of each length ``0..k`` (exact integers)."""
    vec = [0] * dfa.n
    vec[dfa.initial] = 1
    acc = sorted(dfa.accepting)
    counts = []
    for _ in range(k + 1):
        counts.append(sum(vec[q] for q in acc))
        nxt = [0] * dfa.n
        for q, c in enumerate(vec):
            if c:
                for r in dfa.delta[q]:
                    nxt[r] += c
        vec = nxt
    return counts


def exact_distance_truncated(oracle: ConfidenceOracle, a, b, k: int, exact: bool = False,
                             limit: int = 2**24, method: str = "auto"):
    """``sum over |x| <= k of |Q(x)| * [a(x) != b(x)]``.

    ``method="product"`` counts disagreeing words per length on the symmetric
    difference automaton; it needs an oracle whose weight depends only on the
    length and views with a known DFA form. ``method="enumerate"`` visits every
    string and is bounded by ``limit``. ``exact=True`` returns a Fraction.
    """
    if k < 0:
        return Fraction(0) if exact else 0.0
    fa, fb = dfa_form(a), dfa_form(b)
    fast = hasattr(oracle, "length_weight") and fa is not None and fb is not None
    if method == "product" and not fast:
        raise ValueError("product method needs length-uniform weights and DFA-backed views")
    if fast and method != "enumerate":
        return _product_distance(oracle, fa, fb, k, exact)
    total = count_words(oracle.alphabet_size, k)
    if total > limit:
        raise EnumerationLimitError(f"{total} strings in Sigma^<={k} exceeds the limit {limit}")
    weight = oracle.exact_weight if exact else oracle.weight
    acc = Fraction(0) if exact else 0.0
    for x in words(oracle.alphabet_size, k):
        if a.member(x) != b.member(x):
            acc += weight(x)
    return acc


def _product_distance(oracle, fa, fb, k, exact):
    (da, ta), (db, tb) = fa, fb
    counts = _length_counts(symmetric_difference(da, db), k)
    if exact:
        lw = oracle.length_weight_exact
        acc = sum((c * lw(j) for j, c in enumerate(counts) if c), Fraction(0))
    else:
        lw = oracle.length_weight
        acc = math.fsum(c * lw(j) for j, c in enumerate(counts) if c)
    for t in ta | tb:
        if len(t) > k:
            continue
        ma, mb = da.member(t), db.member(t)
        before = ma != mb
        after = (ma ^ (t in ta)) != (mb ^ (t in tb))
        if before != after:
            w = lw(len(t))
            acc += w if after else -w
    return acc


def tail_mass(oracle: ConfidenceOracle, k: int, exact: bool = False):
    if exact and hasattr(oracle, "length_tail_exact"):
        return oracle.length_tail_exact(k)
    return oracle.length_tail(k)


def hoeffding_radius(m: int, delta: float) -> float:
    """Half-width ``sqrt(ln(2/delta) / (2m))`` of a two-sided Hoeffding interval."""
    return math.sqrt(math.log(2 / delta) / (2 * m))


@dataclass(frozen=True)
class DistanceEstimate:
    value: float
    radius: float
    samples: int
    confidence: float

    @property
    def interval(self) -> tuple[float, float]:
        return max(0.0, self.value - self.radius), min(1.0, self.value + self.radius)


BLOCK = 16_384


def _seed_sequence(rng) -> np.random.SeedSequence:
    if isinstance(rng, np.random.SeedSequence):
        return rng
    if isinstance(rng, np.random.Generator):
        return np.random.SeedSequence(int(rng.integers(0, 2**63)))
    return np.random.SeedSequence(rng)


def estimate_distance(oracle: ConfidenceOracle, a, b, m: int, delta: float = 0.01, rng=None,
                      workers: int = 1) -> DistanceEstimate:
    """Monte-Carlo estimate of ``d_Q(a, b)`` from ``m`` i.i.d. draws of ``|Q|``.

    Samples are split into fixed-size blocks, each with its own child seed, so
    the value does not depend on ``workers``.
    """
    if m < 1:
        raise ValueError("need at least one sample")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    sizes = [BLOCK] * (m // BLOCK) + ([m % BLOCK] if m % BLOCK else [])
    seeds = _seed_sequence(rng).spawn(len(sizes))

    def block(args):
        size, seed = args
        batch = oracle.sample_batch(np.random.default_rng(seed), size)
        return int(np.count_nonzero(members(a, batch) != members(b, batch)))

    jobs = list(zip(sizes, seeds))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            mismatches = sum(pool.map(block, jobs))
    else:
        mismatches = sum(map(block, jobs))
    return DistanceEstimate(mismatches / m, hoeffding_radius(m, delta), m, 1 - delta)


def derivative_distance(oracle: ConfidenceOracle, u: Sequence[int], v: Sequence[int], m: int,
                        delta: float = 0.01, rng=None, workers: int = 1) -> DistanceEstimate:
    """Estimate of the distance between the residuals of the oracle language by ``u`` and ``v``."""
    lq = OracleLanguage(oracle)
    return estimate_distance(oracle, Derivative(lq, u), Derivative(lq, v), m, delta, rng, workers)


def truncated_language_dfa(oracle: ConfidenceOracle, k: int, limit: int = 2**20) -> Dfa:
    """Trie DFA for ``L_Q`` intersected with ``Sigma^<=k`` (plus a rejecting sink)."""
    sigma = oracle.alphabet_size
    total = count_words(sigma, k)
    if total > limit:
        raise EnumerationLimitError(f"{total} trie nodes exceeds the limit {limit}")
    index: dict[Word, int] = {}
    order = list(words(sigma, k))
    for i, x in enumerate(order):
        index[x] = i
    sink = len(order)
    delta = [[index.get(x + (a,), sink) for a in range(sigma)] for x in order]
    delta.append([sink] * sigma)
    accepting = {i for i, x in enumerate(order) if oracle.sign(x)}
    return Dfa(len(delta), sigma, delta, 0, accepting)
