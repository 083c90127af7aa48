"""Confidence oracles ``Q: Sigma* -> [-1, 1]``.

An oracle's magnitudes ``|Q(x)|`` form a probability distribution over strings.
Every oracle can be queried, sampled from ``|Q|``, and asked for the length CDF
``Pr[|x| <= k]``.
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .automata import Dfa, StringBatch, Word, as_word, derivative_state, run_batch, words


def as_fraction(x) -> Fraction:
    """Exact rational for ``x``; floats go through their shortest repr so 0.9 -> 9/10."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(repr(float(x)))


class ConfidenceOracle:
    """Base class. Subclasses implement :meth:`query`, :meth:`sample_batch` and :meth:`length_cdf`."""

    alphabet_size: int

    def query(self, x: Sequence[int]) -> float:
        raise NotImplementedError

    def weight(self, x: Sequence[int]) -> float:
        return abs(self.query(x))

    def exact_weight(self, x: Sequence[int]) -> Fraction:
        return Fraction(self.weight(x))

    def sign(self, x: Sequence[int]) -> bool:
        """Membership in the oracle language (``Q(x) >= 0``)."""
        return self.query(x) >= 0

    def sample(self, rng: np.random.Generator) -> Word:
        return self.sample_batch(rng, 1).row(0)

    def sample_batch(self, rng: np.random.Generator, m: int) -> StringBatch:
        raise NotImplementedError

    def length_cdf(self, k: int) -> float:
        raise NotImplementedError

    def length_tail(self, k: int) -> float:
        """``1 - Pr[|x| <= k]``."""
        return 1.0 - self.length_cdf(k)

    def signs(self, prefix: Sequence[int], batch: StringBatch) -> np.ndarray:
        """Oracle-language membership of ``prefix + y`` for every row ``y`` of ``batch``."""
        prefix = tuple(prefix)
        return np.array([self.sign(prefix + y) for y in batch.rows()], dtype=bool)

    def signs_many(self, prefixes: Sequence[Sequence[int]], batch: StringBatch) -> np.ndarray:
        return np.stack([self.signs(p, batch) for p in prefixes]) if prefixes else np.zeros((0, len(batch)), bool)

    def prefix_scaling(self, length: int) -> float:
        """Smallest ``c`` with ``pi(y) <= c * pi(u y)`` for every ``|u| = length`` and every ``y``.

        Any derivative distance then satisfies
        ``d(u^-1 L1, u^-1 L2) <= c * d(L1, L2)``.
        """
        raise NotImplementedError(f"{type(self).__name__} has no closed-form prefix scaling")


class GeometricOracle(ConfidenceOracle):
    """``|Q(x)| = (1 - lam) * (lam / |Sigma|) ** |x|``, sign from a ground-truth DFA.

    Lengths are Geometric with ``Pr[|x| = j] = (1 - lam) lam^j`` and, given the
    length, strings are uniform.
    """

    def __init__(self, base: Dfa, lam: float):
        if not 0 < lam < 1:
            raise ValueError(f"decay rate must lie in (0, 1), got {lam}")
        self.base = base
        self.lam = lam
        self.alphabet_size = base.alphabet_size
        self._lam_q = as_fraction(lam)

    def __repr__(self):
        return f"GeometricOracle(lam={self.lam}, base={self.base!r})"

    def length_weight(self, j: int) -> float:
        """Weight of each single string of length ``j``."""
        return (1 - self.lam) * (self.lam / self.alphabet_size) ** j

    def length_weight_exact(self, j: int) -> Fraction:
        return (1 - self._lam_q) * (self._lam_q / self.alphabet_size) ** j

    def weight(self, x):
        return self.length_weight(len(x))

    def exact_weight(self, x):
        return self.length_weight_exact(len(x))

    def sign(self, x):
        return self.base.member(x)

    def query(self, x):
        w = self.weight(x)
        return w if self.base.member(x) else -w

    def sample_batch(self, rng, m):
        lengths = rng.geometric(1 - self.lam, size=m) - 1
        return StringBatch.from_lengths(lengths, lambda total: rng.integers(0, self.alphabet_size, size=total))

    def length_cdf(self, k):
        return 1.0 - self.lam ** (k + 1) if k >= 0 else 0.0

    def length_tail(self, k):
        return self.lam ** (k + 1) if k >= 0 else 1.0

    def length_tail_exact(self, k: int) -> Fraction:
        return self._lam_q ** (k + 1)

    def prefix_scaling(self, length):
        return (self.alphabet_size / self.lam) ** length

    def prefix_scaling_exact(self, length: int) -> Fraction:
        return (self.alphabet_size / self._lam_q) ** length

    def language_form(self) -> tuple[Dfa, frozenset]:
        return self.base, frozenset()

    def signs(self, prefix, batch):
        start = derivative_state(self.base, prefix)
        return self.base.accept_mask[run_batch(self.base, batch, start)]

    def signs_many(self, prefixes, batch):
        if not prefixes:
            return np.zeros((0, len(batch)), bool)
        starts = np.array([derivative_state(self.base, p) for p in prefixes])
        uniq, inv = np.unique(starts, return_inverse=True)
        finals = run_batch(self.base, batch, uniq)
        return self.base.accept_mask[finals][inv]


class PerturbedOracle(ConfidenceOracle):
    """Another oracle with the signs of finitely many strings negated."""

    def __init__(self, inner: ConfidenceOracle, flipped: Iterable[Sequence[int]]):
        self.inner = inner
        self.flipped = frozenset(tuple(x) for x in flipped)
        self.alphabet_size = inner.alphabet_size

    def __repr__(self):
        return f"PerturbedOracle({len(self.flipped)} flips, spent={self.spent_budget:.3g}, inner={self.inner!r})"

    @property
    def spent_budget(self) -> float:
        return float(sum(self.inner.weight(x) for x in self.flipped))

    @property
    def spent_budget_exact(self) -> Fraction:
        return sum((self.inner.exact_weight(x) for x in self.flipped), Fraction(0))

    def query(self, x):
        q = self.inner.query(x)
        return -q if tuple(x) in self.flipped else q

    def sign(self, x):
        s = self.inner.sign(x)
        if tuple(x) in self.flipped and self.inner.weight(x) > 0:
            return not s
        return s

    def weight(self, x):
        return self.inner.weight(x)

    def exact_weight(self, x):
        return self.inner.exact_weight(x)

    def sample_batch(self, rng, m):
        return self.inner.sample_batch(rng, m)

    def length_cdf(self, k):
        return self.inner.length_cdf(k)

    def length_tail(self, k):
        return self.inner.length_tail(k)

    def prefix_scaling(self, length):
        return self.inner.prefix_scaling(length)

    def __getattr__(self, name):
        # exact closed forms of the measure pass through (length_weight, ...)
        if name in ("length_weight", "length_weight_exact", "length_tail_exact", "prefix_scaling_exact"):
            return getattr(self.inner, name)
        raise AttributeError(name)

    def language_form(self) -> tuple[Dfa, frozenset]:
        dfa, toggles = self.inner.language_form()
        return dfa, toggles.symmetric_difference(x for x in self.flipped if self.inner.weight(x) > 0)

    def _toggle(self, prefix, batch, out):
        k = len(prefix)
        for x in self.flipped:
            if x[:k] == prefix and self.inner.weight(x) > 0:
                out ^= batch.rows_equal(x[k:])
        return out

    def signs(self, prefix, batch):
        prefix = tuple(prefix)
        return self._toggle(prefix, batch, self.inner.signs(prefix, batch).copy())

    def signs_many(self, prefixes, batch):
        out = self.inner.signs_many(prefixes, batch).copy()
        for i, p in enumerate(prefixes):
            self._toggle(tuple(p), batch, out[i])
        return out


def geometric_oracle(base: Dfa, lam: float) -> GeometricOracle:
    return GeometricOracle(base, lam)


def perturb(inner: ConfidenceOracle, eta: float, strategy: str = "random", seed=None,
            draws: int = 10_000, max_flips: int = 10_000) -> PerturbedOracle:
    """Flip the signs of a finite set of strings whose total mass is at most ``eta``.

    ``strategy="random"`` offers strings drawn from ``|Q|`` one at a time and keeps
    each one that still fits the budget. ``strategy="shortest"`` walks lengths
    upward and, at each length, flips as many randomly chosen strings as fit.
    """
    if not 0 <= eta < 1:
        raise ValueError(f"perturbation budget must lie in [0, 1), got {eta}")
    rng = np.random.default_rng(seed)
    budget = as_fraction(eta)
    spent = Fraction(0)
    flipped: set[Word] = set()
    if eta == 0:
        return PerturbedOracle(inner, ())

    if strategy == "random":
        batch = inner.sample_batch(rng, draws)
        order = rng.permutation(len(batch))
        for i in order:
            x = batch.row(int(i))
            w = inner.exact_weight(x)
            if w == 0 or x in flipped or spent + w > budget:
                continue
            flipped.add(x)
            spent += w
            if len(flipped) >= max_flips:
                break
    elif strategy == "shortest":
        k = inner.alphabet_size
        length = 0
        while len(flipped) < max_flips and inner.length_tail(length - 1) > 0:
            if hasattr(inner, "length_weight_exact"):
                w = inner.length_weight_exact(length)
                if w == 0:
                    break
                room = int((budget - spent) / w) if w <= budget - spent else 0
                count = min(room, k**length, max_flips - len(flipped))
                if count:
                    chosen: set[Word] = set()
                    if count == k**length:
                        chosen = set(words(k, length, length))
                    while len(chosen) < count:
                        chosen.add(tuple(int(a) for a in rng.integers(0, k, size=length)))
                    flipped |= chosen
                    spent += w * count
                if w < Fraction(1, 10**15) or length > 200:
                    break
            else:
                cands = list(words(k, length, length))
                rng.shuffle(cands)
                for x in cands:
                    w = inner.exact_weight(x)
                    if w and spent + w <= budget:
                        flipped.add(tuple(x))
                        spent += w
                if length > getattr(inner, "max_length", 16):
                    break
            length += 1
    else:
        raise ValueError(f"unknown perturbation strategy {strategy!r}")
    return PerturbedOracle(inner, flipped)


class EmpiricalOracle(ConfidenceOracle):
    """Finite-support oracle built from labelled samples.

    ``table[x] = (freq, score)`` with ``freq`` the sample frequency and ``score``
    in ``[-1, 1]`` the label balance. ``Q(x) = freq * score / Z`` with ``Z``
    chosen so that the magnitudes sum to one.
    """

    def __init__(self, table: dict[Word, tuple[Fraction, Fraction]], alphabet_size: int):
        self.table = dict(table)
        self.alphabet_size = alphabet_size
        norm = sum(abs(w * s) for w, s in self.table.values())
        if norm == 0:
            raise ValueError("every observed string has balanced labels; no confidence mass left")
        self._norm = norm
        self._exact = {x: w * s / norm for x, (w, s) in self.table.items()}
        self._support = [x for x, q in self._exact.items() if q != 0]
        self._negative = [x for x, q in self._exact.items() if q < 0]
        self._probs = np.array([float(abs(self._exact[x])) for x in self._support])
        self._probs /= self._probs.sum()
        self.max_length = max(len(x) for x in self.table)

    def __repr__(self):
        return f"EmpiricalOracle({len(self.table)} strings, alphabet_size={self.alphabet_size})"

    def query(self, x):
        return float(self._exact.get(tuple(x), 0))

    def exact_query(self, x) -> Fraction:
        return self._exact.get(tuple(x), Fraction(0))

    def exact_weight(self, x):
        return abs(self.exact_query(x))

    def support(self) -> list[Word]:
        return list(self._support)

    def sample_batch(self, rng, m):
        idx = rng.choice(len(self._support), size=m, p=self._probs)
        return StringBatch.from_strings([self._support[i] for i in idx])

    def length_cdf(self, k):
        return float(sum(abs(q) for x, q in self._exact.items() if len(x) <= k))

    def length_tail(self, k):
        return float(sum(abs(q) for x, q in self._exact.items() if len(x) > k))

    def prefix_scaling(self, length):
        # ratio pi(y) / pi(u y) is unbounded once u y leaves the support
        return math.inf

    def signs(self, prefix, batch):
        # Q >= 0 off the finite negative set, so only those strings need a lookup
        prefix = tuple(prefix)
        k = len(prefix)
        out = np.ones(len(batch), dtype=bool)
        for x in self._negative:
            if x[:k] == prefix:
                out &= ~batch.rows_equal(x[k:])
        return out

    def language_form(self) -> tuple[Dfa, frozenset]:
        # all-accepting base; strings with Q < 0 toggled off
        k = self.alphabet_size
        base = Dfa(1, k, [[0] * k], 0, {0})
        return base, frozenset(self._negative)


def empirical_oracle(samples: Iterable[tuple[Sequence[int] | str, int]], alphabet_size: int | None = None) -> EmpiricalOracle:
    """Oracle from ``(string, label)`` pairs with labels in ``{-1, +1}``."""
    pos: Counter = Counter()
    tot: Counter = Counter()
    for x, label in samples:
        if label not in (1, -1):
            raise ValueError(f"labels must be +1 or -1, got {label!r}")
        x = as_word(x)
        tot[x] += 1
        if label == 1:
            pos[x] += 1
    if not tot:
        raise ValueError("empirical oracle needs at least one sample")
    total = sum(tot.values())
    table = {}
    for x, c in tot.items():
        table[x] = (Fraction(c, total), Fraction(2 * pos[x] - c, c))
    if alphabet_size is None:
        alphabet_size = max((max(x) for x in table if x), default=0) + 1
        alphabet_size = max(alphabet_size, 2)
    return EmpiricalOracle(table, alphabet_size)


def read_labelled_csv(path) -> list[tuple[Word, int]]:
    """Read ``string,label`` lines (labels ``+1`` / ``-1``); an empty string field is epsilon."""
    out = []
    with open(path, newline="") as f:
        for row in csv.reader(f):
            if not row or row[0].startswith("#"):
                continue
            if len(row) != 2:
                raise ValueError(f"expected 'string,label', got {row!r}")
            s, label = row[0].strip(), int(row[1].strip())
            out.append((as_word(s), label))
    return out


def truncation_length(oracle: ConfidenceOracle, eta: float, k_max: int = 10_000) -> int:
    """Smallest ``k`` with ``1 - Pr[|x| <= k] <= eta``.

    Finite-support oracles never need more than their longest string.
    """
    if not 0 < eta < 1:
        raise ValueError(f"eta must lie in (0, 1), got {eta}")
    cap = min(k_max, getattr(oracle, "max_length", k_max))
    for k in range(cap + 1):
        if oracle.length_tail(k) <= eta:
            return k
    return cap
