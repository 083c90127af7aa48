"""Explicit DFAs over the integer alphabet ``{0, ..., |Sigma| - 1}``.

Strings are tuples of ints. States are dense indices ``0..n-1``. A :class:`Dfa`
is immutable; every operation returns a new automaton.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np


class AutomatonError(ValueError):
    """Malformed automaton, bad symbol, or incompatible alphabets."""


Word = tuple[int, ...]


def as_word(x: Iterable[int] | str) -> Word:
    """Coerce ``"0110"`` or any int sequence into a word tuple."""
    if isinstance(x, str):
        return tuple(int(c) for c in x)
    return tuple(int(c) for c in x)


def word_str(x: Sequence[int]) -> str:
    return "".join(str(c) for c in x)


@dataclass(frozen=True)
class Dfa:
    n: int
    alphabet_size: int
    delta: tuple[tuple[int, ...], ...]
    initial: int = 0
    accepting: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "delta", tuple(tuple(int(q) for q in row) for row in self.delta))
        object.__setattr__(self, "accepting", frozenset(int(q) for q in self.accepting))
        if self.n < 1:
            raise AutomatonError("a DFA needs at least one state")
        if self.alphabet_size < 1:
            raise AutomatonError("alphabet must be nonempty")
        if len(self.delta) != self.n:
            raise AutomatonError(f"expected {self.n} transition rows, got {len(self.delta)}")
        for i, row in enumerate(self.delta):
            if len(row) != self.alphabet_size:
                raise AutomatonError(f"row {i} has {len(row)} entries, expected {self.alphabet_size}")
            for q in row:
                if not 0 <= q < self.n:
                    raise AutomatonError(f"transition from state {i} to invalid state {q}")
        if not 0 <= self.initial < self.n:
            raise AutomatonError(f"initial state {self.initial} out of range")
        if any(not 0 <= q < self.n for q in self.accepting):
            raise AutomatonError("accepting set references a missing state")

    @cached_property
    def table(self) -> np.ndarray:
        return np.asarray(self.delta, dtype=np.int64)

    @cached_property
    def accept_mask(self) -> np.ndarray:
        mask = np.zeros(self.n, dtype=bool)
        mask[list(self.accepting)] = True
        return mask

    def step(self, state: int, x: Iterable[int]) -> int:
        for a in x:
            if not 0 <= a < self.alphabet_size:
                raise AutomatonError(f"symbol {a} outside alphabet of size {self.alphabet_size}")
            state = self.delta[state][a]
        return state

    def member(self, x: Sequence[int]) -> bool:
        return self.step(self.initial, x) in self.accepting

    def members(self, batch: "StringBatch") -> np.ndarray:
        return self.accept_mask[run_batch(self, batch)]

    def with_initial(self, state: int) -> "Dfa":
        return Dfa(self.n, self.alphabet_size, self.delta, state, self.accepting)

    def __repr__(self):
        return f"Dfa(n={self.n}, alphabet_size={self.alphabet_size}, initial={self.initial}, accepting={sorted(self.accepting)})"


def run(dfa: Dfa, x: Sequence[int]) -> bool:
    """Membership of ``x`` in the language of ``dfa``."""
    return dfa.member(x)


def derivative_state(dfa: Dfa, u: Sequence[int], start: int | None = None) -> int:
    """State reached from ``start`` (default: initial) after reading ``u``.

    Its residual language is the Brzozowski derivative of the DFA language by ``u``.
    """
    return dfa.step(dfa.initial if start is None else start, u)


def words(alphabet_size: int, max_len: int, min_len: int = 0) -> Iterator[Word]:
    """All words of length ``min_len..max_len`` in length-lexicographic order."""
    for length in range(min_len, max_len + 1):
        yield from itertools.product(range(alphabet_size), repeat=length)


def count_words(alphabet_size: int, max_len: int) -> int:
    return sum(alphabet_size**j for j in range(max_len + 1))


def reachable_states(dfa: Dfa) -> list[int]:
    """Reachable states in BFS order from the initial state (symbols in order)."""
    order = [dfa.initial]
    seen = {dfa.initial}
    i = 0
    while i < len(order):
        for q in dfa.delta[order[i]]:
            if q not in seen:
                seen.add(q)
                order.append(q)
        i += 1
    return order


def shortest_access_strings(dfa: Dfa) -> dict[int, Word]:
    """Length-lex smallest access string of each reachable state."""
    access = {dfa.initial: ()}
    queue = deque([dfa.initial])
    while queue:
        q = queue.popleft()
        for a, r in enumerate(dfa.delta[q]):
            if r not in access:
                access[r] = access[q] + (a,)
                queue.append(r)
    return access


def _relabel(dfa: Dfa, order: list[int]) -> Dfa:
    index = {q: i for i, q in enumerate(order)}
    delta = [[index[dfa.delta[q][a]] for a in range(dfa.alphabet_size)] for q in order]
    accepting = {index[q] for q in order if q in dfa.accepting}
    return Dfa(len(order), dfa.alphabet_size, delta, 0, accepting)


def trim(dfa: Dfa) -> Dfa:
    """Drop unreachable states; states are renumbered in BFS order."""
    return _relabel(dfa, reachable_states(dfa))


def minimize(dfa: Dfa) -> Dfa:
    """Minimal equivalent DFA via Hopcroft partition refinement.

    The result is canonical: states are numbered in BFS order from the initial
    state, so two equivalent DFAs minimize to equal objects.
    """
    dfa = trim(dfa)
    n, k = dfa.n, dfa.alphabet_size
    inverse = [[[] for _ in range(n)] for _ in range(k)]
    for q in range(n):
        for a in range(k):
            inverse[a][dfa.delta[q][a]].append(q)

    accepting = set(dfa.accepting)
    rejecting = set(range(n)) - accepting
    blocks = [b for b in (accepting, rejecting) if b]
    block_of = [0] * n
    for i, b in enumerate(blocks):
        for q in b:
            block_of[q] = i
    work = {0} if len(blocks) == 1 else {0 if len(blocks[0]) <= len(blocks[1]) else 1}

    while work:
        splitter = blocks[work.pop()]
        for a in range(k):
            preds = {p for q in splitter for p in inverse[a][q]}
            touched: dict[int, set[int]] = {}
            for p in preds:
                touched.setdefault(block_of[p], set()).add(p)
            for bi, inside in touched.items():
                block = blocks[bi]
                if len(inside) == len(block):
                    continue
                outside = block - inside
                blocks[bi] = inside
                blocks.append(outside)
                new = len(blocks) - 1
                for q in outside:
                    block_of[q] = new
                if bi in work:
                    work.add(new)
                else:
                    work.add(bi if len(inside) <= len(outside) else new)

    delta = [[block_of[dfa.delta[next(iter(b))][a]] for a in range(k)] for b in blocks]
    quotient = Dfa(
        len(blocks),
        k,
        delta,
        block_of[dfa.initial],
        {block_of[q] for q in dfa.accepting},
    )
    return trim(quotient)


def product(a: Dfa, b: Dfa, accept) -> Dfa:
    """Reachable part of the product automaton with acceptance ``accept(in_a, in_b)``."""
    if a.alphabet_size != b.alphabet_size:
        raise AutomatonError(f"alphabet mismatch: {a.alphabet_size} vs {b.alphabet_size}")
    start = (a.initial, b.initial)
    index = {start: 0}
    order = [start]
    delta = []
    i = 0
    while i < len(order):
        p, q = order[i]
        row = []
        for s in range(a.alphabet_size):
            nxt = (a.delta[p][s], b.delta[q][s])
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
            row.append(index[nxt])
        delta.append(row)
        i += 1
    accepting = {i for i, (p, q) in enumerate(order) if accept(p in a.accepting, q in b.accepting)}
    return Dfa(len(order), a.alphabet_size, delta, 0, accepting)


def symmetric_difference(a: Dfa, b: Dfa) -> Dfa:
    return product(a, b, lambda x, y: x != y)


def intersection(a: Dfa, b: Dfa) -> Dfa:
    return product(a, b, lambda x, y: x and y)


def is_empty(dfa: Dfa) -> bool:
    return not any(q in dfa.accepting for q in reachable_states(dfa))


def is_equivalent(a: Dfa, b: Dfa) -> bool:
    return is_empty(minimize(symmetric_difference(a, b)))


def mod_language(n: int, alphabet_size: int = 2) -> Dfa:
    """Strings whose number of ``1`` symbols is divisible by ``n``."""
    if n < 1:
        raise AutomatonError("mod_language needs n >= 1")
    if alphabet_size < 2:
        raise AutomatonError("mod_language needs the symbol 1, so alphabet_size >= 2")
    delta = [[(i + 1) % n if a == 1 else i for a in range(alphabet_size)] for i in range(n)]
    return Dfa(n, alphabet_size, delta, 0, {0})


def universal(alphabet_size: int = 2, accept: bool = True) -> Dfa:
    return Dfa(1, alphabet_size, [[0] * alphabet_size], 0, {0} if accept else set())


def random_dfa(n: int, alphabet_size: int = 2, seed=None) -> Dfa:
    """Uniformly random transitions, each state accepting with probability 1/2.

    Draws are repeated until every state is reachable from state 0.
    """
    if n < 1:
        raise AutomatonError("random_dfa needs n >= 1")
    rng = np.random.default_rng(seed)
    while True:
        delta = rng.integers(0, n, size=(n, alphabet_size))
        accepting = np.flatnonzero(rng.random(n) < 0.5)
        dfa = Dfa(n, alphabet_size, delta.tolist(), 0, accepting.tolist())
        if len(reachable_states(dfa)) == n:
            return dfa


@dataclass(frozen=True)
class BooleanWfa:
    """A DFA as a weighted automaton over the Boolean semiring."""

    alpha_init: np.ndarray
    alpha_final: np.ndarray
    matrices: tuple[np.ndarray, ...]

    def evaluate(self, x: Sequence[int]) -> bool:
        row = self.alpha_init.astype(bool)
        for a in x:
            row = (row.astype(np.uint8) @ self.matrices[a].astype(np.uint8)) > 0
        return bool(np.any(row & self.alpha_final))


def to_wfa(dfa: Dfa) -> BooleanWfa:
    n = dfa.n
    alpha_init = np.zeros(n, dtype=bool)
    alpha_init[dfa.initial] = True
    mats = []
    for a in range(dfa.alphabet_size):
        m = np.zeros((n, n), dtype=bool)
        m[np.arange(n), dfa.table[:, a]] = True
        mats.append(m)
    return BooleanWfa(alpha_init, dfa.accept_mask.copy(), tuple(mats))


def from_wfa(wfa: BooleanWfa) -> Dfa:
    init = np.asarray(wfa.alpha_init, dtype=bool)
    if init.sum() != 1:
        raise AutomatonError("alpha_init must have exactly one true entry")
    delta = []
    n = init.shape[0]
    for a, m in enumerate(wfa.matrices):
        m = np.asarray(m, dtype=bool)
        if m.shape != (n, n) or not np.all(m.sum(axis=1) == 1):
            raise AutomatonError(f"matrix for symbol {a} is not a one-hot transition matrix")
        delta.append(m.argmax(axis=1))
    table = np.stack(delta, axis=1)
    return Dfa(n, len(wfa.matrices), table.tolist(), int(init.argmax()),
               np.flatnonzero(np.asarray(wfa.alpha_final, dtype=bool)).tolist())


# --- batches of sampled strings -------------------------------------------------


@dataclass(frozen=True)
class StringBatch:
    """Many strings stored column-wise, longest first.

    Rows are sorted by decreasing length, so the rows still "active" at
    position ``t`` are exactly ``0..active[t]-1`` and their symbols at ``t``
    live in ``symbols[offsets[t]:offsets[t] + active[t]]``.
    """

    lengths: np.ndarray
    symbols: np.ndarray
    active: np.ndarray
    offsets: np.ndarray

    @classmethod
    def from_lengths(cls, lengths: np.ndarray, draw_symbols) -> "StringBatch":
        lengths = np.sort(np.asarray(lengths, dtype=np.int64))[::-1].copy()
        maxlen = int(lengths[0]) if len(lengths) else 0
        active = _count_longer(lengths, maxlen)
        offsets = np.concatenate([[0], np.cumsum(active)]).astype(np.int64)
        symbols = np.asarray(draw_symbols(int(offsets[-1])), dtype=np.int64)
        return cls(lengths, symbols, np.asarray(active, dtype=np.int64), offsets)

    @classmethod
    def from_strings(cls, strings: Sequence[Sequence[int]]) -> "StringBatch":
        strings = sorted((tuple(s) for s in strings), key=len, reverse=True)
        lengths = np.array([len(s) for s in strings], dtype=np.int64)
        maxlen = int(lengths[0]) if len(strings) else 0
        active = _count_longer(lengths, maxlen)
        offsets = np.concatenate([[0], np.cumsum(active)]).astype(np.int64)
        symbols = np.empty(int(offsets[-1]), dtype=np.int64)
        for t in range(maxlen):
            c = active[t]
            symbols[offsets[t]:offsets[t] + c] = [s[t] for s in strings[:c]]
        return cls(lengths, symbols, active, offsets)

    def __len__(self):
        return len(self.lengths)

    @property
    def max_length(self) -> int:
        return len(self.active)

    def column(self, t: int) -> np.ndarray:
        return self.symbols[self.offsets[t]:self.offsets[t] + self.active[t]]

    def row(self, i: int) -> Word:
        return tuple(int(self.symbols[self.offsets[t] + i]) for t in range(int(self.lengths[i])))

    def rows(self) -> list[Word]:
        return [self.row(i) for i in range(len(self))]

    def rows_equal(self, x: Sequence[int]) -> np.ndarray:
        """Boolean mask of rows equal to ``x``."""
        mask = np.zeros(len(self), dtype=bool)
        ell = len(x)
        # rows of length ell form a contiguous block
        lo = int(np.searchsorted(-self.lengths, -ell, side="left"))
        hi = int(np.searchsorted(-self.lengths, -ell, side="right"))
        if lo == hi:
            return mask
        block = np.ones(hi - lo, dtype=bool)
        for t, a in enumerate(x):
            col = self.symbols[self.offsets[t] + lo:self.offsets[t] + hi]
            block &= col == a
            if not block.any():
                return mask
        mask[lo:hi] = block
        return mask


def _count_longer(lengths: np.ndarray, maxlen: int) -> np.ndarray:
    # lengths sorted descending; active[t] = #{i : lengths[i] > t}
    hist = np.bincount(lengths, minlength=maxlen + 1)
    longer = len(lengths) - np.cumsum(hist)
    return longer[:maxlen].astype(np.int64)


def run_batch(dfa: Dfa, batch: StringBatch, start=None) -> np.ndarray:
    """Final states after reading each row of ``batch``.

    ``start`` may be a single state, or an array of start states giving a
    result of shape ``(len(start), len(batch))``.
    """
    table = dfa.table
    if start is None:
        start = dfa.initial
    start_arr = np.asarray(start, dtype=np.int64)
    if start_arr.ndim == 0:
        state = np.full(len(batch), int(start_arr), dtype=np.int64)
        for t in range(batch.max_length):
            c = batch.active[t]
            state[:c] = table[state[:c], batch.column(t)]
        return state
    state = np.repeat(start_arr[:, None], len(batch), axis=1)
    for t in range(batch.max_length):
        c = batch.active[t]
        state[:, :c] = table[state[:, :c], batch.column(t)[None, :]]
    return state


# --- text format ----------------------------------------------------------------


def format_dfa(dfa: Dfa) -> str:
    lines = [f"dfa {dfa.n} {dfa.alphabet_size} {dfa.initial}",
             " ".join(["accepting"] + [str(q) for q in sorted(dfa.accepting)])]
    lines += [" ".join(str(q) for q in row) for row in dfa.delta]
    return "\n".join(lines) + "\n"


def parse_dfa(text: str) -> Dfa:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if len(lines) < 2:
        raise AutomatonError("DFA text needs a header and an accepting line")
    head = lines[0].split()
    if len(head) != 4 or head[0] != "dfa":
        raise AutomatonError(f"bad header line: {lines[0]!r}")
    try:
        n, k, init = (int(t) for t in head[1:])
    except ValueError as exc:
        raise AutomatonError(f"bad header line: {lines[0]!r}") from exc
    acc = lines[1].split()
    if not acc or acc[0] != "accepting":
        raise AutomatonError(f"bad accepting line: {lines[1]!r}")
    rows = lines[2:]
    if len(rows) != n:
        raise AutomatonError(f"expected {n} transition lines, found {len(rows)}")
    try:
        accepting = [int(t) for t in acc[1:]]
        delta = [[int(t) for t in row.split()] for row in rows]
    except ValueError as exc:
        raise AutomatonError("non-integer entry in DFA text") from exc
    return Dfa(n, k, delta, init, accepting)


def load_dfa(path) -> Dfa:
    with open(path) as f:
        return parse_dfa(f.read())


def save_dfa(dfa: Dfa, path) -> None:
    with open(path, "w") as f:
        f.write(format_dfa(dfa))
