import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from confdfa.automata import (
    AutomatonError,
    Dfa,
    StringBatch,
    as_word,
    count_words,
    format_dfa,
    from_wfa,
    is_equivalent,
    load_dfa,
    minimize,
    mod_language,
    parse_dfa,
    product,
    random_dfa,
    reachable_states,
    run_batch,
    save_dfa,
    shortest_access_strings,
    symmetric_difference,
    to_wfa,
    trim,
    universal,
    words,
)


def myhill_nerode_classes(dfa, depth):
    """Number of reachable states distinguishable by some suffix of length <= depth (a slow reference)."""
    suffixes = list(words(dfa.alphabet_size, depth))
    sigs = set()
    for q in reachable_states(dfa):
        sigs.add(tuple(dfa.with_initial(q).member(s) for s in suffixes))
    return len(sigs)


dfas = st.builds(lambda n, seed: random_dfa(n, 2, seed=seed), st.integers(1, 6), st.integers(0, 2**31))
small_dfas = st.builds(lambda n, seed: random_dfa(n, 2, seed=seed), st.integers(1, 3), st.integers(0, 2**31))


def test_mod_language_members():
    m3 = mod_language(3)
    assert m3.member(())
    assert m3.member((1, 1, 1))
    assert m3.member((0, 1, 0, 1, 1))
    assert not m3.member((1, 0))


@pytest.mark.parametrize("n", range(1, 9))
def test_mod_language_is_minimal(n):
    assert minimize(mod_language(n)).n == n


@settings(max_examples=60, deadline=None)
@given(dfas)
def test_minimize_matches_reference_partition(dfa):
    m = minimize(dfa)
    # distinct states of an n-state DFA are separated by some word of length < n
    assert m.n == myhill_nerode_classes(dfa, dfa.n)
    assert is_equivalent(m, dfa)


@settings(max_examples=60, deadline=None)
@given(small_dfas, small_dfas)
def test_equivalence_agrees_with_enumeration(a, b):
    # two DFAs with n and m states that differ do so on a word shorter than n * m
    bound = a.n * b.n - 1
    same = all(a.member(x) == b.member(x) for x in words(2, bound))
    assert is_equivalent(a, b) == same


def test_symmetric_difference_members():
    a, b = mod_language(2), mod_language(3)
    d = symmetric_difference(a, b)
    for x in words(2, 6):
        assert d.member(x) == (a.member(x) != b.member(x))
    inter = product(a, b, lambda p, q: p and q)
    assert all(inter.member(x) == (a.member(x) and b.member(x)) for x in words(2, 5))


def test_words_order_and_count():
    ws = list(words(2, 2))
    assert ws == [(), (0,), (1,), (0, 0), (0, 1), (1, 0), (1, 1)]
    assert count_words(2, 4) == 31
    assert count_words(3, 2) == 13
    assert len(list(words(3, 3, min_len=2))) == 9 + 27


def test_random_dfa_reachable_and_seeded():
    for seed in range(20):
        d = random_dfa(5, 3, seed=seed)
        assert sorted(reachable_states(d)) == list(range(5))
    assert random_dfa(4, 2, seed=9) == random_dfa(4, 2, seed=9)


def test_trim_drops_unreachable():
    d = Dfa(3, 2, [[0, 0], [2, 1], [1, 2]], 0, {0, 2})
    t = trim(d)
    assert t.n == 1 and is_equivalent(t, d)


def test_shortest_access_strings():
    acc = shortest_access_strings(mod_language(3))
    assert acc == {0: (), 1: (1,), 2: (1, 1)}


def test_text_roundtrip(tmp_path):
    d = random_dfa(4, 3, seed=2)
    assert parse_dfa(format_dfa(d)) == d
    save_dfa(d, tmp_path / "x.dfa")
    assert load_dfa(tmp_path / "x.dfa") == d


def test_text_format_layout():
    text = format_dfa(mod_language(2))
    assert text.splitlines() == ["dfa 2 2 0", "accepting 0", "0 1", "1 0"]
    empty = parse_dfa("dfa 1 2 0\naccepting\n0 0\n")
    assert empty.accepting == frozenset()


@pytest.mark.parametrize("text", [
    "dfa 2 2 0\naccepting 0\n0 1\n",          # missing row
    "dfa 2 2 0\naccepting 0\n0 1\n1\n",       # short row
    "dfa 2 2 0\naccepting 5\n0 1\n1 0\n",     # bad accepting state
    "dfa 2 2 3\naccepting 0\n0 1\n1 0\n",     # bad initial state
    "dfa 2 2 0\naccepting 0\n0 2\n1 0\n",     # bad target
    "nfa 2 2 0\naccepting 0\n0 1\n1 0\n",
])
def test_parser_rejects_malformed(text):
    with pytest.raises(AutomatonError):
        parse_dfa(text)


def test_wfa_view_roundtrip_and_evaluation():
    d = random_dfa(4, 2, seed=5)
    w = to_wfa(d)
    assert all(w.evaluate(x) == d.member(x) for x in words(2, 5))
    assert from_wfa(w) == d
    w.matrices[0][0, :] = True
    with pytest.raises(AutomatonError):
        from_wfa(w)


def test_string_batch_and_run_batch():
    rng = np.random.default_rng(1)
    strings = [tuple(int(s) for s in rng.integers(0, 2, size=rng.integers(0, 9))) for _ in range(200)]
    batch = StringBatch.from_strings(strings)
    assert sorted(batch.rows()) == sorted(strings)
    d = random_dfa(5, 2, seed=3)
    got = d.members(batch)
    assert [bool(g) for g in got] == [d.member(x) for x in batch.rows()]
    starts = np.arange(5)
    finals = run_batch(d, batch, start=starts)
    assert finals.shape == (5, len(batch))
    for q in range(5):
        assert list(finals[q]) == [d.with_initial(q).step(q, x) for x in batch.rows()]


def test_as_word():
    assert as_word("0110") == (0, 1, 1, 0)
    assert as_word([2, 0]) == (2, 0)
    assert universal(3).member((2, 1, 0)) and not universal(2, accept=False).member(())


def test_product_state_count_bound():
    for a, b in itertools.product([mod_language(2), mod_language(3)], repeat=2):
        assert symmetric_difference(a, b).n <= a.n * b.n
