"""Identification encodings: does some n-state DFA fit the examples (within budget eta)?

A DFA of size n is the Boolean weighted automaton ``(e_1, aF, (T_a)_a)`` with
one-hot rows in every ``T_a``. Variable names:

* ``aF_<i>``        accepting flag of state i
* ``t_<a>_<i>_<j>`` transition i --a--> j
* ``a1_<i>``        initial vector (naive encoding only)
* ``a_<node>_<i>``  forward vector of a prefix-trie node
* ``b_<node>_<i>``  backward vector of a suffix-trie node
* ``e_<item>``      misclassification indicator of an example (eta flavors)
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping, Sequence

from ..automata import Dfa, Word, count_words, words
from ..oracle import ConfidenceOracle, as_fraction
from .constraints import (
    FALSE,
    TRUE,
    And,
    ExactlyOne,
    Iff,
    Linear,
    Linearizer,
    Node,
    Not,
    Or,
    Var,
    WeightedAtMost,
    neg,
)


class EncodingSizeError(ValueError):
    pass


class DecodeError(ValueError):
    pass


@dataclass(frozen=True)
class Example:
    x: Word
    weight: Fraction
    positive: bool

    @property
    def sign(self) -> int:
        return 1 if self.positive else -1


@dataclass(frozen=True)
class ExampleSet:
    k: int
    alphabet_size: int
    items: tuple[Example, ...]

    def __post_init__(self):
        if len({e.x for e in self.items}) != len(self.items):
            raise ValueError("example strings must be distinct")
        if any(e.weight <= 0 for e in self.items):
            raise ValueError("example weights must be positive")

    def __len__(self):
        return len(self.items)

    @property
    def positives(self) -> list[Example]:
        return [e for e in self.items if e.positive]

    @property
    def negatives(self) -> list[Example]:
        return [e for e in self.items if not e.positive]

    @property
    def total_weight(self) -> Fraction:
        return sum((e.weight for e in self.items), Fraction(0))

    def misclassified_weight(self, dfa: Dfa) -> Fraction:
        return sum((e.weight for e in self.items if dfa.member(e.x) != e.positive), Fraction(0))

    def consistent(self, dfa: Dfa) -> bool:
        return all(dfa.member(e.x) == e.positive for e in self.items)


def build_example_set(oracle: ConfidenceOracle, k: int, limit: int = 2**20) -> ExampleSet:
    """One example per string of length at most ``k`` with nonzero confidence.

    The sign is that of ``Q(x)``, with ``Q(x) = 0`` counted as positive;
    weights are exact rationals.
    """
    if hasattr(oracle, "support"):
        candidates = sorted((x for x in oracle.support() if len(x) <= k), key=lambda x: (len(x), x))
    else:
        total = count_words(oracle.alphabet_size, k)
        if total > limit:
            raise EncodingSizeError(f"{total} strings up to length {k} exceeds the limit {limit}")
        candidates = words(oracle.alphabet_size, k)
    items = []
    for x in candidates:
        w = oracle.exact_weight(x)
        if w > 0:
            items.append(Example(tuple(x), w, oracle.sign(x)))
    return ExampleSet(k, oracle.alphabet_size, tuple(items))


def examples_from_dfa(dfa: Dfa, weights: Mapping[Word, Fraction] | None, k: int) -> ExampleSet:
    items = []
    for x in words(dfa.alphabet_size, k):
        w = Fraction(1) if weights is None else weights[x]
        items.append(Example(x, w, dfa.member(x)))
    return ExampleSet(k, dfa.alphabet_size, tuple(items))


def prefix_trie(strings: Sequence[Word]) -> dict[Word, int]:
    """Node id of every prefix (root = empty word = 0), numbered by length then lexicographically."""
    nodes = {x[:i] for x in strings for i in range(len(x) + 1)}
    nodes.add(())
    return {x: i for i, x in enumerate(sorted(nodes, key=lambda x: (len(x), x)))}


def suffix_trie(strings: Sequence[Word]) -> dict[Word, int]:
    nodes = {x[i:] for x in strings for i in range(len(x) + 1)}
    nodes.add(())
    return {x: i for i, x in enumerate(sorted(nodes, key=lambda x: (len(x), x)))}


def final_var(i: int) -> Var:
    return Var(f"aF_{i}")


def trans_var(a: int, i: int, j: int) -> Var:
    return Var(f"t_{a}_{i}_{j}")


def indicator_var(item: int) -> Var:
    return Var(f"e_{item}")


@dataclass(frozen=True)
class EncodingInstance:
    n: int
    alphabet_size: int
    direction: str  # naive | forward | backward
    flavor: str  # exact-sat | eta-smt | eta-mip
    examples: ExampleSet
    variables: tuple[str, ...]
    structure: tuple[Node, ...]
    # acceptance literal (as a node) of each example, in example order
    acceptance: tuple[Node, ...]
    eta: Fraction | None = None
    linear: tuple[Linear, ...] = ()
    binaries: tuple[str, ...] = ()
    objective: tuple[tuple[Fraction, str], ...] = ()
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def constraints(self) -> tuple[Node, ...]:
        """Everything asserted, in emission order."""
        if self.flavor == "eta-mip":
            return tuple(self.linear)
        if self.flavor == "exact-sat":
            return self.structure + tuple(acc if e.positive else neg(acc)
                                          for e, acc in zip(self.examples.items, self.acceptance))
        defs = tuple(Iff(indicator_var(i), neg(acc) if e.positive else acc)
                     for i, (e, acc) in enumerate(zip(self.examples.items, self.acceptance)))
        budget = WeightedAtMost(tuple((e.weight, indicator_var(i)) for i, e in enumerate(self.examples.items)),
                                self.eta)
        return self.structure + defs + (budget,)

    @property
    def num_variables(self) -> int:
        return len(self.variables) if self.flavor != "eta-mip" else len(self.binaries)

    @property
    def num_constraints(self) -> int:
        return len(self.constraints)


def _dfa_core(n: int, sigma: int) -> tuple[list[str], list[Node]]:
    names = [final_var(i).name for i in range(n)]
    names += [trans_var(a, i, j).name for a in range(sigma) for i in range(n) for j in range(n)]
    rows = [ExactlyOne(tuple(trans_var(a, i, j) for j in range(n))) for a in range(sigma) for i in range(n)]
    return names, rows


def encode_naive(examples: ExampleSet, n: int, max_terms: int = 200_000) -> EncodingInstance:
    """Each example's output expanded as a disjunction over all state paths."""
    if n < 1:
        raise ValueError("n must be at least 1")
    sigma = examples.alphabet_size
    terms = sum(n ** (len(e.x) + 1) for e in examples.items)
    if terms > max_terms:
        raise EncodingSizeError(f"naive expansion needs {terms} path terms (limit {max_terms})")
    names, structure = _dfa_core(n, sigma)
    init = [Var(f"a1_{i}") for i in range(n)]
    names = [v.name for v in init] + names
    structure = [ExactlyOne(tuple(init)), init[0]] + structure
    acceptance = []
    for e in examples.items:
        paths = []
        for states in itertools.product(range(n), repeat=len(e.x) + 1):
            lits = [init[states[0]]]
            lits += [trans_var(a, states[t], states[t + 1]) for t, a in enumerate(e.x)]
            lits.append(final_var(states[-1]))
            paths.append(And(tuple(lits)))
        acceptance.append(Or(tuple(paths), exclusive=True))
    return EncodingInstance(n, sigma, "naive", "exact-sat", examples, tuple(names), tuple(structure),
                            tuple(acceptance))


def encode_forward(examples: ExampleSet, n: int) -> EncodingInstance:
    """Prefix vectors ``alpha_x``: one-hot, ``alpha_{x a} = alpha_x T_a``, accept via ``alpha_x . aF``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    sigma = examples.alphabet_size
    trie = prefix_trie([e.x for e in examples.items])
    names, structure = _dfa_core(n, sigma)

    def vec(x: Word, i: int) -> Var:
        return Var(f"a_{trie[x]}_{i}")

    for x in trie:
        names += [vec(x, i).name for i in range(n)]
        structure.append(ExactlyOne(tuple(vec(x, i) for i in range(n))))
    structure.append(vec((), 0))
    structure += [neg(vec((), i)) for i in range(1, n)]
    for x in trie:
        if not x:
            continue
        parent, a = x[:-1], x[-1]
        for j in range(n):
            prop = Or(tuple(And((vec(parent, i), trans_var(a, i, j))) for i in range(n)), exclusive=True)
            structure.append(Iff(vec(x, j), prop))
    acceptance = [Or(tuple(And((vec(e.x, i), final_var(i))) for i in range(n)), exclusive=True)
                  for e in examples.items]
    return EncodingInstance(n, sigma, "forward", "exact-sat", examples, tuple(names), tuple(structure),
                            tuple(acceptance), meta={"trie": trie})


def encode_backward(examples: ExampleSet, n: int) -> EncodingInstance:
    """Suffix vectors ``beta_x = T_x aF`` with ``beta_eps = aF``; accept via ``beta_x[0]``.

    Backward vectors are not one-hot, so they carry no exactly-one constraint.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    sigma = examples.alphabet_size
    trie = suffix_trie([e.x for e in examples.items])
    names, structure = _dfa_core(n, sigma)

    def vec(x: Word, i: int) -> Var:
        return final_var(i) if not x else Var(f"b_{trie[x]}_{i}")

    for x in trie:
        if x:
            names += [vec(x, i).name for i in range(n)]
    for x in trie:
        if not x:
            continue
        a, rest = x[0], x[1:]
        for i in range(n):
            prop = Or(tuple(And((trans_var(a, i, j), vec(rest, j))) for j in range(n)), exclusive=True)
            structure.append(Iff(vec(x, i), prop))
    acceptance = [vec(e.x, 0) for e in examples.items]
    return EncodingInstance(n, sigma, "backward", "exact-sat", examples, tuple(names), tuple(structure),
                            tuple(acceptance), meta={"trie": trie})


ENCODERS = {"naive": encode_naive, "forward": encode_forward, "backward": encode_backward}


def encode(examples: ExampleSet, n: int, direction: str = "backward") -> EncodingInstance:
    try:
        return ENCODERS[direction](examples, n)
    except KeyError:
        raise ValueError(f"unknown encoding direction {direction!r}") from None


def relax_eta(instance: EncodingInstance, eta) -> EncodingInstance:
    """Swap hard example constraints for indicators ``e_x`` and ``sum w_x e_x <= eta``."""
    if instance.flavor != "exact-sat":
        raise ValueError("relax_eta expects an exact instance")
    eta = as_fraction(eta)
    if eta < 0:
        raise ValueError("eta must be non-negative")
    names = instance.variables + tuple(indicator_var(i).name for i in range(len(instance.examples)))
    return replace(instance, flavor="eta-smt", variables=names, eta=eta)


def to_mip(instance: EncodingInstance, minimize_error: bool = False) -> EncodingInstance:
    """0/1 linear translation of an eta instance."""
    if instance.flavor != "eta-smt":
        raise ValueError("to_mip expects an eta-smt instance")
    lin = Linearizer()
    for node in instance.constraints:
        lin.add(node)
    binaries = tuple(instance.variables) + tuple(lin.aux)
    objective = ()
    if minimize_error:
        objective = tuple((e.weight, indicator_var(i).name) for i, e in enumerate(instance.examples.items))
    return replace(instance, flavor="eta-mip", linear=tuple(lin.rows), binaries=binaries, objective=objective)


def build_instance(examples: ExampleSet, n: int, direction: str = "backward", flavor: str = "exact-sat",
                   eta=0, minimize_error: bool = False) -> EncodingInstance:
    inst = encode(examples, n, direction)
    if flavor == "exact-sat":
        return inst
    inst = relax_eta(inst, eta)
    if flavor == "eta-smt":
        return inst
    if flavor == "eta-mip":
        return to_mip(inst, minimize_error)
    raise ValueError(f"unknown flavor {flavor!r}")


def decode_model(instance: EncodingInstance, assignment: Mapping[str, bool]) -> Dfa:
    """Read the DFA off a model: initial state 0, ``delta(i, a)`` = the true ``t_a_i_j``."""
    n, sigma = instance.n, instance.alphabet_size
    delta = []
    for i in range(n):
        row = []
        for a in range(sigma):
            hits = [j for j in range(n) if assignment.get(trans_var(a, i, j).name, False)]
            if len(hits) != 1:
                raise DecodeError(f"transition row ({a}, {i}) is not one-hot in the model: {hits}")
            row.append(hits[0])
        delta.append(row)
    accepting = {i for i in range(n) if assignment.get(final_var(i).name, False)}
    return Dfa(n, sigma, delta, 0, accepting)


def encode_dfa_assignment(instance: EncodingInstance, dfa: Dfa) -> dict[str, bool]:
    """The model of ``instance`` induced by ``dfa`` (state 0 must be initial)."""
    if dfa.initial != 0 or dfa.n != instance.n:
        raise ValueError("DFA must have instance.n states and initial state 0")
    n = instance.n
    val: dict[str, bool] = {}
    for i in range(n):
        val[final_var(i).name] = i in dfa.accepting
        for a in range(dfa.alphabet_size):
            for j in range(n):
                val[trans_var(a, i, j).name] = dfa.delta[i][a] == j
    trie = instance.meta.get("trie", {})
    if instance.direction == "naive":
        for i in range(n):
            val[f"a1_{i}"] = i == 0
    elif instance.direction == "forward":
        for x, node in trie.items():
            q = dfa.step(0, x)
            for i in range(n):
                val[f"a_{node}_{i}"] = i == q
    else:
        for x, node in trie.items():
            if x:
                for i in range(n):
                    val[f"b_{node}_{i}"] = dfa.step(i, x) in dfa.accepting
    for idx, e in enumerate(instance.examples.items):
        val[indicator_var(idx).name] = dfa.member(e.x) != e.positive
    return val
