import itertools
import random
import re
from fractions import Fraction

import pytest

from confdfa.automata import Dfa, count_words, minimize, mod_language, random_dfa, words
from confdfa.encodings import (
    DecodeError,
    EncodingSizeError,
    Example,
    ExampleSet,
    build_example_set,
    build_instance,
    decode_model,
    encode,
    encode_dfa_assignment,
    prefix_trie,
    suffix_trie,
    to_cnf,
    to_dimacs,
    to_lp,
    to_smtlib,
)
from confdfa.encodings.build import examples_from_dfa
from confdfa.encodings.constraints import (
    And,
    CnfBuilder,
    Const,
    ExactlyOne,
    Iff,
    Linearizer,
    Not,
    Or,
    Var,
    evaluate,
)
from confdfa.encodings.emit import decimal
from confdfa.oracle import GeometricOracle
from confdfa.solve import solve_cnf


def mod_examples(n, k, lam=0.9):
    return build_example_set(GeometricOracle(mod_language(n), lam), k)


def test_tries_number_nodes_by_length_then_lex():
    strings = [(0, 1), (1,), (1, 1, 0)]
    assert prefix_trie(strings) == {(): 0, (0,): 1, (1,): 2, (0, 1): 3, (1, 1): 4, (1, 1, 0): 5}
    assert suffix_trie(strings) == {(): 0, (0,): 1, (1,): 2, (0, 1): 3, (1, 0): 4, (1, 1, 0): 5}


@pytest.mark.parametrize("n,k", [(1, 3), (2, 4), (3, 4)])
def test_variable_counts_closed_form(n, k):
    ex = mod_examples(2, k)
    sigma = 2
    nonempty = count_words(sigma, k) - 1
    core = n + sigma * n * n
    assert encode(ex, n, "backward").num_variables == core + n * nonempty
    assert encode(ex, n, "forward").num_variables == core + n * (nonempty + 1)
    assert encode(ex, n, "naive").num_variables == core + n


def test_backward_count_for_mod2_example():
    # backward, mod-2 examples on Sigma^<=4, n = 2: 2 + 2*4 + 2*30
    assert encode(mod_examples(2, 4), 2, "backward").num_variables == 70


@pytest.mark.parametrize("direction", ["naive", "forward", "backward"])
@pytest.mark.parametrize("seed", range(4))
def test_true_dfa_satisfies_its_encoding(direction, seed):
    target = minimize(random_dfa(3, 2, seed=seed))
    ex = examples_from_dfa(target, None, 3)
    inst = encode(ex, target.n, direction)
    assignment = encode_dfa_assignment(inst, target)
    assert all(evaluate(c, assignment) for c in inst.constraints)
    assert decode_model(inst, assignment) == target


@pytest.mark.parametrize("direction", ["naive", "forward", "backward"])
def test_cnf_models_are_exactly_the_consistent_dfas(direction):
    """Over every choice of transitions and accepting flags (n=2), the CNF is satisfiable iff the DFA fits."""
    ex = mod_examples(2, 3)
    inst = encode(ex, 2, direction)
    cnf = to_cnf(inst)
    for targets in itertools.product(range(2), repeat=4):
        delta = [[targets[0], targets[1]], [targets[2], targets[3]]]
        for acc in range(4):
            dfa = Dfa(2, 2, delta, 0, {i for i in range(2) if acc >> i & 1})
            units = []
            for i in range(2):
                units.append([cnf.index[f"aF_{i}"] * (1 if i in dfa.accepting else -1)])
                for a in range(2):
                    for j in range(2):
                        lit = cnf.index[f"t_{a}_{i}_{j}"]
                        units.append([lit if delta[i][a] == j else -lit])
            res = solve_cnf(cnf.num_vars, cnf.clauses + units)
            assert res.satisfiable == ex.consistent(dfa)


def test_decode_rejects_non_one_hot_rows():
    inst = encode(mod_examples(2, 2), 2, "backward")
    model = encode_dfa_assignment(inst, mod_language(2))
    model["t_0_0_1"] = True
    with pytest.raises(DecodeError):
        decode_model(inst, model)


def test_naive_size_guard():
    ex = ExampleSet(30, 2, (Example((0,) * 30, Fraction(1, 2), True),))
    with pytest.raises(EncodingSizeError):
        encode(ex, 2, "naive")


def test_eta_relaxation_adds_one_indicator_per_example():
    ex = mod_examples(3, 3)
    exact = build_instance(ex, 2)
    relaxed = build_instance(ex, 2, flavor="eta-smt", eta=0.01)
    assert relaxed.num_variables == exact.num_variables + len(ex)
    assert relaxed.eta == Fraction(1, 100)
    mip = build_instance(ex, 2, flavor="eta-mip", eta=0.01)
    budget = [r for r in mip.linear if r.name == "budget"]
    assert len(budget) == 1 and budget[0].rhs == Fraction(1, 100)


def test_relaxed_constraints_measure_misclassified_weight():
    ex = mod_examples(3, 3)
    target = mod_language(2)  # wrong on purpose
    wrong = ex.misclassified_weight(target)
    for eta, expect in [(wrong, True), (wrong - Fraction(1, 10**9), False)]:
        inst = build_instance(ex, 2, "forward", "eta-smt", eta)
        model = encode_dfa_assignment(inst, target)
        for i, e in enumerate(ex.items):
            model[f"e_{i}"] = target.member(e.x) != e.positive
        assert all(evaluate(c, model) for c in inst.constraints) == expect


def _random_formula(rng, names, depth):
    if depth == 0 or rng.random() < 0.3:
        v = Var(rng.choice(names))
        return v if rng.random() < 0.7 else Not(v)
    kind = rng.choice(["and", "or", "iff", "not"])
    if kind == "not":
        return Not(_random_formula(rng, names, depth - 1))
    if kind == "iff":
        return Iff(_random_formula(rng, names, depth - 1), _random_formula(rng, names, depth - 1))
    args = tuple(_random_formula(rng, names, depth - 1) for _ in range(rng.randint(1, 3)))
    return And(args) if kind == "and" else Or(args)


@pytest.mark.parametrize("seed", range(40))
def test_tseitin_and_linearization_preserve_meaning(seed):
    rng = random.Random(seed)
    names = ["p", "q", "r"]
    f = _random_formula(rng, names, 3)
    cnf = CnfBuilder(names)
    cnf.add(f)
    lin = Linearizer()
    lin.add(f)
    aux = lin.aux
    for bits in itertools.product([False, True], repeat=3):
        val = dict(zip(names, bits))
        truth = evaluate(f, val)
        units = [[cnf.index[n] if val[n] else -cnf.index[n]] for n in names]
        assert solve_cnf(cnf.num_vars, cnf.clauses + units).satisfiable == truth
        feasible = False
        for abits in itertools.product([False, True], repeat=len(aux)):
            full = dict(val, **dict(zip(aux, abits)))
            if all(evaluate(row, full) for row in lin.rows):
                feasible = True
                break
        assert feasible == truth


def test_cnf_exactly_one_and_constants():
    cnf = CnfBuilder(["a", "b", "c"])
    cnf.add(ExactlyOne((Var("a"), Var("b"), Var("c"))))
    cnf.add(Const(True))
    sols = []
    for bits in itertools.product([False, True], repeat=3):
        units = [[i + 1 if b else -(i + 1)] for i, b in enumerate(bits)]
        if solve_cnf(cnf.num_vars, cnf.clauses + units).satisfiable:
            sols.append(bits)
    assert sorted(sols) == [(False, False, True), (False, True, False), (True, False, False)]
    with pytest.raises(TypeError):
        CnfBuilder([]).literal(ExactlyOne((Var("a"),)))


def test_decimal_formatting():
    assert decimal(Fraction(1, 10**6)) == "0.000001"
    assert decimal(0.004100625) == "0.004100625"
    assert decimal(Fraction(1, 3)) == "0.333333333333"
    assert decimal(0) == "0"
    assert "e" not in decimal(1e-12)


def test_smtlib_layout():
    ex = mod_examples(2, 2)
    exact = to_smtlib(build_instance(ex, 2))
    assert "set-logic" not in exact
    assert "(declare-const aF_0 Bool)" in exact and "(declare-const b_1_0 Bool)" in exact
    assert exact.rstrip().endswith("(check-sat)\n(get-model)")
    eta = to_smtlib(build_instance(ex, 2, flavor="eta-smt", eta=1e-6))
    assert "(set-logic QF_LRA)" in eta
    assert "(declare-const e_0 Bool)" in eta
    assert re.search(r"\(<= \(\+ \(ite e_0 0\.1 0\.0\)", eta)
    assert eta.count("0.000001") == 1


def test_lp_layout():
    lp = to_lp(build_instance(mod_examples(2, 4), 2, flavor="eta-mip", eta=1e-6))
    lines = lp.splitlines()
    for section in ("Minimize", "Subject To", "Binary", "End"):
        assert section in lines
    budget = [ln for ln in lines if ln.strip().startswith("budget:")]
    assert len(budget) == 1 and budget[0].endswith("<= 0.000001")
    assert " aF_0" in lines[lines.index("Binary"):]


def test_dimacs_header_and_mapping():
    inst = build_instance(mod_examples(2, 3), 2)
    text, mapping = to_dimacs(inst)
    header = [ln for ln in text.splitlines() if ln.startswith("p ")][0].split()
    clauses = [ln for ln in text.splitlines() if ln and not ln.startswith(("c", "p"))]
    assert int(header[3]) == len(clauses)
    assert all(ln.endswith(" 0") or ln == "0" for ln in clauses)
    names = dict(line.split() for line in mapping.splitlines())
    assert set(names) == set(inst.variables)
    assert sorted(int(v) for v in names.values()) == list(range(1, len(names) + 1))


def test_example_set_validation():
    with pytest.raises(ValueError):
        ExampleSet(1, 2, (Example((0,), Fraction(1), True), Example((0,), Fraction(1), False)))
    with pytest.raises(ValueError):
        ExampleSet(1, 2, (Example((0,), Fraction(0), True),))
    ex = mod_examples(2, 3)
    assert len(ex) == count_words(2, 3)
    assert ex.total_weight == 1 - Fraction(9, 10) ** 4
    assert ex.consistent(mod_language(2)) and not ex.consistent(mod_language(3))
    assert all(e.positive == mod_language(2).member(e.x) for e in ex.items)
    assert [e.x for e in ex.items] == list(words(2, 3))
