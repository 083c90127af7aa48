import itertools
import json
import stat
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from confdfa.automata import is_equivalent, mod_language, random_dfa, universal, words
from confdfa.encodings import build_example_set, build_instance, to_lp
from confdfa.encodings.build import examples_from_dfa
from confdfa.oracle import GeometricOracle
from confdfa.solve import (
    BackendError,
    BuiltinMipBackend,
    BuiltinSatBackend,
    CommandBackend,
    ModelParseError,
    RecordingBackend,
    ReplayBackend,
    backend_from_spec,
    brute_force_minimal,
    check_model,
    feasible_sizes,
    minimal_search,
    parse_model,
    read_dimacs,
    solve_cnf,
    solve_instance,
)
from confdfa.solve.backends import read_verdict
from confdfa.solve.lp import LpParseError, read_lp
from confdfa.solve.search import all_dfas


def mod_examples(n, k, lam=0.9):
    return build_example_set(GeometricOracle(mod_language(n), lam), k)


# --- model parsing ------------------------------------------------------------


def test_parse_smt_model():
    out = "sat\n(\n  (define-fun aF_0 () Bool true)\n  (define-fun t_0_0_1 () Bool false)\n)\n"
    assert parse_model("smt", out) == {"aF_0": True, "t_0_0_1": False}
    with pytest.raises(ModelParseError):
        parse_model("smt", "sat\n")


def test_parse_dimacs_model_through_mapping():
    model = parse_model("sat", "s SATISFIABLE\nv 1 -2 0\n", "aF_0 1\nt_0_0_0 2\n")
    assert model == {"aF_0": True, "t_0_0_0": False}
    assert parse_model("sat", "v 1 -2 0", {"x": 2}) == {"x": False}
    with pytest.raises(ModelParseError):
        parse_model("sat", "v 1 -2 0")
    with pytest.raises(ModelParseError):
        parse_model("sat", "s SATISFIABLE\n", {"x": 1})


def test_parse_mip_model_tolerance_band():
    assert parse_model("mip", "feasible\naF_0 1\ne_3 0.0000004\nt_1_0_1 0.9999999\n") == {
        "aF_0": True, "e_3": False, "t_1_0_1": True}
    # CBC-style solution rows
    assert parse_model("mip", "Optimal - objective value 0\n      0 aF_0   1   0\n") == {"aF_0": True}
    with pytest.raises(ModelParseError):
        parse_model("mip", "aF_0 0.49\n")
    with pytest.raises(ModelParseError):
        parse_model("mip", "infeasible\n")


def test_read_verdict_per_kind():
    assert read_verdict("smt", "sat\n(model)") == "sat"
    assert read_verdict("smt", "unsat\n") == "unsat"
    assert read_verdict("smt", "unknown\n") == "timeout"
    assert read_verdict("smt", "(error \"x\")") == "error"
    assert read_verdict("sat", "c hi\ns UNSATISFIABLE\n") == "unsat"
    assert read_verdict("sat", "SATISFIABLE\n") == "sat"
    assert read_verdict("mip", "Problem is infeasible") == "unsat"
    assert read_verdict("mip", "Optimal - objective value 0") == "sat"
    assert read_verdict("mip", "garbage") == "error"


def test_read_dimacs():
    n, clauses = read_dimacs("c x\np cnf 3 2\n1 -2 0\n3\n0\n")
    assert n == 3 and clauses == [[1, -2], [3]]
    with pytest.raises(ModelParseError):
        read_dimacs("p dnf 1 1\n1 0\n")


# --- CDCL ---------------------------------------------------------------------


def _brute_sat(n, clauses):
    for bits in itertools.product([False, True], repeat=n):
        if all(any(bits[abs(l) - 1] == (l > 0) for l in c) for c in clauses):
            return True
    return False


clause = st.lists(st.integers(1, 7).flatmap(lambda v: st.sampled_from([v, -v])), min_size=1, max_size=3)


@settings(max_examples=300, deadline=None)
@given(st.lists(clause, max_size=40))
def test_cdcl_agrees_with_truth_tables(clauses):
    res = solve_cnf(7, clauses)
    assert res.satisfiable == _brute_sat(7, clauses)
    if res.satisfiable:
        assert check_model(clauses, res.model)


def test_cdcl_pigeonhole_unsat():
    # 5 pigeons, 4 holes
    var = lambda p, h: 4 * p + h + 1
    clauses = [[var(p, h) for h in range(4)] for p in range(5)]
    for h in range(4):
        for p, q in itertools.combinations(range(5), 2):
            clauses.append([-var(p, h), -var(q, h)])
    assert not solve_cnf(20, clauses).satisfiable


# --- LP reader ----------------------------------------------------------------


def test_lp_reader_round_trip():
    inst = build_instance(mod_examples(2, 3), 2, "backward", "eta-mip", Fraction(1, 1000))
    text = to_lp(inst)
    lp = read_lp(text)
    # linearization adds auxiliaries on top of the encoding variables
    assert set(inst.variables) <= set(lp.names)
    body = text.split("Subject To")[1].split("Binary")[0]
    assert len(lp.rows) == sum(1 for ln in body.splitlines() if ":" in ln)
    binary = text.split("Binary")[1].split("End")[0].split()
    assert sorted(binary) == sorted(lp.names)
    budget = [r for r in lp.rows if r[1] == "<=" and r[2] == pytest.approx(0.001)]
    assert budget
    a = lp.matrix()
    assert a.shape == (len(lp.rows), len(lp.names))


def test_lp_reader_rejects_unsupported_sections():
    with pytest.raises(LpParseError):
        read_lp("Maximize\n obj: x\nSubject To\n c: x <= 1\nBinary\n x\nEnd\n")
    with pytest.raises(LpParseError):
        read_lp("Minimize\n obj: x\nSubject To\n c: x <= 1\nBounds\n x <= 1\nEnd\n")


# --- backends -----------------------------------------------------------------


def test_builtin_sat_backend_output(tmp_path):
    p = tmp_path / "a.cnf"
    p.write_text("p cnf 2 2\n1 2 0\n-1 0\n")
    res = BuiltinSatBackend().invoke(p)
    assert res.verdict == "sat"
    assert parse_model("sat", res.output, {"a": 1, "b": 2}) == {"a": False, "b": True}
    p.write_text("p cnf 1 2\n1 0\n-1 0\n")
    assert BuiltinSatBackend().invoke(p).verdict == "unsat"
    assert BuiltinSatBackend(max_clauses=1).invoke(p).verdict == "error"


def test_command_backend_with_fake_solver(tmp_path):
    script = tmp_path / "fake-smt"
    script.write_text("#!/bin/sh\ngrep -q declare-const \"$1\" && echo sat && "
                      "echo '((define-fun aF_0 () Bool true))'\n")
    script.chmod(script.stat().st_mode | stat.S_IEXEC)
    problem = tmp_path / "p.smt2"
    problem.write_text("(declare-const aF_0 Bool)\n(check-sat)\n")
    backend = backend_from_spec(f"smt:cmd='{script} {{file}}'")
    assert isinstance(backend, CommandBackend)
    res = backend.invoke(problem)
    assert res.verdict == "sat"
    assert parse_model("smt", res.output) == {"aF_0": True}
    # without a {file} placeholder the path is appended
    assert CommandBackend("smt", str(script)).invoke(problem).verdict == "sat"


def test_command_backend_timeout_and_missing_binary(tmp_path):
    problem = tmp_path / "p.cnf"
    problem.write_text("p cnf 1 1\n1 0\n")
    assert CommandBackend("sat", "sleep 5; true {file}").invoke(problem, timeout=0.2).verdict == "timeout"
    with pytest.raises(BackendError):
        CommandBackend("sat", "no-such-solver-binary {file}").invoke(problem)
    with pytest.raises(ValueError):
        CommandBackend("qbf", "x")
    with pytest.raises(ValueError):
        backend_from_spec("sat:cmd=")
    with pytest.raises(ValueError):
        backend_from_spec("cplex")


def test_recording_then_replay(tmp_path):
    ex = mod_examples(2, 3)
    rec = RecordingBackend(BuiltinMipBackend())
    first = minimal_search(ex, rec, eta=Fraction(1, 1000), n_max=3)
    fixture = tmp_path / "answers.json"
    rec.dump(fixture)
    assert json.loads(fixture.read_text())["kind"] == "mip"
    replay = backend_from_spec(f"replay:{fixture}")
    assert isinstance(replay, ReplayBackend)
    second = minimal_search(ex, replay, eta=Fraction(1, 1000), n_max=3)
    assert first.verdicts() == second.verdicts() == ["unsat", "sat"]
    assert second.winner[1] == first.winner[1]
    # an unrecorded problem is an error, which ends the search as incomplete
    other = minimal_search(mod_examples(3, 3), replay, eta=0, n_max=3)
    assert other.verdicts() == ["error"] and not other.complete


# --- brute force --------------------------------------------------------------


def test_brute_force_mod2():
    n_star, witness, best = brute_force_minimal(mod_examples(2, 4), 0, n_max=3)
    assert n_star == 2
    assert is_equivalent(witness, mod_language(2))
    assert best[1] > 0 and best[2] == best[3] == 0


def test_brute_force_all_positive():
    q = GeometricOracle(universal(2), 0.9)
    ex = examples_from_dfa(universal(2), {x: q.exact_weight(x) for x in words(2, 4)}, 4)
    n_star, witness, best = brute_force_minimal(ex, 0, n_max=2)
    assert n_star == 1 and best[1] == 0 and witness.accepting == {0}


@pytest.mark.parametrize("seed", range(5))
def test_brute_force_matches_plain_enumeration(seed):
    target = random_dfa(3, 2, seed=seed)
    ex = build_example_set(GeometricOracle(target, 0.9), 3)
    _, _, best = brute_force_minimal(ex, 0, n_max=2)
    assert best[1] >= best[2]
    for n in (1, 2):
        slow = min(
            sum((e.weight for e in ex.items if bool(mask[_run(delta, e.x)]) != e.positive), Fraction(0))
            for delta, mask in all_dfas(n, 2)
        )
        assert best[n] == slow


def _run(delta, x):
    q = 0
    for a in x:
        q = int(delta[q, a])
    return q


def test_brute_force_guard():
    with pytest.raises(ValueError):
        brute_force_minimal(mod_examples(2, 2), 0, n_max=4)
    assert feasible_sizes({1: Fraction(1, 2), 2: Fraction(0)}, 0.1) == {1: False, 2: True}


# --- search -------------------------------------------------------------------


@pytest.mark.parametrize("direction", ["forward", "backward"])
def test_search_recovers_mod3_exactly(direction):
    ex = mod_examples(3, 4)
    report = minimal_search(ex, BuiltinSatBackend(), direction=direction, n_max=4)
    assert report.verdicts() == ["unsat", "unsat", "sat"]
    assert report.n_star == 3 and ex.consistent(report.winner[1])
    rows = report.to_csv().splitlines()
    assert rows[0] == "n,verdict,seconds,vars,constraints" and len(rows) == 4
    assert all(float(r.split(",")[2]) > 0 for r in rows[1:])


def test_search_budget_at_least_total_mass_gives_one_state():
    ex = mod_examples(3, 3)
    report = minimal_search(ex, BuiltinMipBackend(), eta=ex.total_weight, n_max=3)
    assert report.n_star == 1


def test_search_mod4_budget_just_above_best_two_state():
    ex = mod_examples(4, 5)
    _, _, best = brute_force_minimal(ex, 0, n_max=2)
    assert best[1] > best[2] > 0
    above = best[2] + Fraction(1, 10**7)
    report = minimal_search(ex, BuiltinMipBackend(), eta=above, n_max=4)
    assert report.verdicts() == ["unsat", "sat"]
    assert ex.misclassified_weight(report.winner[1]) <= above
    below = best[2] - Fraction(1, 10**7)
    assert minimal_search(ex, BuiltinMipBackend(), eta=below, n_max=2).verdicts() == ["unsat", "unsat"]


def test_search_rejects_bad_arguments():
    ex = mod_examples(2, 2)
    with pytest.raises(ValueError):
        minimal_search(ex, BuiltinSatBackend(), n_max=0)
    with pytest.raises(ValueError):
        minimal_search(ex, BuiltinSatBackend(), eta=0.1, flavor="exact-sat")
    with pytest.raises(ValueError):
        solve_instance(build_instance(ex, 1, flavor="eta-mip", eta=0.1), BuiltinSatBackend())


def test_search_with_z3_if_present(z3_path):
    if z3_path is None:
        pytest.skip("no z3 binary on PATH")
    ex = mod_examples(3, 3)
    backend = backend_from_spec(f"smt:cmd={z3_path} -smt2 {{file}}")
    exact = minimal_search(ex, backend, eta=0, n_max=3)
    assert exact.n_star == 3
    _, _, best = brute_force_minimal(ex, 0, n_max=3)
    relaxed = minimal_search(ex, backend, eta=best[2] + Fraction(1, 10**7), n_max=3)
    assert relaxed.n_star == 2
