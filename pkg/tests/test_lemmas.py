import json
from fractions import Fraction

import pytest

from confdfa.automata import mod_language, random_dfa
from confdfa.lemmas import (
    check_derivative_bound,
    check_single_edit_bound,
    derivative_bound_trial,
    edit_transition,
    report_json,
    single_edit_trial,
)


def test_equal_prefixes_give_zero_left_side():
    l1, l2 = random_dfa(3, 2, seed=1), random_dfa(4, 2, seed=2)
    trial = derivative_bound_trial(l1, l2, (0, 1), (0, 1), 0.9, 10)
    assert trial.lhs == 0 and trial.holds


def test_identical_languages_reduce_to_equality():
    l1 = random_dfa(4, 2, seed=7)
    trial = derivative_bound_trial(l1, l1, (1, 1, 0), (0,), 0.9, 10)
    # d(L1, L1) = 0, so rhs = 2 c tail(k) + lhs
    c = (Fraction(2) / Fraction(9, 10)) ** 3
    assert trial.rhs == trial.lhs + 2 * c * Fraction(9, 10) ** 11
    assert trial.holds


def test_derivative_bound_rejects_short_u():
    with pytest.raises(ValueError):
        derivative_bound_trial(mod_language(2), mod_language(3), (0,), (0, 1), 0.9, 5)


def test_no_op_edit_has_zero_distance():
    a = mod_language(3)
    trial, variant_ok = single_edit_trial(a, 1, 1, a.delta[1][1], 0.9, 10)
    assert trial.lhs == 0 and trial.rhs == 0 and trial.holds and variant_ok


def test_single_edit_on_mod2():
    # redirect 1 from the odd state back to itself: strings with two or more 1s now differ
    a = mod_language(2)
    b = edit_transition(a, 1, 1, 1)
    assert b.delta[1][1] == 1 and a.delta[1][1] == 0
    trial, _ = single_edit_trial(a, 1, 1, 1, 0.9, 12)
    assert 0 < trial.lhs <= trial.rhs
    assert trial.detail["v"] == "1"


def test_random_runs_find_no_violations():
    r1 = check_derivative_bound(trials=80, max_states=4, k=10, seed=3)
    r2 = check_single_edit_bound(trials=80, max_states=4, k=10, seed=3)
    assert r1.trials == r2.trials == 80
    assert r1.violations == [] and r2.violations == []
    assert "same_automaton_variant_failures" in r2.notes
    assert r1.summary().startswith("derivative-bound: 80/80 hold, 0 violations")


def test_report_json_round_trip():
    rep = check_single_edit_bound(trials=5, k=6, seed=1)
    data = json.loads(report_json(rep))
    assert data["name"] == "single-edit-bound" and data["trials"] == 5
    trial, _ = single_edit_trial(mod_language(2), 1, 1, 1, 0.9, 6)
    out = json.loads(trial.to_json())
    assert Fraction(out["lhs"]) == trial.lhs and out["holds"] is True
