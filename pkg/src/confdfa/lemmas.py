"""Randomized exact checks of the two derivative inequalities behind the learner's guarantee.

Both are stated for the normalized geometric measure
``pi(x) = (1 - lam) * (lam / |Sigma|)**|x|``, under which
``pi(u y) = (lam / |Sigma|)**|u| * pi(y)``. All distances are truncated at
``k`` and computed exactly with rationals.

Derivative bound (languages L1, L2, strings |u| >= |v|)::

    d<=k(u^-1 L2, v^-1 L2) <= 2 c(|u|) (d<=k(L1, L2) + tail(k)) + d<=k(u^-1 L1, v^-1 L1)

with ``c(l) = (|Sigma| / lam)**l``. The ``tail(k)`` slack covers the strings
between lengths k and k + |u| that a truncated derivative can still see; the
tighter form with ``d<=k+|u|(L1, L2)`` is checked as well.

Single-edit bound (A, A' differ only at ``t --a-->``, going to s in A and s' in A')::

    d<=k(A, A') <= lam**(|v|+1) / (|Sigma| (1 - lam)) * d<=k(s^-1 A, s'^-1 A')

with v the shortest access string to t. The residual on the right is taken in
A' for s', which is what the decomposition of d(A, A') yields; the variant
with A's residual at both states is counted separately, for information.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .automata import Dfa, format_dfa, random_dfa, shortest_access_strings, word_str
from .metric import Derivative, exact_distance_truncated
from .oracle import GeometricOracle, as_fraction


@dataclass
class LemmaTrial:
    lhs: Fraction
    rhs: Fraction
    holds: bool
    detail: dict = field(default_factory=dict)

    def to_json(self) -> str:
        out = dict(self.detail, lhs=str(self.lhs), rhs=str(self.rhs), holds=self.holds)
        return json.dumps(out, sort_keys=True)


@dataclass
class LemmaReport:
    name: str
    trials: int = 0
    violations: list[LemmaTrial] = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    @property
    def passed(self) -> int:
        return self.trials - len(self.violations)

    def summary(self) -> str:
        extra = "".join(f" {k}={v}" for k, v in sorted(self.notes.items()))
        return f"{self.name}: {self.passed}/{self.trials} hold, {len(self.violations)} violations{extra}"


def _measure(alphabet_size: int, lam) -> GeometricOracle:
    # only the measure matters here; the base language is irrelevant
    return GeometricOracle(Dfa(1, alphabet_size, [[0] * alphabet_size], 0, {0}), lam)


def _dist(meas: GeometricOracle, a, b, k: int) -> Fraction:
    return exact_distance_truncated(meas, a, b, k, exact=True)


def _random_word(rng: np.random.Generator, sigma: int, max_len: int) -> tuple[int, ...]:
    return tuple(int(s) for s in rng.integers(0, sigma, size=int(rng.integers(0, max_len + 1))))


def edit_transition(dfa: Dfa, t: int, a: int, target: int) -> Dfa:
    delta = [list(row) for row in dfa.delta]
    delta[t][a] = target
    return Dfa(dfa.n, dfa.alphabet_size, delta, dfa.initial, dfa.accepting)


def derivative_bound_trial(l1: Dfa, l2: Dfa, u, v, lam, k: int) -> LemmaTrial:
    u, v = tuple(u), tuple(v)
    if len(u) < len(v):
        raise ValueError("the bound needs |u| >= |v|")
    sigma = l1.alphabet_size
    meas = _measure(sigma, lam)
    lam = as_fraction(lam)
    c_u = (Fraction(sigma) / lam) ** len(u)
    lhs = _dist(meas, Derivative(l2, u), Derivative(l2, v), k)
    d12 = _dist(meas, l1, l2, k)
    d1 = _dist(meas, Derivative(l1, u), Derivative(l1, v), k)
    rhs = 2 * c_u * (d12 + meas.length_tail_exact(k)) + d1
    tight = 2 * c_u * _dist(meas, l1, l2, k + len(u)) + d1
    holds = lhs <= tight <= rhs
    detail = {"l1": format_dfa(l1), "l2": format_dfa(l2), "u": word_str(u), "v": word_str(v),
              "lam": str(lam), "k": k, "tight_rhs": str(tight)}
    return LemmaTrial(lhs, rhs, holds, detail)


def single_edit_trial(a: Dfa, t: int, symbol: int, target: int, lam, k: int) -> tuple[LemmaTrial, bool]:
    """The single-edit bound, plus whether the same-automaton variant held."""
    sigma = a.alphabet_size
    access = shortest_access_strings(a)
    if t not in access:
        raise ValueError(f"state {t} is unreachable")
    v = access[t]
    b = edit_transition(a, t, symbol, target)
    s, s2 = a.delta[t][symbol], target
    meas = _measure(sigma, lam)
    lam = as_fraction(lam)
    const = lam ** (len(v) + 1) / (sigma * (1 - lam))
    lhs = _dist(meas, a, b, k)
    rhs = const * _dist(meas, a.with_initial(s), b.with_initial(s2), k)
    variant = const * _dist(meas, a.with_initial(s), a.with_initial(s2), k)
    detail = {"a": format_dfa(a), "t": t, "symbol": symbol, "s": s, "s_prime": s2, "v": word_str(v),
              "lam": str(lam), "k": k}
    return LemmaTrial(lhs, rhs, lhs <= rhs, detail), lhs <= variant


def check_derivative_bound(trials: int = 500, alphabet_size: int = 2, max_states: int = 5, lam=0.9,
                           k: int = 16, max_word: int = 4, seed=0) -> LemmaReport:
    """Random language pairs; half the pairs are single-transition edits of each other so the bound is tested near tightness."""
    rng = np.random.default_rng(seed)
    report = LemmaReport("derivative-bound")
    for _ in range(trials):
        n = int(rng.integers(1, max_states + 1))
        l1 = random_dfa(n, alphabet_size, seed=int(rng.integers(2**32)))
        if rng.random() < 0.5:
            t, sym, tgt = (int(rng.integers(n)), int(rng.integers(alphabet_size)), int(rng.integers(n)))
            l2 = edit_transition(l1, t, sym, tgt)
        else:
            l2 = random_dfa(int(rng.integers(1, max_states + 1)), alphabet_size, seed=int(rng.integers(2**32)))
        u, v = _random_word(rng, alphabet_size, max_word), _random_word(rng, alphabet_size, max_word)
        if len(u) < len(v):
            u, v = v, u
        if rng.random() < 0.1:
            v = u
        trial = derivative_bound_trial(l1, l2, u, v, lam, k)
        report.trials += 1
        if not trial.holds:
            report.violations.append(trial)
    return report


def check_single_edit_bound(trials: int = 500, alphabet_size: int = 2, max_states: int = 5, lam=0.9,
                            k: int = 16, seed=0) -> LemmaReport:
    rng = np.random.default_rng(seed)
    report = LemmaReport("single-edit-bound")
    variant_fail = 0
    for _ in range(trials):
        n = int(rng.integers(1, max_states + 1))
        a = random_dfa(n, alphabet_size, seed=int(rng.integers(2**32)))
        t = int(rng.integers(n))
        sym = int(rng.integers(alphabet_size))
        tgt = int(rng.integers(n))
        trial, variant_ok = single_edit_trial(a, t, sym, tgt, lam, k)
        report.trials += 1
        variant_fail += not variant_ok
        if not trial.holds:
            report.violations.append(trial)
    report.notes["same_automaton_variant_failures"] = variant_fail
    return report


def report_json(report: LemmaReport) -> str:
    data = {"name": report.name, "trials": report.trials, "notes": report.notes,
            "violations": [json.loads(v.to_json()) for v in report.violations]}
    return json.dumps(data, indent=1, sort_keys=True)


__all__ = [
    "LemmaReport", "LemmaTrial", "check_derivative_bound", "check_single_edit_bound",
    "derivative_bound_trial", "edit_transition", "report_json", "single_edit_trial",
]
