"""Smallest-DFA search over increasing sizes, plus an exhaustive reference."""

from __future__ import annotations

import io
import itertools
import tempfile
import time
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from pathlib import Path

import numpy as np

from ..automata import Dfa
from ..encodings import ExampleSet, build_instance, decode_model, to_dimacs, to_lp, to_smtlib
from ..encodings.build import EncodingInstance
from ..oracle import as_fraction
from .backends import SAT, TIMEOUT, UNSAT, BackendError, SolverBackend, parse_model

FLAVORS_BY_KIND = {"sat": ("exact-sat",), "smt": ("exact-sat", "eta-smt"), "mip": ("eta-mip",)}


class SearchError(RuntimeError):
    pass


@dataclass
class SizeRecord:
    n: int
    verdict: str
    seconds: float
    variables: int
    constraints: int
    message: str = ""


@dataclass
class SearchReport:
    records: list[SizeRecord] = field(default_factory=list)
    winner: tuple[int, Dfa] | None = None
    complete: bool = True

    @property
    def n_star(self) -> int | None:
        return None if self.winner is None else self.winner[0]

    def verdicts(self) -> list[str]:
        return [r.verdict for r in self.records]

    def to_csv(self, header: bool = True) -> str:
        buf = io.StringIO()
        if header:
            buf.write("n,verdict,seconds,vars,constraints\n")
        for r in self.records:
            buf.write(f"{r.n},{r.verdict},{r.seconds:.6f},{r.variables},{r.constraints}\n")
        return buf.getvalue()


def problem_text(instance: EncodingInstance, kind: str) -> tuple[str, str | None]:
    """Problem file contents for a backend kind, and the DIMACS name mapping if any."""
    if instance.flavor not in FLAVORS_BY_KIND[kind]:
        raise ValueError(f"a {kind} backend cannot take a {instance.flavor} instance")
    if kind == "sat":
        return to_dimacs(instance)
    if kind == "mip":
        return to_lp(instance), None
    return to_smtlib(instance), None


def solve_instance(instance: EncodingInstance, backend: SolverBackend, timeout: float | None = None,
                   workdir=None) -> tuple[str, Dfa | None, str]:
    """Run one fixed-size instance; returns (verdict, decoded DFA or None, message)."""
    text, mapping = problem_text(instance, backend.kind)
    with tempfile.TemporaryDirectory(dir=workdir) as tmp:
        path = Path(tmp) / f"n{instance.n}{backend.suffix}"
        path.write_text(text)
        res = backend.invoke(path, timeout)
    if res.verdict != SAT:
        return res.verdict, None, res.message
    model = parse_model(backend.kind, res.output, mapping)
    dfa = decode_model(instance, model)
    check_winner(instance, dfa)
    return SAT, dfa, ""


def check_winner(instance: EncodingInstance, dfa: Dfa) -> None:
    ex = instance.examples
    if instance.flavor == "exact-sat":
        if not ex.consistent(dfa):
            raise SearchError(f"decoded {dfa.n}-state DFA disagrees with the examples")
    elif ex.misclassified_weight(dfa) > instance.eta:
        raise SearchError(f"decoded {dfa.n}-state DFA exceeds the error budget")


def minimal_search(examples: ExampleSet, backend: SolverBackend, eta=0, direction: str = "backward",
                   flavor: str | None = None, n_max: int = 10, timeout: float | None = None,
                   minimize_error: bool = False) -> SearchReport:
    """Try n = 1, 2, ... up to ``n_max`` and stop at the first satisfiable size.

    The default flavor follows the backend: exact CNF for ``sat``, the eta
    relaxation for ``smt`` (exact when eta is 0) and ``mip``. A timeout or solver
    error ends the search with ``complete=False``.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    eta = as_fraction(eta)
    if flavor is None:
        flavor = {"sat": "exact-sat", "smt": "eta-smt" if eta else "exact-sat", "mip": "eta-mip"}[backend.kind]
    if flavor == "exact-sat" and eta:
        raise ValueError("the exact flavor has no error budget; use an eta flavor")
    report = SearchReport()
    for n in range(1, n_max + 1):
        inst = build_instance(examples, n, direction, flavor, eta, minimize_error)
        t0 = time.perf_counter()
        verdict, dfa, msg = solve_instance(inst, backend, timeout)
        secs = max(time.perf_counter() - t0, 1e-9)
        report.records.append(SizeRecord(n, verdict, secs, inst.num_variables, inst.num_constraints, msg))
        if verdict == SAT:
            report.winner = (n, dfa)
            return report
        if verdict != UNSAT:
            report.complete = False
            return report
    return report


# --- brute force ---------------------------------------------------------------


def _integer_weights(examples: ExampleSet) -> tuple[np.ndarray, int]:
    den = 1
    for e in examples.items:
        den = lcm(den, e.weight.denominator)
    nums = [e.weight.numerator * (den // e.weight.denominator) for e in examples.items]
    dtype = np.int64 if sum(nums) < 2**62 else object
    return np.array(nums, dtype=dtype), den


def all_dfas(n: int, sigma: int):
    """Every DFA on states 0..n-1 with initial state 0, as (delta array, accept mask)."""
    for targets in itertools.product(range(n), repeat=n * sigma):
        delta = np.array(targets, dtype=np.int64).reshape(n, sigma)
        for bits in range(1 << n):
            yield delta, np.array([(bits >> i) & 1 for i in range(n)], dtype=bool)


def brute_force_minimal(examples: ExampleSet, eta=0, n_max: int = 3, guard: bool = True):
    """Smallest n <= n_max with an n-state DFA of misclassified weight <= eta.

    Returns ``(n_star, witness, best)`` where ``best[n]`` is the least
    misclassified weight over all n-state DFAs (exact). ``n_star`` and
    ``witness`` are None when no size qualifies.
    """
    sigma = examples.alphabet_size
    if guard and (n_max > 3 or sigma > 2):
        raise ValueError("brute force is limited to n_max <= 3 and |Sigma| <= 2")
    eta = as_fraction(eta)
    weights, den = _integer_weights(examples)
    labels = np.array([e.positive for e in examples.items], dtype=bool)
    # examples sorted so each word's parent prefix is evaluated first
    order = sorted(range(len(examples.items)), key=lambda i: len(examples.items[i].x))
    xs = [examples.items[i].x for i in order]
    weights, labels = weights[order], labels[order]
    best: dict[int, Fraction] = {}
    n_star = witness = None
    for n in range(1, n_max + 1):
        deltas = np.array(list(itertools.product(range(n), repeat=n * sigma)), dtype=np.int64)
        deltas = deltas.reshape(-1, n, sigma)
        idx = np.arange(len(deltas))
        # reach[d, j] = state of DFA d after example j
        cache: dict[tuple, np.ndarray] = {(): np.zeros(len(deltas), dtype=np.int64)}
        reach = np.empty((len(deltas), len(xs)), dtype=np.int64)
        for j, x in enumerate(xs):
            if x not in cache:
                parent = x[:-1]
                if parent not in cache:
                    q = cache[()]
                    for t in range(len(parent)):
                        q = deltas[idx, q, parent[t]]
                    cache[parent] = q
                cache[x] = deltas[idx, cache[parent], x[-1]]
            reach[:, j] = cache[x]
        masks = ((np.arange(1 << n)[:, None] >> np.arange(n)[None, :]) & 1).astype(bool)  # (2^n, n)
        top_val, top = None, None
        for bi, mask in enumerate(masks):
            accepted = mask[reach]  # (D, E)
            wrong = accepted != labels[None, :]
            err = wrong.astype(weights.dtype) @ weights if weights.dtype != object else \
                np.array([sum(weights[row]) for row in wrong], dtype=object)
            d = int(np.argmin(err)) if weights.dtype != object else min(range(len(err)), key=lambda i: err[i])
            if top_val is None or err[d] < top_val:
                top_val, top = err[d], (d, bi)
        best[n] = Fraction(int(top_val), den)
        if n_star is None and best[n] <= eta:
            d, bi = top
            delta = deltas[d].tolist()
            n_star = n
            witness = Dfa(n, sigma, delta, 0, {i for i in range(n) if masks[bi][i]})
    return n_star, witness, best


def feasible_sizes(best: dict[int, Fraction], eta) -> dict[int, bool]:
    eta = as_fraction(eta)
    return {n: b <= eta for n, b in best.items()}


__all__ = [
    "BackendError", "SearchError", "SearchReport", "SizeRecord", "all_dfas", "brute_force_minimal",
    "check_winner", "feasible_sizes", "minimal_search", "problem_text", "solve_instance", "TIMEOUT",
]
