"""Exact and error-tolerant minimal DFA search, checked against brute force.

Examples are all strings up to length 5, weighted by the geometric measure of
mod 4. With no error budget four states are needed. Allowing slightly more
than the best 2-state error lets two states win instead.

    python demos/minimal_size_search.py
"""

from fractions import Fraction

from confdfa import GeometricOracle, mod_language
from confdfa.automata import format_dfa
from confdfa.encodings import build_example_set
from confdfa.solve import BuiltinMipBackend, BuiltinSatBackend, brute_force_minimal, minimal_search

examples = build_example_set(GeometricOracle(mod_language(4), 0.9), 5)
print(f"{len(examples)} examples, total weight {float(examples.total_weight):.6f}")

_, _, best = brute_force_minimal(examples, 0, n_max=3)
for n, err in best.items():
    print(f"brute force: best {n}-state DFA misclassifies weight {float(err):.6f}")

for direction in ("forward", "backward"):
    report = minimal_search(examples, BuiltinSatBackend(), direction=direction, n_max=5)
    print(f"\nexact, {direction}:")
    print(report.to_csv(), end="")

eta = best[2] + Fraction(1, 10**6)
report = minimal_search(examples, BuiltinMipBackend(), eta=eta, n_max=5)
n, dfa = report.winner
print(f"\neta = {float(eta):.6f} with the MIP backend: {n} states")
print(f"misclassified weight {float(examples.misclassified_weight(dfa)):.6f}")
print(format_dfa(dfa))
