"""How the three encodings grow with the truncation length and the state count.

The trie encodings grow linearly in the number of examples. The naive one has
fewer variables but its constraints expand every path through the automaton,
so it is only tried on short strings.

    python demos/encoding_sizes.py
"""

from confdfa import GeometricOracle, mod_language
from confdfa.encodings import EncodingSizeError, build_example_set, encode

oracle = GeometricOracle(mod_language(3), 0.9)
print(f"{'k':>2} {'n':>2} {'direction':>9} {'vars':>7} {'constraints':>11}")
for k in (2, 4, 6):
    examples = build_example_set(oracle, k)
    for n in (2, 3, 4):
        for direction in ("naive", "forward", "backward"):
            try:
                inst = encode(examples, n, direction)
            except EncodingSizeError:
                print(f"{k:>2} {n:>2} {direction:>9}    (too large)")
                continue
            print(f"{k:>2} {n:>2} {direction:>9} {inst.num_variables:>7} {inst.num_constraints:>11}")
