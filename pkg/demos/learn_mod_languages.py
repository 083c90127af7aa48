"""Learn the mod-n languages from a geometric confidence oracle.

For each n the learner should find exactly n states. The transcript shows
every closure decision with the estimated distance and the threshold it was
compared against.

    python demos/learn_mod_languages.py
"""

from confdfa import EpsilonSchedule, GeometricOracle, LearnerConfig, learn, mod_language
from confdfa.automata import is_equivalent
from confdfa.metric import OracleLanguage, exact_distance_truncated

LAM = 0.9
ETA = 1e-4

for n in range(1, 6):
    oracle = GeometricOracle(mod_language(n), LAM)
    config = LearnerConfig(EpsilonSchedule.geometric(ETA), samples_per_test=60_000, seed=n)
    dfa, transcript = learn(oracle, config)
    d = exact_distance_truncated(oracle, OracleLanguage(oracle), dfa, 30)
    print(f"mod {n}: {dfa.n} states, equivalent={is_equivalent(dfa, mod_language(n))}, d<=30 = {d:.3g}")
    if n == 3:
        print("  transcript (access string, symbol, target state, distance, threshold, decision):")
        for line in transcript.to_text().splitlines():
            print("   ", line)
