"""Learning DFAs from confidence oracles, and identifying minimal DFAs by constraint solving."""

from .automata import Dfa, load_dfa, minimize, mod_language, parse_dfa, random_dfa, save_dfa
from .learner import EpsilonSchedule, LearnerConfig, learn
from .metric import estimate_distance, exact_distance_truncated
from .oracle import GeometricOracle, empirical_oracle, perturb, truncation_length

__version__ = "0.1.0"

__all__ = [
    "Dfa", "EpsilonSchedule", "GeometricOracle", "LearnerConfig", "empirical_oracle",
    "estimate_distance", "exact_distance_truncated", "learn", "load_dfa", "minimize",
    "mod_language", "parse_dfa", "perturb", "random_dfa", "save_dfa", "truncation_length",
]
