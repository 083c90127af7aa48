"""Epsilon-closure learning: breadth-first exploration of access strings.

Each access string in the queue is a hypothesis state. For every unexplored
state ``u`` and symbol ``a`` the learner estimates the distance between the
residual of the oracle language by ``u a`` and by each known access string,
and either reuses the closest one or adds ``u a`` as a new state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .automata import Dfa, Word, run_batch, word_str
from .metric import hoeffding_radius
from .oracle import ConfidenceOracle


@dataclass(frozen=True)
class EpsilonSchedule:
    """Merge threshold for a candidate transition target of a given length.

    ``constant``: ``eps0`` everywhere. ``geometric``: ``2 * c(length) * eta``
    where ``c`` is the oracle's prefix-scaling constant.
    """

    kind: str
    value: float

    @classmethod
    def constant(cls, eps0: float) -> "EpsilonSchedule":
        if eps0 <= 0:
            raise ValueError("constant epsilon must be positive")
        return cls("constant", eps0)

    @classmethod
    def geometric(cls, eta: float) -> "EpsilonSchedule":
        if eta <= 0:
            raise ValueError("eta must be positive")
        return cls("geometric", eta)

    def threshold(self, oracle: ConfidenceOracle, length: int) -> float:
        if self.kind == "constant":
            return self.value
        return 2 * oracle.prefix_scaling(length) * self.value


@dataclass(frozen=True)
class LearnerConfig:
    schedule: EpsilonSchedule
    samples_per_test: int = 100_000
    delta: float = 0.01
    max_states: int = 64
    seed: int | None = 0
    max_doublings: int = 2
    labeling: str = "sign"  # or "majority"

    def __post_init__(self):
        if self.max_states < 1:
            raise ValueError("max_states must be at least 1")
        if self.samples_per_test < 1:
            raise ValueError("samples_per_test must be at least 1")
        if self.labeling not in ("sign", "majority"):
            raise ValueError(f"unknown labeling {self.labeling!r}")

    @property
    def confidence(self) -> float:
        return 1 - self.delta


@dataclass(frozen=True)
class TranscriptEntry:
    u: Word
    symbol: int
    target: Word
    estimate: float
    radius: float
    decision: str  # "merge" | "new-state"

    def line(self) -> str:
        return (f"{word_str(self.u) or '-'} {self.symbol} {word_str(self.target) or '-'} "
                f"{self.estimate:.6g} {self.radius:.6g} {self.decision}")


@dataclass
class Transcript:
    entries: list[TranscriptEntry] = field(default_factory=list)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def to_text(self) -> str:
        return "".join(e.line() + "\n" for e in self.entries)


class LearnerAbort(RuntimeError):
    """Raised when the hypothesis would exceed ``max_states``; carries the partial run."""

    def __init__(self, message: str, transcript: Transcript, access_strings: list[Word]):
        super().__init__(message)
        self.transcript = transcript
        self.access_strings = access_strings


def tie_break(candidates: Sequence[tuple[int, float]]) -> int:
    """Index with the smallest estimate; ties go to the earliest inserted candidate.

    ``candidates`` holds ``(insertion index, estimate)`` pairs.
    """
    if not candidates:
        raise ValueError("no candidates")
    return min(candidates, key=lambda c: (c[1], c[0]))[0]


def learn(oracle: ConfidenceOracle, config: LearnerConfig) -> tuple[Dfa, Transcript]:
    rng = np.random.default_rng(config.seed)
    sigma = oracle.alphabet_size
    access: list[Word] = [()]
    delta: dict[tuple[int, int], int] = {}
    transcript = Transcript()

    i = 0
    while i < len(access):
        u = access[i]
        for a in range(sigma):
            w = u + (a,)
            eps = config.schedule.threshold(oracle, len(w))
            mismatches = np.zeros(len(access), dtype=np.int64)
            total = 0
            draw = config.samples_per_test
            rounds = 0
            while True:
                batch = oracle.sample_batch(rng, draw)
                signs = oracle.signs_many([w] + access, batch)
                mismatches += np.count_nonzero(signs[1:] != signs[0], axis=1)
                total += draw
                est = mismatches / total
                radius = hoeffding_radius(total, config.delta)
                best = tie_break(list(enumerate(est.tolist())))
                e = float(est[best])
                if e + radius < eps:
                    decision = "merge"
                elif e - radius >= eps:
                    decision = "new-state"
                elif rounds < config.max_doublings:
                    rounds += 1
                    draw = total
                    continue
                else:
                    decision = "merge"
                break
            transcript.entries.append(TranscriptEntry(u, a, access[best] if decision == "merge" else w,
                                                      e, radius, decision))
            if decision == "merge":
                delta[(i, a)] = best
            else:
                if len(access) >= config.max_states:
                    raise LearnerAbort(f"hypothesis would exceed {config.max_states} states",
                                       transcript, list(access))
                access.append(w)
                delta[(i, a)] = len(access) - 1
        i += 1

    table = [[delta[(q, a)] for a in range(sigma)] for q in range(len(access))]
    if config.labeling == "sign":
        accepting = {q for q, u in enumerate(access) if oracle.sign(u)}
    else:
        accepting = _majority_labels(oracle, table, rng, config.samples_per_test)
    return Dfa(len(access), sigma, table, 0, accepting), transcript


def _majority_labels(oracle, table, rng, m) -> set[int]:
    topology = Dfa(len(table), oracle.alphabet_size, table, 0, set())
    batch = oracle.sample_batch(rng, m)
    finals = run_batch(topology, batch)
    votes = np.where(oracle.signs((), batch), 1, -1)
    tally = np.bincount(finals, weights=votes, minlength=topology.n)
    return {q for q in range(topology.n) if tally[q] >= 0}
