"""Reader for the subset of CPLEX-LP that the encoder writes.

One objective, one row per line, binaries only. Enough for the built-in MIP
backend; external solvers read the same file directly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_array


class LpParseError(ValueError):
    pass


@dataclass
class LpProblem:
    names: list[str] = field(default_factory=list)
    objective: dict[str, float] = field(default_factory=dict)
    rows: list[tuple[dict[str, float], str, float]] = field(default_factory=list)

    def index(self) -> dict[str, int]:
        return {n: i for i, n in enumerate(self.names)}

    def objective_vector(self) -> np.ndarray:
        idx = self.index()
        c = np.zeros(len(self.names))
        for name, coef in self.objective.items():
            c[idx[name]] += coef
        return c

    def matrix(self) -> csr_array:
        idx = self.index()
        data, ri, ci = [], [], []
        for r, (terms, _, _) in enumerate(self.rows):
            for name, coef in terms.items():
                data.append(coef)
                ri.append(r)
                ci.append(idx[name])
        return csr_array((data, (ri, ci)), shape=(len(self.rows), len(self.names)))

    def lower(self) -> np.ndarray:
        return np.array([rhs if sense in (">=", "=") else -np.inf for _, sense, rhs in self.rows])

    def upper(self) -> np.ndarray:
        return np.array([rhs if sense in ("<=", "=") else np.inf for _, sense, rhs in self.rows])


_TOKEN = re.compile(r"\s*([+-])?\s*(\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)?\s*([A-Za-z_][\w.\[\]]*)?")
_SENSE = re.compile(r"(<=|>=|=<|=>|=|<|>)")


def _linear(text: str) -> dict[str, float]:
    out: dict[str, float] = {}
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise LpParseError(f"cannot read linear expression near {text[pos:pos + 20]!r}")
        sign, num, var = m.groups()
        pos = m.end()
        coef = float(num) if num else 1.0
        if sign == "-":
            coef = -coef
        if var is None:
            if num is None:
                raise LpParseError(f"dangling sign in {text!r}")
            if coef != 0:
                raise LpParseError(f"constant term in {text!r}")
            continue
        out[var] = out.get(var, 0.0) + coef
    return out


def read_lp(text: str) -> LpProblem:
    prob = LpProblem()
    seen: dict[str, None] = {}
    section = None
    pending = ""

    def note(names):
        for n in names:
            seen.setdefault(n, None)

    def finish_row(line: str) -> None:
        if ":" in line:
            line = line.split(":", 1)[1]
        parts = _SENSE.split(line)
        if len(parts) != 3:
            raise LpParseError(f"bad constraint {line!r}")
        lhs, sense, rhs = parts
        sense = {"<": "<=", "=<": "<=", ">": ">=", "=>": ">="}.get(sense, sense)
        terms = _linear(lhs)
        note(terms)
        prob.rows.append((terms, sense, float(rhs)))

    for raw in text.splitlines():
        line = raw.split("\\", 1)[0].strip()
        if not line:
            continue
        head = line.lower()
        if head in ("minimize", "minimise", "min", "maximize", "maximise", "max"):
            if head.startswith("max"):
                raise LpParseError("maximisation is not supported")
            section = "obj"
            continue
        if head in ("subject to", "such that", "st", "s.t."):
            section = "st"
            continue
        if head in ("binary", "binaries", "bin"):
            section = "bin"
            continue
        if head == "end":
            break
        if head in ("bounds", "general", "generals", "integer"):
            raise LpParseError(f"section {line!r} is not supported")
        if section == "obj":
            body = line.split(":", 1)[1] if ":" in line else line
            terms = _linear(body)
            note(terms)
            for k, v in terms.items():
                prob.objective[k] = prob.objective.get(k, 0.0) + v
        elif section == "st":
            pending = f"{pending} {line}".strip()
            if _SENSE.search(pending.split(":", 1)[-1]) and re.search(r"[-+]?\d[\d.eE+-]*\s*$", pending):
                finish_row(pending)
                pending = ""
        elif section == "bin":
            note(line.split())
        else:
            raise LpParseError(f"text outside any section: {line!r}")
    if pending:
        raise LpParseError(f"unterminated constraint {pending!r}")
    prob.names = list(seen)
    return prob
