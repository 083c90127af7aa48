"""File-based solver backends.

Every backend takes a problem file and returns a verdict plus the raw output
text; :func:`parse_model` turns that text into a variable assignment. External
solvers run as subprocesses from a command template; the built-in SAT and MIP
backends honour the same contract so the search code never special-cases them.
"""

from __future__ import annotations

import hashlib
import json
import re
import shlex
import subprocess
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .sat import SolverTimeout, solve_cnf

SAT, UNSAT, TIMEOUT, ERROR = "sat", "unsat", "timeout", "error"

MAX_BUILTIN_CLAUSES = 50_000


class BackendError(RuntimeError):
    pass


class ModelParseError(ValueError):
    pass


@dataclass(frozen=True)
class BackendResult:
    verdict: str
    output: str = ""
    message: str = ""


class SolverBackend:
    kind: str  # "smt" | "sat" | "mip"
    name: str = "backend"

    @property
    def suffix(self) -> str:
        return {"smt": ".smt2", "sat": ".cnf", "mip": ".lp"}[self.kind]

    def invoke(self, path, timeout: float | None = None) -> BackendResult:
        raise NotImplementedError


class CommandBackend(SolverBackend):
    """Runs ``template`` with ``{file}`` replaced by the problem path (appended if absent)."""

    def __init__(self, kind: str, template: str):
        if kind not in ("smt", "sat", "mip"):
            raise ValueError(f"unknown backend kind {kind!r}")
        self.kind = kind
        self.template = template
        self.name = f"{kind}:{template}"

    def invoke(self, path, timeout=None):
        cmd = self.template.replace("{file}", shlex.quote(str(path)))
        if "{file}" not in self.template:
            cmd = f"{cmd} {shlex.quote(str(path))}"
        try:
            proc = subprocess.run(cmd, shell=True, capture_output=True, text=True, timeout=timeout)
        except subprocess.TimeoutExpired:
            return BackendResult(TIMEOUT, message=f"no answer within {timeout}s")
        except OSError as exc:
            raise BackendError(f"could not run {cmd!r}: {exc}") from exc
        if proc.returncode == 127:
            raise BackendError(f"solver command not found: {cmd!r}\n{proc.stderr.strip()}")
        return BackendResult(read_verdict(self.kind, proc.stdout), proc.stdout, proc.stderr)


def read_verdict(kind: str, text: str) -> str:
    lowered = text.lower()
    if kind == "smt":
        for line in lowered.splitlines():
            word = line.strip()
            if word in ("sat", "unsat"):
                return word
            if word in ("unknown", "timeout"):
                return TIMEOUT
        return ERROR
    if kind == "sat":
        for line in lowered.splitlines():
            line = line.strip()
            if line.startswith("s "):
                line = line[2:].strip()
            if line == "unsatisfiable":
                return UNSAT
            if line == "satisfiable":
                return SAT
            if line in ("unknown", "indeterminate"):
                return TIMEOUT
        return ERROR
    if "infeasible" in lowered:
        return UNSAT
    if re.search(r"\b(feasible|optimal|integer solution)\b", lowered):
        return SAT
    if "time limit" in lowered:
        return TIMEOUT
    return ERROR


class BuiltinSatBackend(SolverBackend):
    """The in-process CDCL solver over a DIMACS file."""

    kind = "sat"
    name = "builtin-sat"

    def __init__(self, max_clauses: int = MAX_BUILTIN_CLAUSES):
        self.max_clauses = max_clauses

    def invoke(self, path, timeout=None):
        num_vars, clauses = read_dimacs(Path(path).read_text())
        if len(clauses) > self.max_clauses:
            return BackendResult(ERROR, message=f"{len(clauses)} clauses exceed the built-in limit {self.max_clauses}")
        try:
            res = solve_cnf(num_vars, clauses, timeout=timeout)
        except SolverTimeout:
            return BackendResult(TIMEOUT, "s UNKNOWN\n")
        if not res.satisfiable:
            return BackendResult(UNSAT, "s UNSATISFIABLE\n")
        lits = [v if res.model[v] else -v for v in range(1, num_vars + 1)]
        lines = ["s SATISFIABLE"]
        for i in range(0, len(lits), 20):
            lines.append("v " + " ".join(map(str, lits[i:i + 20])))
        lines.append("v 0")
        return BackendResult(SAT, "\n".join(lines) + "\n")


class BuiltinMipBackend(SolverBackend):
    """Reads the LP file and solves it with HiGHS through ``scipy.optimize.milp``."""

    kind = "mip"
    name = "builtin-mip"

    def invoke(self, path, timeout=None):
        from scipy.optimize import LinearConstraint, milp

        from .lp import read_lp

        lp = read_lp(Path(path).read_text())
        options = {"disp": False}
        if timeout is not None:
            options["time_limit"] = float(timeout)
        cons = []
        if lp.rows:
            cons.append(LinearConstraint(lp.matrix(), lp.lower(), lp.upper()))
        res = milp(c=lp.objective_vector(), integrality=np.ones(len(lp.names)),
                   bounds=(0, 1), constraints=cons, options=options)
        if res.status == 0:
            lines = ["feasible"] + [f"{n} {v:.9g}" for n, v in zip(lp.names, res.x)]
            return BackendResult(SAT, "\n".join(lines) + "\n")
        if res.status == 2:
            return BackendResult(UNSAT, "infeasible\n")
        if res.status == 1:
            if res.x is not None:
                lines = ["feasible"] + [f"{n} {v:.9g}" for n, v in zip(lp.names, res.x)]
                return BackendResult(SAT, "\n".join(lines) + "\n")
            return BackendResult(TIMEOUT, "time limit\n")
        return BackendResult(ERROR, message=res.message)


def problem_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


class ReplayBackend(SolverBackend):
    """Replays canned solver answers keyed by the SHA-256 of the problem file."""

    def __init__(self, kind: str, fixtures: dict[str, dict]):
        self.kind = kind
        self.fixtures = fixtures
        self.name = f"replay-{kind}"

    @classmethod
    def load(cls, path) -> "ReplayBackend":
        data = json.loads(Path(path).read_text())
        return cls(data["kind"], data["answers"])

    def invoke(self, path, timeout=None):
        key = problem_digest(path)
        if key not in self.fixtures:
            return BackendResult(ERROR, message=f"no recorded answer for problem {key[:12]}")
        rec = self.fixtures[key]
        return BackendResult(rec["verdict"], rec.get("output", ""))


class RecordingBackend(SolverBackend):
    """Wraps a backend and remembers every answer, for building replay fixtures."""

    def __init__(self, inner: SolverBackend):
        self.inner = inner
        self.kind = inner.kind
        self.name = f"record({inner.name})"
        self.answers: dict[str, dict] = {}

    def invoke(self, path, timeout=None):
        res = self.inner.invoke(path, timeout)
        self.answers[problem_digest(path)] = {"verdict": res.verdict, "output": res.output}
        return res

    def dump(self, path) -> None:
        Path(path).write_text(json.dumps({"kind": self.kind, "answers": self.answers}, indent=0, sort_keys=True))


def backend_from_spec(spec: str) -> SolverBackend:
    """``builtin-sat``, ``builtin-mip``, ``replay:<json>`` or ``<kind>:cmd=<template>``."""
    if spec == "builtin-sat":
        return BuiltinSatBackend()
    if spec == "builtin-mip":
        return BuiltinMipBackend()
    if spec.startswith("replay:"):
        return ReplayBackend.load(spec[len("replay:"):])
    kind, _, rest = spec.partition(":")
    if kind in ("smt", "sat", "mip") and rest.startswith("cmd="):
        template = rest[len("cmd="):].strip()
        if len(template) >= 2 and template[0] == template[-1] and template[0] in "\"'":
            template = template[1:-1]
        if not template:
            raise ValueError("empty solver command template")
        return CommandBackend(kind, template)
    raise ValueError(f"cannot parse backend spec {spec!r}")


def read_dimacs(text: str) -> tuple[int, list[list[int]]]:
    num_vars = 0
    clauses: list[list[int]] = []
    cur: list[int] = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ModelParseError(f"bad DIMACS header {line!r}")
            num_vars = int(parts[2])
            continue
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                clauses.append(cur)
                cur = []
            else:
                cur.append(lit)
    if cur:
        clauses.append(cur)
    return num_vars, clauses


_DEFINE_FUN = re.compile(r"\(define-fun\s+([^\s()]+)\s+\(\)\s+Bool\s+(true|false)\s*\)")


def parse_model(kind: str, output: str, mapping: str | dict | None = None, tolerance: float = 1e-6) -> dict[str, bool]:
    """Assignment of named variables from solver output.

    ``smt``: ``(define-fun <name> () Bool true|false)`` entries.
    ``sat``: DIMACS ``v`` lines, translated through the ``<name> <var>`` mapping.
    ``mip``: ``<name> <value>`` lines (CBC-style ``<idx> <name> <value> ...`` also
    accepted); values must lie within ``tolerance`` of 0 or 1.
    """
    if kind == "smt":
        found = {name: value == "true" for name, value in _DEFINE_FUN.findall(output)}
        if not found and "define-fun" not in output:
            raise ModelParseError("no model in SMT output")
        return found
    if kind == "sat":
        if mapping is None:
            raise ModelParseError("SAT models need the name mapping")
        if isinstance(mapping, str):
            mapping = _read_mapping(mapping)
        truth: dict[int, bool] = {}
        saw_v = False
        for line in output.splitlines():
            line = line.strip()
            if not line.startswith("v"):
                continue
            saw_v = True
            for tok in line[1:].split():
                try:
                    lit = int(tok)
                except ValueError as exc:
                    raise ModelParseError(f"bad literal {tok!r}") from exc
                if lit:
                    truth[abs(lit)] = lit > 0
        if not saw_v:
            raise ModelParseError("no 'v' lines in SAT output")
        return {name: truth.get(var, False) for name, var in mapping.items()}
    if kind == "mip":
        out: dict[str, bool] = {}
        for line in output.splitlines():
            toks = line.split()
            if len(toks) == 2:
                name, value = toks
            elif len(toks) >= 3 and toks[0].isdigit():
                name, value = toks[1], toks[2]
            else:
                continue
            try:
                x = float(value)
            except ValueError:
                continue
            if x <= tolerance:
                out[name] = False
            elif x >= 1 - tolerance:
                out[name] = True
            else:
                raise ModelParseError(f"binary {name} has fractional value {x}")
        if not out:
            raise ModelParseError("no variable values in MIP output")
        return out
    raise ValueError(f"unknown backend kind {kind!r}")


def _read_mapping(text: str) -> dict[str, int]:
    out = {}
    for line in text.splitlines():
        toks = line.split()
        if len(toks) == 2:
            out[toks[0]] = int(toks[1])
    return out


def timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    res = fn(*args, **kwargs)
    return res, time.perf_counter() - t0
