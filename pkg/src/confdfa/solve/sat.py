"""A compact CDCL SAT solver for the built-in backend.

Two watched literals, first-UIP clause learning, VSIDS branching with phase
saving, and Luby restarts. Adequate for identification encodings of a few
thousand clauses; not a competitor to industrial solvers.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass


class SolverTimeout(Exception):
    pass


@dataclass
class SatResult:
    satisfiable: bool
    model: list[bool] | None = None  # model[v] for v in 1..num_vars (index 0 unused)
    conflicts: int = 0
    decisions: int = 0


def _luby(i: int) -> int:
    k = 1
    while (1 << k) - 1 < i:
        k += 1
    while (1 << k) - 1 != i:
        i -= (1 << (k - 1)) - 1
        k = 1
        while (1 << k) - 1 < i:
            k += 1
    return 1 << (k - 1)


def solve_cnf(num_vars: int, clauses, timeout: float | None = None, restart_base: int = 64) -> SatResult:
    """Decide a CNF given as lists of non-zero DIMACS literals.

    Raises :class:`SolverTimeout` once ``timeout`` seconds have elapsed.
    """
    deadline = None if timeout is None else time.monotonic() + timeout
    # literal encoding: 2*v for v, 2*v+1 for -v
    nlit = 2 * (num_vars + 1)
    val = [0] * nlit  # +1 true, -1 false, 0 unassigned (per literal)
    level = [0] * (num_vars + 1)
    reason: list[int | None] = [None] * (num_vars + 1)
    watches: list[list[int]] = [[] for _ in range(nlit)]
    db: list[list[int]] = []
    trail: list[int] = []
    trail_lim: list[int] = []
    activity = [0.0] * (num_vars + 1)
    phase = [1] * (num_vars + 1)  # 1 -> try the negative literal first
    var_inc = 1.0
    heap = [(-0.0, v) for v in range(1, num_vars + 1)]
    heapq.heapify(heap)

    def enqueue(lit: int, why) -> None:
        val[lit] = 1
        val[lit ^ 1] = -1
        v = lit >> 1
        level[v] = len(trail_lim)
        reason[v] = why
        trail.append(lit)

    units = []
    for raw in clauses:
        lits = set()
        taut = False
        for x in raw:
            lit = 2 * x if x > 0 else 2 * (-x) + 1
            if lit ^ 1 in lits:
                taut = True
                break
            lits.add(lit)
        if taut:
            continue
        if not lits:
            return SatResult(False)
        lits = list(lits)
        if len(lits) == 1:
            units.append(lits[0])
            continue
        ci = len(db)
        db.append(lits)
        watches[lits[0]].append(ci)
        watches[lits[1]].append(ci)
    for lit in units:
        if val[lit] == -1:
            return SatResult(False)
        if val[lit] == 0:
            enqueue(lit, None)

    qhead = 0

    def propagate():
        nonlocal qhead
        while qhead < len(trail):
            p = trail[qhead]
            qhead += 1
            false_lit = p ^ 1
            ws = watches[false_lit]
            keep = []
            i = 0
            nws = len(ws)
            while i < nws:
                ci = ws[i]
                i += 1
                c = db[ci]
                if c[0] == false_lit:
                    c[0], c[1] = c[1], c[0]
                first = c[0]
                if val[first] == 1:
                    keep.append(ci)
                    continue
                for k in range(2, len(c)):
                    if val[c[k]] != -1:
                        c[1], c[k] = c[k], c[1]
                        watches[c[1]].append(ci)
                        break
                else:
                    keep.append(ci)
                    if val[first] == -1:
                        keep.extend(ws[i:])
                        watches[false_lit] = keep
                        return ci
                    enqueue(first, ci)
            watches[false_lit] = keep
        return None

    def bump(v: int) -> None:
        nonlocal var_inc
        activity[v] += var_inc
        if activity[v] > 1e100:
            for u in range(1, num_vars + 1):
                activity[u] *= 1e-100
            var_inc *= 1e-100
        if val[2 * v] == 0:
            heapq.heappush(heap, (-activity[v], v))

    seen = [False] * (num_vars + 1)

    def analyze(confl: int):
        learnt = [0]
        counter = 0
        p = None
        idx = len(trail) - 1
        cur = len(trail_lim)
        ci = confl
        while True:
            c = db[ci]
            for q in (c if p is None else c[1:]):
                v = q >> 1
                if not seen[v] and level[v] > 0:
                    seen[v] = True
                    bump(v)
                    if level[v] >= cur:
                        counter += 1
                    else:
                        learnt.append(q)
            while not seen[trail[idx] >> 1]:
                idx -= 1
            p = trail[idx]
            idx -= 1
            v = p >> 1
            seen[v] = False
            counter -= 1
            if counter == 0:
                break
            ci = reason[v]
        learnt[0] = p ^ 1
        for q in learnt[1:]:
            seen[q >> 1] = False
        if len(learnt) == 1:
            return learnt, 0
        best = max(range(1, len(learnt)), key=lambda j: level[learnt[j] >> 1])
        learnt[1], learnt[best] = learnt[best], learnt[1]
        return learnt, level[learnt[1] >> 1]

    def cancel_until(lvl: int) -> None:
        nonlocal qhead
        if len(trail_lim) <= lvl:
            return
        start = trail_lim[lvl]
        for lit in trail[start:]:
            v = lit >> 1
            val[lit] = 0
            val[lit ^ 1] = 0
            reason[v] = None
            phase[v] = lit & 1
            heapq.heappush(heap, (-activity[v], v))
        del trail[start:]
        del trail_lim[lvl:]
        qhead = min(qhead, len(trail))

    conflicts = decisions = 0
    restart_count = 1
    budget = restart_base * _luby(restart_count)

    while True:
        confl = propagate()
        if confl is not None:
            conflicts += 1
            if not trail_lim:
                return SatResult(False, conflicts=conflicts, decisions=decisions)
            learnt, back = analyze(confl)
            cancel_until(back)
            if len(learnt) == 1:
                enqueue(learnt[0], None)
            else:
                ci = len(db)
                db.append(learnt)
                watches[learnt[0]].append(ci)
                watches[learnt[1]].append(ci)
                enqueue(learnt[0], ci)
            var_inc /= 0.95
            budget -= 1
            if deadline is not None and conflicts % 128 == 0 and time.monotonic() > deadline:
                raise SolverTimeout
            continue
        if budget <= 0:
            restart_count += 1
            budget = restart_base * _luby(restart_count)
            cancel_until(0)
            continue
        v = 0
        while heap:
            _, cand = heapq.heappop(heap)
            if val[2 * cand] == 0:
                v = cand
                break
        if v == 0:
            model = [False] * (num_vars + 1)
            for u in range(1, num_vars + 1):
                model[u] = val[2 * u] == 1
            return SatResult(True, model, conflicts, decisions)
        decisions += 1
        if deadline is not None and decisions % 1024 == 0 and time.monotonic() > deadline:
            raise SolverTimeout
        trail_lim.append(len(trail))
        enqueue(2 * v + phase[v], None)


def check_model(clauses, model: list[bool]) -> bool:
    return all(any(model[abs(x)] == (x > 0) for x in c) for c in clauses)
