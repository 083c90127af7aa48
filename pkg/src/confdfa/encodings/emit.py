"""Writers for SMT-LIB2, DIMACS CNF (+ name mapping) and CPLEX-LP."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .build import EncodingInstance
from .constraints import (
    And,
    CnfBuilder,
    Const,
    ExactlyOne,
    Iff,
    Linear,
    Node,
    Not,
    Or,
    Var,
    WeightedAtMost,
)


def decimal(x) -> str:
    """Positional decimal with 12 significant digits (no exponent)."""
    x = float(x)
    if x == 0:
        return "0"
    return np.format_float_positional(x, precision=12, unique=False, fractional=False, trim="-")


def _real(x) -> str:
    text = decimal(x)
    return text if "." in text else text + ".0"


def _smt(node: Node) -> str:
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Const):
        return "true" if node.value else "false"
    if isinstance(node, Not):
        return f"(not {_smt(node.arg)})"
    if isinstance(node, And):
        return f"(and {' '.join(_smt(c) for c in node.args)})" if len(node.args) > 1 else _smt(node.args[0])
    if isinstance(node, Or):
        return f"(or {' '.join(_smt(c) for c in node.args)})" if len(node.args) > 1 else _smt(node.args[0])
    if isinstance(node, Iff):
        return f"(= {_smt(node.a)} {_smt(node.b)})"
    if isinstance(node, ExactlyOne):
        lits = [_smt(c) for c in node.args]
        parts = [f"(or {' '.join(lits)})" if len(lits) > 1 else lits[0]]
        parts += [f"(not (and {lits[i]} {lits[j]}))" for i in range(len(lits)) for j in range(i + 1, len(lits))]
        return f"(and {' '.join(parts)})" if len(parts) > 1 else parts[0]
    if isinstance(node, WeightedAtMost):
        terms = " ".join(f"(ite {_smt(c)} {_real(w)} 0.0)" for w, c in node.terms)
        lhs = f"(+ {terms})" if len(node.terms) > 1 else (terms or "0.0")
        return f"(<= {lhs} {_real(node.bound)})"
    raise TypeError(f"{type(node).__name__} has no SMT-LIB2 form")


def to_smtlib(instance: EncodingInstance) -> str:
    if instance.flavor == "eta-mip":
        raise ValueError("MIP instances are written as LP, not SMT-LIB2")
    out = [f"; {instance.direction} encoding, n={instance.n}, |Sigma|={instance.alphabet_size}, "
           f"{len(instance.examples)} examples, flavor={instance.flavor}"]
    if instance.flavor == "eta-smt":
        out.append("(set-logic QF_LRA)")
    out += [f"(declare-const {v} Bool)" for v in instance.variables]
    out += [f"(assert {_smt(c)})" for c in instance.constraints]
    out += ["(check-sat)", "(get-model)"]
    return "\n".join(out) + "\n"


def to_cnf(instance: EncodingInstance) -> CnfBuilder:
    if instance.flavor != "exact-sat":
        raise ValueError("only exact instances have a CNF form")
    cnf = CnfBuilder(instance.variables)
    for c in instance.constraints:
        cnf.add(c)
    return cnf


def to_dimacs(instance: EncodingInstance) -> tuple[str, str]:
    """DIMACS text and the ``<name> <var>`` mapping of named variables."""
    cnf = to_cnf(instance)
    lines = [f"c {instance.direction} encoding n={instance.n}",
             f"p cnf {cnf.num_vars} {len(cnf.clauses)}"]
    lines += [" ".join(map(str, clause + [0])) for clause in cnf.clauses]
    named = set(instance.variables)
    mapping = "".join(f"{name} {var}\n" for name, var in cnf.index.items() if name in named)
    return "\n".join(lines) + "\n", mapping


def _lp_expr(terms) -> str:
    parts = []
    for coef, var in terms:
        coef = Fraction(coef)
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        body = var if mag == 1 else f"{decimal(mag)} {var}"
        parts.append(f"{sign} {body}")
    if not parts:
        return "0"
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


def to_lp(instance: EncodingInstance) -> str:
    if instance.flavor != "eta-mip":
        raise ValueError("only eta-mip instances have an LP form")
    out = [f"\\ {instance.direction} encoding n={instance.n} eta={decimal(instance.eta)}", "Minimize"]
    if instance.objective:
        out.append(f" obj: {_lp_expr(instance.objective)}")
    else:
        out.append(f" obj: 0 {instance.binaries[0]}")
    out.append("Subject To")
    for i, row in enumerate(instance.linear):
        name = row.name or f"c{i}"
        rhs = decimal(row.rhs) if row.rhs >= 0 else f"-{decimal(-row.rhs)}"
        out.append(f" {name}: {_lp_expr(row.terms)} {row.sense} {rhs}")
    out.append("Binary")
    out += [f" {v}" for v in instance.binaries]
    out.append("End")
    return "\n".join(out) + "\n"


def emit(instance: EncodingInstance, fmt: str) -> str:
    if fmt == "smt2":
        return to_smtlib(instance)
    if fmt == "lp":
        return to_lp(instance)
    if fmt == "dimacs":
        return to_dimacs(instance)[0]
    raise ValueError(f"unknown format {fmt!r}")
