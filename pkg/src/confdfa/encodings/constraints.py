"""A small solver-neutral constraint language over named Boolean variables.

Nodes are immutable. The same tree is emitted as SMT-LIB2, as CNF (Tseitin),
or linearized into 0/1 rows for a MIP.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Union


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Not:
    arg: "Node"


@dataclass(frozen=True)
class And:
    args: tuple["Node", ...]


@dataclass(frozen=True)
class Or:
    args: tuple["Node", ...]
    # at most one disjunct can hold in any model of the surrounding constraints;
    # lets the MIP translation use a plain sum
    exclusive: bool = False


@dataclass(frozen=True)
class Iff:
    a: "Node"
    b: "Node"


@dataclass(frozen=True)
class ExactlyOne:
    args: tuple["Node", ...]


@dataclass(frozen=True)
class WeightedAtMost:
    """``sum of weight * [node]`` over the terms is at most ``bound``."""

    terms: tuple[tuple[Fraction, "Node"], ...]
    bound: Fraction


@dataclass(frozen=True)
class Linear:
    """A MIP row ``sum coef * var  (sense)  rhs`` over 0/1 variables."""

    terms: tuple[tuple[Fraction, str], ...]
    sense: str  # "<=", ">=", "="
    rhs: Fraction
    name: str = ""


Node = Union[Var, Const, Not, And, Or, Iff, ExactlyOne, WeightedAtMost, Linear]

TRUE = Const(True)
FALSE = Const(False)


def neg(node: Node) -> Node:
    if isinstance(node, Not):
        return node.arg
    if isinstance(node, Const):
        return Const(not node.value)
    return Not(node)


def evaluate(node: Node, assignment: Mapping[str, bool]) -> bool:
    if isinstance(node, Var):
        return bool(assignment[node.name])
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Not):
        return not evaluate(node.arg, assignment)
    if isinstance(node, And):
        return all(evaluate(c, assignment) for c in node.args)
    if isinstance(node, Or):
        return any(evaluate(c, assignment) for c in node.args)
    if isinstance(node, Iff):
        return evaluate(node.a, assignment) == evaluate(node.b, assignment)
    if isinstance(node, ExactlyOne):
        return sum(evaluate(c, assignment) for c in node.args) == 1
    if isinstance(node, WeightedAtMost):
        return sum((w for w, c in node.terms if evaluate(c, assignment)), Fraction(0)) <= node.bound
    if isinstance(node, Linear):
        lhs = sum((c * int(bool(assignment[v])) for c, v in node.terms), Fraction(0))
        return {"<=": lhs <= node.rhs, ">=": lhs >= node.rhs, "=": lhs == node.rhs}[node.sense]
    raise TypeError(f"unknown node {node!r}")


def variables(node: Node, out: set[str] | None = None) -> set[str]:
    out = set() if out is None else out
    stack = [node]
    while stack:
        x = stack.pop()
        if isinstance(x, Var):
            out.add(x.name)
        elif isinstance(x, Not):
            stack.append(x.arg)
        elif isinstance(x, (And, Or, ExactlyOne)):
            stack.extend(x.args)
        elif isinstance(x, Iff):
            stack.extend((x.a, x.b))
        elif isinstance(x, WeightedAtMost):
            stack.extend(c for _, c in x.terms)
        elif isinstance(x, Linear):
            out.update(v for _, v in x.terms)
    return out


# --- CNF -----------------------------------------------------------------------


class CnfBuilder:
    """Tseitin transformation into DIMACS-numbered clauses.

    Named variables get the lowest indices, in the order given; auxiliary
    variables follow.
    """

    def __init__(self, names):
        self.index: dict[str, int] = {}
        for name in names:
            self.index[name] = len(self.index) + 1
        self.num_vars = len(self.index)
        self.clauses: list[list[int]] = []
        self._cache: dict[Node, int] = {}
        self._true: int | None = None

    def fresh(self) -> int:
        self.num_vars += 1
        return self.num_vars

    def _const(self, value: bool) -> int:
        if self._true is None:
            self._true = self.fresh()
            self.clauses.append([self._true])
        return self._true if value else -self._true

    def literal(self, node: Node) -> int:
        """A literal equivalent to ``node`` (introducing definitions as needed)."""
        if isinstance(node, Var):
            if node.name not in self.index:
                self.index[node.name] = self.fresh()
            return self.index[node.name]
        if isinstance(node, Const):
            return self._const(node.value)
        if isinstance(node, Not):
            return -self.literal(node.arg)
        if node in self._cache:
            return self._cache[node]
        if isinstance(node, And):
            lits = [self.literal(c) for c in node.args]
            z = self.fresh()
            for lit in lits:
                self.clauses.append([-z, lit])
            self.clauses.append([z] + [-lit for lit in lits])
        elif isinstance(node, Or):
            lits = [self.literal(c) for c in node.args]
            z = self.fresh()
            for lit in lits:
                self.clauses.append([z, -lit])
            self.clauses.append([-z] + lits)
        elif isinstance(node, Iff):
            a, b = self.literal(node.a), self.literal(node.b)
            z = self.fresh()
            self.clauses += [[-z, -a, b], [-z, a, -b], [z, a, b], [z, -a, -b]]
        else:
            raise TypeError(f"{type(node).__name__} cannot be expressed in plain CNF")
        self._cache[node] = z
        return z

    def add(self, node: Node) -> None:
        """Assert ``node`` at the top level, using direct clauses where possible."""
        if isinstance(node, And):
            for c in node.args:
                self.add(c)
        elif isinstance(node, Const):
            if not node.value:
                self.clauses.append([])
        elif isinstance(node, Or):
            self.clauses.append([self.literal(c) for c in node.args])
        elif isinstance(node, ExactlyOne):
            lits = [self.literal(c) for c in node.args]
            self.clauses.append(lits)
            for i in range(len(lits)):
                for j in range(i + 1, len(lits)):
                    self.clauses.append([-lits[i], -lits[j]])
        elif isinstance(node, Iff):
            a, b = self.literal(node.a), self.literal(node.b)
            self.clauses += [[-a, b], [a, -b]]
        elif isinstance(node, Not) and isinstance(node.arg, Or):
            for c in node.arg.args:
                self.add(neg(c))
        else:
            self.clauses.append([self.literal(node)])


# --- MIP -----------------------------------------------------------------------


class Linearizer:
    """Turns Boolean nodes into 0/1 linear expressions plus defining rows.

    Conjunctions get an auxiliary binary with the usual McCormick rows.
    Exclusive disjunctions become plain sums; other disjunctions get an
    auxiliary binary.
    """

    def __init__(self, aux_prefix: str = "y_"):
        self.rows: list[Linear] = []
        self.aux: list[str] = []
        self._cache: dict[Node, dict[str, Fraction]] = {}
        self._prefix = aux_prefix

    def _fresh(self) -> str:
        name = f"{self._prefix}{len(self.aux)}"
        self.aux.append(name)
        return name

    def _row(self, expr: dict, sense: str, rhs, name: str = "") -> None:
        expr = dict(expr)
        const = expr.pop(None, Fraction(0))
        terms = tuple((c, v) for v, c in expr.items() if c != 0)
        self.rows.append(Linear(terms, sense, Fraction(rhs) - const, name))

    def expr(self, node: Node) -> dict:
        """Linear expression (``{var: coef, None: const}``) equal to the node's 0/1 value."""
        if isinstance(node, Var):
            return {node.name: Fraction(1)}
        if isinstance(node, Const):
            return {None: Fraction(int(node.value))}
        if isinstance(node, Not):
            return _axpy(Fraction(-1), self.expr(node.arg), {None: Fraction(1)})
        if node in self._cache:
            return self._cache[node]
        if isinstance(node, And):
            parts = [self.expr(c) for c in node.args]
            z = self._fresh()
            zexpr = {z: Fraction(1)}
            for p in parts:
                self._row(_axpy(Fraction(-1), p, zexpr), "<=", 0)
            total = {}
            for p in parts:
                total = _axpy(Fraction(1), p, total)
            # z >= sum(parts) - (k - 1)
            self._row(_axpy(Fraction(-1), total, zexpr), ">=", 1 - len(parts))
            out = zexpr
        elif isinstance(node, Or) and node.exclusive:
            out = {}
            for c in node.args:
                out = _axpy(Fraction(1), self.expr(c), out)
        elif isinstance(node, Or):
            parts = [self.expr(c) for c in node.args]
            z = self._fresh()
            zexpr = {z: Fraction(1)}
            total = {}
            for p in parts:
                self._row(_axpy(Fraction(-1), p, zexpr), ">=", 0)
                total = _axpy(Fraction(1), p, total)
            self._row(_axpy(Fraction(-1), total, zexpr), "<=", 0)
            out = zexpr
        elif isinstance(node, Iff):
            a, b = self.expr(node.a), self.expr(node.b)
            z = self._fresh()
            zexpr = {z: Fraction(1)}
            # z = 1 - |a - b| on binaries
            self._row(_axpy(Fraction(1), a, _axpy(Fraction(1), b, zexpr)), ">=", 1)
            self._row(_axpy(Fraction(-1), a, _axpy(Fraction(-1), b, zexpr)), ">=", -1)
            self._row(_axpy(Fraction(-1), a, _axpy(Fraction(1), b, zexpr)), "<=", 1)
            self._row(_axpy(Fraction(1), a, _axpy(Fraction(-1), b, zexpr)), "<=", 1)
            out = zexpr
        else:
            raise TypeError(f"{type(node).__name__} has no 0/1 value expression")
        self._cache[node] = out
        return out

    def add(self, node: Node, name: str = "") -> None:
        if isinstance(node, And):
            for c in node.args:
                self.add(c)
        elif isinstance(node, Linear):
            self.rows.append(node)
        elif isinstance(node, ExactlyOne):
            total = {}
            for c in node.args:
                total = _axpy(Fraction(1), self.expr(c), total)
            self._row(total, "=", 1, name)
        elif isinstance(node, Iff):
            self._row(_axpy(Fraction(-1), self.expr(node.b), self.expr(node.a)), "=", 0, name)
        elif isinstance(node, Or) and not node.exclusive:
            total = {}
            for c in node.args:
                total = _axpy(Fraction(1), self.expr(c), total)
            self._row(total, ">=", 1, name)
        elif isinstance(node, WeightedAtMost):
            total = {}
            for w, c in node.terms:
                total = _axpy(Fraction(w), self.expr(c), total)
            self._row(total, "<=", node.bound, name or "budget")
        else:
            self._row(self.expr(node), "=", 1, name)


def _axpy(a: Fraction, x: dict, y: dict) -> dict:
    out = dict(y)
    for k, v in x.items():
        out[k] = out.get(k, Fraction(0)) + a * v
    return out
