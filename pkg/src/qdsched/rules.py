"""Arithmetic priority-rule expressions and the built-in human-designed rules.

A rule is a tree over seven operators (Add, Mul, Sub, Div, Max, Min, Neg1)
whose leaves are the normalized activity attributes, optionally numeric
constants when loading externally simplified rules. Lower priority value
means scheduled earlier; built-in rules whose natural reading maximizes a
score are negated so a single minimizing scheduler serves everything.
"""
from __future__ import annotations

import re
import sys
from dataclasses import dataclass

import numpy as np

from .cpm import ATTRIBUTE_NAMES, RESOURCE_ATTRIBUTES, AttributeTable
from .instances import Instance

#: Operator name -> arity.
OPERATORS = {"Add": 2, "Mul": 2, "Sub": 2, "Div": 2, "Max": 2, "Min": 2, "Neg1": 1}

#: Height cap for evolved trees (edges on the longest root-to-leaf path).
MAX_HEIGHT = 7

#: Out-of-range results saturate here instead of overflowing to inf.
SATURATION = sys.float_info.max


class RuleSyntaxError(ValueError):
    """Raised for malformed rule text (unknown symbol, arity, depth)."""


@dataclass(frozen=True)
class Expr:
    """One immutable node of a rule tree.

    `symbol` is an operator name, an attribute name, or the text of a
    numeric constant; leaves have no children.
    """

    symbol: str
    children: tuple["Expr", ...] = ()

    def __post_init__(self):
        if self.symbol in OPERATORS:
            if len(self.children) != OPERATORS[self.symbol]:
                raise RuleSyntaxError(
                    f"{self.symbol} takes {OPERATORS[self.symbol]} operands, "
                    f"got {len(self.children)}"
                )
        else:
            if self.children:
                raise RuleSyntaxError(f"terminal {self.symbol!r} cannot have operands")
            if self.symbol not in ATTRIBUTE_NAMES and not _is_number(self.symbol):
                raise RuleSyntaxError(f"unknown symbol {self.symbol!r}")

    @property
    def is_leaf(self) -> bool:
        return not self.children


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def leaf(name: str) -> Expr:
    return Expr(name)


def const(value: float) -> Expr:
    return Expr(_format_number(float(value)))


def _format_number(value: float) -> str:
    return str(int(value)) if value == int(value) else repr(value)


def node_count(expr: Expr) -> int:
    total = 0
    stack = [expr]
    while stack:
        e = stack.pop()
        total += 1
        stack.extend(e.children)
    return total


def resource_node_count(expr: Expr) -> int:
    """Leaves carrying resource-usage information (RR, AvgRReq, Max/MinRReq)."""
    total = 0
    stack = [expr]
    while stack:
        e = stack.pop()
        if e.is_leaf and e.symbol in RESOURCE_ATTRIBUTES:
            total += 1
        stack.extend(e.children)
    return total


def height(expr: Expr) -> int:
    """Edges on the longest root-to-leaf path (a single leaf has height 0)."""
    if not expr.children:
        return 0
    return 1 + max(height(c) for c in expr.children)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def _saturate(values: np.ndarray) -> np.ndarray:
    return np.clip(values, -SATURATION, SATURATION)


def _eval(expr: Expr, columns) -> np.ndarray:
    sym = expr.symbol
    if not expr.children:
        if sym in columns:
            return np.asarray(columns[sym], dtype=np.float64)
        return np.float64(float(sym))
    a = _eval(expr.children[0], columns)
    if sym == "Neg1":
        return -a
    b = _eval(expr.children[1], columns)
    if sym == "Add":
        out = a + b
    elif sym == "Sub":
        out = a - b
    elif sym == "Mul":
        out = a * b
    elif sym == "Div":
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = np.where(b > 0, np.true_divide(a, b), 0.0)
    elif sym == "Max":
        out = np.maximum(a, b)
    else:  # Min
        out = np.minimum(a, b)
    return _saturate(out)


def eval_expr(expr: Expr, attrs, activity: int | None = None):
    """Evaluate a rule over an attribute table (or raw column mapping).

    Returns the full priority vector, or a float when `activity` is given.
    Division by a non-positive value yields 0; results saturate at the
    largest finite float instead of overflowing.
    """
    columns = attrs.columns if isinstance(attrs, AttributeTable) else attrs
    values = _eval(expr, columns)
    values = np.atleast_1d(np.asarray(values, dtype=np.float64))
    if values.size == 1:
        width = len(next(iter(columns.values()))) if columns else 1
        values = np.full(width, float(values[0]))
    if activity is not None:
        return float(values[activity])
    return values


# ---------------------------------------------------------------------------
# Serialization: canonical prefix form, e.g. "(Add ES (Neg1 TSC))"
# ---------------------------------------------------------------------------

def serialize(expr: Expr) -> str:
    if expr.is_leaf:
        return expr.symbol
    inner = " ".join(serialize(c) for c in expr.children)
    return f"({expr.symbol} {inner})"


def parse_rule(text: str, max_height: int | None = MAX_HEIGHT) -> Expr:
    """Parse the canonical prefix form; inverse of serialize.

    `max_height=None` lifts the genotype height cap (used for externally
    provided rules whose simplified forms exceed it).
    """
    tokens = re.findall(r"\(|\)|[^\s()]+", text)
    if not tokens:
        raise RuleSyntaxError("empty rule text")
    pos = 0

    def parse_node() -> Expr:
        nonlocal pos
        if pos >= len(tokens):
            raise RuleSyntaxError("unexpected end of rule text")
        tok = tokens[pos]
        pos += 1
        if tok == ")":
            raise RuleSyntaxError("unexpected ')'")
        if tok != "(":
            return Expr(tok)
        if pos >= len(tokens):
            raise RuleSyntaxError("unexpected end of rule text")
        op = tokens[pos]
        pos += 1
        if op not in OPERATORS:
            raise RuleSyntaxError(f"unknown operator {op!r}")
        children = []
        while pos < len(tokens) and tokens[pos] != ")":
            children.append(parse_node())
        if pos >= len(tokens):
            raise RuleSyntaxError(f"missing ')' after {op}")
        pos += 1
        return Expr(op, tuple(children))

    expr = parse_node()
    if pos != len(tokens):
        raise RuleSyntaxError(f"trailing tokens after rule: {tokens[pos]!r}")
    if max_height is not None and height(expr) > max_height:
        raise RuleSyntaxError(f"rule height {height(expr)} exceeds limit {max_height}")
    return expr


_INFIX_SYMBOL = {"Add": "+", "Sub": "-", "Mul": "*", "Div": "/"}


def infix(expr: Expr) -> str:
    """Human-readable rendering, e.g. "(ES + (-TSC))"."""
    if expr.is_leaf:
        return expr.symbol
    if expr.symbol == "Neg1":
        return f"(-{infix(expr.children[0])})"
    a, b = (infix(c) for c in expr.children)
    if expr.symbol in _INFIX_SYMBOL:
        return f"({a} {_INFIX_SYMBOL[expr.symbol]} {b})"
    return f"{expr.symbol}({a}, {b})"


def parse_infix(text: str, max_height: int | None = None) -> Expr:
    """Parse infix rule text (+, -, *, /, **, unary minus, n-ary Min/Max).

    Power desugars to repeated multiplication and n-ary Min/Max folds to
    nested binary calls, so the result stays inside the core operator set.
    '/' maps to the guarded division of the rule language.
    """
    tokens = re.findall(r"\*\*|[()+\-*/,]|[A-Za-z_][A-Za-z_0-9]*|\d+(?:\.\d+)?", text)
    if not tokens:
        raise RuleSyntaxError("empty rule text")
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else None

    def take(expected=None):
        nonlocal pos
        tok = peek()
        if tok is None or (expected is not None and tok != expected):
            raise RuleSyntaxError(f"expected {expected!r}, found {tok!r}")
        pos += 1
        return tok

    def parse_sum() -> Expr:
        node = parse_term()
        while peek() in ("+", "-"):
            op = take()
            rhs = parse_term()
            node = Expr("Add" if op == "+" else "Sub", (node, rhs))
        return node

    def parse_term() -> Expr:
        node = parse_unary()
        while peek() in ("*", "/"):
            op = take()
            rhs = parse_unary()
            node = Expr("Mul" if op == "*" else "Div", (node, rhs))
        return node

    def parse_unary() -> Expr:
        if peek() == "-":
            take()
            return Expr("Neg1", (parse_unary(),))
        if peek() == "+":
            take()
            return parse_unary()
        return parse_power()

    def parse_power() -> Expr:
        base = parse_atom()
        if peek() == "**":
            take()
            exponent = take()
            if not exponent.isdigit() or int(exponent) < 1:
                raise RuleSyntaxError(f"unsupported exponent {exponent!r}")
            node = base
            for _ in range(int(exponent) - 1):
                node = Expr("Mul", (node, base))
            return node
        return base

    def parse_atom() -> Expr:
        tok = take()
        if tok == "(":
            node = parse_sum()
            take(")")
            return node
        if tok in ("Min", "Max"):
            take("(")
            args = [parse_sum()]
            while peek() == ",":
                take(",")
                args.append(parse_sum())
            take(")")
            node = args[-1]
            for arg in reversed(args[:-1]):
                node = Expr(tok, (arg, node))
            return node
        if tok in ATTRIBUTE_NAMES or _is_number(tok):
            return Expr(tok)
        raise RuleSyntaxError(f"unknown symbol {tok!r}")

    expr = parse_sum()
    if pos != len(tokens):
        raise RuleSyntaxError(f"trailing tokens after rule: {tokens[pos]!r}")
    if max_height is not None and height(expr) > max_height:
        raise RuleSyntaxError(f"rule height {height(expr)} exceeds limit {max_height}")
    return expr


def read_rules(text: str, max_height: int | None = None) -> list[Expr]:
    """One serialized rule per non-empty line; '#' lines are comments."""
    rules = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        rules.append(parse_rule(line, max_height=max_height))
    return rules


def write_rules(rules) -> str:
    return "".join(serialize(r) + "\n" for r in rules)


# ---------------------------------------------------------------------------
# Built-in rules
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BuiltinRule:
    """A classic single-attribute dispatching rule.

    `extremum` records whether the textbook form picks the maximum or the
    minimum of the raw score; Max rules are evaluated negated so the
    scheduler always minimizes.
    """

    name: str
    extremum: str  # "Min" or "Max"


BUILTIN_RULES: dict[str, BuiltinRule] = {
    rule.name: rule
    for rule in (
        BuiltinRule("EST", "Min"),   # earliest start time
        BuiltinRule("EFT", "Min"),   # earliest finish time
        BuiltinRule("LST", "Min"),   # latest start time
        BuiltinRule("LFT", "Min"),   # latest finish time
        BuiltinRule("SPT", "Min"),   # shortest processing time
        BuiltinRule("FIFO", "Min"),  # activity ID order
        BuiltinRule("MTS", "Max"),   # most total successors
        BuiltinRule("RAND", "Min"),  # seeded uniform draw
        BuiltinRule("GRPW", "Max"),  # greatest rank position weight
        BuiltinRule("GRD", "Max"),   # greatest resource demand
    )
}


def _rand_value(seed: int, instance_id: str, activity_id: int) -> float:
    import random

    return random.Random(f"{seed}|{instance_id}|{activity_id}").random()


def builtin_priorities(
    rule: BuiltinRule, instance: Instance, attrs: AttributeTable, seed: int = 0
) -> list[float]:
    """Raw priority vector for a built-in rule (already sign-adjusted)."""
    m = instance.num_activities
    name = rule.name
    if name == "EST":
        raw = attrs.raw_es
    elif name == "EFT":
        raw = attrs.raw_ef
    elif name == "LST":
        raw = attrs.raw_ls
    elif name == "LFT":
        raw = attrs.raw_lf
    elif name == "SPT":
        raw = instance.durations
    elif name == "FIFO":
        raw = tuple(instance.activity_id(j) for j in range(m))
    elif name == "MTS":
        raw = attrs.raw_tsc
    elif name == "GRPW":
        raw = tuple(
            instance.durations[j]
            + sum(instance.durations[s] for s in instance.successors[j])
            for j in range(m)
        )
    elif name == "GRD":
        raw = tuple(
            instance.durations[j] * sum(instance.requirements[j]) for j in range(m)
        )
    elif name == "RAND":
        raw = tuple(
            _rand_value(seed, instance.id, instance.activity_id(j)) for j in range(m)
        )
    else:
        raise KeyError(f"unknown built-in rule {name!r}")
    sign = -1.0 if rule.extremum == "Max" else 1.0
    return [sign * float(v) for v in raw]


def eval_builtin(
    rule: BuiltinRule,
    instance: Instance,
    attrs: AttributeTable,
    activity: int,
    seed: int = 0,
) -> float:
    return builtin_priorities(rule, instance, attrs, seed)[activity]
