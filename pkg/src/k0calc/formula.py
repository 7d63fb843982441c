"""Quantifier-free formulas over an ordered subgroup of Q.

The language: linear terms with integer coefficients on variables x0, x1, ...
and a rational constant; comparison atoms between two terms; divisibility
atoms div(n, t) ("t is n times a group element") and their negations
ndiv(n, t); boolean connectives and/or/not.  Quantifiers are rejected at the
parser: with the divisibility predicates in the language, every definable
set already has a quantifier-free description, so nothing is lost.

`normalize` rewrites a formula into the shape the evaluator consumes:
negations gone, every ndiv expanded into a shifted-div disjunction, every
div modulus stripped of its division-closed part, and atoms whose truth is
forced by a constant outside the group folded away.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from . import group_model
from .group_model import GroupDescriptor

# --- terms ----------------------------------------------------------------


@dataclass(frozen=True)
class Term:
    """Sum of integer-scaled variables plus a rational constant.

    coeffs holds (variable index, nonzero coefficient) pairs sorted by index.
    """

    coeffs: tuple[tuple[int, int], ...] = ()
    const: Fraction = Fraction(0)

    @staticmethod
    def build(coeffs: dict[int, int], const=0) -> "Term":
        items = tuple(sorted((v, c) for v, c in coeffs.items() if c != 0))
        return Term(items, Fraction(const))

    @staticmethod
    def var(index: int, coeff: int = 1) -> "Term":
        return Term.build({index: coeff})

    @staticmethod
    def constant(value) -> "Term":
        return Term((), Fraction(value))

    def coeff(self, index: int) -> int:
        for v, c in self.coeffs:
            if v == index:
                return c
        return 0

    def __add__(self, other: "Term") -> "Term":
        acc = dict(self.coeffs)
        for v, c in other.coeffs:
            acc[v] = acc.get(v, 0) + c
        return Term.build(acc, self.const + other.const)

    def __neg__(self) -> "Term":
        return Term(tuple((v, -c) for v, c in self.coeffs), -self.const)

    def __sub__(self, other: "Term") -> "Term":
        return self + (-other)

    def scale(self, k: int) -> "Term":
        if k == 0:
            return Term()
        return Term(tuple((v, k * c) for v, c in self.coeffs), k * self.const)

    def shift(self, delta) -> "Term":
        return Term(self.coeffs, self.const + Fraction(delta))

    def evaluate(self, point) -> Fraction:
        total = self.const
        for v, c in self.coeffs:
            total += c * point[v]
        return total

    @property
    def is_constant(self) -> bool:
        return not self.coeffs

    def max_var(self) -> int:
        """Highest variable index, -1 for a constant term."""
        return self.coeffs[-1][0] if self.coeffs else -1

    def shift_vars(self, offset: int) -> "Term":
        return Term(tuple((v + offset, c) for v, c in self.coeffs), self.const)

    def __str__(self) -> str:
        parts: list[str] = []
        for v, c in self.coeffs:
            mag = f"x{v}" if abs(c) == 1 else f"{abs(c)}*x{v}"
            if not parts:
                parts.append(mag if c > 0 else f"-{mag}")
            else:
                parts.append(f"+ {mag}" if c > 0 else f"- {mag}")
        if self.const != 0 or not parts:
            mag = str(abs(self.const))
            if not parts:
                parts.append(str(self.const))
            else:
                parts.append(f"+ {mag}" if self.const > 0 else f"- {mag}")
        return " ".join(parts)


# --- formulas ---------------------------------------------------------------

_NEGATE = {"<": ">=", "<=": ">", "=": "!=", "!=": "=", ">=": "<", ">": "<="}
_REL_FN = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    ">=": lambda a, b: a >= b,
    ">": lambda a, b: a > b,
}


class Formula:
    """Base class; all nodes are immutable and hashable."""

    @property
    def arity(self) -> int:
        """Ambient dimension: highest variable index + 1 (0 if closed)."""
        return _max_var(self) + 1

    def __str__(self) -> str:
        return pretty(self)


@dataclass(frozen=True)
class Compare(Formula):
    lhs: Term
    op: str
    rhs: Term

    def diff(self) -> Term:
        """lhs - rhs, so the atom reads diff() op 0."""
        return self.lhs - self.rhs


@dataclass(frozen=True)
class Div(Formula):
    modulus: int
    term: Term

    def __post_init__(self):
        if self.modulus < 1:
            raise ValueError(f"divisibility modulus must be >= 1, got {self.modulus}")


@dataclass(frozen=True)
class NDiv(Formula):
    modulus: int
    term: Term

    def __post_init__(self):
        if self.modulus < 1:
            raise ValueError(f"divisibility modulus must be >= 1, got {self.modulus}")


@dataclass(frozen=True)
class And(Formula):
    parts: tuple[Formula, ...]


@dataclass(frozen=True)
class Or(Formula):
    parts: tuple[Formula, ...]


@dataclass(frozen=True)
class Not(Formula):
    inner: Formula


@dataclass(frozen=True)
class Bool(Formula):
    value: bool


TRUE = Bool(True)
FALSE = Bool(False)


def conj(*parts: Formula) -> Formula:
    flat = [p for p in parts if p != TRUE]
    if any(p == FALSE for p in flat):
        return FALSE
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    merged: list[Formula] = []
    for p in flat:
        merged.extend(p.parts if isinstance(p, And) else [p])
    return And(tuple(merged))


def disj(*parts: Formula) -> Formula:
    flat = [p for p in parts if p != FALSE]
    if any(p == TRUE for p in flat):
        return TRUE
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    merged: list[Formula] = []
    for p in flat:
        merged.extend(p.parts if isinstance(p, Or) else [p])
    return Or(tuple(merged))


def _max_var(f: Formula) -> int:
    if isinstance(f, Compare):
        return max(f.lhs.max_var(), f.rhs.max_var())
    if isinstance(f, (Div, NDiv)):
        return f.term.max_var()
    if isinstance(f, (And, Or)):
        return max((_max_var(p) for p in f.parts), default=-1)
    if isinstance(f, Not):
        return _max_var(f.inner)
    return -1


def atoms_of(f: Formula) -> list[Formula]:
    """All atomic subformulas, left to right (duplicates kept)."""
    if isinstance(f, (Compare, Div, NDiv)):
        return [f]
    if isinstance(f, (And, Or)):
        out = []
        for p in f.parts:
            out.extend(atoms_of(p))
        return out
    if isinstance(f, Not):
        return atoms_of(f.inner)
    return []


def shift_variables(f: Formula, offset: int) -> Formula:
    """Rename every variable xi to x(i+offset)."""
    if isinstance(f, Compare):
        return Compare(f.lhs.shift_vars(offset), f.op, f.rhs.shift_vars(offset))
    if isinstance(f, Div):
        return Div(f.modulus, f.term.shift_vars(offset))
    if isinstance(f, NDiv):
        return NDiv(f.modulus, f.term.shift_vars(offset))
    if isinstance(f, And):
        return And(tuple(shift_variables(p, offset) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(shift_variables(p, offset) for p in f.parts))
    if isinstance(f, Not):
        return Not(shift_variables(f.inner, offset))
    return f


def map_terms(f: Formula, fn) -> Formula:
    """Apply fn to every term of every atom."""
    if isinstance(f, Compare):
        return Compare(fn(f.lhs), f.op, fn(f.rhs))
    if isinstance(f, Div):
        return Div(f.modulus, fn(f.term))
    if isinstance(f, NDiv):
        return NDiv(f.modulus, fn(f.term))
    if isinstance(f, And):
        return And(tuple(map_terms(p, fn) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(map_terms(p, fn) for p in f.parts))
    if isinstance(f, Not):
        return Not(map_terms(f.inner, fn))
    return f


# --- pretty printer ---------------------------------------------------------


def pretty(f: Formula) -> str:
    """Canonical text form; `parse` inverts it."""
    return _pp(f, 0)


def _pp(f: Formula, prec: int) -> str:
    # precedence: or = 0, and = 1, not = 2
    if isinstance(f, Or):
        s = " or ".join(_pp(p, 1) for p in f.parts)
        return f"({s})" if prec > 0 else s
    if isinstance(f, And):
        s = " and ".join(_pp(p, 2) for p in f.parts)
        return f"({s})" if prec > 1 else s
    if isinstance(f, Not):
        return f"not {_pp(f.inner, 2)}"
    if isinstance(f, Compare):
        return f"{f.lhs} {f.op} {f.rhs}"
    if isinstance(f, Div):
        return f"div({f.modulus}, {f.term})"
    if isinstance(f, NDiv):
        return f"ndiv({f.modulus}, {f.term})"
    if isinstance(f, Bool):
        return "true" if f.value else "false"
    raise TypeError(f"not a formula: {f!r}")


# --- parser -----------------------------------------------------------------


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op><=|>=|!=|==|[<>=+\-*/(),.]))"
)

_KEYWORDS = {"and", "or", "not", "div", "ndiv", "true", "false", "exists", "forall"}


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if not m or m.end() == pos:
                stripped = text[pos:].lstrip()
                if not stripped:
                    break
                bad_at = len(text) - len(stripped)
                raise ParseError(f"unexpected character {text[bad_at]!r}", bad_at)
            if m.group("num"):
                self.tokens.append(("num", m.group("num"), m.start("num")))
            elif m.group("name"):
                name = m.group("name")
                kind = "kw" if name in _KEYWORDS else "var"
                self.tokens.append((kind, name, m.start("name")))
            else:
                op = m.group("op")
                self.tokens.append(("op", "=" if op == "==" else op, m.start("op")))
            pos = m.end()
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        if self.i < len(self.tokens):
            return self.tokens[self.i]
        return ("eof", "", len(self.text))

    def next(self) -> tuple[str, str, int]:
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, value: str) -> None:
        kind, val, pos = self.next()
        if val != value:
            raise ParseError(f"expected {value!r}, found {val or 'end of input'!r}", pos)

    def formula(self) -> Formula:
        parts = [self.conjunction()]
        while self.peek()[1] == "or":
            self.next()
            parts.append(self.conjunction())
        return disj(*parts) if len(parts) > 1 else parts[0]

    def conjunction(self) -> Formula:
        parts = [self.negation()]
        while self.peek()[1] == "and":
            self.next()
            parts.append(self.negation())
        return conj(*parts) if len(parts) > 1 else parts[0]

    def negation(self) -> Formula:
        kind, val, pos = self.peek()
        if val == "not":
            self.next()
            return Not(self.negation())
        if val in ("exists", "forall"):
            raise ParseError(
                f"quantifier {val!r} not supported: divisibility predicates make "
                "every definable set expressible quantifier-free, so write one",
                pos,
            )
        if val == "(":
            self.next()
            inner = self.formula()
            self.expect(")")
            return inner
        return self.atom()

    def atom(self) -> Formula:
        kind, val, pos = self.peek()
        if val in ("true", "false"):
            self.next()
            return TRUE if val == "true" else FALSE
        if val in ("div", "ndiv"):
            self.next()
            self.expect("(")
            nkind, nval, npos = self.next()
            if nkind != "num":
                raise ParseError("expected a modulus integer", npos)
            modulus = int(nval)
            if modulus < 1:
                raise ParseError("modulus must be >= 1", npos)
            self.expect(",")
            t = self.term()
            self.expect(")")
            return Div(modulus, t) if val == "div" else NDiv(modulus, t)
        lhs = self.term()
        okind, oval, opos = self.next()
        if oval not in _REL_FN:
            raise ParseError(f"expected a comparison operator, found {oval!r}", opos)
        rhs = self.term()
        return Compare(lhs, oval, rhs)

    def term(self) -> Term:
        total = self._signed_item()
        while self.peek()[1] in ("+", "-"):
            _, sign, _ = self.next()
            item = self._item()
            total = total + item if sign == "+" else total - item
        return total

    def _signed_item(self) -> Term:
        if self.peek()[1] in ("+", "-"):
            _, sign, _ = self.next()
            item = self._item()
            return item if sign == "+" else -item
        return self._item()

    def _item(self) -> Term:
        kind, val, pos = self.next()
        if kind == "num":
            n = int(val)
            if self.peek()[1] == "/":
                self.next()
                dkind, dval, dpos = self.next()
                if dkind != "num" or int(dval) == 0:
                    raise ParseError("expected a nonzero denominator", dpos)
                return Term.constant(Fraction(n, int(dval)))
            if self.peek()[1] == "*":
                self.next()
                vkind, vval, vpos = self.next()
                var = _var_index(vval)
                if vkind != "var" or var is None:
                    raise ParseError(f"expected a variable after '*', found {vval!r}", vpos)
                return Term.var(var, n)
            return Term.constant(n)
        if kind == "var":
            var = _var_index(val)
            if var is None:
                raise ParseError(f"unknown name {val!r} (variables are x0, x1, ...)", pos)
            return Term.var(var)
        raise ParseError(f"expected a term, found {val or 'end of input'!r}", pos)


def _var_index(name: str) -> int | None:
    m = re.fullmatch(r"x(\d+)", name)
    return int(m.group(1)) if m else None


def parse(text: str) -> Formula:
    """Parse a formula; raises ParseError with a position on bad input.

    >>> parse("0 < x0 and x0 < 1").arity
    1
    """
    p = _Parser(text)
    f = p.formula()
    kind, val, pos = p.peek()
    if kind != "eof":
        raise ParseError(f"unexpected trailing input {val!r}", pos)
    return f


# --- point semantics --------------------------------------------------------


class PointOutsideGroup(ValueError):
    pass


def eval_point(desc: GroupDescriptor, f: Formula, point) -> bool:
    """Truth of f at a point of G^n (coordinates must belong to the group)."""
    pt = [Fraction(c) for c in point]
    for c in pt:
        if not group_model.contains(desc, c):
            raise PointOutsideGroup(f"coordinate {c} is not an element of the group")
    return _eval(desc, f, pt)


def _eval(desc: GroupDescriptor, f: Formula, pt: list[Fraction]) -> bool:
    if isinstance(f, Compare):
        return _REL_FN[f.op](f.lhs.evaluate(pt), f.rhs.evaluate(pt))
    if isinstance(f, Div):
        return group_model.contains(desc, f.term.evaluate(pt) / f.modulus)
    if isinstance(f, NDiv):
        return not group_model.contains(desc, f.term.evaluate(pt) / f.modulus)
    if isinstance(f, And):
        return all(_eval(desc, p, pt) for p in f.parts)
    if isinstance(f, Or):
        return any(_eval(desc, p, pt) for p in f.parts)
    if isinstance(f, Not):
        return not _eval(desc, f.inner, pt)
    if isinstance(f, Bool):
        return f.value
    raise TypeError(f"not a formula: {f!r}")


# --- normalization ----------------------------------------------------------


def normalize(desc: GroupDescriptor, f: Formula) -> Formula:
    """Equivalent formula with no negation, no ndiv, no redundant modulus.

    After this pass every divisibility atom Div(m, t) has its modulus free of
    division-closed primes (m = m_T) and a term constant inside the group;
    all other divisibility atoms are decided outright.  Inequality atoms keep
    both sides; != is split into < or >.
    """
    return _norm(desc, f, True)


def _norm(desc: GroupDescriptor, f: Formula, positive: bool) -> Formula:
    if isinstance(f, Bool):
        return f if positive else Bool(not f.value)
    if isinstance(f, Not):
        return _norm(desc, f.inner, not positive)
    if isinstance(f, And):
        parts = [_norm(desc, p, positive) for p in f.parts]
        return conj(*parts) if positive else disj(*parts)
    if isinstance(f, Or):
        parts = [_norm(desc, p, positive) for p in f.parts]
        return disj(*parts) if positive else conj(*parts)
    if isinstance(f, Compare):
        op = f.op if positive else _NEGATE[f.op]
        if f.lhs.is_constant and f.rhs.is_constant:
            return Bool(_REL_FN[op](f.lhs.const, f.rhs.const))
        if op == "!=":
            return Or((Compare(f.lhs, "<", f.rhs), Compare(f.lhs, ">", f.rhs)))
        return Compare(f.lhs, op, f.rhs)
    if isinstance(f, NDiv):
        return _norm_div(desc, f.modulus, f.term, not positive)
    if isinstance(f, Div):
        return _norm_div(desc, f.modulus, f.term, positive)
    raise TypeError(f"not a formula: {f!r}")


def _norm_div(desc: GroupDescriptor, modulus: int, term: Term, positive: bool) -> Formula:
    if term.is_constant:
        holds = group_model.contains(desc, term.const / modulus)
        return Bool(holds == positive)
    if not group_model.contains(desc, term.const):
        # The term's value sits outside the group at every group point, so
        # no multiple of the modulus can ever match it.
        return Bool(not positive)
    _, m_t = group_model.s_split(desc, modulus)
    if m_t == 1:
        return Bool(positive)
    if positive:
        return Div(m_t, term)
    m_k = group_model.k_part(desc, m_t)
    shifted = [Div(m_t, term.shift(Fraction(i, m_k))) for i in range(1, m_t)]
    return disj(*shifted)


def is_normalized_divfree(f: Formula) -> bool:
    """No Div/NDiv/Not anywhere (what the cell decomposition accepts)."""
    if isinstance(f, (Div, NDiv, Not)):
        return False
    if isinstance(f, (And, Or)):
        return all(is_normalized_divfree(p) for p in f.parts)
    return isinstance(f, (Compare, Bool))


# --- disjunctive normal form -------------------------------------------------


class DnfSizeError(RuntimeError):
    """Conjunction count exceeded the cap while distributing."""


def dnf(f: Formula, max_conjuncts: int = 10**4) -> list[list[Formula]]:
    """Distribute a normalized formula into a list of atom conjunctions.

    Returns [] for false and [[]] for true; the disjunction of the returned
    conjunctions is pointwise equivalent to the input.
    """
    if isinstance(f, Bool):
        return [[]] if f.value else []
    if isinstance(f, (Compare, Div)):
        return [[f]]
    if isinstance(f, Or):
        out: list[list[Formula]] = []
        for p in f.parts:
            out.extend(dnf(p, max_conjuncts))
            if len(out) > max_conjuncts:
                raise DnfSizeError(f"more than {max_conjuncts} conjunctions")
        return out
    if isinstance(f, And):
        out = [[]]
        for p in f.parts:
            branches = dnf(p, max_conjuncts)
            out = [left + right for left in out for right in branches]
            if len(out) > max_conjuncts:
                raise DnfSizeError(f"more than {max_conjuncts} conjunctions")
            if not out:
                return []
        return out
    raise ValueError(f"dnf expects a normalized formula, found {type(f).__name__}")
