"""Ring values of definable sets: the full evaluation pipeline.

Given a group descriptor, its value ring, and a quantifier-free formula, the
pipeline computes the class of the defined set:

1. normalize the formula (no negation, no ndiv, reduced moduli);
2. L := lcm of the remaining divisibility moduli (1 when none);
3. enumerate residue vectors l in {0..L-1}^n and substitute
   x_j := L*z_j + l_j/L_K, where L_K is the partial-inversion part of L;
   every divisibility atom then has a constant argument modulo the group
   and folds to a truth value, so dead vectors are pruned early;
4. decompose each surviving divisibility-free formula into cylindrical
   cells over Q^n (disjoint, covering the solution set);
5. value each cell by recursion on the last coordinate and sum everything.

Cell recursion: a section contributes the value of its base restricted by
the divisibility of the cleared numerator; a band to +infinity splits the
base by residue classes of the boundary and multiplies each piece by a
half-line value; a band to -infinity mirrors through y -> -y; a bounded
band is the signed combination (below hi) - (graph of lo) - (below lo);
a full band multiplies the base by the value of the whole line.

A boundary whose cleared constant lies outside the group never meets any
divisibility class (no group point is a multiple of the modulus shifted
into that coset), so there the residue split degenerates: every fiber is a
half-line with a non-member endpoint and the factor is X + 1/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import group_model
from .formula import (
    And,
    Bool,
    Compare,
    Div,
    FALSE,
    Formula,
    NDiv,
    Not,
    Or,
    Term,
    TRUE,
    conj,
    disj,
    normalize,
)
from .group_model import GroupDescriptor
from .k0ring import Endpoint, K0Element, RingSpec, interval_value, point_value
from .lincell import AffineFn, Cell, Section, decompose_formula

DEFAULT_MAX_TUPLES = 250_000
DEFAULT_MAX_CELLS = 50_000


class ResourceCapError(RuntimeError):
    """A configured tuple/cell budget was exceeded; kind is 'tuples' or 'cells'."""

    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


# --- trace ------------------------------------------------------------------


@dataclass
class CellTrace:
    cell: Cell
    value: K0Element
    children: list["EvalTrace"] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "cell": self.cell.to_json(),
            "value": self.value.to_json(),
            "children": [c.to_json() for c in self.children],
        }


@dataclass
class TupleTrace:
    residues: tuple[int, ...]
    outcome: str  # "live", "dead", or "pruned" (residues then form a prefix)
    skipped: int = 0  # tuples covered by a pruned prefix
    cells: list[CellTrace] = field(default_factory=list)

    def to_json(self) -> dict:
        out = {"residues": list(self.residues), "outcome": self.outcome}
        if self.outcome == "pruned":
            out["skipped"] = self.skipped
        if self.cells:
            out["cells"] = [c.to_json() for c in self.cells]
        return out


@dataclass
class EvalTrace:
    formula: str
    arity: int
    L: int
    shift_denominator: int
    value: K0Element
    tuples: list[TupleTrace] = field(default_factory=list)
    memoized: bool = False
    trivial_ring: bool = False

    @property
    def surviving_tuples(self) -> int:
        return sum(1 for t in self.tuples if t.outcome == "live")

    @property
    def cell_count(self) -> int:
        return sum(len(t.cells) for t in self.tuples)

    def leaf_sum(self) -> K0Element:
        """Sum of per-cell values at this node; equals `value` by construction."""
        total = K0Element(self.value.q, 0, 0)
        for t in self.tuples:
            for c in t.cells:
                total = total + c.value
        return total

    def summary(self) -> str:
        return (
            f"L={self.L} tuples={self.L ** self.arity} "
            f"live={self.surviving_tuples} cells={self.cell_count}"
        )

    def to_json(self) -> dict:
        return {
            "formula": self.formula,
            "arity": self.arity,
            "L": self.L,
            "shift_denominator": self.shift_denominator,
            "value": self.value.to_json(),
            "memoized": self.memoized,
            "trivial_ring": self.trivial_ring,
            "tuples": [t.to_json() for t in self.tuples],
        }


# --- helpers ------------------------------------------------------------------


def compute_L(f: Formula) -> int:
    """lcm of all divisibility moduli in a normalized formula (1 when none)."""
    if isinstance(f, Div):
        return f.modulus
    if isinstance(f, (NDiv, Not)):
        raise ValueError("compute_L expects a normalized formula (no ndiv, no not)")
    if isinstance(f, (And, Or)):
        out = 1
        for p in f.parts:
            out = math.lcm(out, compute_L(p))
        return out
    return 1


def _clear_denominators(fn: AffineFn) -> tuple[Term, int]:
    """Write fn = num/m with integer variable coefficients on num.

    The constant of num may stay rational; only coefficient denominators
    are cleared, and m >= 1.
    """
    m = 1
    for _, c in fn.coeffs:
        m = math.lcm(m, c.denominator)
    coeffs = {v: int(c * m) for v, c in fn.coeffs}
    return Term.build(coeffs, fn.const * m), m


def _cell_formula(cell: Cell) -> Formula:
    """Conjunction of atoms describing the cell (over its own arity)."""
    parts: list[Formula] = []
    for i, spec in enumerate(cell.coords):
        if isinstance(spec, Section):
            num, m = _clear_denominators(spec.fn)
            parts.append(Compare(Term.var(i, m), "=", num))
        else:
            if spec.lo is not None:
                num, m = _clear_denominators(spec.lo)
                parts.append(Compare(Term.var(i, m), ">", num))
            if spec.hi is not None:
                num, m = _clear_denominators(spec.hi)
                parts.append(Compare(Term.var(i, m), "<", num))
    return conj(*parts)


class _EvalCtx:
    def __init__(self, desc, ring, max_tuples, max_cells):
        self.desc: GroupDescriptor = desc
        self.ring: RingSpec = ring
        self.max_tuples = max_tuples
        self.max_cells = max_cells
        self.cells_used = 0
        self.memo: dict[tuple[Formula, int], tuple[K0Element, EvalTrace]] = {}


# --- residue enumeration ------------------------------------------------------


def _fold_ready_divs(desc, f: Formula, known_upto: int, residues, l_k: int) -> Formula:
    """Decide every Div atom whose variables are all assigned (< known_upto)."""
    if isinstance(f, Div):
        if f.term.max_var() < known_upto:
            shift = sum(
                (Fraction(c * residues[v], l_k) for v, c in f.term.coeffs),
                f.term.const,
            )
            return Bool(group_model.contains(desc, shift / f.modulus))
        return f
    if isinstance(f, And):
        return conj(*(_fold_ready_divs(desc, p, known_upto, residues, l_k) for p in f.parts))
    if isinstance(f, Or):
        return disj(*(_fold_ready_divs(desc, p, known_upto, residues, l_k) for p in f.parts))
    return f


def _subst_comparisons(f: Formula, L: int, residues, l_k: int) -> Formula:
    """Apply x_j := L*z_j + l_j/l_k to the remaining comparison atoms."""

    def tf(t: Term) -> Term:
        shift = sum((Fraction(c * residues[v], l_k) for v, c in t.coeffs), t.const)
        return Term(tuple((v, c * L) for v, c in t.coeffs), shift)

    if isinstance(f, Compare):
        return Compare(tf(f.lhs), f.op, tf(f.rhs))
    if isinstance(f, And):
        return And(tuple(_subst_comparisons(p, L, residues, l_k) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(_subst_comparisons(p, L, residues, l_k) for p in f.parts))
    if isinstance(f, Bool):
        return f
    raise TypeError(f"unexpected node after divisibility folding: {type(f).__name__}")


# --- the pipeline ------------------------------------------------------------


def evaluate(
    desc: GroupDescriptor,
    ring: RingSpec,
    f: Formula,
    arity: int | None = None,
    max_tuples: int = DEFAULT_MAX_TUPLES,
    max_cells: int = DEFAULT_MAX_CELLS,
) -> tuple[K0Element, EvalTrace]:
    """Value of the set defined by f in G^n, with the evaluation trace.

    n defaults to the formula's arity (highest variable index + 1).
    """
    n = f.arity if arity is None else arity
    if n < f.arity:
        raise ValueError(f"arity {n} is below the formula's own arity {f.arity}")
    ctx = _EvalCtx(desc, ring, max_tuples, max_cells)
    return _eval_formula(ctx, f, n)


def evaluate_cell(
    desc: GroupDescriptor,
    ring: RingSpec,
    cell: Cell,
    arity: int | None = None,
    max_tuples: int = DEFAULT_MAX_TUPLES,
    max_cells: int = DEFAULT_MAX_CELLS,
) -> K0Element:
    """Value of (cell intersected with G^n) for a cell from the decomposer."""
    n = cell.arity if arity is None else arity
    if n != cell.arity:
        raise ValueError(f"cell has arity {cell.arity}, not {n}")
    ctx = _EvalCtx(desc, ring, max_tuples, max_cells)
    value, _children = _value_cell(ctx, cell, n)
    return value


def _eval_formula(ctx: _EvalCtx, f: Formula, n: int) -> tuple[K0Element, EvalTrace]:
    fn = normalize(ctx.desc, f)
    key = (fn, n)
    if key in ctx.memo:
        value, full = ctx.memo[key]
        hit = EvalTrace(
            formula=str(fn),
            arity=n,
            L=full.L,
            shift_denominator=full.shift_denominator,
            value=value,
            memoized=True,
        )
        return value, hit

    if ctx.ring.trivial:
        value = ctx.ring.zero()
        trace = EvalTrace(str(fn), n, 1, 1, value, trivial_ring=True)
        ctx.memo[key] = (value, trace)
        return value, trace

    if n == 0:
        # a closed formula folds to a constant under normalization
        value = ctx.ring.one() if fn == TRUE else ctx.ring.zero()
        trace = EvalTrace(str(fn), n, 1, 1, value)
        ctx.memo[key] = (value, trace)
        return value, trace

    L = compute_L(fn)
    if L**n > ctx.max_tuples:
        raise ResourceCapError(
            "tuples", f"L^n = {L}^{n} residue vectors exceed the cap {ctx.max_tuples}"
        )
    l_k = group_model.k_part(ctx.desc, L)

    total = ctx.ring.zero()
    tuples: list[TupleTrace] = []

    def explore(depth: int, residues: list[int], g: Formula):
        nonlocal total
        if depth == n:
            if g == FALSE:
                tuples.append(TupleTrace(tuple(residues), "dead"))
                return
            z_formula = _subst_comparisons(g, L, residues, l_k)
            cells = decompose_formula(z_formula, n)
            ctx.cells_used += len(cells)
            if ctx.cells_used > ctx.max_cells:
                raise ResourceCapError(
                    "cells", f"decomposition produced more than {ctx.max_cells} cells"
                )
            record = TupleTrace(tuple(residues), "live")
            for cell in cells:
                cv, children = _value_cell(ctx, cell, n)
                record.cells.append(CellTrace(cell, cv, children))
                total = total + cv
            tuples.append(record)
            return
        for l in range(L):
            residues.append(l)
            g2 = _fold_ready_divs(ctx.desc, g, depth + 1, residues, l_k)
            if g2 == FALSE and depth + 1 < n:
                tuples.append(
                    TupleTrace(tuple(residues), "pruned", skipped=L ** (n - depth - 1))
                )
            else:
                explore(depth + 1, residues, g2)
            residues.pop()

    explore(0, [], fn)
    trace = EvalTrace(str(fn), n, L, l_k, total, tuples=tuples)
    ctx.memo[key] = (total, trace)
    return total, trace


# --- cell values ------------------------------------------------------------


def _value_cell(ctx: _EvalCtx, cell: Cell, n: int) -> tuple[K0Element, list[EvalTrace]]:
    last = cell.coords[-1]
    if n == 1:
        if isinstance(last, Section):
            return point_value(ctx.ring, ctx.desc, last.fn.const), []
        lo = Endpoint.neg_inf() if last.lo is None else Endpoint.at(ctx.desc, last.lo.const)
        hi = Endpoint.pos_inf() if last.hi is None else Endpoint.at(ctx.desc, last.hi.const)
        return interval_value(ctx.ring, lo, hi), []

    base_f = _cell_formula(cell.base())
    if isinstance(last, Section):
        return _section_value(ctx, base_f, last.fn, n)
    if last.lo is None and last.hi is None:
        bv, tr = _eval_formula(ctx, base_f, n - 1)
        return bv * ctx.ring.line(), [tr]
    if last.lo is not None and last.hi is None:
        return _upper_band_value(ctx, base_f, last.lo, n)
    if last.lo is None and last.hi is not None:
        # mirror y -> -y: below hi becomes above -hi
        return _upper_band_value(ctx, base_f, -last.hi, n)
    below_hi, tr1 = _upper_band_value(ctx, base_f, -last.hi, n)
    graph_lo, tr2 = _section_value(ctx, base_f, last.lo, n)
    below_lo, tr3 = _upper_band_value(ctx, base_f, -last.lo, n)
    return below_hi - graph_lo - below_lo, tr1 + tr2 + tr3


def _section_value(
    ctx: _EvalCtx, base_f: Formula, fn: AffineFn, n: int
) -> tuple[K0Element, list[EvalTrace]]:
    """Graph of fn over the base: project and keep the divisible part."""
    num, m = _clear_denominators(fn)
    value, tr = _eval_formula(ctx, conj(base_f, Div(m, num)), n - 1)
    return value, [tr]


def _upper_band_value(
    ctx: _EvalCtx, base_f: Formula, fn: AffineFn, n: int
) -> tuple[K0Element, list[EvalTrace]]:
    """Value of {(x, y) : x in base, y > fn(x)} inside G^n."""
    num, m = _clear_denominators(fn)
    if not group_model.contains(ctx.desc, num.const):
        # boundary constant outside the group: no fiber endpoint is ever a
        # group element, every fiber is a half-line worth X + 1/2
        bv, tr = _eval_formula(ctx, base_f, n - 1)
        endpoint = Endpoint.at(ctx.desc, fn.const)
        return bv * interval_value(ctx.ring, endpoint, Endpoint.pos_inf()), [tr]
    _, m_t = group_model.s_split(ctx.desc, m)
    m_k = group_model.k_part(ctx.desc, m)
    total = ctx.ring.zero()
    children: list[EvalTrace] = []
    for j in range(m_t):
        piece = conj(base_f, Div(m_t, num.shift(Fraction(j, m_k))))
        bv, tr = _eval_formula(ctx, piece, n - 1)
        children.append(tr)
        endpoint = Endpoint.at(ctx.desc, Fraction(-j, m * m_k))
        total = total + bv * interval_value(ctx.ring, endpoint, Endpoint.pos_inf())
    return total, children
