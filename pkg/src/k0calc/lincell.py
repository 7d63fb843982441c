"""Cylindrical cells over Q^n for divisibility-free linear constraints.

A cell describes each coordinate, in order, as either the graph of an affine
function of the earlier coordinates (Section) or an open band between two
affine functions / infinities (Band).  `decompose` partitions the solution
set of a conjunction of linear atoms into such cells; `decompose_formula`
does the same for an arbitrary divisibility-free and/or combination.

The construction is a recursive linear arrangement: collect the affine
boundary functions of the last variable, refine the base by all their
pairwise differences (so their order is constant on every base cell), then
stack sections and bands over each base cell and keep the ones on which the
input holds.  Truth is sampled at one point per candidate cell, which is
exact because every atom is sign-invariant on the cell by construction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from .formula import And, Bool, Compare, Formula, Not, Or, Term, _REL_FN

# --- affine functions ---------------------------------------------------


@dataclass(frozen=True)
class AffineFn:
    """Sum of rational-scaled variables plus a rational constant."""

    coeffs: tuple[tuple[int, Fraction], ...] = ()
    const: Fraction = Fraction(0)

    @staticmethod
    def build(coeffs: dict[int, Fraction], const=0) -> "AffineFn":
        items = tuple(sorted((v, Fraction(c)) for v, c in coeffs.items() if c != 0))
        return AffineFn(items, Fraction(const))

    @staticmethod
    def constant(value) -> "AffineFn":
        return AffineFn((), Fraction(value))

    @staticmethod
    def from_term(t: Term) -> "AffineFn":
        return AffineFn.build({v: Fraction(c) for v, c in t.coeffs}, t.const)

    def evaluate(self, point) -> Fraction:
        total = self.const
        for v, c in self.coeffs:
            total += c * point[v]
        return total

    def __neg__(self) -> "AffineFn":
        return AffineFn(tuple((v, -c) for v, c in self.coeffs), -self.const)

    def __sub__(self, other: "AffineFn") -> "AffineFn":
        acc = dict(self.coeffs)
        for v, c in other.coeffs:
            acc[v] = acc.get(v, Fraction(0)) - c
        return AffineFn.build(acc, self.const - other.const)

    def coeff(self, index: int) -> Fraction:
        for v, c in self.coeffs:
            if v == index:
                return c
        return Fraction(0)

    def drop(self, index: int) -> "AffineFn":
        return AffineFn(tuple((v, c) for v, c in self.coeffs if v != index), self.const)

    def scale(self, k: Fraction) -> "AffineFn":
        return AffineFn.build({v: c * k for v, c in self.coeffs}, self.const * k)

    @property
    def is_constant(self) -> bool:
        return not self.coeffs

    def max_var(self) -> int:
        return self.coeffs[-1][0] if self.coeffs else -1

    def canonical(self) -> "AffineFn":
        """Scale so the leading coefficient (or constant) is +1; for dedup."""
        lead = self.coeffs[0][1] if self.coeffs else self.const
        if lead == 0:
            return self
        return self.scale(Fraction(1) / abs(lead) * (1 if lead > 0 else -1))

    def to_json(self) -> dict:
        return {
            "coeffs": {str(v): str(c) for v, c in self.coeffs},
            "const": str(self.const),
        }


# --- cells ----------------------------------------------------------------


@dataclass(frozen=True)
class Section:
    fn: AffineFn


@dataclass(frozen=True)
class Band:
    lo: AffineFn | None  # None = -infinity
    hi: AffineFn | None  # None = +infinity


@dataclass(frozen=True)
class Cell:
    """Cylindrical cell: coordinate i is described over coordinates < i."""

    coords: tuple[Section | Band, ...]

    @property
    def arity(self) -> int:
        return len(self.coords)

    def base(self) -> "Cell":
        return Cell(self.coords[:-1])

    def to_json(self) -> dict:
        out = []
        for c in self.coords:
            if isinstance(c, Section):
                out.append({"kind": "section", "fn": c.fn.to_json()})
            else:
                out.append(
                    {
                        "kind": "band",
                        "lo": c.lo.to_json() if c.lo is not None else "-inf",
                        "hi": c.hi.to_json() if c.hi is not None else "+inf",
                    }
                )
        return {"coords": out}

    def dump(self) -> str:
        return json.dumps(self.to_json())


def sample_point(cell: Cell) -> list[Fraction]:
    """A rational point inside the cell."""
    pt: list[Fraction] = []
    for spec in cell.coords:
        if isinstance(spec, Section):
            pt.append(spec.fn.evaluate(pt))
            continue
        lo = spec.lo.evaluate(pt) if spec.lo is not None else None
        hi = spec.hi.evaluate(pt) if spec.hi is not None else None
        if lo is None and hi is None:
            pt.append(Fraction(0))
        elif lo is None:
            pt.append(hi - 1)
        elif hi is None:
            pt.append(lo + 1)
        else:
            pt.append((lo + hi) / 2)
    return pt


def cell_membership(cell: Cell, point) -> bool:
    """Exact test of section equalities and band inequalities."""
    pt = [Fraction(c) for c in point]
    if len(pt) != cell.arity:
        raise ValueError(f"point dimension {len(pt)} != cell arity {cell.arity}")
    for i, spec in enumerate(cell.coords):
        if isinstance(spec, Section):
            if pt[i] != spec.fn.evaluate(pt):
                return False
        else:
            if spec.lo is not None and not pt[i] > spec.lo.evaluate(pt):
                return False
            if spec.hi is not None and not pt[i] < spec.hi.evaluate(pt):
                return False
    return True


# --- decomposition ----------------------------------------------------------


def _atom_fns(f: Formula) -> list[AffineFn]:
    if isinstance(f, Compare):
        return [AffineFn.from_term(f.diff())]
    if isinstance(f, (And, Or)):
        out = []
        for p in f.parts:
            out.extend(_atom_fns(p))
        return out
    if isinstance(f, Not):
        return _atom_fns(f.inner)
    if isinstance(f, Bool):
        return []
    raise ValueError(f"divisibility-free formula expected, found {type(f).__name__}")


def _eval_rational(f: Formula, pt: list[Fraction]) -> bool:
    if isinstance(f, Compare):
        return _REL_FN[f.op](f.lhs.evaluate(pt), f.rhs.evaluate(pt))
    if isinstance(f, And):
        return all(_eval_rational(p, pt) for p in f.parts)
    if isinstance(f, Or):
        return any(_eval_rational(p, pt) for p in f.parts)
    if isinstance(f, Not):
        return not _eval_rational(f.inner, pt)
    if isinstance(f, Bool):
        return f.value
    raise ValueError(f"divisibility-free formula expected, found {type(f).__name__}")


def _arrange(fns: list[AffineFn], n: int) -> list[Cell]:
    """Partition Q^n into cells on which every given function has constant sign."""
    if n == 0:
        return [Cell(())]
    boundaries: list[AffineFn] = []
    lower: list[AffineFn] = []
    seen: set[AffineFn] = set()
    seen_lower: set[AffineFn] = set()

    def _push_lower(fn: AffineFn) -> None:
        if fn.is_constant:
            return  # constant sign everywhere
        key = fn.canonical()  # sign pattern survives positive scaling and negation
        if key not in seen_lower:
            seen_lower.add(key)
            lower.append(fn)

    for fn in fns:
        if fn.max_var() > n - 1:
            raise ValueError(f"function {fn} uses a variable beyond arity {n}")
        a = fn.coeff(n - 1)
        if a == 0:
            _push_lower(fn)
            continue
        b = fn.drop(n - 1).scale(Fraction(-1) / a)  # exact root function, no rescaling
        if b not in seen:
            seen.add(b)
            boundaries.append(b)
    for i, f in enumerate(boundaries):
        for g in boundaries[i + 1 :]:
            _push_lower(f - g)
    cells: list[Cell] = []
    for base in _arrange(lower, n - 1):
        pt = sample_point(base)
        ordered = sorted(set((b.evaluate(pt), b) for b in boundaries), key=lambda t: t[0])
        # equal sample values mean identical functions on this base cell; keep one
        merged: list[AffineFn] = []
        last_val = None
        for val, b in ordered:
            if val != last_val:
                merged.append(b)
                last_val = val
        if not merged:
            cells.append(Cell(base.coords + (Band(None, None),)))
            continue
        cells.append(Cell(base.coords + (Band(None, merged[0]),)))
        for i, b in enumerate(merged):
            cells.append(Cell(base.coords + (Section(b),)))
            hi = merged[i + 1] if i + 1 < len(merged) else None
            cells.append(Cell(base.coords + (Band(b, hi),)))
    return cells


def decompose_formula(f: Formula, arity: int) -> list[Cell]:
    """Disjoint cells whose union is the solution set of f over Q^arity."""
    if f == Bool(False):
        return []
    fns = _atom_fns(f)
    kept = []
    for cell in _arrange(fns, arity):
        if _eval_rational(f, sample_point(cell)):
            kept.append(cell)
    return kept


def decompose(atoms, arity: int) -> list[Cell]:
    """Cell decomposition of a conjunction of divisibility-free linear atoms.

    Degenerate (variable-free) atoms are decided up front; an unsatisfiable
    conjunction yields the empty list.
    """
    live: list[Formula] = []
    for a in atoms:
        if not isinstance(a, Compare):
            raise ValueError("decompose expects comparison atoms only")
        d = a.diff()
        if d.is_constant:
            if not _REL_FN[a.op](d.const, Fraction(0)):
                return []
            continue
        live.append(a)
    if not live:
        return [_full_cell(arity)] if arity > 0 else [Cell(())]
    return decompose_formula(And(tuple(live)), arity)


def _full_cell(arity: int) -> Cell:
    return Cell(tuple(Band(None, None) for _ in range(arity)))
