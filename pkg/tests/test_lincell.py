import random
from fractions import Fraction

import pytest

from k0calc.formula import And, Compare, Term, parse
from k0calc.harness import gen_formula
from k0calc.lincell import (
    AffineFn,
    Band,
    Cell,
    Section,
    cell_membership,
    decompose,
    decompose_formula,
    sample_point,
    _eval_rational,
)


def atoms(text):
    f = parse(text)
    return list(f.parts) if isinstance(f, And) else [f]


def rational_grid(rng, n, count, span=4):
    pts = []
    for _ in range(count):
        pts.append([Fraction(rng.randint(-span * 12, span * 12), 12) for _ in range(n)])
    return pts


def test_unit_interval():
    cells = decompose(atoms("0 < x0 and x0 < 1"), 1)
    assert len(cells) == 1
    (band,) = cells[0].coords
    assert isinstance(band, Band)
    assert band.lo.const == 0 and band.hi.const == 1


def test_empty_conjunction_set():
    assert decompose(atoms("x0 < 0 and x0 > 1"), 1) == []


def test_degenerate_atoms():
    zero = Term.constant(0)
    assert decompose([Compare(zero, "=", zero), Compare(Term.var(0), ">", zero)], 1)
    assert decompose([Compare(zero, "<", zero)], 1) == []


def test_rejects_div_atoms():
    with pytest.raises(ValueError):
        decompose([parse("div(3, x0)")], 1)


def test_sample_point_examples():
    band = Cell((Band(AffineFn.constant(0), AffineFn.constant(1)),))
    assert sample_point(band) == [Fraction(1, 2)]
    over = Cell(
        (
            Band(AffineFn.constant(0), AffineFn.constant(1)),
            Section(AffineFn.build({0: Fraction(1)}, 1)),
        )
    )
    assert sample_point(over) == [Fraction(1, 2), Fraction(3, 2)]
    line = Cell((Band(None, None),))
    assert sample_point(line) == [0]


def test_membership_mirrors_sampling():
    cells = decompose(atoms("0 < x0 and x0 < 1 and x0 < x1 and x1 < 2"), 2)
    assert cells
    for cell in cells:
        assert cell_membership(cell, sample_point(cell))


def test_membership_dimension_check():
    cell = Cell((Band(None, None),))
    with pytest.raises(ValueError):
        cell_membership(cell, [0, 0])


def test_trapezoid_coverage_and_disjointness():
    f = parse("0 < x0 and x0 < 1 and x0 < x1 and x1 < 2")
    cells = decompose_formula(f, 2)
    rng = random.Random(77)
    for pt in rational_grid(rng, 2, 100, span=3):
        inside = _eval_rational(f, pt)
        hits = sum(cell_membership(c, pt) for c in cells)
        assert hits == (1 if inside else 0)


def test_random_formulas_coverage_and_disjointness():
    rng = random.Random(13)
    for _ in range(30):
        n = rng.randint(1, 2)
        f = gen_formula(rng, n, allow_div=False)
        cells = decompose_formula(f, n)
        for c in cells:
            assert c.arity == n
            assert cell_membership(c, sample_point(c))
        for pt in rational_grid(rng, n, 25):
            inside = _eval_rational(f, pt)
            hits = sum(cell_membership(c, pt) for c in cells)
            assert hits == (1 if inside else 0)


def test_coverage_500_points_in_bounding_box():
    f = parse(
        "0 < x0 and x0 < 3 and (x0 < x1 and x1 < 2*x0 + 1 or x1 <= -x0 or 2*x1 = x0 + 1)"
    )
    cells = decompose_formula(f, 2)
    rng = random.Random(500)
    for pt in rational_grid(rng, 2, 500, span=4):
        inside = _eval_rational(f, pt)
        hits = sum(cell_membership(c, pt) for c in cells)
        assert hits == (1 if inside else 0)


def test_cylindrical_invariant():
    rng = random.Random(29)
    for _ in range(20):
        f = gen_formula(rng, 2, allow_div=False)
        for cell in decompose_formula(f, 2):
            for i, spec in enumerate(cell.coords):
                fns = [spec.fn] if isinstance(spec, Section) else [spec.lo, spec.hi]
                for fn in fns:
                    if fn is not None:
                        assert fn.max_var() < i


def test_bands_are_nonempty_on_base():
    rng = random.Random(31)
    for _ in range(20):
        f = gen_formula(rng, 2, allow_div=False)
        for cell in decompose_formula(f, 2):
            base_pt = sample_point(Cell(cell.coords[:1]))
            spec = cell.coords[1]
            if isinstance(spec, Band) and spec.lo is not None and spec.hi is not None:
                assert spec.lo.evaluate(base_pt) < spec.hi.evaluate(base_pt)


def test_projection_soundness():
    rng = random.Random(37)
    for _ in range(15):
        f = gen_formula(rng, 2, allow_div=False)
        cells = decompose_formula(f, 2)
        truncated = []
        for c in cells:
            t = Cell(c.coords[:-1])
            if t not in truncated:
                truncated.append(t)
        # the deduped truncations partition the projection of the solution set
        for pt2 in rational_grid(rng, 2, 40):
            if _eval_rational(f, pt2):
                hits = sum(cell_membership(t, pt2[:1]) for t in truncated)
                assert hits == 1
        for t in truncated:
            base_hit = [c for c in cells if Cell(c.coords[:-1]) == t]
            assert base_hit  # every truncation came from a solution cell


def test_full_space():
    cells = decompose([], 2)
    assert len(cells) == 1
    assert all(c == Band(None, None) for c in cells[0].coords)


def test_cell_json_dump():
    cells = decompose(atoms("0 < x0 and x0 < 1"), 1)
    data = cells[0].to_json()
    assert data["coords"][0]["kind"] == "band"
    assert data["coords"][0]["lo"]["const"] == "0"
