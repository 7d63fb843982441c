from fractions import Fraction

import pytest

from k0calc import group_model
from k0calc.evaluator import evaluate
from k0calc.formula import parse
from k0calc.harness import (
    BijectionPiece,
    BijectionSpec,
    CheckReport,
    check_additivity,
    check_bijection_invariance,
    check_fact_div,
    check_multiplicativity,
    check_torsion,
    check_unary_intervals,
    load_suite_config,
    run_suite,
)
from k0calc.k0ring import K0Element, RingSpec
from k0calc.lincell import AffineFn

R3 = RingSpec(3)


def test_additivity_generated(comp7):
    report = check_additivity(comp7, R3, trials=30, seed=5)
    assert report.passed and report.trials == 30


def test_additivity_supplied_pairs(comp7):
    pairs = [
        (parse("0 < x0 and x0 < 1"), parse("1 < x0 and x0 < 2")),
        (parse("x0 = 0"), parse("x0 = 1")),
    ]
    report = check_additivity(comp7, R3, pairs=pairs)
    assert report.passed and report.trials == 2


def test_additivity_rejects_overlapping_pair(comp7):
    f = parse("0 < x0")
    with pytest.raises(ValueError):
        check_additivity(comp7, R3, pairs=[(f, f)])


def test_multiplicativity_generated(comp7):
    report = check_multiplicativity(comp7, R3, trials=30, seed=5)
    assert report.passed and report.trials == 30


def test_fact_div_zero_failures():
    half = group_model.validate("finite", [2])
    report = check_fact_div(half, trials=300, modulus_bound=50, seed=2)
    assert report.passed and report.trials == 300
    desc = group_model.validate("finite", [2], {3: 2})
    report = check_fact_div(desc, trials=300, modulus_bound=50, seed=2)
    assert report.passed


def test_fact_div_example_shifts():
    half = group_model.validate("finite", [2])
    # modulus 3 at y = 1/2: the unique shifted multiple is i = 1
    hits = [
        i
        for i in range(3)
        if group_model.contains(half, (Fraction(1, 2) + i) / 3)
    ]
    assert hits == [1]
    desc = group_model.validate("finite", [2], {3: 2})
    hits = [
        i
        for i in range(3)
        if group_model.contains(desc, (0 + Fraction(i, 9)) / 3)
    ]
    assert hits == [0]


def test_torsion_check(comp7, comp31):
    assert check_torsion(comp7, R3).passed
    assert check_torsion(comp31, RingSpec(15)).passed


def test_torsion_skipped_when_trivial(finite235):
    report = check_torsion(finite235, RingSpec(1))
    assert report.skipped and "trivial" in report.note


def test_unary_intervals_check(comp7, comp31, finite235):
    assert check_unary_intervals(comp7, R3).passed
    assert check_unary_intervals(comp31, RingSpec(15)).passed
    assert check_unary_intervals(finite235, RingSpec(1)).passed


def test_bijection_identity(comp7):
    f = parse("0 < x0 and x0 < 1")
    ident = BijectionSpec(
        pieces=(BijectionPiece(f, (AffineFn.build({0: Fraction(1)}, 0),)),),
    )
    report = check_bijection_invariance(comp7, R3, f, ident, f)
    assert report.passed


def test_bijection_halving(comp7):
    # x -> x/2 maps (0,1) onto (0,1/2); 2 is division-closed so the map stays in G
    f = parse("0 < x0 and x0 < 1")
    g = parse("0 < x0 and 2*x0 < 1")
    halve = BijectionSpec(
        pieces=(BijectionPiece(f, (AffineFn.build({0: Fraction(1, 2)}, 0),)),),
        inverse=BijectionSpec(
            pieces=(BijectionPiece(g, (AffineFn.build({0: Fraction(2)}, 0),)),)
        ),
    )
    report = check_bijection_invariance(comp7, R3, f, halve, g)
    assert report.passed
    va, _ = evaluate(comp7, R3, f)
    vb, _ = evaluate(comp7, R3, g)
    assert va == vb == R3.element(-1)


def test_bijection_doubling_relation(comp7):
    # (1/7, 1) -> (0, 1/7) by x -> (1 - x)/6: both halves of the unit interval
    # around the non-member point carry the same class, so -1 = 2 * (-1/2)
    f = parse("1 < 7*x0 and x0 < 1")
    g = parse("0 < x0 and 7*x0 < 1")
    fold = BijectionSpec(
        pieces=(BijectionPiece(f, (AffineFn.build({0: Fraction(-1, 6)}, Fraction(1, 6)),)),),
        inverse=BijectionSpec(
            pieces=(BijectionPiece(g, (AffineFn.build({0: Fraction(-6)}, 1),)),)
        ),
    )
    report = check_bijection_invariance(comp7, R3, f, fold, g)
    assert report.passed
    vg, _ = evaluate(comp7, R3, g)
    v_unit, _ = evaluate(comp7, R3, parse("0 < x0 and x0 < 1"))
    v_point, _ = evaluate(comp7, R3, parse("7*x0 = 1"))
    assert v_unit == vg + v_point + vg  # -1 = -1/2 + 0 + -1/2


def test_bijection_broken_map_reported(comp7):
    # claims (0,1) maps onto (0,1) by x -> x + 1: images escape the guard
    f = parse("0 < x0 and x0 < 1")
    bad = BijectionSpec(
        pieces=(BijectionPiece(f, (AffineFn.build({0: Fraction(1)}, 1),)),),
    )
    report = check_bijection_invariance(comp7, R3, f, bad, f)
    assert not report.passed
    assert all("image not in target" == fail["error"] for fail in report.failures)


def test_reports_are_replayable(comp7):
    tamper = lambda v: v + K0Element(v.q, 0, 1)
    report = check_additivity(comp7, R3, trials=5, seed=77, tamper=tamper)
    assert not report.passed
    assert report.seed == 77
    for failure in report.failures:
        assert failure["seed"] == 77
        assert "f" in failure and "g" in failure


def test_run_suite_passes_on_reference_groups():
    # the default configuration covers all three reference groups
    reports = run_suite()
    assert all(r.passed for r in reports if not r.skipped)
    names = {r.name.split("[")[0] for r in reports}
    assert names == {
        "additivity",
        "multiplicativity",
        "fact_div",
        "torsion",
        "unary_intervals",
    }
    tags = {r.name.split("[")[1] for r in reports}
    assert len(tags) == 3
    skipped = [r for r in reports if r.skipped]
    assert len(skipped) == 1 and "torsion" in skipped[0].name  # the q = 1 group


def test_run_suite_detects_injected_fault():
    config = {
        "groups": [
            {"divisible": {"kind": "cofinite", "primes": [7]}, "partial_exponents": {}}
        ],
        "seed": 11,
        "pair_trials": 5,
        "fact_div_trials": 50,
        "modulus_bound": 20,
    }
    reports = run_suite(config, tamper_values=True)
    assert any(not r.passed for r in reports if not r.skipped)


def test_suite_config_loading(tmp_path):
    path = tmp_path / "suite.json"
    path.write_text('{"pair_trials": 3, "seed": 9}')
    config = load_suite_config(str(path))
    assert config["pair_trials"] == 3
    assert config["seed"] == 9
    assert config["groups"]  # defaults fill the rest


def test_report_json_shape():
    r = CheckReport("demo", trials=4, elapsed=0.5, seed=1)
    data = r.to_json()
    assert data["passed"] and data["name"] == "demo"
    r.failures.append({"bad": True})
    assert not r.to_json()["passed"]
