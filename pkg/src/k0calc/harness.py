"""Executable checks tying the ring laws to the evaluation pipeline.

Each check runs against a group descriptor and its value ring and returns a
CheckReport with replayable failures: additivity over disjoint unions,
multiplicativity over products, invariance under explicit piecewise-affine
bijections, the exactly-one-shifted-multiple property behind divisibility
normalization, and the torsion identities forced by non-division-closed
primes.  `run_suite` bundles them over configured groups; a tamper switch
perturbs evaluator outputs so the suite's failure detection is itself
testable.
"""

from __future__ import annotations

import json
import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction

from . import evaluator, group_model
from .formula import (
    And,
    Compare,
    Div,
    Formula,
    NDiv,
    Not,
    Or,
    Term,
    conj,
    disj,
    eval_point,
    shift_variables,
)
from .group_model import GroupDescriptor
from .k0ring import Endpoint, K0Element, RingSpec, interval_value
from .lincell import AffineFn

# generator bounds: keep residue-vector and cell counts at desk scale
MAX_COEFF = 5
MAX_MODULUS = 6
MAX_CONST_DENOM = 100
TUPLE_BUDGET = 4000


@dataclass
class CheckReport:
    """Outcome of one named check; failures carry enough to replay."""

    name: str
    trials: int = 0
    failures: list[dict] = field(default_factory=list)
    elapsed: float = 0.0
    seed: int | None = None
    skipped: bool = False
    note: str = ""

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "trials": self.trials,
            "failures": self.failures,
            "elapsed": round(self.elapsed, 6),
            "seed": self.seed,
            "skipped": self.skipped,
            "note": self.note,
            "passed": self.passed,
        }

    def line(self) -> str:
        if self.skipped:
            return f"SKIP {self.name}: {self.note}"
        status = "ok" if self.passed else f"FAIL ({len(self.failures)} failures)"
        return f"{self.name}: {status} [{self.trials} trials, {self.elapsed:.2f}s]"


# --- random formulas ---------------------------------------------------------


def gen_term(rng: random.Random, n_vars: int) -> Term:
    coeffs = {}
    for v in range(n_vars):
        if rng.random() < 0.7:
            c = rng.randint(-MAX_COEFF, MAX_COEFF)
            if c:
                coeffs[v] = c
    if not coeffs:
        coeffs[rng.randrange(n_vars)] = rng.choice([1, -1, 2, 3])
    denom = rng.choice([1, 1, 1, 2, 3, 5, 7, rng.randint(1, MAX_CONST_DENOM)])
    const = Fraction(rng.randint(-10, 10), denom)
    return Term.build(coeffs, const)


def gen_atom(rng: random.Random, n_vars: int, allow_div: bool = True) -> Formula:
    if allow_div and rng.random() < 0.35:
        modulus = rng.randint(2, MAX_MODULUS)
        cls = Div if rng.random() < 0.8 else NDiv
        return cls(modulus, gen_term(rng, n_vars))
    op = rng.choice(["<", "<=", "=", "!=", ">=", ">"])
    lhs = gen_term(rng, n_vars)
    rhs = Term.constant(Fraction(rng.randint(-8, 8), rng.choice([1, 1, 2, 7])))
    return Compare(lhs, op, rhs)


def gen_formula(
    rng: random.Random, n_vars: int, depth: int = 2, allow_div: bool = True
) -> Formula:
    if depth == 0 or rng.random() < 0.4:
        atom = gen_atom(rng, n_vars, allow_div)
        return Not(atom) if rng.random() < 0.15 else atom
    parts = [
        gen_formula(rng, n_vars, depth - 1, allow_div) for _ in range(rng.randint(2, 3))
    ]
    return conj(*parts) if rng.random() < 0.5 else disj(*parts)


def _tuple_cost(f: Formula, n_vars: int) -> int:
    L = 1
    for atom in _div_moduli(f):
        L = math.lcm(L, atom)
    return L**max(n_vars, 1)


def _div_moduli(f: Formula) -> list[int]:
    if isinstance(f, (Div, NDiv)):
        return [f.modulus]
    if isinstance(f, (And, Or)):
        out = []
        for p in f.parts:
            out.extend(_div_moduli(p))
        return out
    if isinstance(f, Not):
        return _div_moduli(f.inner)
    return []


def _gen_bounded(rng, n_vars, allow_div=True, budget=TUPLE_BUDGET) -> Formula:
    while True:
        f = gen_formula(rng, n_vars, allow_div=allow_div)
        if _tuple_cost(f, n_vars) <= budget:
            return f


# --- checks -------------------------------------------------------------------


def check_additivity(
    desc: GroupDescriptor,
    ring: RingSpec,
    pairs=None,
    trials: int = 100,
    seed: int = 0,
    tamper=None,
) -> CheckReport:
    """evaluate(f or g) == evaluate(f) + evaluate(g) for disjoint f, g.

    Generated pairs are disjoint by construction (a shared core conjoined
    with an atom and with its negation); supplied pairs are sampled for
    disjointness first and rejected if a common point turns up.
    """
    report = CheckReport("additivity", seed=seed)
    started = time.perf_counter()
    rng = random.Random(seed)
    tamper = tamper or (lambda v: v)
    if pairs is None:
        generated = []
        while len(generated) < trials:
            n_vars = rng.randint(1, 2)
            core = _gen_bounded(rng, n_vars, budget=TUPLE_BUDGET // 2)
            split = gen_atom(rng, n_vars, allow_div=rng.random() < 0.3)
            f, g = conj(core, split), conj(core, Not(split))
            if _tuple_cost(Or((f, g)), n_vars) <= TUPLE_BUDGET:
                generated.append((f, g))
        pairs = generated
    else:
        for f, g in pairs:
            _reject_overlap(desc, f, g, seed)
    for idx, (f, g) in enumerate(pairs):
        report.trials += 1
        n = max(f.arity, g.arity)
        try:
            union, _ = evaluator.evaluate(desc, ring, Or((f, g)), arity=n)
            vf, _ = evaluator.evaluate(desc, ring, f, arity=n)
            vg, _ = evaluator.evaluate(desc, ring, g, arity=n)
        except evaluator.ResourceCapError as exc:
            report.failures.append({"trial": idx, "error": str(exc), "f": str(f), "g": str(g)})
            continue
        if tamper(union) != vf + vg:
            report.failures.append(
                {
                    "trial": idx,
                    "seed": seed,
                    "f": str(f),
                    "g": str(g),
                    "union": tamper(union).to_json(),
                    "sum": (vf + vg).to_json(),
                }
            )
    report.elapsed = time.perf_counter() - started
    return report


def _reject_overlap(desc, f, g, seed, samples=200):
    n = max(f.arity, g.arity, 1)
    pts = _sample_vectors(desc, n, samples, seed)
    for pt in pts:
        if eval_point(desc, f, pt) and eval_point(desc, g, pt):
            raise ValueError(f"pair is not disjoint: both hold at {pt}")


def check_multiplicativity(
    desc: GroupDescriptor,
    ring: RingSpec,
    trials: int = 100,
    seed: int = 0,
    tamper=None,
) -> CheckReport:
    """evaluate(f and g') == evaluate(f) * evaluate(g) with g' on fresh variables."""
    report = CheckReport("multiplicativity", seed=seed)
    started = time.perf_counter()
    rng = random.Random(seed)
    tamper = tamper or (lambda v: v)
    for idx in range(trials):
        while True:
            nf = rng.randint(1, 2)
            ng = rng.randint(1, 2)
            f = _gen_bounded(rng, nf, budget=TUPLE_BUDGET)
            g = _gen_bounded(rng, ng, budget=TUPLE_BUDGET)
            if _tuple_cost(And((f, g)), nf + ng) <= TUPLE_BUDGET:
                break
        g_fresh = shift_variables(g, nf)
        report.trials += 1
        try:
            prod, _ = evaluator.evaluate(desc, ring, conj(f, g_fresh), arity=nf + ng)
            vf, _ = evaluator.evaluate(desc, ring, f, arity=nf)
            vg, _ = evaluator.evaluate(desc, ring, g, arity=ng)
        except evaluator.ResourceCapError as exc:
            report.failures.append({"trial": idx, "error": str(exc), "f": str(f), "g": str(g)})
            continue
        if tamper(prod) != vf * vg:
            report.failures.append(
                {
                    "trial": idx,
                    "seed": seed,
                    "f": str(f),
                    "g": str(g),
                    "product": tamper(prod).to_json(),
                    "ring_product": (vf * vg).to_json(),
                }
            )
    report.elapsed = time.perf_counter() - started
    return report


# --- explicit bijections -------------------------------------------------------


@dataclass(frozen=True)
class BijectionPiece:
    guard: Formula
    maps: tuple[AffineFn, ...]

    def apply(self, point) -> list[Fraction]:
        return [fn.evaluate(point) for fn in self.maps]


@dataclass(frozen=True)
class BijectionSpec:
    """Piecewise-affine map presented with its inverse; validated by sampling."""

    pieces: tuple[BijectionPiece, ...]
    inverse: "BijectionSpec | None" = None

    def apply(self, desc, point) -> list[Fraction] | None:
        live = [p for p in self.pieces if eval_point(desc, p.guard, point)]
        if len(live) != 1:
            return None
        return live[0].apply(point)


def check_bijection_invariance(
    desc: GroupDescriptor,
    ring: RingSpec,
    f: Formula,
    bij: BijectionSpec,
    g: Formula,
    samples: int = 60,
    seed: int = 0,
    tamper=None,
) -> CheckReport:
    """Validate bij : f-set -> g-set on samples, then compare the two values."""
    report = CheckReport("bijection_invariance", seed=seed)
    started = time.perf_counter()
    tamper = tamper or (lambda v: v)
    n = max(f.arity, 1)
    pts = [pt for pt in _sample_vectors(desc, n, samples * 5, seed) if eval_point(desc, f, pt)]
    pts = pts[:samples]
    if not pts:
        report.note = "no sample points satisfied the source formula"
    for pt in pts:
        report.trials += 1
        image = bij.apply(desc, pt)
        if image is None:
            report.failures.append({"point": [str(c) for c in pt], "error": "guard count != 1"})
            continue
        if not all(group_model.contains(desc, c) for c in image):
            report.failures.append({"point": [str(c) for c in pt], "error": "image outside group"})
            continue
        if not eval_point(desc, g, image):
            report.failures.append({"point": [str(c) for c in pt], "error": "image not in target"})
            continue
        if bij.inverse is not None:
            back = bij.inverse.apply(desc, image)
            if back is None or [Fraction(c) for c in back] != [Fraction(c) for c in pt]:
                report.failures.append(
                    {"point": [str(c) for c in pt], "error": "inverse does not return"}
                )
    if report.failures:
        report.elapsed = time.perf_counter() - started
        return report  # sample-level failure: skip the value comparison
    vf, _ = evaluator.evaluate(desc, ring, f)
    vg, _ = evaluator.evaluate(desc, ring, g)
    report.trials += 1
    if tamper(vf) != vg:
        report.failures.append({"f": str(f), "g": str(g), "vf": vf.to_json(), "vg": vg.to_json()})
    report.elapsed = time.perf_counter() - started
    return report


def check_fact_div(
    desc: GroupDescriptor,
    trials: int = 1000,
    modulus_bound: int = 50,
    seed: int = 0,
) -> CheckReport:
    """For y in G and n with no division-closed factor: exactly one of
    (y + i/n_K)/n, i = 0..n-1, lands in G."""
    report = CheckReport("fact_div", seed=seed)
    started = time.perf_counter()
    rng = random.Random(seed)
    moduli = [
        n for n in range(2, modulus_bound + 1) if group_model.s_split(desc, n)[0] == 1
    ]
    if not moduli:
        report.skipped = True
        report.note = f"no modulus <= {modulus_bound} is free of division-closed primes"
        report.elapsed = time.perf_counter() - started
        return report
    ys = group_model.sample_elements(desc, trials, denominator_budget=128, seed=seed)
    for idx in range(trials):
        n = rng.choice(moduli)
        y = ys[idx]
        n_k = group_model.k_part(desc, n)
        hits = [
            i
            for i in range(n)
            if group_model.contains(desc, (y + Fraction(i, n_k)) / n)
        ]
        report.trials += 1
        if len(hits) != 1:
            report.failures.append({"trial": idx, "seed": seed, "y": str(y), "n": n, "hits": hits})
    report.elapsed = time.perf_counter() - started
    return report


def check_torsion(
    desc: GroupDescriptor,
    ring: RingSpec,
    prime_bound: int = 50,
    tamper=None,
) -> CheckReport:
    """Per complement prime p: the p residue classes each evaluate to the
    whole-line value 2X+1, their sum is 2X+1, and (p-1)(2X+1) = 0."""
    report = CheckReport("torsion")
    started = time.perf_counter()
    tamper = tamper or (lambda v: v)
    if ring.trivial:
        report.skipped = True
        report.note = "trivial ring, nothing to witness"
        report.elapsed = time.perf_counter() - started
        return report
    if desc.s_kind == "cofinite":
        primes = [p for p in sorted(desc.s_primes) if p <= prime_bound]
    else:
        primes = [p for p in range(2, prime_bound) if group_model.is_prime(p) and not desc.in_s(p)]
    line = ring.line()
    for p in primes:
        k = desc.exponent(p)
        values = []
        for i in range(p):
            f = Div(p, Term.var(0).shift(Fraction(i, p**k)))
            v, _ = evaluator.evaluate(desc, ring, f)
            values.append(tamper(v))
        report.trials += 1
        total = ring.zero()
        for v in values:
            total = total + v
        bad_classes = [i for i, v in enumerate(values) if v != line]
        if bad_classes or total != line or (p - 1) * line != ring.zero() or p * line != line:
            report.failures.append(
                {
                    "prime": p,
                    "classes_not_line": bad_classes,
                    "sum": total.to_json(),
                    "p_minus_1_times_line_zero": (p - 1) * line == ring.zero(),
                }
            )
    if ring.q * ring.one() != ring.zero():
        report.failures.append({"error": "q * 1 != 0 in the ring"})
    report.elapsed = time.perf_counter() - started
    return report


def check_unary_intervals(
    desc: GroupDescriptor, ring: RingSpec, tamper=None
) -> CheckReport:
    """Pipeline values of one-variable intervals against the closed-form table,
    across all endpoint-membership combinations reachable for the group."""
    report = CheckReport("unary_intervals")
    started = time.perf_counter()
    tamper = tamper or (lambda v: v)
    u = _non_member(desc)
    x = Term.var(0)
    cases: list[tuple[Formula, Endpoint, Endpoint]] = [
        (
            conj(Compare(x, ">", Term.constant(0)), Compare(x, "<", Term.constant(1))),
            Endpoint.at(desc, 0),
            Endpoint.at(desc, 1),
        ),
        (
            conj(Compare(x, ">", Term.constant(0)), Compare(x, "<", Term.constant(u))),
            Endpoint.at(desc, 0),
            Endpoint.at(desc, u),
        ),
        (
            conj(Compare(x, ">", Term.constant(u)), Compare(x, "<", Term.constant(2 * u))),
            Endpoint.at(desc, u),
            Endpoint.at(desc, 2 * u),
        ),
        (Compare(x, ">", Term.constant(0)), Endpoint.at(desc, 0), Endpoint.pos_inf()),
        (Compare(x, ">", Term.constant(u)), Endpoint.at(desc, u), Endpoint.pos_inf()),
        (Compare(x, "=", x), Endpoint.neg_inf(), Endpoint.pos_inf()),
    ]
    for f, lo, hi in cases:
        report.trials += 1
        expected = interval_value(ring, lo, hi)
        got, _ = evaluator.evaluate(desc, ring, f, arity=1)
        if tamper(got) != expected:
            report.failures.append(
                {"formula": str(f), "expected": expected.to_json(), "got": tamper(got).to_json()}
            )
    report.elapsed = time.perf_counter() - started
    return report


def _non_member(desc: GroupDescriptor) -> Fraction:
    """Some positive rational outside the group (exists: G is proper)."""
    if desc.s_kind == "cofinite":
        p = min(desc.s_primes)
    else:
        p = next(q for q in group_model.iter_primes() if not desc.in_s(q))
    return Fraction(1, p ** (desc.exponent(p) + 1))


def _sample_vectors(desc, arity, count, seed):
    flat = group_model.sample_elements(desc, count * arity, denominator_budget=64, seed=seed)
    return [flat[i * arity : (i + 1) * arity] for i in range(count)]


# --- suite --------------------------------------------------------------------

REFERENCE_GROUPS = [
    {"divisible": {"kind": "cofinite", "primes": [7]}, "partial_exponents": {}},
    {"divisible": {"kind": "cofinite", "primes": [31]}, "partial_exponents": {}},
    {"divisible": {"kind": "finite", "primes": [2, 3, 5]}, "partial_exponents": {}},
]

DEFAULT_SUITE_CONFIG = {
    "groups": REFERENCE_GROUPS,
    "seed": 20240601,
    "pair_trials": 25,
    "fact_div_trials": 250,
    "modulus_bound": 50,
}


def load_suite_config(path: str) -> dict:
    with open(path) as fh:
        config = json.load(fh)
    merged = dict(DEFAULT_SUITE_CONFIG)
    merged.update(config)
    return merged


def run_suite(config: dict | None = None, tamper_values: bool = False) -> list[CheckReport]:
    """Run every check on every configured group; reports sorted by name."""
    config = dict(DEFAULT_SUITE_CONFIG if config is None else config)
    seed = config.get("seed", 0)
    reports: list[CheckReport] = []
    for gi, gdata in enumerate(config["groups"]):
        desc = (
            group_model.load_descriptor(gdata)
            if isinstance(gdata, str)
            else group_model.descriptor_from_json(gdata)
        )
        cert = group_model.compute_q(desc)
        ring = RingSpec(cert.q)
        tag = desc.describe()
        tamper = (lambda v: v + K0Element(v.q, 0, 1 % v.q)) if tamper_values else None
        group_reports = [
            check_fact_div(
                desc,
                trials=config["fact_div_trials"],
                modulus_bound=config["modulus_bound"],
                seed=seed + gi,
            ),
            check_additivity(desc, ring, trials=config["pair_trials"], seed=seed + gi, tamper=tamper),
            check_multiplicativity(
                desc, ring, trials=config["pair_trials"], seed=seed + gi, tamper=tamper
            ),
            check_torsion(desc, ring, tamper=tamper),
            check_unary_intervals(desc, ring, tamper=tamper),
        ]
        for r in group_reports:
            r.name = f"{r.name}[{tag}]"
        reports.extend(group_reports)
    return sorted(reports, key=lambda r: r.name)
