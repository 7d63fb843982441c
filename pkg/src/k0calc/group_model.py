"""Dense subgroups of Q described by their prime-divisibility profile.

A subgroup Z <= G < Q is determined by, for each prime p, how far p may be
inverted: fully (p is "division closed", every element divisible by p inside
G), or up to a finite exponent k_p >= 0.  The descriptor stores the division-
closed set S either as a finite list or as the complement of a finite list,
plus the finitely many nonzero partial exponents.

The torsion parameter q of the value ring is the largest odd integer dividing
p - 1 for every prime p outside S; `compute_q` returns it together with
checkable evidence (an explicit gcd trace, or witness primes killing every
odd candidate when the complement is infinite).
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .numtheory import factorize, iter_primes, is_prime, odd_part

DEFAULT_SCAN_BOUND = 10**6


class InvalidDescriptor(ValueError):
    """Rejected group descriptor; `code` names the specific violation."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class ScanBoundExhausted(RuntimeError):
    """The witness scan hit its safety cap before the gcd collapsed.

    Diagnostic only: rerun with a larger bound (the scan provably
    terminates, the bound just has no a-priori effective estimate).
    """


@dataclass(frozen=True)
class GroupDescriptor:
    """Divisibility profile of a dense subgroup Z <= G < Q.

    s_kind is "finite" or "cofinite"; s_primes lists the division-closed
    primes when finite, their complement when cofinite.  partial_exponents
    maps a prime p outside the division-closed set to k_p >= 1 such that
    1/p**k_p lies in G but 1/p**(k_p+1) does not (absent means k_p = 0).
    Use `validate` to construct a checked instance.
    """

    s_kind: str
    s_primes: frozenset[int]
    partial_exponents: tuple[tuple[int, int], ...]

    def in_s(self, p: int) -> bool:
        """Is G p-divisible?"""
        if self.s_kind == "finite":
            return p in self.s_primes
        return p not in self.s_primes

    def exponent(self, p: int) -> int:
        """Partial inversion exponent k_p for a prime outside S."""
        for prime, k in self.partial_exponents:
            if prime == p:
                return k
        return 0

    def describe(self) -> str:
        inner = ", ".join(map(str, sorted(self.s_primes)))
        if self.s_kind == "finite":
            s = "S = {%s}" % inner
        else:
            s = "S = all primes except {%s}" % inner
        if self.partial_exponents:
            parts = ", ".join(f"k_{p} = {k}" for p, k in self.partial_exponents)
            s += f" with {parts}"
        return s


def validate(
    s_kind: str,
    s_primes,
    partial_exponents: dict[int, int] | None = None,
) -> GroupDescriptor:
    """Build a GroupDescriptor, enforcing every invariant.

    Rejects the full group Q (code "represents_q"), profiles that describe a
    discrete (cyclic) group (code "not_dense"), exponent keys inside the
    division-closed set (code "exponent_collides"), and malformed primes or
    exponents (codes "bad_prime" / "bad_exponent").
    """
    if s_kind not in ("finite", "cofinite"):
        raise InvalidDescriptor("bad_schema", f"unknown kind {s_kind!r}")
    primes = frozenset(s_primes)
    for p in primes:
        if not isinstance(p, int) or not is_prime(p):
            raise InvalidDescriptor("bad_prime", f"{p!r} is not a prime")
    exps = dict(partial_exponents or {})
    for p, k in exps.items():
        if not isinstance(p, int) or not is_prime(p):
            raise InvalidDescriptor("bad_prime", f"exponent key {p!r} is not a prime")
        if not isinstance(k, int) or k < 0:
            raise InvalidDescriptor("bad_exponent", f"exponent for {p} must be >= 0, got {k!r}")
    if s_kind == "cofinite" and not primes:
        raise InvalidDescriptor(
            "represents_q", "every prime division-closed: this is all of Q, not a proper subgroup"
        )
    if s_kind == "finite" and not primes:
        # All exponents finite with finitely many nonzero: the group is
        # cyclic, hence not dense in Q.
        raise InvalidDescriptor(
            "not_dense", "no division-closed prime: the group is cyclic, not dense in Q"
        )
    desc_tmp = GroupDescriptor(s_kind, primes, ())
    for p in exps:
        if desc_tmp.in_s(p):
            raise InvalidDescriptor(
                "exponent_collides", f"prime {p} is division-closed; a partial exponent is meaningless"
            )
    cleaned = tuple(sorted((p, k) for p, k in exps.items() if k > 0))
    return GroupDescriptor(s_kind, primes, cleaned)


def contains(desc: GroupDescriptor, r: Fraction | int) -> bool:
    """Membership test: is the rational r an element of G?

    r = a/b in lowest terms lies in G iff for every prime power p**e
    exactly dividing b, either p is division-closed or e <= k_p.
    """
    b = Fraction(r).denominator
    if b == 1:
        return True
    for p, e in factorize(b).factors:
        if not desc.in_s(p) and e > desc.exponent(p):
            return False
    return True


def s_split(desc: GroupDescriptor, n: int) -> tuple[int, int]:
    """Split n = n_S * n_T with n_S carrying exactly the division-closed primes.

    >>> g = validate("cofinite", [7])
    >>> s_split(g, 84)
    (12, 7)
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    n_s = 1
    for p, e in factorize(n).factors:
        if desc.in_s(p):
            n_s *= p**e
    return n_s, n // n_s


def k_part(desc: GroupDescriptor, n: int) -> int:
    """Product of p**k_p over the distinct non-division-closed primes of n.

    This is the largest denominator shift usable with modulus n: 1/k_part
    lies in G, and pushing any participating prime one power further leaves G.
    """
    _, n_t = s_split(desc, n)
    out = 1
    for p, _ in factorize(n_t).factors:
        out *= p ** desc.exponent(p)
    return out


@dataclass(frozen=True)
class QCertificate:
    """The torsion parameter q plus the evidence that produced it.

    kind "exact-gcd": q = odd_part(gcd(p-1 for p in the finite complement));
    gcd_trace lists (p, p-1, running gcd).  kind "dirichlet-witnesses":
    q = 1, and witnesses lists (odd prime q', complement prime p) with
    q' not dividing p - 1; scanned_primes are the complement primes used.
    """

    q: int
    kind: str
    complement_primes: tuple[int, ...] = ()
    gcd_trace: tuple[tuple[int, int, int], ...] = ()
    witnesses: tuple[tuple[int, int], ...] = ()
    scanned_primes: tuple[int, ...] = ()

    @property
    def trivial(self) -> bool:
        return self.q == 1

    def to_json(self) -> dict:
        if self.kind == "exact-gcd":
            evidence = {
                "kind": self.kind,
                "complement_primes": list(self.complement_primes),
                "gcd_trace": [list(t) for t in self.gcd_trace],
            }
        else:
            evidence = {
                "kind": self.kind,
                "witnesses": [list(w) for w in self.witnesses],
                "scanned_primes": list(self.scanned_primes),
            }
        return {"q": self.q, "evidence": evidence}


def compute_q(desc: GroupDescriptor, scan_bound: int = DEFAULT_SCAN_BOUND) -> QCertificate:
    """Largest odd q dividing p - 1 for every prime p outside the closed set.

    Cofinite profiles have a finite complement: q is an exact gcd computation.
    Finite profiles have an infinite complement, but scanning it in increasing
    order provably collapses the running odd gcd to 1 (for any odd candidate
    q' > 1 the progression q'*m + 2 contains a prime, and all but finitely
    many primes lie in the complement); the witnesses record the collapse.
    """
    if desc.s_kind == "cofinite":
        comp = tuple(sorted(desc.s_primes))
        g = 0
        trace = []
        for p in comp:
            g = math.gcd(g, p - 1)
            trace.append((p, p - 1, g))
        return QCertificate(
            q=odd_part(g), kind="exact-gcd", complement_primes=comp, gcd_trace=tuple(trace)
        )

    g = 0
    witnesses: list[tuple[int, int]] = []
    scanned: list[int] = []
    for p in iter_primes():
        if p > scan_bound:
            state = odd_part(g) if g else "undetermined"
            raise ScanBoundExhausted(
                f"odd gcd still {state} after scanning complement primes up to {scan_bound}"
            )
        if desc.in_s(p):
            continue
        scanned.append(p)
        new_g = math.gcd(g, p - 1)
        if g:
            old_odd, new_odd = odd_part(g), odd_part(new_g)
            if new_odd != old_odd:
                for qp, _ in factorize(old_odd).factors:
                    if new_odd % qp != 0:
                        witnesses.append((qp, p))
        g = new_g
        if odd_part(g) == 1:
            return QCertificate(
                q=1,
                kind="dirichlet-witnesses",
                witnesses=tuple(witnesses),
                scanned_primes=tuple(scanned),
            )
    raise ScanBoundExhausted("prime iterator exhausted")  # pragma: no cover


def sample_elements(
    desc: GroupDescriptor,
    count: int,
    denominator_budget: int = 64,
    magnitude_bound: int = 8,
    seed: int = 0,
) -> list[Fraction]:
    """Deterministic list of rationals provably in G.

    Denominators are assembled only from allowed prime powers (division-closed
    primes freely, partially inverted primes up to their exponent), so every
    returned element is in G by construction.  Roughly a third of the samples
    are integers.
    """
    if count < 0 or denominator_budget < 1 or magnitude_bound < 1:
        raise ValueError("budgets must be positive")
    rng = random.Random(seed)
    powers: list[int] = []
    if desc.s_kind == "finite":
        s_list = sorted(desc.s_primes)
    else:
        s_list = [p for p in (2, 3, 5, 7, 11, 13) if desc.in_s(p)]
    for p in s_list:
        pe = p
        while pe <= denominator_budget:
            powers.append(pe)
            pe *= p
    for p, k in desc.partial_exponents:
        pe = p
        for _ in range(k):
            if pe > denominator_budget:
                break
            powers.append(pe)
            pe *= p
    out = []
    for _ in range(count):
        if not powers or rng.random() < 0.34:
            d = 1
        else:
            d = rng.choice(powers)
            if rng.random() < 0.5:
                d2 = rng.choice(powers)
                if d * d2 <= denominator_budget and math.gcd(d, d2) in (1, d, d2):
                    d = d * d2 if math.gcd(d, d2) == 1 else max(d, d2)
        num = rng.randint(-magnitude_bound * d, magnitude_bound * d)
        out.append(Fraction(num, d))
    return out


# --- descriptor file schema ---------------------------------------------
#
# {"divisible": {"kind": "finite"|"cofinite", "primes": [ints]},
#  "partial_exponents": {"<prime>": int, ...}}
#
# Unknown keys anywhere are rejected.


def descriptor_to_json(desc: GroupDescriptor) -> dict:
    return {
        "divisible": {"kind": desc.s_kind, "primes": sorted(desc.s_primes)},
        "partial_exponents": {str(p): k for p, k in desc.partial_exponents},
    }


def descriptor_from_json(data: dict) -> GroupDescriptor:
    if not isinstance(data, dict):
        raise InvalidDescriptor("bad_schema", "descriptor must be a JSON object")
    extra = set(data) - {"divisible", "partial_exponents"}
    if extra:
        raise InvalidDescriptor("bad_schema", f"unknown keys: {sorted(extra)}")
    div = data.get("divisible")
    if not isinstance(div, dict):
        raise InvalidDescriptor("bad_schema", "missing 'divisible' object")
    extra = set(div) - {"kind", "primes"}
    if extra:
        raise InvalidDescriptor("bad_schema", f"unknown keys in 'divisible': {sorted(extra)}")
    kind = div.get("kind")
    primes = div.get("primes")
    if not isinstance(primes, list):
        raise InvalidDescriptor("bad_schema", "'primes' must be a list")
    raw_exps = data.get("partial_exponents", {})
    if not isinstance(raw_exps, dict):
        raise InvalidDescriptor("bad_schema", "'partial_exponents' must be an object")
    exps = {}
    for key, v in raw_exps.items():
        try:
            p = int(key)
        except (TypeError, ValueError):
            raise InvalidDescriptor("bad_schema", f"exponent key {key!r} is not an integer")
        exps[p] = v
    return validate(kind, primes, exps)


def load_descriptor(path: str) -> GroupDescriptor:
    with open(path) as fh:
        return descriptor_from_json(json.load(fh))
