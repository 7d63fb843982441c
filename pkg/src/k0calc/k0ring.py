"""Arithmetic in the candidate value ring (Z/qZ)[X]/(X^2 + X).

Elements are written a + b*X where X is the class of the open half-line
(0, +oo) in the group G; the defining relation X^2 = -X makes
(a + bX)(c + dX) = ac + (ad + bc - bd)X.  q is odd, so 2 is invertible and
the half constant (q+1)/2 realizes the fractional values -1/2 and X + 1/2
appearing in the interval table.  q = 1 is the trivial (collapsed) ring.

The computed ring is an upper bound: two sets with equal values here have
equal classes in the true value ring; unequal values are inconclusive.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import group_model
from .group_model import GroupDescriptor


@dataclass(frozen=True)
class RingSpec:
    """The ring (Z/qZ)[X]/(X^2 + X) for odd q >= 1."""

    q: int

    def __post_init__(self):
        if self.q < 1 or self.q % 2 == 0:
            raise ValueError(f"q must be a positive odd integer, got {self.q}")

    @property
    def trivial(self) -> bool:
        return self.q == 1

    @property
    def half(self) -> int:
        """The inverse of 2 mod q (0 in the trivial ring)."""
        return (self.q + 1) // 2 % self.q

    def element(self, a: int, b: int = 0) -> "K0Element":
        return K0Element(self.q, a % self.q, b % self.q)

    def zero(self) -> "K0Element":
        return self.element(0, 0)

    def one(self) -> "K0Element":
        return self.element(1, 0)

    def x(self) -> "K0Element":
        return self.element(0, 1)

    def line(self) -> "K0Element":
        """Value of the whole group: 2X + 1."""
        return self.element(1, 2)

    def describe(self) -> str:
        return f"(Z/{self.q}Z)[X]/(X^2 + X)"


@dataclass(frozen=True)
class K0Element:
    """a + b*X with residues reduced mod q."""

    q: int
    a: int
    b: int

    def _check(self, other: "K0Element") -> None:
        if self.q != other.q:
            raise ValueError(f"mixed rings: mod {self.q} vs mod {other.q}")

    def __add__(self, other: "K0Element") -> "K0Element":
        self._check(other)
        return K0Element(self.q, (self.a + other.a) % self.q, (self.b + other.b) % self.q)

    def __sub__(self, other: "K0Element") -> "K0Element":
        self._check(other)
        return K0Element(self.q, (self.a - other.a) % self.q, (self.b - other.b) % self.q)

    def __neg__(self) -> "K0Element":
        return K0Element(self.q, -self.a % self.q, -self.b % self.q)

    def __mul__(self, other):
        if isinstance(other, int):
            return K0Element(self.q, self.a * other % self.q, self.b * other % self.q)
        self._check(other)
        a, b, c, d = self.a, self.b, other.a, other.b
        return K0Element(self.q, a * c % self.q, (a * d + b * c - b * d) % self.q)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def text(self) -> str:
        return f"{self.a} + {self.b}*X (mod {self.q})"

    def to_json(self) -> dict:
        return {"q": self.q, "a": self.a, "b": self.b}

    def __str__(self) -> str:
        return self.text()


# add/neg/mul operation aliases (the operators above are the implementation)
def add(x: K0Element, y: K0Element) -> K0Element:
    return x + y


def neg(x: K0Element) -> K0Element:
    return -x


def mul(x: K0Element, y: K0Element) -> K0Element:
    return x * y


_NEG_INF = "-inf"
_POS_INF = "+inf"


@dataclass(frozen=True)
class Endpoint:
    """An extended-rational interval endpoint with a group-membership flag."""

    kind: str  # "-inf", "+inf", "finite"
    value: Fraction | None = None
    in_group: bool | None = None

    @staticmethod
    def neg_inf() -> "Endpoint":
        return Endpoint(_NEG_INF)

    @staticmethod
    def pos_inf() -> "Endpoint":
        return Endpoint(_POS_INF)

    @staticmethod
    def at(desc: GroupDescriptor, value) -> "Endpoint":
        v = Fraction(value)
        return Endpoint("finite", v, group_model.contains(desc, v))

    @property
    def finite(self) -> bool:
        return self.kind == "finite"


def interval_value(spec: RingSpec, lo: Endpoint, hi: Endpoint) -> K0Element:
    """Value of the open interval (lo, hi) intersected with the group.

    The table: two finite endpoints give -1 / -1/2 / 0 as both / one /
    neither lies in G; a half-line gives X or X + 1/2 as its finite endpoint
    lies in G or not; the full line gives 2X + 1.  Empty or reversed
    intervals (and everything in the trivial ring) give 0.
    """
    if spec.trivial:
        return spec.zero()
    if lo.kind == _POS_INF or hi.kind == _NEG_INF:
        return spec.zero()
    if lo.finite and hi.finite and lo.value >= hi.value:
        return spec.zero()
    if not lo.finite and not hi.finite:
        return spec.line()
    if lo.finite and hi.finite:
        members = int(lo.in_group) + int(hi.in_group)
        if members == 2:
            return spec.element(-1)
        if members == 1:
            return spec.element(-spec.half)
        return spec.zero()
    finite_end = lo if lo.finite else hi
    if finite_end.in_group:
        return spec.x()
    return spec.element(spec.half, 1)


def point_value(spec: RingSpec, desc: GroupDescriptor, r) -> K0Element:
    """Value of the singleton {r}: 1 when r lies in G, else 0 (empty set)."""
    if spec.trivial:
        return spec.zero()
    if group_model.contains(desc, Fraction(r)):
        return spec.one()
    return spec.zero()
