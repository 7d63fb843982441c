"""Exact integer number theory: factorization, CRT, primes in progressions.

Everything here is deterministic and exact.  Primality uses a Miller-Rabin
witness set that is proven complete below 2**64, which covers every input
this package is meant for (desk-scale moduli, group descriptors, witness
searches).  Factorization is trial division with a Pollard-rho fallback.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# Witness set deterministic for all n < 2**64.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

_TRIAL_LIMIT = 10**6


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin primality test (complete below 2**64).

    >>> is_prime(65537)
    True
    >>> is_prime(65536)
    False
    """
    if n < 2:
        return False
    for p in _MR_WITNESSES:
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_rho(n: int) -> int:
    """Return a nontrivial factor of composite odd n (Brent's cycle variant)."""
    if n % 2 == 0:
        return 2
    c = 1
    while True:
        x = y = 2
        d = 1
        while d == 1:
            x = (x * x + c) % n
            y = (y * y + c) % n
            y = (y * y + c) % n
            d = math.gcd(abs(x - y), n)
        if d != n:
            return d
        c += 1


def _factor_into(n: int, out: dict[int, int]) -> None:
    if n == 1:
        return
    if is_prime(n):
        out[n] = out.get(n, 0) + 1
        return
    d = _pollard_rho(n)
    _factor_into(d, out)
    _factor_into(n // d, out)


@dataclass(frozen=True)
class Factorization:
    """A prime factorization: ``value == prod(p**e for p, e in factors)``.

    Primes appear in strictly increasing order with exponents >= 1;
    ``factorize(1)`` carries an empty factor list.
    """

    value: int
    factors: tuple[tuple[int, int], ...]

    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factors)


def factorize(n: int) -> Factorization:
    """Factor a positive integer.

    >>> factorize(12).factors
    ((2, 2), (3, 1))
    >>> factorize(1).factors
    ()
    """
    if n <= 0:
        raise ValueError(f"factorize requires n >= 1, got {n}")
    acc: dict[int, int] = {}
    m = n
    d = 2
    while d * d <= m and d < _TRIAL_LIMIT:
        while m % d == 0:
            acc[d] = acc.get(d, 0) + 1
            m //= d
        d += 1 if d == 2 else 2
    if m > 1:
        _factor_into(m, acc)
    return Factorization(n, tuple(sorted(acc.items())))


def odd_part(n: int) -> int:
    """Largest odd divisor of n: n with every factor of 2 removed.

    >>> odd_part(12)
    3
    """
    if n <= 0:
        raise ValueError(f"odd_part requires n >= 1, got {n}")
    while n % 2 == 0:
        n //= 2
    return n


def crt_solve(congruences: list[tuple[int, int]]) -> tuple[int, int] | None:
    """Solve a system x = r_i (mod m_i), moduli not necessarily coprime.

    Returns (r, M) with 0 <= r < M = lcm of the moduli such that r satisfies
    every congruence, or None when the system is inconsistent on a shared
    prime-power factor.

    >>> crt_solve([(-1, 5), (2, 3)])
    (14, 15)
    >>> crt_solve([(1, 2), (0, 2)]) is None
    True
    """
    r, m = 0, 1
    for r2, m2 in congruences:
        if m2 < 1:
            raise ValueError(f"modulus must be >= 1, got {m2}")
        r2 %= m2
        g = math.gcd(m, m2)
        if (r2 - r) % g != 0:
            return None
        lcm = m // g * m2
        # r + m*t = r2 (mod m2)  =>  t = (r2-r)/g * inv(m/g) (mod m2/g)
        t = (r2 - r) // g * pow(m // g, -1, m2 // g) % (m2 // g) if m2 != g else 0
        r = (r + m * t) % lcm
        m = lcm
    return r, m


def find_prime_in_ap(a: int, m: int, bound: int) -> int | None:
    """Least prime p <= bound with p = a (mod m), or None if there is none.

    For gcd(a, m) = 1 the progression contains infinitely many primes, so
    None only means the bound is too small.  For gcd(a, m) = g > 1 every
    member of the progression is divisible by g, hence the only possible
    prime is g itself; None is then definitive at any bound.

    >>> find_prime_in_ap(-1, 7, 100)
    13
    >>> find_prime_in_ap(2, 4, 100)
    2
    """
    if m < 1:
        raise ValueError(f"modulus must be >= 1, got {m}")
    if bound < 2:
        raise ValueError(f"bound must be >= 2, got {bound}")
    g = math.gcd(a, m)
    if g > 1:
        if is_prime(g) and (g - a) % m == 0 and g <= bound:
            return g
        return None
    p = a % m
    if p == 0:
        p = m  # only with m == 1
    while p <= bound:
        if p > 1 and is_prime(p):
            return p
        p += m
    return None


def is_fermat_prime(p: int) -> bool:
    """True iff p is prime and p = 2**n + 1 for some n >= 0 (so 2 counts).

    >>> [q for q in range(1, 20) if is_fermat_prime(q)]
    [2, 3, 5, 17]
    """
    if p < 2 or not is_prime(p):
        return False
    d = p - 1
    return d & (d - 1) == 0


def primes_up_to(bound: int) -> list[int]:
    """Ascending list of primes <= bound (simple sieve)."""
    if bound < 2:
        return []
    sieve = bytearray([1]) * (bound + 1)
    sieve[0] = sieve[1] = 0
    for i in range(2, int(math.isqrt(bound)) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(sieve[i * i :: i]))
    return [i for i, flag in enumerate(sieve) if flag]


def iter_primes():
    """Yield primes 2, 3, 5, ... indefinitely."""
    yield 2
    n = 3
    while True:
        if is_prime(n):
            yield n
        n += 2
