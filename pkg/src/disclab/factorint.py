"""Integer factorization tables, multiplicative basics, and the Kronecker symbol.

Factorizations are carried around as tuples of (prime, exponent) pairs so the
layers above can evaluate multiplicative functions without re-factoring.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import numpy as np

from .errors import ConfigurationError, OutOfRangeError

MAX_TABLE_LIMIT = 10**9

Factorization = Tuple[Tuple[int, int], ...]


@dataclass(frozen=True)
class FactoredInteger:
    """An integer together with its prime factorization (primes ascending)."""

    value: int
    factors: Factorization

    def __post_init__(self):
        n = 1
        for p, e in self.factors:
            n *= p**e
        if n != abs(self.value) or self.value == 0:
            raise ValueError(f"inconsistent factorization for {self.value}: {self.factors}")


@dataclass
class SieveTables:
    """Smallest-prime-factor table for 2..limit plus the prime list."""

    limit: int
    spf: np.ndarray

    _primes: np.ndarray = None

    @property
    def primes(self) -> np.ndarray:
        if self._primes is None:
            idx = np.arange(self.limit + 1, dtype=self.spf.dtype)
            self._primes = np.nonzero(self.spf == idx)[0][1:]  # drop index 1
        return self._primes


def build_tables(limit: int) -> SieveTables:
    """Sieve smallest prime factors for every n in 2..limit.

    Memory is the dominant cost: 4 bytes per integer up to the hard cap of
    MAX_TABLE_LIMIT.
    """
    if not (2 <= limit <= MAX_TABLE_LIMIT):
        raise ConfigurationError(f"table limit must be in [2, {MAX_TABLE_LIMIT}], got {limit}")
    spf = np.zeros(limit + 1, dtype=np.uint32)
    for p in range(2, math.isqrt(limit) + 1):
        if spf[p] == 0:
            block = spf[p * p :: p]
            block[block == 0] = p
    # remaining zeros (other than 0,1) are primes
    rest = np.nonzero(spf == 0)[0]
    spf[rest] = rest
    spf[0] = 0
    spf[1] = 1
    return SieveTables(limit=limit, spf=spf)


def spf_window(lo: int, hi: int) -> np.ndarray:
    """Smallest prime factor for each n in [lo, hi) without a full table.

    Entries equal to the element itself mark primes (or lo == 1).
    """
    if not (1 <= lo < hi):
        raise OutOfRangeError(f"bad window [{lo}, {hi})")
    out = np.zeros(hi - lo, dtype=np.int64)
    for p in iter_primes(math.isqrt(hi - 1)):
        start = ((lo + p - 1) // p) * p
        if start < p * p:
            start = p * p
        block = out[start - lo :: p]
        block[block == 0] = p
    vals = np.arange(lo, hi, dtype=np.int64)
    mask = out == 0
    out[mask] = vals[mask]
    return out


def iter_primes(limit: int) -> Iterable[int]:
    """Primes up to limit via a plain boolean sieve."""
    if limit < 2:
        return []
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return [int(p) for p in np.nonzero(sieve)[0]]


def factor(n: int, tables: SieveTables) -> FactoredInteger:
    """Factor 1 <= n <= tables.limit by walking the SPF table."""
    if not (1 <= n <= tables.limit):
        raise OutOfRangeError(f"n={n} outside table range [1, {tables.limit}]")
    factors = []
    m = n
    spf = tables.spf
    while m > 1:
        p = int(spf[m])
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        factors.append((p, e))
    return FactoredInteger(value=n, factors=tuple(factors))


# deterministic Miller-Rabin bases valid for all n < 3.3 * 10**24
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
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


def _brent_rho(n: int) -> int:
    """One nontrivial factor of composite n (Brent's cycle variant)."""
    if n % 2 == 0:
        return 2
    seed = 1
    while True:
        y, c, m = seed, seed + 1, 128
        g = r = q = 1
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g
        seed += 1


def factor_general(n: int, tables: SieveTables = None) -> FactoredInteger:
    """Factor any n >= 1: SPF table when available, else trial division + rho."""
    if n < 1:
        raise OutOfRangeError(f"factor_general needs n >= 1, got {n}")
    if tables is not None and n <= tables.limit:
        return factor(n, tables)
    counts = {}
    m = n
    for p in (2, 3, 5):
        while m % p == 0:
            counts[p] = counts.get(p, 0) + 1
            m //= p
    p, bound = 7, 10**4
    wheel = (4, 2, 4, 2, 4, 6, 2, 6)
    wi = 0
    while p <= bound and p * p <= m:
        while m % p == 0:
            counts[p] = counts.get(p, 0) + 1
            m //= p
        p += wheel[wi]
        wi = (wi + 1) % 8
    stack = [m] if m > 1 else []
    while stack:
        v = stack.pop()
        if v == 1:
            continue
        if is_prime(v):
            counts[v] = counts.get(v, 0) + 1
            continue
        d = _brent_rho(v)
        stack.append(d)
        stack.append(v // d)
    return FactoredInteger(value=n, factors=tuple(sorted(counts.items())))


def _coerce(n) -> Factorization:
    if isinstance(n, FactoredInteger):
        return n.factors
    return factor_general(int(abs(n))).factors


def as_factored(n) -> FactoredInteger:
    """Coerce an int (possibly negative) to a FactoredInteger."""
    if isinstance(n, FactoredInteger):
        return n
    n = int(n)
    return FactoredInteger(value=n, factors=factor_general(abs(n)).factors)


def phi(n) -> int:
    """Euler totient from a factorization (or a plain integer)."""
    out = 1
    for p, e in _coerce(n):
        out *= p ** (e - 1) * (p - 1)
    return out


def moebius(n) -> int:
    fs = _coerce(n)
    if any(e >= 2 for _, e in fs):
        return 0
    return -1 if len(fs) % 2 else 1


def omega(n) -> int:
    """Number of distinct prime factors."""
    return len(_coerce(n))


def divisors(n) -> list:
    """All positive divisors, ascending."""
    ds = [1]
    for p, e in _coerce(n):
        ds = [d * p**k for d in ds for k in range(e + 1)]
    return sorted(ds)


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a|n), defined for all integers n.

    Extends the Jacobi symbol by (a|2), (a|-1), and (a|0) in the usual way.
    """
    if n == 0:
        return 1 if a in (1, -1) else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -1
    if n % 2 == 0:
        if a % 2 == 0:
            return 0
        t = 0
        while n % 2 == 0:
            n //= 2
            t += 1
        if t % 2 == 1 and a % 8 in (3, 5):
            result = -result
    a %= n
    while a != 0:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def gcd_of_factored(a_factors: Sequence[Tuple[int, int]], b_factors: Sequence[Tuple[int, int]]) -> int:
    bd = dict(b_factors)
    g = 1
    for p, e in a_factors:
        if p in bd:
            g *= p ** min(e, bd[p])
    return g
