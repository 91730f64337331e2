"""Multiplicative densities for sequences in arithmetic progressions.

Each sequence model carries a prime-power function h with mean value k.  The
progression density g_a(q) is multiplicative in q and depends on a only
through the exponents v_p(a); primes where the h-recipe breaks ("bad" primes)
get explicit per-model tables.  All arithmetic here is exact rational.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, ModelError
from .factorint import FactoredInteger, as_factored, factor_general
from . import quadform as qf


@dataclass(frozen=True)
class PrimePowerFn:
    """h on prime powers: eval(p, e) for e >= 1; h(1) = 1 by convention."""

    eval: Callable[[int, int], Fraction]
    average_k: Fraction
    bad_primes: frozenset
    label: str


@dataclass(frozen=True)
class SequenceModel:
    """h plus the bad-prime overrides needed to evaluate g_a everywhere."""

    h: PrimePowerFn
    label: str
    gamma_override: dict = field(default_factory=dict)
    g_bad: Optional[Callable[[int, int, int], Fraction]] = None
    # h(p) on an int64 array of good primes (none dividing a), for bulk sieves
    h_prime_vec: Optional[Callable] = None

    @property
    def k(self) -> Fraction:
        return self.h.average_k

    @property
    def bad_primes(self) -> frozenset:
        return self.h.bad_primes

    def h_pp(self, p: int, e: int) -> Fraction:
        if e == 0:
            return Fraction(1)
        return self.h.eval(p, e)

    def h_of(self, d) -> Fraction:
        """h(d) as a product over the prime powers of d."""
        out = Fraction(1)
        for p, e in _factors(d):
            out *= self.h_pp(p, e)
        return out


def _factors(n):
    if isinstance(n, FactoredInteger):
        return n.factors
    n = int(n)
    if n == 0:
        raise DomainError("expected a nonzero integer")
    return factor_general(abs(n)).factors


def _vp(factors, p: int) -> int:
    for q, e in factors:
        if q == p:
            return e
    return 0


def g_local(model: SequenceModel, p: int, e: int, a) -> Fraction:
    """g_a(p^e): the local progression density at one prime power."""
    if e == 0:
        return Fraction(1)
    if p in model.bad_primes:
        if model.g_bad is None:
            raise ModelError(f"model {model.label} has no table for bad prime {p}")
        a_val = a.value if isinstance(a, FactoredInteger) else int(a)
        return model.g_bad(p, e, a_val)
    f = _vp(_factors(a), p)
    if e <= f:
        return model.h_pp(p, e) / p**e
    num = model.h_pp(p, f) - model.h_pp(p, f + 1) / p
    return num / (p ** (e - 1) * (p - 1))


def g_a(model: SequenceModel, a, q) -> Fraction:
    """Density of the sequence in the class a mod q, relative to its full count.

    Multiplicative over the prime powers of q; for negative a the class is
    taken through |a|'s exponents (the residue class determines the answer at
    good primes, and bad-prime tables receive the signed a).
    """
    a = as_factored(a)
    out = Fraction(1)
    for p, e in _factors(q):
        out *= g_local(model, p, e, a)
        if out == 0:
            return out
    return out


def gamma_local(model: SequenceModel, p: int) -> Fraction:
    if p in model.gamma_override:
        return model.gamma_override[p]
    hp = model.h_pp(p, 1)
    if hp >= p:
        raise ModelError(f"model {model.label} needs h(p) < p; h({p}) = {hp}")
    return Fraction(p - 1, p) / (1 - hp / p)


def gamma_q(model: SequenceModel, q) -> Fraction:
    """gamma(q) = prod over distinct p | q of (1 - 1/p)/(1 - h(p)/p)."""
    out = Fraction(1)
    for p, _e in _factors(q):
        out *= gamma_local(model, p)
    return out


def f_a(model: SequenceModel, a, q) -> Fraction:
    """f_a(q) = g_a(q) * q * gamma(q); equals 1 for gcd(a, q) = 1 at good primes."""
    qv = q.value if isinstance(q, FactoredInteger) else int(q)
    return g_a(model, a, q) * qv * gamma_q(model, q)


def omega_h(model: SequenceModel, a) -> int:
    """Number of p^f || a (f >= 1, p good) with h(p^f) = h(p^(f+1))/p."""
    count = 0
    for p, f in _factors(a):
        if p in model.bad_primes:
            continue
        if model.h_pp(p, f) == model.h_pp(p, f + 1) / p:
            count += 1
    return count


def g_phi_bound(model: SequenceModel, a) -> Fraction:
    """A constant C with g_a(n) <= C / phi(n) for all n >= 1."""
    a = as_factored(a)
    bound = Fraction(1)
    primes = {p for p, _ in _factors(a)} | set(model.bad_primes)
    for p in sorted(primes):
        f = _vp(_factors(a), p)
        best = Fraction(1)
        for e in range(1, f + 3):
            val = g_local(model, p, e, a) * p ** (e - 1) * (p - 1)
            best = max(best, val)
        bound *= best
    return bound


# ----------------------------------------------------------------------------
# concrete models


def primes_model() -> SequenceModel:
    """Von Mangoldt weights: h(1) = 1 and h vanishes on higher prime powers."""

    def h(p, e):
        return Fraction(0)

    fn = PrimePowerFn(eval=h, average_k=Fraction(0), bad_primes=frozenset(), label="primes")
    return SequenceModel(h=fn, label="primes", h_prime_vec=lambda P: np.zeros(len(P)))


def _two_squares_g2(p: int, e: int, a: int) -> Fraction:
    """Density table at p = 2 for the sum-of-two-squares indicator.

    Write a = 2^f * a'.  Mass splits by the exact power of 2 and, above that,
    only classes with a' = 1 (mod 4) are hit, uniformly.
    """
    assert p == 2
    f = 0
    aa = abs(a)
    while aa % 2 == 0:
        aa //= 2
        f += 1
    a_odd = a >> f if a > 0 else -((-a) >> f)
    if e <= f + 1:
        return Fraction(1, 2**e)
    if a_odd % 4 == 1:
        return Fraction(1, 2 ** (e - 1))
    return Fraction(0)


def two_squares_model() -> SequenceModel:
    """Indicator of n = x^2 + y^2; the prime 2 needs its own density table."""

    def h(p, e):
        if p == 2:
            return Fraction(1)
        if p % 4 == 3 and e % 2 == 1:
            return Fraction(1, p)
        return Fraction(1)

    fn = PrimePowerFn(
        eval=h, average_k=Fraction(1, 2), bad_primes=frozenset({2}), label="two_squares"
    )
    return SequenceModel(
        h=fn,
        label="two_squares",
        gamma_override={2: Fraction(1)},
        g_bad=_two_squares_g2,
        h_prime_vec=lambda P: np.where(P % 4 == 1, 1.0, 1.0 / P),
    )


def rough_model(y: int) -> SequenceModel:
    """Indicator of integers free of prime factors below y."""
    if y < 2:
        raise DomainError(f"roughness bound must be >= 2, got {y}")

    def h(p, e):
        return Fraction(1) if p >= y else Fraction(0)

    fn = PrimePowerFn(eval=h, average_k=Fraction(1), bad_primes=frozenset(), label=f"rough_{y}")
    return SequenceModel(
        h=fn, label=f"rough_{y}", h_prime_vec=lambda P: np.where(P >= y, 1.0, 0.0)
    )


def quadform_model(form: qf.BinaryQuadraticForm) -> SequenceModel:
    """Values of a positive definite form counted with multiplicity.

    Good-prime h follows the character chi = (4*disc | .); primes dividing
    2*disc take their densities from the closed-form solution counts.
    """
    d = form.disc
    bad = frozenset(p for p, _ in factor_general(2 * abs(d)).factors)

    def h(p, e):
        if p in bad:
            raise DomainError(f"h undefined at bad prime {p} for form {form}")
        chi = form.chi(p)
        if chi == 1:
            return Fraction(e + 1) - Fraction(e, p)
        return Fraction(1, p) if e % 2 == 1 else Fraction(1)

    def g_bad(p, e, a):
        return Fraction(qf.Ra_closed_pp(form, a, p, e), p ** (2 * e))

    period = 4 * abs(d)
    chi_table = np.array([qf.kronecker(4 * d, r) for r in range(period)], dtype=np.int64)

    def h_vec(P):
        chi = chi_table[P % period]
        Pf = P.astype(np.float64)
        return np.where(chi == 1, 2.0 - 1.0 / Pf, 1.0 / Pf)

    fn = PrimePowerFn(
        eval=h, average_k=Fraction(1), bad_primes=bad, label=f"quadform_{form.label()}"
    )
    return SequenceModel(
        h=fn,
        label=f"quadform_{form.label()}",
        gamma_override={p: Fraction(1) for p in bad},
        g_bad=g_bad,
        h_prime_vec=h_vec,
    )
