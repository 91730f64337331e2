"""Sequence families and windowed sieves.

Five weighted sequences share one interface: prime powers with log weights,
values of a positive definite quadratic form, the sum-of-two-squares
indicator, products of log-prime weights over a linear-form tuple, and
integers free of small prime factors.  A sieve materializes one window
[lo, hi] as sparse (support, weight) arrays; counting helpers sum them over
divisibility or residue conditions.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from .errors import ConfigurationError, DomainError, ResourceError, UnsupportedError
from .factorint import MAX_TABLE_LIMIT, as_factored, iter_primes, spf_window
from .ktuples import KTuple, is_admissible
from .quadform import BinaryQuadraticForm

# widest dense window a single sieve call may allocate
MAX_WINDOW = 6 * 10**7

_CACHE_MAGIC = b"DLSW"
_CACHE_VERSION = 1


@dataclass(frozen=True)
class PrimesLambda:
    def label(self) -> str:
        return "primes"

    integer_weights = False


@dataclass(frozen=True)
class QuadFormMult:
    form: BinaryQuadraticForm

    def label(self) -> str:
        return f"quadform_{self.form.label()}"

    integer_weights = True


@dataclass(frozen=True)
class SumTwoSquares:
    def label(self) -> str:
        return "two_squares"

    integer_weights = True


@dataclass(frozen=True)
class KTupleWeight:
    tuple: KTuple

    def __post_init__(self):
        if not is_admissible(self.tuple):
            raise DomainError(f"inadmissible tuple {self.tuple.label()}")

    def label(self) -> str:
        return f"ktuple_{self.tuple.label()}"

    integer_weights = False


@dataclass(frozen=True)
class Rough:
    y: int

    def __post_init__(self):
        if self.y < 2:
            raise DomainError(f"roughness bound must be >= 2, got {self.y}")

    def label(self) -> str:
        return f"rough_{self.y}"

    integer_weights = True


SequenceKind = Union[PrimesLambda, QuadFormMult, SumTwoSquares, KTupleWeight, Rough]


@dataclass(frozen=True, eq=False)
class SievedWindow:
    """Sparse weights of one sequence over [lo, hi]; arrays are parallel."""

    kind_label: str
    lo: int
    hi: int
    support: np.ndarray  # int64, strictly increasing, within [lo, hi]
    weights: np.ndarray  # int64 or float64, positive

    def __post_init__(self):
        if self.lo > self.hi or self.lo < 1:
            raise DomainError(f"bad window [{self.lo}, {self.hi}]")
        if self.support.shape != self.weights.shape:
            raise DomainError("support/weights length mismatch")
        if len(self.support):
            if self.support[0] < self.lo or self.support[-1] > self.hi:
                raise DomainError("support outside window")
            if np.any(np.diff(self.support) <= 0):
                raise DomainError("support not strictly increasing")
            if np.any(self.weights <= 0):
                raise DomainError("nonpositive weight on support")


def _check_window(lo: int, hi: int):
    if not (1 <= lo <= hi):
        raise DomainError(f"bad window [{lo}, {hi}]")
    if hi > MAX_TABLE_LIMIT:
        raise ResourceError(f"hi={hi} beyond supported limit {MAX_TABLE_LIMIT}")
    if hi - lo + 1 > MAX_WINDOW:
        raise ResourceError(
            f"window width {hi - lo + 1} exceeds {MAX_WINDOW}; sieve in pieces"
        )


def _lambda_window(lo: int, hi: int) -> tuple[np.ndarray, np.ndarray]:
    """Support and log-prime weights of prime powers in [lo, hi]."""
    lo = max(lo, 2)
    if lo > hi:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64)
    spf = spf_window(lo, hi + 1)
    ns = np.arange(lo, hi + 1, dtype=np.int64)
    primes_mask = spf == ns
    sup = [ns[primes_mask]]
    wts = [np.log(sup[0].astype(np.float64))]
    extra_n, extra_w = [], []
    for p in iter_primes(math.isqrt(hi)):
        pe = p * p
        lp = math.log(p)
        while pe <= hi:
            if pe >= lo:
                extra_n.append(pe)
                extra_w.append(lp)
            pe *= p
    if extra_n:
        sup.append(np.array(extra_n, dtype=np.int64))
        wts.append(np.array(extra_w, dtype=np.float64))
    support = np.concatenate(sup)
    weights = np.concatenate(wts)
    order = np.argsort(support, kind="stable")
    return support[order], weights[order]


def _form_counts(form: BinaryQuadraticForm, lo: int, hi: int) -> np.ndarray:
    """Representation counts over x, y >= 0 for each n in [lo, hi]."""
    alpha, beta, gamma = form.alpha, form.beta, form.gamma
    counts = np.zeros(hi - lo + 1, dtype=np.int64)
    # smallest eigenvalue of the Gram matrix bounds Q below by
    # lam * (x^2 + y^2), giving a finite x range
    lam = ((alpha + gamma) - math.sqrt((alpha - gamma) ** 2 + beta * beta)) / 2
    xmax = math.isqrt(int(hi / lam)) + 1
    d = form.disc
    for x in range(xmax + 1):
        disc = d * x * x + 4 * gamma * hi
        if disc < 0:
            continue
        ymax = int((-beta * x + math.isqrt(disc)) // (2 * gamma))
        if ymax < 0:
            continue
        ys = np.arange(0, ymax + 1, dtype=np.int64)
        vals = alpha * x * x + beta * x * ys + gamma * ys * ys
        good = vals[(vals >= lo) & (vals <= hi)]
        np.add.at(counts, good - lo, 1)
    return counts


def _sieve_rough(y: int, lo: int, hi: int) -> np.ndarray:
    keep = np.ones(hi - lo + 1, dtype=bool)
    for p in iter_primes(min(y - 1, hi)):
        start = ((lo + p - 1) // p) * p
        keep[start - lo :: p] = False
    return keep


def sieve(kind: SequenceKind, lo: int, hi: int) -> SievedWindow:
    """Materialize the weights of one family over [lo, hi]."""
    _check_window(lo, hi)
    if isinstance(kind, PrimesLambda):
        support, weights = _lambda_window(lo, hi)
    elif isinstance(kind, QuadFormMult):
        counts = _form_counts(kind.form, lo, hi)
        idx = np.nonzero(counts)[0]
        support = idx + lo
        weights = counts[idx]
    elif isinstance(kind, SumTwoSquares):
        counts = _form_counts(BinaryQuadraticForm(1, 0, 1), lo, hi)
        idx = np.nonzero(counts)[0]
        support = idx + lo
        weights = np.ones(len(idx), dtype=np.int64)
    elif isinstance(kind, KTupleWeight):
        support, weights = _sieve_ktuple(kind.tuple, lo, hi)
    elif isinstance(kind, Rough):
        keep = _sieve_rough(kind.y, lo, hi)
        idx = np.nonzero(keep)[0]
        support = idx + lo
        weights = np.ones(len(idx), dtype=np.int64)
    else:
        raise UnsupportedError(f"unknown sequence kind {kind!r}")
    return SievedWindow(kind.label(), lo, hi, support, weights)


def _sieve_ktuple(H: KTuple, lo: int, hi: int) -> tuple[np.ndarray, np.ndarray]:
    common = None
    weights = None
    for a, b in H.forms:
        vlo, vhi = a * lo + b, a * hi + b
        if vhi < 2:
            return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64)
        if vhi > MAX_TABLE_LIMIT or vhi - max(vlo, 2) + 1 > MAX_WINDOW:
            raise ResourceError(
                f"form {a}n+{b} needs values up to {vhi}; shrink the window"
            )
        vsup, vwts = _lambda_window(max(vlo, 2), vhi)
        keep = (vsup - b) % a == 0
        ns = (vsup[keep] - b) // a
        inside = ns >= lo
        ns, ws = ns[inside], vwts[keep][inside]
        if common is None:
            common, weights = ns, ws
        else:
            common, ia, ib = np.intersect1d(common, ns, assume_unique=True, return_indices=True)
            weights = weights[ia] * ws[ib]
        if len(common) == 0:
            break
    return common.astype(np.int64), weights


def weight_at(kind: SequenceKind, n: int) -> float | int:
    """Exact single weight a(n); zero for n <= 0 by convention."""
    if n <= 0:
        return 0.0 if not kind.integer_weights else 0
    if isinstance(kind, PrimesLambda):
        fac = as_factored(n).factors
        return math.log(fac[0][0]) if len(fac) == 1 else 0.0
    if isinstance(kind, QuadFormMult):
        w = sieve(kind, n, n).weights
        return int(w[0]) if len(w) else 0
    if isinstance(kind, SumTwoSquares):
        return 1 if all(p % 4 != 3 or e % 2 == 0 for p, e in as_factored(n).factors) else 0
    if isinstance(kind, KTupleWeight):
        out = 1.0
        for a, b in kind.tuple.forms:
            out *= weight_at(PrimesLambda(), a * n + b)
            if out == 0.0:
                return 0.0
        return out
    if isinstance(kind, Rough):
        return 1 if all(p >= kind.y for p, _ in as_factored(n).factors) else 0
    raise UnsupportedError(f"unknown sequence kind {kind!r}")


def _reduce(values) -> float | int:
    if values.dtype == np.int64:
        return int(values.sum())
    return math.fsum(values)


def count_A(window: SievedWindow) -> float | int:
    return _reduce(window.weights)


def count_A_upto(window: SievedWindow, t) -> float | int:
    """Sum of weights over n <= t within the window."""
    idx = np.searchsorted(window.support, math.floor(t), side="right")
    return _reduce(window.weights[:idx])


def count_Ad(window: SievedWindow, d: int) -> float | int:
    if d < 1:
        raise DomainError(f"d must be >= 1, got {d}")
    return _reduce(window.weights[window.support % d == 0])


def count_Aqa(window: SievedWindow, q: int, a: int) -> float | int:
    if q < 1:
        raise DomainError(f"q must be >= 1, got {q}")
    return _reduce(window.weights[window.support % q == a % q])


def count_Astar(window: SievedWindow, q: int, a: int) -> float | int:
    """Like count_Aqa but with n <= |a| excluded."""
    if q < 1:
        raise DomainError(f"q must be >= 1, got {q}")
    mask = (window.support % q == a % q) & (window.support > abs(a))
    return _reduce(window.weights[mask])


def dense_weights(window: SievedWindow, size: int | None = None) -> np.ndarray:
    """Dense array w with w[n] = weight(n), for strided slice sums."""
    size = window.hi if size is None else size
    out = np.zeros(size + 1, dtype=window.weights.dtype)
    keep = window.support <= size
    out[window.support[keep]] = window.weights[keep]
    return out


def _rough_h_over_d(y: int, d: int) -> Fraction:
    return Fraction(1, d) if all(p >= y for p, _ in as_factored(d).factors) else Fraction(0)


def _two_squares_h_over_d(d: int) -> Fraction:
    out = Fraction(1, d)
    for p, e in as_factored(d).factors:
        if p % 4 == 3 and e % 2 == 1:
            out *= Fraction(1, p)
    return out


def check_Ad_identity(
    kind: SequenceKind, x: int, d: int, window: SievedWindow | None = None
) -> tuple[bool, int, int]:
    """Exact identity: the count of multiples of d equals the plain count at
    a rescaled cutoff h(d)/d * x.  Integer families only.

    Pass a precomputed window covering [1, x] to amortize the sieve over
    many d values."""
    if d < 1:
        raise DomainError(f"d must be >= 1, got {d}")
    if isinstance(kind, SumTwoSquares):
        scale = _two_squares_h_over_d(d)
    elif isinstance(kind, Rough):
        scale = _rough_h_over_d(kind.y, d)
    else:
        raise UnsupportedError(f"identity only for indicator families, not {kind.label()}")
    if window is None:
        window = sieve(kind, 1, x)
    elif window.kind_label != kind.label() or window.lo != 1 or window.hi != x:
        raise ConfigurationError("window must cover exactly [1, x] for this family")
    lhs = count_Ad(window, d)
    rhs = count_A_upto(window, scale * x) if scale else 0
    return lhs == rhs, lhs, rhs


def save_window(window: SievedWindow, path: str):
    """Little-endian binary cache: header + sorted 64-bit records."""
    label = window.kind_label.encode("utf-8")
    float_weights = window.weights.dtype != np.int64
    header = struct.pack(
        "<4sII", _CACHE_MAGIC, _CACHE_VERSION, len(label)
    ) + label + struct.pack("<qqQB", window.lo, window.hi, len(window.support), int(float_weights))
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(window.support.astype("<i8").tobytes())
        if float_weights:
            fh.write(window.weights.astype("<f8").tobytes())
        else:
            fh.write(window.weights.astype("<i8").tobytes())


def load_window(path: str) -> SievedWindow:
    with open(path, "rb") as fh:
        magic, version, label_len = struct.unpack("<4sII", fh.read(12))
        if magic != _CACHE_MAGIC:
            raise DomainError(f"{path}: not a sieve cache")
        if version != _CACHE_VERSION:
            raise UnsupportedError(f"{path}: cache version {version}")
        label = fh.read(label_len).decode("utf-8")
        lo, hi, count, float_weights = struct.unpack("<qqQB", fh.read(25))
        support = np.frombuffer(fh.read(8 * count), dtype="<i8").astype(np.int64)
        dtype = "<f8" if float_weights else "<i8"
        weights = np.frombuffer(fh.read(8 * count), dtype=dtype)
        weights = weights.astype(np.float64 if float_weights else np.int64)
    return SievedWindow(label, lo, hi, support, weights)