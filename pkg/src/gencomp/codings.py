"""Bit codings recoverable from dense partial descriptions.

Two codings of a real X into a larger real, plus the asymmetric join:

* valuation coding: bit n (n >= 1) copies X at the 2-adic valuation of n,
  so each source bit lands on a positive-density set of indices and any
  dense description recovers every source bit.
* interval coding: bit n (n >= 2) copies X at m where 2^m is the largest
  power of two strictly below n, so source bit m lands on the finite
  interval (2^m, 2^(m+1)] and a dense description recovers all but
  finitely many source bits.
* asymmetric join of A and B: B on the powers of two, the valuation
  coding of A everywhere else.

Decoders take an explicit search bound; "not found" is a value (None),
not an error, so callers can enlarge bounds.  Witness disagreement is
reported as corruption rather than assumed away.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import CorruptDescriptionError, ExcludedIndexError
from .reals import GenericDescription, RealSpec


def two_adic_valuation(n: int) -> int:
    """The m with 2^m the largest power of two dividing n; n >= 1."""
    if n < 1:
        raise ExcludedIndexError("valuation undefined at %d" % n)
    return (n & -n).bit_length() - 1


def floor_log2_below(n: int) -> int:
    """The m with 2^m the largest power of two strictly less than n; n >= 2."""
    if n < 2:
        raise ExcludedIndexError("no power of two below %d" % n)
    return (n - 1).bit_length() - 1


def encode_valuation(x: RealSpec, n: int) -> int:
    """Bit n of the valuation coding of X: X.bit(v2(n)); n >= 1."""
    return x.bit(two_adic_valuation(n))


def encode_interval(x: RealSpec, n: int) -> int:
    """Bit n of the interval coding of X: X.bit(m), 2^m the largest power
    of two strictly below n; n >= 2.  Note the strict inequality: n = 2^m
    maps to source bit m-1."""
    return x.bit(floor_log2_below(n))


def asymmetric_join_bit(a: RealSpec, b: RealSpec, n: int) -> int:
    """Bit n of the asymmetric join: B.bit(k) when n = 2^k, valuation
    coding of A off the powers of two; n >= 1."""
    if n < 1:
        raise ExcludedIndexError("asymmetric join starts at n=1")
    if n & (n - 1) == 0:
        return b.bit(n.bit_length() - 1)
    return encode_valuation(a, n)


@dataclass(frozen=True)
class ValuationCoding(RealSpec):
    source: RealSpec

    def bit(self, n: int) -> int:
        return encode_valuation(self.source, n)


@dataclass(frozen=True)
class IntervalCoding(RealSpec):
    source: RealSpec

    def bit(self, n: int) -> int:
        return encode_interval(self.source, n)


@dataclass(frozen=True)
class AsymmetricJoin(RealSpec):
    main: RealSpec   # coded densely, off the powers of two
    coded: RealSpec  # coded sparsely, on the powers of two

    def bit(self, n: int) -> int:
        return asymmetric_join_bit(self.main, self.coded, n)


def _decode(d: GenericDescription, witnesses) -> Optional[int]:
    found = None
    for n in witnesses:
        x = d.lookup(n)
        if x is None:
            continue
        if found is None:
            found = x
        elif found != x:
            raise CorruptDescriptionError(
                "witnesses disagree at index %d" % n
            )
    return found


def decode_valuation(d: GenericDescription, m: int, bound: int) -> Optional[int]:
    """Recover source bit m from a description of a valuation coding by
    scanning the assigned witnesses n <= bound with v2(n) = m.

    All assigned witnesses are read and must agree; disagreement raises
    CorruptDescriptionError.  Returns None when no witness is assigned.
    """
    if m < 0:
        raise ExcludedIndexError("bit index must be >= 0")
    step = 1 << (m + 1)
    return _decode(d, range(1 << m, bound + 1, step))


def decode_interval(d: GenericDescription, m: int, bound: int) -> Optional[int]:
    """Recover source bit m from a description of an interval coding by
    scanning the assigned witnesses in (2^m, 2^(m+1)] up to bound."""
    if m < 0:
        raise ExcludedIndexError("bit index must be >= 0")
    lo = (1 << m) + 1
    hi = min(1 << (m + 1), bound)
    return _decode(d, range(lo, hi + 1))
