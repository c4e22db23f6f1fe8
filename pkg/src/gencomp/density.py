"""Exact density and gap combinatorics over the dyadic blocks.

Block i is the interval [2^i, 2^(i+1)); the blocks partition the positive
naturals.  A gap of size 2^-e at block i means the last 2^(i-e) elements
of the block are absent.  Everything here is exact rational arithmetic;
no floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from .errors import InsufficientDataError, MalformedGapError, UndefinedInputError


@dataclass(frozen=True)
class Block:
    """The dyadic interval [lo, hi) = [2^i, 2^(i+1))."""

    i: int
    lo: int
    hi: int

    def __contains__(self, n: int) -> bool:
        return self.lo <= n < self.hi

    @property
    def size(self) -> int:
        return self.hi - self.lo


def block_of(i: int) -> Block:
    if i < 0:
        raise UndefinedInputError("block index must be >= 0")
    return Block(i, 1 << i, 1 << (i + 1))


def block_index(n: int) -> int:
    """The i with n in [2^i, 2^(i+1)); requires n >= 1."""
    if n < 1:
        raise UndefinedInputError("blocks cover n >= 1 only")
    return n.bit_length() - 1


def gap_interval(i: int, e: int) -> tuple:
    """Half-open interval [lo, hi) of the size-2^-e gap at block i."""
    if e < 0 or e > i:
        raise MalformedGapError("gap exponent %d invalid for block %d" % (e, i))
    hi = 1 << (i + 1)
    return (hi - (1 << (i - e)), hi)


def count_below(member: Callable[[int], bool], n: int) -> int:
    return sum(1 for k in range(n) if member(k))


def prefix_density(member: Callable[[int], bool], n: int) -> Fraction:
    """Exact |X restricted to n| / n.  Undefined at n = 0."""
    if n < 1:
        raise UndefinedInputError("prefix density undefined at n=0")
    return Fraction(count_below(member, n), n)


@dataclass(frozen=True)
class GapCensus:
    """Largest gap per block (as the smallest exponent e), or None.

    records[i] is the smallest e such that a gap of size 2^-e is present at
    block i (nested smaller gaps are derivable, not stored).  `omitted`
    retains the underlying omission set below the census horizon 2^i_max,
    and gap_only records whether every block's omissions form a pure
    suffix of the block.
    """

    i_max: int
    records: tuple  # ((i, e-or-None), ...) for i < i_max
    omitted: frozenset
    gap_only: bool

    @property
    def horizon(self) -> int:
        return 1 << self.i_max

    def record(self, i: int) -> Optional[int]:
        return dict(self.records)[i]

    def member(self, n: int) -> bool:
        if not 0 <= n < self.horizon:
            raise InsufficientDataError("census covers [0, %d) only" % self.horizon)
        return n not in self.omitted

    def gaps(self) -> list:
        """The recorded (i, e) pairs, skipping gapless blocks."""
        return [(i, e) for i, e in self.records if e is not None]

    def to_jsonable(self) -> dict:
        return {
            "i_max": self.i_max,
            "records": [[i, e] for i, e in self.records],
            "omitted": sorted(self.omitted),
            "gap_only": self.gap_only,
        }


def gap_census(member: Callable[[int], bool], i_max: int) -> GapCensus:
    """Census the maximal suffix gap of each block i < i_max.

    Membership must be decidable below 2^i_max.  The block's trailing run
    of absent elements has length L; the largest gap present is the one
    with the smallest e satisfying 2^(i-e) <= L.
    """
    if i_max < 0:
        raise UndefinedInputError("i_max must be >= 0")
    records = []
    omitted = set()
    gap_only = member(0)  # 0 lies in no block, so a gap-only set keeps it
    for i in range(i_max):
        blk = block_of(i)
        absent = [n for n in range(blk.lo, blk.hi) if not member(n)]
        omitted.update(absent)
        run = 0
        n = blk.hi - 1
        while n >= blk.lo and not member(n):
            run += 1
            n -= 1
        if len(absent) != run or (run and run & (run - 1)):
            gap_only = False  # interior holes or a non-power-of-2 suffix
        if run == 0:
            records.append((i, None))
        else:
            e = i - (run.bit_length() - 1)
            records.append((i, e))
    return GapCensus(i_max, tuple(records), frozenset(omitted), gap_only)


def gap_density_upper(i: int, e: int) -> Fraction:
    """The exact bound 1 - 2^-(e+1) on the prefix density at 2^(i+1)
    forced by a size-2^-e gap at block i."""
    if e < 0 or e > i:
        raise MalformedGapError("gap exponent %d invalid for block %d" % (e, i))
    return 1 - Fraction(1, 1 << (e + 1))


def density_threshold(census: GapCensus, e: int, n_max: int) -> Optional[int]:
    """Least n0 <= n_max with prefix density >= 1 - 2^(-e+1) on all of
    [n0, n_max], found by exact scan; None if n_max itself fails.

    Requires a census whose omissions are pure block-suffix gaps and whose
    horizon covers n_max.
    """
    if n_max < 1:
        raise UndefinedInputError("n_max must be >= 1")
    if n_max > census.horizon:
        raise InsufficientDataError(
            "census horizon %d < n_max %d" % (census.horizon, n_max)
        )
    if not census.gap_only:
        raise UndefinedInputError("census omissions are not block-suffix gaps")
    bound = 1 - Fraction(2, 1 << e)
    count = 0
    last_fail = 0
    for n in range(1, n_max + 1):
        if (n - 1) not in census.omitted:
            count += 1
        if Fraction(count, n) < bound:
            last_fail = n
    if last_fail == n_max:
        return None
    return last_fail + 1


@dataclass(frozen=True)
class DensityProfile:
    """Exact prefix densities at selected points n <= horizon."""

    horizon: int
    values: tuple  # ((n, Fraction), ...) sorted by n

    def value(self, n: int) -> Fraction:
        return dict(self.values)[n]

    def to_jsonable(self) -> dict:
        return {
            "horizon": self.horizon,
            "values": [
                [n, {"num": fr.numerator, "den": fr.denominator}] for n, fr in self.values
            ],
        }


def density_profile(member: Callable[[int], bool], points) -> DensityProfile:
    points = sorted(set(points))
    if not points:
        raise UndefinedInputError("at least one sample point required")
    if points[0] < 1:
        raise UndefinedInputError("profiles start at n=1")
    horizon = points[-1]
    values = []
    count = 0
    next_idx = 0
    for n in range(1, horizon + 1):
        if member(n - 1):
            count += 1
        if next_idx < len(points) and points[next_idx] == n:
            values.append((n, Fraction(count, n)))
            next_idx += 1
    return DensityProfile(horizon, tuple(values))
