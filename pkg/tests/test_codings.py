from fractions import Fraction

import pytest

from gencomp.codings import (
    AsymmetricJoin,
    IntervalCoding,
    ValuationCoding,
    asymmetric_join_bit,
    decode_interval,
    decode_valuation,
    encode_interval,
    encode_valuation,
    floor_log2_below,
    two_adic_valuation,
)
from gencomp.errors import CorruptDescriptionError, ExcludedIndexError
from gencomp.reals import GenericDescription, SeededReal, all_zeros


def test_valuation_arithmetic():
    assert two_adic_valuation(12) == 2
    assert two_adic_valuation(5) == 0
    assert two_adic_valuation(8) == 3
    with pytest.raises(ExcludedIndexError):
        two_adic_valuation(0)


def test_encode_valuation_examples():
    x = SeededReal(5)
    assert encode_valuation(x, 12) == x.bit(2)
    assert encode_valuation(x, 5) == x.bit(0)
    assert encode_valuation(x, 8) == x.bit(3)
    with pytest.raises(ExcludedIndexError):
        encode_valuation(x, 0)


def test_encode_interval_strict_offset():
    x = SeededReal(5)
    assert floor_log2_below(12) == 3
    assert encode_interval(x, 12) == x.bit(3)
    # strictly below: n = 2^m reads source bit m-1
    assert encode_interval(x, 8) == x.bit(2)
    assert encode_interval(x, 2) == x.bit(0)
    for n in (0, 1):
        with pytest.raises(ExcludedIndexError):
            encode_interval(x, n)


def test_asymmetric_join_examples():
    a, b = SeededReal(1), SeededReal(2)
    assert asymmetric_join_bit(a, b, 16) == b.bit(4)
    assert asymmetric_join_bit(a, b, 12) == a.bit(2)
    assert asymmetric_join_bit(a, b, 3) == a.bit(0)
    with pytest.raises(ExcludedIndexError):
        asymmetric_join_bit(a, b, 0)
    j = AsymmetricJoin(a, b)
    assert j.bit(16) == b.bit(4) and j.bit(12) == a.bit(2)


def test_decode_valuation_single_witness():
    d = GenericDescription.from_pairs([(2, 1)])
    assert decode_valuation(d, 1, 16) == 1
    assert decode_valuation(GenericDescription.from_pairs([]), 1, 16) is None


def test_decode_valuation_domain_missing_multiples_of_three():
    x = SeededReal(9)
    coded = ValuationCoding(x)
    d = GenericDescription.from_domain(lambda n: n % 3 != 0, coded, start=1)
    # witnesses for m=1 below 16 are {2, 6, 10, 14}; 6 is unassigned but the
    # rest agree on the source bit
    assert decode_valuation(d, 1, 16) == x.bit(1)


def test_decode_valuation_corruption_detected():
    d = GenericDescription.from_pairs([(2, 1), (6, 0)])
    with pytest.raises(CorruptDescriptionError):
        decode_valuation(d, 1, 16)


def test_valuation_roundtrip_seeded():
    for seed in range(25):
        x = SeededReal(seed)
        d = GenericDescription.full(ValuationCoding(x), start=1)
        for m in range(13):
            assert decode_valuation(d, m, 1 << 13) == x.bit(m)


def test_decode_interval_examples():
    x = SeededReal(3)
    d = GenericDescription.from_pairs([(12, x.bit(3))])
    assert decode_interval(d, 3, 16) == x.bit(3)
    # witness interval (2, 4] entirely unassigned
    d2 = GenericDescription.from_pairs([(8, 1)])
    assert decode_interval(d2, 1, 16) is None
    with pytest.raises(CorruptDescriptionError):
        decode_interval(GenericDescription.from_pairs([(9, 1), (10, 0)]), 3, 16)


def test_decode_interval_half_assigned_blocks():
    x = SeededReal(4)
    coded = IntervalCoding(x)
    # assign only the first half of each witness interval (2^m, 2^(m+1)]
    def first_half(n):
        m = floor_log2_below(n)
        return n <= (1 << m) + (1 << max(m - 1, 0))

    d = GenericDescription.from_domain(first_half, coded, start=2)
    for m in range(11):
        assert decode_interval(d, m, 1 << 12) == x.bit(m)


def test_interval_finite_loss_cofinite_domain():
    x = SeededReal(21)
    coded = IntervalCoding(x)
    omitted = {3, 4, 9, 1000}
    d = GenericDescription.from_domain(lambda n: n not in omitted, coded, start=2)
    for m in range(12):
        witnesses = set(range((1 << m) + 1, (1 << (m + 1)) + 1))
        got = decode_interval(d, m, 1 << 13)
        if witnesses <= omitted:
            assert got is None
        else:
            assert got == x.bit(m)
    # m=1 loses its whole witness interval {3, 4}
    assert decode_interval(d, 1, 1 << 13) is None


def test_robust_decoding_under_gap_deleted_domains():
    x = SeededReal(33)
    coded = ValuationCoding(x)
    bound = 1 << 12
    for m in range(9):
        e = m + 2
        gaps = set()
        for i in range(e, 12):
            hi = 1 << (i + 1)
            gaps |= set(range(hi - (1 << (i - e)), hi))
        d = GenericDescription.from_domain(lambda n: n not in gaps, coded, start=1)
        assert decode_valuation(d, m, bound) == x.bit(m)


def test_witness_class_density_exact():
    # indices whose valuation is m have density exactly 2^-(m+1) at every
    # power-of-two horizon
    for m in range(8):
        for k in range(m + 1, 14):
            count = sum(1 for n in range(1, 1 << k) if two_adic_valuation(n) == m)
            assert Fraction(count, 1 << k) == Fraction(1, 1 << (m + 1))


def test_powers_of_two_are_sparse():
    for k in range(1, 16):
        n = 1 << k
        powers = sum(1 for v in range(1, n) if v & (v - 1) == 0)
        assert Fraction(powers, n) <= Fraction(k + 1, n)


def test_coded_real_source_queries():
    # coded reals compose: a description of a coding of the all-zeros real
    d = GenericDescription.full(ValuationCoding(all_zeros()), start=1)
    assert decode_valuation(d, 4, 64) == 0
