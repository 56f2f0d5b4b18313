import itertools
import math

import numpy as np
import pytest

from latdist.codec import (
    LatticePoint,
    LexIndex,
    PositionSet,
    composition_count,
    composition_count_bits,
    log2_comb,
    rank_composition,
    rank_subset,
    subset_count_bits,
    unrank_composition,
    unrank_subset,
)
from latdist.errors import IndexOutOfRange, InvalidSubset, SumMismatch


def enumerate_compositions(k, total):
    """Independent oracle: all count sequences in ascending lex order."""
    return [
        c for c in itertools.product(range(total + 1), repeat=k) if sum(c) == total
    ]


def enumerate_subsets_colex(k, size):
    """Independent oracle: subsets ordered by the combinatorial number system."""
    return sorted(itertools.combinations(range(k), size), key=lambda s: tuple(reversed(s)))


class TestLatticePoint:
    def test_sum_mismatch(self):
        with pytest.raises(SumMismatch):
            LatticePoint((1, 2), 4)

    def test_negative_count(self):
        with pytest.raises(SumMismatch):
            LatticePoint((-1, 5), 4)

    def test_valid(self):
        pt = LatticePoint((1, 3, 1), 5)
        assert pt.k == 3


class TestPositionSet:
    def test_must_increase(self):
        with pytest.raises(InvalidSubset):
            PositionSet((2, 1), 5)
        with pytest.raises(InvalidSubset):
            PositionSet((1, 1), 5)

    def test_must_fit_dimension(self):
        with pytest.raises(InvalidSubset):
            PositionSet((0, 5), 5)


class TestCompositionRanking:
    def test_k2_l2_enumeration(self):
        assert rank_composition(LatticePoint((0, 2), 2)).value == 0
        assert rank_composition(LatticePoint((1, 1), 2)).value == 1
        assert rank_composition(LatticePoint((2, 0), 2)).value == 2

    def test_k3_l1_unit_vectors(self):
        points = [LatticePoint(c, 1) for c in ((0, 0, 1), (0, 1, 0), (1, 0, 0))]
        ranks = [rank_composition(pt).value for pt in points]
        assert ranks == [0, 1, 2]
        for r, pt in zip(ranks, points):
            assert unrank_composition(r, 3, 1) == pt

    def test_k3_l5_against_enumeration(self):
        oracle = enumerate_compositions(3, 5)
        assert len(oracle) == 21 == composition_count(3, 5)
        idx = rank_composition(LatticePoint((1, 3, 1), 5))
        assert oracle[idx.value] == (1, 3, 1)
        assert 0 <= idx.value < 21
        assert unrank_composition(idx, 3, 5).counts == (1, 3, 1)

    def test_exhaustive_roundtrip_k4_l6(self):
        oracle = enumerate_compositions(4, 6)
        assert len(oracle) == 84
        for expected_rank, counts in enumerate(oracle):
            pt = LatticePoint(counts, 6)
            idx = rank_composition(pt)
            assert idx.value == expected_rank
            assert unrank_composition(idx, 4, 6) == pt

    def test_index_out_of_range(self):
        with pytest.raises(IndexOutOfRange):
            unrank_composition(composition_count(2, 2), 2, 2)
        with pytest.raises(IndexOutOfRange):
            unrank_composition(-1, 2, 2)

    def test_large_space_spot_roundtrip(self):
        rng = np.random.default_rng(11)
        k, total = 40, 100
        cardinality = composition_count(k, total)
        for _ in range(25):
            value = int(rng.integers(0, 1 << 62)) % cardinality
            pt = unrank_composition(value, k, total)
            assert sum(pt.counts) == total
            assert rank_composition(pt).value == value


class TestSubsetRanking:
    def test_k3_pairs(self):
        expected = {(0, 1): 0, (0, 2): 1, (1, 2): 2}
        for subset, rank in expected.items():
            assert rank_subset(PositionSet(subset, 3)).value == rank

    def test_exhaustive_k5_size2(self):
        oracle = enumerate_subsets_colex(5, 2)
        assert len(oracle) == 10
        for expected_rank, subset in enumerate(oracle):
            idx = rank_subset(PositionSet(subset, 5))
            assert idx.value == expected_rank
            assert unrank_subset(idx, 5, 2).indices == subset

    def test_index_out_of_range(self):
        with pytest.raises(IndexOutOfRange):
            unrank_subset(10, 5, 2)

    def test_large_space_spot_roundtrip(self):
        rng = np.random.default_rng(12)
        k, size = 200, 12
        cardinality = math.comb(k, size)
        for _ in range(25):
            value = int(rng.integers(0, 1 << 62)) % cardinality
            s = unrank_subset(value, k, size)
            assert rank_subset(s).value == value


class TestBitWidths:
    def test_small_composition_space(self):
        assert composition_count_bits(3, 5) == 5  # 21 points

    def test_single_part_needs_no_bits(self):
        for total in (1, 7, 1000):
            assert composition_count_bits(1, total) == 0

    def test_power_of_two_boundary(self):
        # 8 compositions of 7 into 2 parts: exactly 3 bits, not 4.
        assert composition_count(2, 7) == 8
        assert composition_count_bits(2, 7) == 3
        assert subset_count_bits(8, 1) == 3

    def test_matches_exact_big_integer_log(self):
        rng = np.random.default_rng(13)
        for _ in range(200):
            k = int(rng.integers(1, 40))
            total = int(rng.integers(1, 400))
            exact = (composition_count(k, total) - 1).bit_length()
            assert composition_count_bits(k, total) == exact
        for _ in range(200):
            k = int(rng.integers(1, 300))
            size = int(rng.integers(0, k + 1))
            exact = (math.comb(k, size) - 1).bit_length()
            assert subset_count_bits(k, size) == exact

    def test_huge_space_matches_exact(self):
        k, total = 1000, 10**6
        exact = (composition_count(k, total) - 1).bit_length()
        assert composition_count_bits(k, total) == exact

    def test_log2_comb_accuracy(self):
        assert log2_comb(299, 49) == pytest.approx(
            math.log2(math.comb(299, 49)), rel=1e-12
        )


class TestLexIndexSerialization:
    def test_big_endian_layout(self):
        assert LexIndex(0x0102, 16).to_bytes() == b"\x01\x02"
        assert LexIndex(5, 12).to_bytes() == b"\x00\x05"

    def test_zero_width(self):
        assert LexIndex(0, 0).to_bytes() == b""
        assert LexIndex.from_bytes(b"", 0).value == 0

    def test_roundtrip_random(self):
        rng = np.random.default_rng(14)
        for _ in range(200):
            width = int(rng.integers(1, 200))
            value = int(rng.integers(0, 1 << 62)) % (1 << width)
            idx = LexIndex(value, width)
            assert LexIndex.from_bytes(idx.to_bytes(), width) == idx

    def test_value_must_fit_width(self):
        with pytest.raises(IndexOutOfRange):
            LexIndex(4, 2)

    def test_wrong_byte_count_rejected(self):
        with pytest.raises(IndexOutOfRange):
            LexIndex.from_bytes(b"\x01", 16)


class TestEnumerationHelper:
    def test_matches_independent_enumeration(self):
        from latdist.codec import iter_compositions

        for k in range(1, 5):
            for total in range(1, 7):
                assert list(iter_compositions(k, total)) == enumerate_compositions(
                    k, total
                )


class TestExhaustiveBijection:
    """Rank and unrank invert each other on every space small enough to enumerate."""

    def test_compositions(self):
        for k in range(1, 6):
            for total in range(1, 9):
                if composition_count(k, total) > 3000:
                    continue
                oracle = enumerate_compositions(k, total)
                for expected_rank, counts in enumerate(oracle):
                    idx = rank_composition(LatticePoint(counts, total))
                    assert idx.value == expected_rank
                    assert unrank_composition(idx, k, total).counts == counts

    def test_subsets(self):
        for k in range(1, 13):
            for size in range(0, k + 1):
                oracle = enumerate_subsets_colex(k, size)
                for expected_rank, subset in enumerate(oracle):
                    idx = rank_subset(PositionSet(subset, k))
                    assert idx.value == expected_rank
                    assert unrank_subset(idx, k, size).indices == subset
