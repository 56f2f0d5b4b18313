"""Exact bijective ranking between combinatorial objects and integer indices.

Two codecs live here:

* compositions of ``total`` into ``k`` nonnegative parts (the points of the
  fixed-denominator lattice on the simplex), ranked in ascending
  lexicographic order on the count sequence, first count most significant;
* k_top-subsets of ``{0..k-1}``, ranked by the standard combinatorial
  number system (colexicographic on the ascending position sequence).

Both orders are codec conventions pinned for determinism; any fixed total
order would be a valid codec. Indices are arbitrary-precision integers and
serialize as big-endian byte strings sized by their declared bit width.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

from .errors import IndexOutOfRange, InvalidSubset, SumMismatch

# Fractional distance from an integer below which the log-gamma bit count
# falls back to exact big-integer arithmetic.
_BOUNDARY_GUARD = 1e-9


@dataclass(frozen=True)
class LatticePoint:
    """Integer counts summing to ``denominator``; implies probabilities counts/denominator."""

    counts: tuple[int, ...]
    denominator: int

    def __post_init__(self):
        if self.denominator < 1:
            raise SumMismatch(f"denominator must be >= 1, got {self.denominator}")
        if len(self.counts) < 1:
            raise SumMismatch("need at least one count")
        if any(c < 0 or c != int(c) for c in self.counts):
            raise SumMismatch(f"counts must be nonnegative integers: {self.counts}")
        if sum(self.counts) != self.denominator:
            raise SumMismatch(
                f"counts sum to {sum(self.counts)}, expected {self.denominator}"
            )

    @property
    def k(self) -> int:
        return len(self.counts)


@dataclass(frozen=True)
class PositionSet:
    """Strictly increasing positions of retained entries within dimension ``dimension``."""

    indices: tuple[int, ...]
    dimension: int

    def __post_init__(self):
        idx = self.indices
        if any(i != int(i) for i in idx):
            raise InvalidSubset(f"indices must be integers: {idx}")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise InvalidSubset(f"indices must be strictly increasing: {idx}")
        if idx and (idx[0] < 0 or idx[-1] >= self.dimension):
            raise InvalidSubset(f"indices {idx} outside [0, {self.dimension})")

    @property
    def size(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class LexIndex:
    """An index into a finite ordered set, with the bit width needed to send it."""

    value: int
    bit_width: int

    def __post_init__(self):
        if self.value < 0:
            raise IndexOutOfRange(f"index cannot be negative: {self.value}")
        if self.value.bit_length() > self.bit_width:
            raise IndexOutOfRange(
                f"value {self.value} does not fit in {self.bit_width} bits"
            )

    def to_bytes(self) -> bytes:
        """Big-endian bytes, sized by the bit width. No header; framing is the caller's job."""
        return self.value.to_bytes((self.bit_width + 7) // 8, "big")

    @classmethod
    def from_bytes(cls, data: bytes, bit_width: int) -> "LexIndex":
        expected = (bit_width + 7) // 8
        if len(data) != expected:
            raise IndexOutOfRange(
                f"expected {expected} bytes for {bit_width} bits, got {len(data)}"
            )
        return cls(int.from_bytes(data, "big"), bit_width)


def composition_count(k: int, total: int) -> int:
    """Number of compositions of ``total`` into ``k`` nonnegative parts."""
    return math.comb(total + k - 1, k - 1)


def _ceil_log2(value: int) -> int:
    """Exact ceil(log2(value)) for a positive integer."""
    return (value - 1).bit_length()


def _ceil_log2_comb(n: int, r: int) -> int:
    """ceil(log2(C(n, r))) via log-gamma, resolved exactly near integer boundaries.

    The log-gamma estimate avoids building the big integer; its error is a
    few ulps, so only results within the guard band of an integer need the
    exact computation.
    """
    if r < 0 or r > n:
        raise ValueError(f"C({n}, {r}) undefined")
    if r == 0 or r == n:
        return 0
    lg = log2_comb(n, r)
    nearest = round(lg)
    if abs(lg - nearest) <= _BOUNDARY_GUARD * max(1.0, abs(lg)):
        return _ceil_log2(math.comb(n, r))
    return math.ceil(lg)


def log2_comb(n: int, r: int) -> float:
    """Real-valued log2(C(n, r)) from log-gamma, without big integers."""
    if r < 0 or r > n:
        raise ValueError(f"C({n}, {r}) undefined")
    return (math.lgamma(n + 1) - math.lgamma(r + 1) - math.lgamma(n - r + 1)) / math.log(2)


def composition_count_bits(k: int, total: int) -> int:
    """Bits needed for a fixed-length index over compositions of ``total`` into ``k`` parts."""
    if k < 1 or total < 1:
        raise ValueError(f"need k >= 1 and total >= 1, got k={k}, total={total}")
    return _ceil_log2_comb(total + k - 1, k - 1)


def subset_count_bits(k: int, size: int) -> int:
    """Bits needed for a fixed-length index over ``size``-subsets of ``{0..k-1}``."""
    if size < 0 or size > k:
        raise ValueError(f"need 0 <= size <= k, got size={size}, k={k}")
    return _ceil_log2_comb(k, size)


def rank_composition(pt: LatticePoint) -> LexIndex:
    """Rank of ``pt`` among all compositions of its denominator, ascending lex order."""
    k = pt.k
    remaining = pt.denominator
    rank = 0
    for i, b in enumerate(pt.counts[:-1]):
        parts_left = k - i - 1
        # Compositions with a smaller count at this position, by hockey-stick:
        # sum_{v<b} C(remaining-v+parts_left-1, parts_left-1)
        rank += math.comb(remaining + parts_left, parts_left) - math.comb(
            remaining - b + parts_left, parts_left
        )
        remaining -= b
    return LexIndex(rank, composition_count_bits(k, pt.denominator))


def unrank_composition(idx: LexIndex | int, k: int, total: int) -> LatticePoint:
    """Inverse of rank_composition: the unique composition with the given rank."""
    value = idx.value if isinstance(idx, LexIndex) else int(idx)
    cardinality = composition_count(k, total)
    if value < 0 or value >= cardinality:
        raise IndexOutOfRange(f"index {value} outside [0, {cardinality})")
    counts = []
    remaining = total
    for i in range(k - 1):
        parts_left = k - i - 1
        top = math.comb(remaining + parts_left, parts_left)

        def preceding(v: int) -> int:
            return top - math.comb(remaining - v + parts_left, parts_left)

        # Largest count whose predecessor block is still <= value.
        lo, hi = 0, remaining
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if preceding(mid) <= value:
                lo = mid
            else:
                hi = mid - 1
        counts.append(lo)
        value -= preceding(lo)
        remaining -= lo
    counts.append(remaining)
    return LatticePoint(tuple(counts), total)


def rank_subset(s: PositionSet) -> LexIndex:
    """Combinatorial-number-system rank of a subset given ascending positions."""
    value = sum(math.comb(c, j + 1) for j, c in enumerate(s.indices))
    return LexIndex(value, subset_count_bits(s.dimension, s.size))


def unrank_subset(idx: LexIndex | int, k: int, size: int) -> PositionSet:
    """Inverse of rank_subset over ``size``-subsets of ``{0..k-1}``."""
    value = idx.value if isinstance(idx, LexIndex) else int(idx)
    cardinality = math.comb(k, size)
    if value < 0 or value >= cardinality:
        raise IndexOutOfRange(f"index {value} outside [0, {cardinality})")
    positions = [0] * size
    n = k
    remaining = value
    for j in range(size, 0, -1):
        # Largest position whose binomial does not exceed the remainder.
        lo, hi = j - 1, n - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if math.comb(mid, j) <= remaining:
                lo = mid
            else:
                hi = mid - 1
        positions[j - 1] = lo
        remaining -= math.comb(lo, j)
        n = lo
    return PositionSet(tuple(positions), k)


def iter_compositions(k: int, total: int) -> Iterator[tuple[int, ...]]:
    """All compositions of ``total`` into ``k`` parts in ascending lex order."""
    if k == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in iter_compositions(k - 1, total - first):
            yield (first,) + rest
