"""Source coders for probability vectors: uniform, lattice, and sparse lattice.

Each scheme is an encode/decode pair. Encoders are deterministic: all ties
(rounding residuals, top-k selection) break toward the lower index.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .codec import (
    LatticePoint,
    LexIndex,
    PositionSet,
    composition_count_bits,
    rank_composition,
    rank_subset,
    subset_count_bits,
    unrank_composition,
    unrank_subset,
)
from .errors import DimensionMismatch, DomainError, ZeroTopMass
from .prob import ProbVector


@dataclass(frozen=True)
class UQEncoding:
    """Per-entry bin ids from uniform scalar quantization with 2**bits_per_entry bins."""

    bin_ids: tuple[int, ...]
    bits_per_entry: int

    def __post_init__(self):
        j = self.bits_per_entry
        if j < 1:
            raise DomainError(f"bits_per_entry must be >= 1, got {j}")
        if any(r < 0 or r >= (1 << j) for r in self.bin_ids):
            raise DomainError(f"bin ids outside [0, 2^{j})")

    @property
    def k(self) -> int:
        return len(self.bin_ids)

    @property
    def payload_bits(self) -> int:
        return self.k * self.bits_per_entry

    def to_bytes(self) -> bytes:
        """Fields packed big-endian, first entry in the most significant bits."""
        j = self.bits_per_entry
        packed = 0
        for r in self.bin_ids:
            packed = (packed << j) | r
        pad = -self.payload_bits % 8
        packed <<= pad
        return packed.to_bytes((self.payload_bits + 7) // 8, "big")

    @classmethod
    def from_bytes(cls, data: bytes, k: int, bits_per_entry: int) -> "UQEncoding":
        total_bits = k * bits_per_entry
        expected = (total_bits + 7) // 8
        if len(data) != expected:
            raise DimensionMismatch(f"expected {expected} payload bytes, got {len(data)}")
        packed = int.from_bytes(data, "big") >> (-total_bits % 8)
        mask = (1 << bits_per_entry) - 1
        ids = tuple(
            (packed >> (bits_per_entry * (k - 1 - i))) & mask for i in range(k)
        )
        return cls(ids, bits_per_entry)


def uq_encode(p: ProbVector, bits_per_entry: int) -> UQEncoding:
    """Map each entry to its bin id among 2**bits_per_entry equal-width bins on [0, 1].

    Bins are half-open; the value 1.0 goes to the top bin.
    """
    if bits_per_entry < 1:
        raise DomainError(f"bits_per_entry must be >= 1, got {bits_per_entry}")
    levels = 1 << bits_per_entry
    ids = np.floor(p.values * levels).astype(np.int64)
    np.minimum(ids, levels - 1, out=ids)
    return UQEncoding(tuple(int(r) for r in ids), bits_per_entry)


def uq_decode(enc: UQEncoding) -> ProbVector:
    """Reconstruct bin midpoints and renormalize them onto the simplex."""
    levels = 1 << enc.bits_per_entry
    mid = (np.array(enc.bin_ids, dtype=float) + 0.5) / levels
    return ProbVector(mid, normalize=True)


class LatticeRounding(NamedTuple):
    """Output of the lattice rounding with its intermediate quantities."""

    counts: np.ndarray
    initial_counts: np.ndarray
    residuals: np.ndarray


def round_to_lattice(values: np.ndarray, denominator: int) -> LatticeRounding:
    """Round a nonnegative unit-sum vector to integer counts summing to ``denominator``.

    Initial counts are floor(denominator*value + 1/2). If they oversum, the
    surplus entries with the largest residuals count - denominator*value are
    decremented; if they undersum, those with the smallest residuals are
    incremented. Residual ties break toward the lower index.
    """
    if denominator < 1:
        raise DomainError(f"denominator must be >= 1, got {denominator}")
    scaled = np.asarray(values, dtype=float) * denominator
    counts = np.floor(scaled + 0.5).astype(np.int64)
    residuals = counts - scaled
    surplus = int(counts.sum()) - denominator
    initial = counts.copy()
    if surplus > 0:
        order = np.lexsort((np.arange(counts.size), -residuals))
        chosen = order[:surplus]
        counts[chosen] -= 1
        # Entries picked for decrement always started positive: a positive
        # total residual forces at least `surplus` entries above their target.
        assert (counts >= 0).all(), "lattice rounding drove a count negative"
    elif surplus < 0:
        order = np.lexsort((np.arange(counts.size), residuals))
        counts[order[:-surplus]] += 1
    return LatticeRounding(counts, initial, residuals)


def lq_encode(p: ProbVector, denominator: int) -> LatticePoint:
    """Nearest point on the fixed-denominator lattice, by residual rounding."""
    rounded = round_to_lattice(p.values, denominator)
    return LatticePoint(tuple(int(c) for c in rounded.counts), denominator)


def lq_encode_steps(p: ProbVector, denominator: int) -> tuple[LatticePoint, LatticeRounding]:
    """As lq_encode, also returning the initial counts and residuals."""
    rounded = round_to_lattice(p.values, denominator)
    return LatticePoint(tuple(int(c) for c in rounded.counts), denominator), rounded


def lq_decode(pt: LatticePoint) -> ProbVector:
    """Probability vector counts/denominator."""
    return ProbVector(np.array(pt.counts, dtype=float) / pt.denominator)


def lq_payload(pt: LatticePoint) -> bytes:
    """Serialized composition index of a lattice point."""
    return rank_composition(pt).to_bytes()


def lq_from_payload(data: bytes, k: int, denominator: int) -> LatticePoint:
    idx = LexIndex.from_bytes(data, composition_count_bits(k, denominator))
    return unrank_composition(idx, k, denominator)


@dataclass(frozen=True)
class SLQEncoding:
    """Sparse lattice encoding: retained positions plus a lattice index over them."""

    positions: PositionSet
    lattice_index: LexIndex
    denominator: int
    dimension: int
    k_top: int

    def __post_init__(self):
        if self.positions.dimension != self.dimension:
            raise DimensionMismatch(
                f"positions declare dimension {self.positions.dimension}, "
                f"encoding declares {self.dimension}"
            )
        if self.positions.size != self.k_top:
            raise DimensionMismatch(
                f"{self.positions.size} positions but k_top={self.k_top}"
            )
        expected = composition_count_bits(self.k_top, self.denominator)
        if self.lattice_index.bit_width != expected:
            raise DimensionMismatch(
                f"lattice index width {self.lattice_index.bit_width}, expected {expected}"
            )

    @property
    def payload_bits(self) -> int:
        return (
            subset_count_bits(self.dimension, self.k_top)
            + composition_count_bits(self.k_top, self.denominator)
        )

    def to_bytes(self) -> bytes:
        """Subset index bytes followed by composition index bytes."""
        return rank_subset(self.positions).to_bytes() + self.lattice_index.to_bytes()

    @classmethod
    def from_bytes(cls, data: bytes, k: int, k_top: int, denominator: int) -> "SLQEncoding":
        subset_bits = subset_count_bits(k, k_top)
        comp_bits = composition_count_bits(k_top, denominator)
        split = (subset_bits + 7) // 8
        expected = split + (comp_bits + 7) // 8
        if len(data) != expected:
            raise DimensionMismatch(f"expected {expected} payload bytes, got {len(data)}")
        positions = unrank_subset(LexIndex.from_bytes(data[:split], subset_bits), k, k_top)
        lattice_index = LexIndex.from_bytes(data[split:], comp_bits)
        return cls(positions, lattice_index, denominator, k, k_top)


def top_positions(p: ProbVector, k_top: int) -> PositionSet:
    """Positions of the k_top largest entries, ties broken toward the lower index."""
    if not 1 <= k_top <= p.k:
        raise DomainError(f"need 1 <= k_top <= {p.k}, got {k_top}")
    order = np.lexsort((np.arange(p.k), -p.values))
    return PositionSet(tuple(sorted(int(i) for i in order[:k_top])), p.k)


def slq_encode(p: ProbVector, k_top: int, denominator: int) -> SLQEncoding:
    """Keep the k_top largest entries, renormalize them, and lattice-quantize.

    The transmitted payload is the position-set index plus the composition
    index of the quantized retained entries.
    """
    positions = top_positions(p, k_top)
    selected = p.values[list(positions.indices)]
    mass = float(selected.sum())
    if mass == 0.0:
        raise ZeroTopMass("selected top entries are all zero")
    rounded = round_to_lattice(selected / mass, denominator)
    point = LatticePoint(tuple(int(c) for c in rounded.counts), denominator)
    return SLQEncoding(positions, rank_composition(point), denominator, p.k, k_top)


def slq_decode(enc: SLQEncoding) -> ProbVector:
    """Zeros everywhere except the retained positions, which carry counts/denominator."""
    point = unrank_composition(enc.lattice_index, enc.k_top, enc.denominator)
    values = np.zeros(enc.dimension)
    values[list(enc.positions.indices)] = np.array(point.counts, dtype=float) / enc.denominator
    return ProbVector(values)
