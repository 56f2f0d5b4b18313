"""Load externally produced probability vectors and pick a retention size.

Datasets are newline-delimited JSON arrays or delimited numeric rows, one
vector per line. Rows are renormalized on load to absorb rounding from
upstream softmax outputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DomainError, ParseError, RaggedRows
from .prob import ProbVector


@dataclass(frozen=True)
class VectorDataset:
    """Probability vectors of a common dimension, with a provenance label."""

    vectors: tuple[ProbVector, ...]
    source_label: str = ""

    def __post_init__(self):
        if not self.vectors:
            raise ParseError("dataset is empty")
        k = self.vectors[0].k
        if any(v.k != k for v in self.vectors):
            raise RaggedRows("vectors have differing dimensions")

    @property
    def k(self) -> int:
        return self.vectors[0].k

    def __len__(self) -> int:
        return len(self.vectors)

    @cached_property
    def matrix(self) -> np.ndarray:
        out = np.stack([v.values for v in self.vectors])
        out.flags.writeable = False
        return out


def _parse_jsonl(lines: list[str], path: str) -> list[list[float]]:
    rows = []
    for lineno, line in enumerate(lines, 1):
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
        if not isinstance(row, list):
            raise ParseError(f"{path}:{lineno}: expected a JSON array")
        rows.append(row)
    return rows


def _parse_delimited(lines: list[str], path: str) -> list[list[float]]:
    rows = []
    for lineno, line in enumerate(lines, 1):
        fields = line.split(",") if "," in line else line.split()
        try:
            rows.append([float(f) for f in fields])
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: non-numeric field: {exc}") from exc
    return rows


def load_dataset(path: str | Path, fmt: str | None = None, label: str | None = None) -> VectorDataset:
    """Read one probability vector per line; rows are validated and renormalized.

    ``fmt`` is "jsonl" or "delimited"; by default it is inferred from the
    extension, falling back to sniffing the first character.
    """
    path = Path(path)
    text = path.read_text()
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ParseError(f"{path}: no data rows")
    if fmt is None:
        if path.suffix in (".jsonl", ".json"):
            fmt = "jsonl"
        elif path.suffix in (".csv", ".txt", ".tsv"):
            fmt = "delimited"
        else:
            fmt = "jsonl" if lines[0].startswith("[") else "delimited"
    if fmt == "jsonl":
        rows = _parse_jsonl(lines, str(path))
    elif fmt == "delimited":
        rows = _parse_delimited(lines, str(path))
    else:
        raise ParseError(f"unknown dataset format {fmt!r}")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise RaggedRows(f"{path}: rows have differing lengths")
    vectors = tuple(ProbVector(r, normalize=True) for r in rows)
    return VectorDataset(vectors, label if label is not None else path.name)


def save_dataset(ds: VectorDataset, path: str | Path, fmt: str = "jsonl"):
    """Write the dataset back out, one vector per line."""
    path = Path(path)
    with path.open("w") as fh:
        for v in ds.vectors:
            if fmt == "jsonl":
                fh.write(json.dumps(v.values.tolist()) + "\n")
            elif fmt == "delimited":
                fh.write(",".join(repr(float(x)) for x in v.values) + "\n")
            else:
                raise ParseError(f"unknown dataset format {fmt!r}")


class TopMassCurve(NamedTuple):
    """Average retained and discarded mass as the retention size grows."""

    k_top_values: tuple[int, ...]
    avg_top_mass: np.ndarray
    delta_avg: np.ndarray

    def to_text(self) -> str:
        lines = [
            f"{kt}\t{repr(float(d))}"
            for kt, d in zip(self.k_top_values, self.delta_avg)
        ]
        return "\n".join(lines) + "\n"


def top_mass_curve(ds: VectorDataset, k_top_values: Sequence[int] | None = None) -> TopMassCurve:
    """Average mass of the k_top largest entries, for each requested k_top.

    The discarded mass is computed directly from the smallest entries, so
    it is exactly zero at k_top = k.
    """
    k = ds.k
    if k_top_values is None:
        k_top_values = range(1, k + 1)
    k_tops = tuple(int(kt) for kt in k_top_values)
    if any(kt < 1 or kt > k for kt in k_tops):
        raise DomainError(f"k_top values must lie in [1, {k}]")
    ascending = np.sort(ds.matrix, axis=1)
    tail_cum = np.concatenate(
        [np.zeros((len(ds), 1)), np.cumsum(ascending, axis=1)], axis=1
    )
    delta = np.array([tail_cum[:, k - kt].mean() for kt in k_tops])
    return TopMassCurve(k_tops, 1.0 - delta, delta)


class KtopRecommendation(NamedTuple):
    k_top: int
    delta_avg: float
    satisfied: bool  # False when only keeping every entry meets the target


def recommend_ktop(ds: VectorDataset, delta_target: float) -> KtopRecommendation:
    """Smallest k_top whose average discarded mass is below ``delta_target``."""
    if not 0.0 < delta_target < 1.0:
        raise DomainError(f"delta target must be in (0, 1), got {delta_target}")
    curve = top_mass_curve(ds)
    for kt, d in zip(curve.k_top_values, curve.delta_avg):
        if d < delta_target:
            return KtopRecommendation(kt, float(d), kt < ds.k)
    return KtopRecommendation(ds.k, float(curve.delta_avg[-1]), False)


def tail_masses(ds: VectorDataset, k_top: int) -> np.ndarray:
    """Per-vector mass of the k - k_top smallest entries."""
    if not 1 <= k_top <= ds.k:
        raise DomainError(f"need 1 <= k_top <= {ds.k}, got {k_top}")
    ascending = np.sort(ds.matrix, axis=1)
    return ascending[:, : ds.k - k_top].sum(axis=1)


def tail_violation_fraction(ds: VectorDataset, k_top: int, delta: float) -> float:
    """Fraction of vectors whose own tail mass exceeds ``delta``.

    The sparse budget assumes a per-vector tail bound; dataset averages can
    hide vectors that break it, so this is reported alongside.
    """
    return float(np.mean(tail_masses(ds, k_top) > delta))


def tail_mass_percentile(ds: VectorDataset, k_top: int, percentile: float) -> float:
    """Upper percentile of per-vector tail masses, for conservative delta choices."""
    return float(np.percentile(tail_masses(ds, k_top), percentile))
