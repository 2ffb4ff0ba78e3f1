"""Storage for doubly-indexed wavelet coefficient arrays.

A :class:`CoefficientField` holds one real array per level ``j`` for
``-1 <= j < max_level``.  Level ``-1`` carries the scaling coefficient(s),
levels ``j >= 0`` carry ``2**j`` detail coefficients each (periodized
layout).  The same container is used for true coefficients and for noisy
observations.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

SCALING_LEVEL = -1


def slots(level: int, n_scaling: int = 1) -> int:
    """Number of coefficients stored at ``level``."""
    if level < SCALING_LEVEL:
        raise ValueError(f"level must be >= -1, got {level}")
    if level == SCALING_LEVEL:
        return n_scaling
    return 1 << level


@dataclass(frozen=True, order=True)
class CoefIndex:
    level: int
    position: int


class CoefficientField:
    """Per-level coefficient arrays over levels ``-1 .. max_level - 1``.

    Parameters
    ----------
    levels : iterable of array_like
        ``levels[0]`` is level -1, ``levels[i]`` is level ``i - 1``.
        Level ``j >= 0`` must have exactly ``2**j`` entries.
    """

    __slots__ = ("_levels",)

    def __init__(self, levels: Iterable[np.ndarray]):
        arrays = [np.array(a, dtype=np.float64).reshape(-1) for a in levels]
        if not arrays:
            raise ValueError("a field needs at least the scaling level")
        if arrays[0].size < 1:
            raise ValueError("scaling level must be non-empty")
        for i, a in enumerate(arrays[1:]):
            if a.size != 1 << i:
                raise ValueError(
                    f"level {i} must have {1 << i} entries, got {a.size}")
        self._levels = arrays

    # construction -------------------------------------------------------

    @classmethod
    def zeros(cls, max_level: int, n_scaling: int = 1) -> "CoefficientField":
        if max_level < 0:
            raise ValueError(f"max_level must be >= 0, got {max_level}")
        return cls([np.zeros(n_scaling)]
                   + [np.zeros(1 << j) for j in range(max_level)])

    @classmethod
    def from_flat(cls, flat: np.ndarray, n_scaling: int = 1) -> "CoefficientField":
        """Inverse of :meth:`flat` (levels concatenated in ascending order)."""
        flat = np.asarray(flat, dtype=np.float64)
        n_detail = flat.size - n_scaling
        if n_detail < 0 or (n_detail + 1) & n_detail:
            raise ValueError(f"flat length {flat.size} is not a full pyramid")
        max_level = int(n_detail + 1).bit_length() - 1
        out = [flat[:n_scaling]]
        start = n_scaling
        for j in range(max_level):
            out.append(flat[start:start + (1 << j)])
            start += 1 << j
        return cls(out)

    # access --------------------------------------------------------------

    @property
    def max_level(self) -> int:
        return len(self._levels) - 1

    @property
    def n_scaling(self) -> int:
        return self._levels[0].size

    def level(self, j: int) -> np.ndarray:
        """Read-only view of the coefficients at level ``j``."""
        if not SCALING_LEVEL <= j < self.max_level:
            raise IndexError(f"level {j} outside -1..{self.max_level - 1}")
        view = self._levels[j + 1].view()
        view.flags.writeable = False
        return view

    def levels(self) -> Iterator[tuple[int, np.ndarray]]:
        for i in range(len(self._levels)):
            yield i - 1, self.level(i - 1)

    def detail_levels(self) -> list[np.ndarray]:
        return [self.level(j) for j in range(self.max_level)]

    def get(self, level: int, position: int) -> float:
        return float(self.level(level)[position])

    def set(self, level: int, position: int, value: float) -> None:
        """Write one coefficient.  Only meant for use while building a field."""
        if not SCALING_LEVEL <= level < self.max_level:
            raise IndexError(f"level {level} outside -1..{self.max_level - 1}")
        self._levels[level + 1][position] = value

    def copy(self) -> "CoefficientField":
        return CoefficientField([a.copy() for a in self._levels])

    def flat(self) -> np.ndarray:
        return np.concatenate(self._levels)

    def same_layout(self, other: "CoefficientField") -> bool:
        return (self.max_level == other.max_level
                and self.n_scaling == other.n_scaling)

    # reshaping -----------------------------------------------------------

    def truncated(self, max_level: int) -> "CoefficientField":
        """Keep levels ``-1 .. max_level - 1``."""
        if not 0 <= max_level <= self.max_level:
            raise ValueError(
                f"cannot truncate depth {self.max_level} to {max_level}")
        return CoefficientField([a.copy() for a in self._levels[:max_level + 1]])

    def padded(self, max_level: int) -> "CoefficientField":
        """Extend with zero levels up to ``max_level``."""
        if max_level < self.max_level:
            raise ValueError(
                f"cannot pad depth {self.max_level} down to {max_level}")
        extra = [np.zeros(1 << j) for j in range(self.max_level, max_level)]
        return CoefficientField([a.copy() for a in self._levels] + extra)

    # arithmetic ----------------------------------------------------------

    def _check(self, other: "CoefficientField") -> None:
        if not self.same_layout(other):
            raise ValueError(
                "layout mismatch: "
                f"(max_level={self.max_level}, n_scaling={self.n_scaling}) vs "
                f"(max_level={other.max_level}, n_scaling={other.n_scaling})")

    def __sub__(self, other: "CoefficientField") -> "CoefficientField":
        self._check(other)
        return CoefficientField([a - b for a, b in zip(self._levels, other._levels)])

    def __add__(self, other: "CoefficientField") -> "CoefficientField":
        self._check(other)
        return CoefficientField([a + b for a, b in zip(self._levels, other._levels)])

    def __mul__(self, c: float) -> "CoefficientField":
        return CoefficientField([c * a for a in self._levels])

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CoefficientField):
            return NotImplemented
        return self.same_layout(other) and all(
            np.array_equal(a, b) for a, b in zip(self._levels, other._levels))

    def __repr__(self) -> str:
        return (f"CoefficientField(max_level={self.max_level}, "
                f"n_scaling={self.n_scaling})")


def zero_field(max_level: int) -> CoefficientField:
    return CoefficientField.zeros(max_level)


def level_energies(field: CoefficientField) -> np.ndarray:
    """Sum of squares per detail level, index ``j`` for level ``j``."""
    return np.array([float(np.dot(a, a)) for a in field.detail_levels()])


def squared_norm(field: CoefficientField) -> float:
    return tail_energy(field, SCALING_LEVEL)


def tail_energy(field: CoefficientField, from_level: int) -> float:
    """Energy of all coefficients at levels ``>= from_level``."""
    if from_level < SCALING_LEVEL:
        raise ValueError(f"from_level must be >= -1, got {from_level}")
    total = math.fsum(
        float(np.dot(a, a)) for j, a in field.levels() if j >= from_level)
    return total


def squared_distance(a: CoefficientField, b: CoefficientField) -> float:
    """Squared L2 distance, computed in coefficient space."""
    a._check(b)
    return squared_norm(a - b)


# CSV interchange -----------------------------------------------------------

CSV_HEADER = ("level", "position", "value")


def write_csv(field: CoefficientField, dest: str | Path | io.TextIOBase) -> None:
    """Write ``level,position,value`` rows; values use shortest round-trip repr."""
    if isinstance(dest, (str, Path)):
        with open(dest, "w", newline="") as fh:
            write_csv(field, fh)
        return
    w = csv.writer(dest, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for j, arr in field.levels():
        for k, v in enumerate(arr):
            w.writerow((j, k, repr(float(v))))


def to_csv_text(field: CoefficientField) -> str:
    buf = io.StringIO()
    write_csv(field, buf)
    return buf.getvalue()


def read_csv(source: str | Path | io.TextIOBase) -> CoefficientField:
    """Parse the ``level,position,value`` form.

    Rows may come in any order; every slot of every level up to the
    deepest listed level must be present exactly once.
    """
    if isinstance(source, (str, Path)):
        with open(source, newline="") as fh:
            return read_csv(fh)
    reader = csv.reader(source)
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != CSV_HEADER:
        raise ValueError(f"expected header {','.join(CSV_HEADER)}, got {header}")
    entries: dict[tuple[int, int], float] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 3:
            raise ValueError(f"line {lineno}: expected 3 columns, got {len(row)}")
        key = (int(row[0]), int(row[1]))
        if key in entries:
            raise ValueError(f"line {lineno}: duplicate entry {key}")
        entries[key] = float(row[2])
    if not entries:
        raise ValueError("no coefficients found")
    max_level = max(j for j, _ in entries) + 1
    n_scaling = sum(1 for j, _ in entries if j == SCALING_LEVEL)
    if n_scaling == 0:
        raise ValueError("missing scaling level -1")
    field = CoefficientField.zeros(max(max_level, 0), n_scaling)
    expected = n_scaling + (1 << max(max_level, 0)) - 1
    if len(entries) != expected:
        raise ValueError(
            f"incomplete field: {len(entries)} entries, expected {expected}")
    for (j, k), v in entries.items():
        if not 0 <= k < slots(j, n_scaling):
            raise ValueError(f"position {k} out of range at level {j}")
        field.set(j, k, v)
    return field
