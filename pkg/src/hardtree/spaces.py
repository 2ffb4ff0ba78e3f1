"""Sequence-space statistics on finite coefficient fields.

Each statistic is a family of values indexed by a truncation level ``J`` or
by a threshold ``lam``; its supremum over the index is the finite-field
version of the corresponding seminorm.  A finite field lies in every one
of these spaces, so membership is only ever diagnosed by watching the
supremum as the truncation depth of a constructed sequence grows.

Coefficients beyond ``field.max_level`` are treated as zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coefficients import CoefficientField, level_energies
from .noise import max_scale
from .tree import subtree_max


@dataclass
class SpaceStatistic:
    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=np.float64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.grid.shape != self.values.shape:
            raise ValueError("grid and values differ in length")
        if self.grid.size > 1 and np.any(np.diff(self.grid) <= 0):
            raise ValueError("grid must be strictly increasing")

    @property
    def sup(self) -> float:
        return float(self.values.max()) if self.values.size else 0.0

    @property
    def argsup(self) -> float:
        return float(self.grid[int(np.argmax(self.values))])


def lambda_grid(lam0: float = 0.5, n: int = 60, per_octave: int = 4) -> np.ndarray:
    """Geometric grid ``lam0 * 2**(-i/per_octave)``, returned ascending."""
    return np.sort(lam0 * 2.0 ** (-np.arange(n) / per_octave))


def _validated_grid(grid) -> np.ndarray:
    g = np.asarray(grid, dtype=np.float64)
    if np.any(g <= 0):
        raise ValueError("lambda grid values must be positive")
    return np.sort(g)


def _tails(field: CoefficientField) -> np.ndarray:
    """``tails[J] = sum_{j >= J} level energy`` for ``J = 0 .. max_level``."""
    e = level_energies(field)
    return np.concatenate([np.cumsum(e[::-1])[::-1], [0.0]])


def besov_stat(field: CoefficientField, s: float) -> SpaceStatistic:
    """``2^(2Js) * sum_{j >= J} sum_k beta_jk^2`` for ``J = 0 .. max_level``."""
    if s <= 0:
        raise ValueError(f"s must be positive, got {s}")
    J = np.arange(field.max_level + 1)
    return SpaceStatistic(J, 2.0 ** (2 * J * s) * _tails(field))


def hybrid_besov_stat(field: CoefficientField, u: float) -> SpaceStatistic:
    """Besov tail statistic weakened by ``1/J``, over ``J = 1 .. max_level``.

    The ``1/J`` weight is undefined at ``J = 0`` and negative at ``J = -1``;
    those indices are left out.
    """
    if u <= 0:
        raise ValueError(f"u must be positive, got {u}")
    tails = _tails(field)
    J = np.arange(1, field.max_level + 1)
    return SpaceStatistic(J, 2.0 ** (2 * J * u) * tails[1:] / np.maximum(J, 1))


def weak_besov_summand(field: CoefficientField, lam: float) -> np.ndarray:
    """Per-level ``sum_k beta_jk^2 1{|beta_jk| <= lam}``."""
    return np.array([float(np.sum(np.where(np.abs(b) <= lam, b * b, 0.0)))
                     for b in field.detail_levels()])


def tree_weak_besov_summand(field: CoefficientField, lam: float,
                            eta: float) -> np.ndarray:
    """Per-level ``sum_k beta_jk^2 1{scope max of |beta| <= lam/2}``, levels below ``j_lam``.

    Returned array has one entry per level ``0 .. max_level - 1``; levels at
    or past the cutoff are zero.
    """
    levels = field.detail_levels()
    cutoff = min(max_scale(lam, eta), field.max_level)
    bar = subtree_max(levels, cutoff)
    out = np.zeros(field.max_level)
    for j in range(cutoff):
        b = levels[j]
        out[j] = float(np.sum(np.where(bar[j] <= lam / 2, b * b, 0.0)))
    return out


def weak_besov_stat(field: CoefficientField, r: float, grid) -> SpaceStatistic:
    """``lam^(r-2) sum beta^2 1{|beta| <= lam}`` on each grid value."""
    if not 0 < r < 2:
        raise ValueError(f"r must lie in (0, 2), got {r}")
    g = _validated_grid(grid)
    vals = [lam ** (r - 2) * math.fsum(weak_besov_summand(field, lam)) for lam in g]
    return SpaceStatistic(g, vals)


def tree_weak_besov_stat(field: CoefficientField, r: float, eta: float,
                         grid) -> SpaceStatistic:
    """Tree version of :func:`weak_besov_stat`: whole scope must stay below ``lam/2``."""
    if not 0 < r < 2:
        raise ValueError(f"r must lie in (0, 2), got {r}")
    if eta < 1:
        raise ValueError(f"eta must be >= 1, got {eta}")
    g = _validated_grid(grid)
    if np.any(g >= 1):
        raise ValueError("tree statistic needs lambda values in (0, 1)")
    vals = [lam ** (r - 2) * math.fsum(tree_weak_besov_summand(field, lam, eta))
            for lam in g]
    return SpaceStatistic(g, vals)


def sparsity_count(field: CoefficientField, lam: float, eta: float) -> int:
    """Number of nodes below ``j_lam`` whose scope holds some ``|beta| > lam/2``."""
    cutoff = min(max_scale(lam, eta), field.max_level)
    bar = subtree_max(field.detail_levels(), cutoff)
    return int(sum(int(np.count_nonzero(b > lam / 2)) for b in bar))


def sparsity_stat(field: CoefficientField, eta: float, grid) -> SpaceStatistic:
    g = _validated_grid(grid)
    return SpaceStatistic(g, [sparsity_count(field, lam, eta) for lam in g])


# h[m, alpha, alpha1, alpha2] ----------------------------------------------

class HFunctionError(ValueError):
    pass


@dataclass(frozen=True)
class HFunctionParams:
    m: int
    alpha: float
    alpha1: float
    alpha2: float
    max_level: int

    def __post_init__(self):
        if self.m < 0:
            raise ValueError(f"m must be >= 0, got {self.m}")
        if not 0 < self.alpha <= 1:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.alpha1 <= 0 or self.alpha2 <= 0:
            raise ValueError("alpha1 and alpha2 must be positive")
        if self.max_level < 1:
            raise ValueError(f"max_level must be >= 1, got {self.max_level}")

    def count(self, j: int) -> int:
        """``min(floor((m j + 1) 2^(j alpha)), 2^j)``."""
        return min(math.floor((self.m * j + 1) * 2.0 ** (j * self.alpha)), 1 << j)

    def magnitude(self, j: int) -> float:
        return 2.0 ** (-(self.alpha1 if j % 2 == 0 else self.alpha2) * j)

    @classmethod
    def tree_vs_weak_witness(cls, s: float, eta: float, max_level: int) -> "HFunctionParams":
        """Sequence in the tree weak space but outside the plain weak space."""
        return cls(1, 1.0 / (eta * (1 + 2 * s)), 1.0, 1.0 / (2 * eta), max_level)

    @classmethod
    def eta_witness(cls, s: float, eta2: float, max_level: int) -> "HFunctionParams":
        """Sequence separating the Besov indices attached to two values of eta."""
        a = 1.0 / (2 * eta2)
        return cls(0, 1.0 / (eta2 * (1 + 2 * s)), a, a, max_level)


def h_support(params: HFunctionParams) -> list[np.ndarray]:
    """Sorted nonzero positions per level.

    Level 0 takes the leftmost slots.  Each deeper level first takes the
    left child of every nonzero parent, then right children left to right,
    then the leftmost positions not yet used.
    """
    support = []
    prev = None
    for j in range(params.max_level):
        n = params.count(j)
        if prev is None:
            pos = np.arange(n)
        else:
            if n < prev.size:
                raise HFunctionError(
                    f"level {j} has {n} nonzeros but level {j - 1} has {prev.size}; "
                    "every nonzero parent needs a nonzero child")
            left, right = 2 * prev, 2 * prev + 1
            extra = n - prev.size
            chosen = [left, right[:min(extra, right.size)]]
            extra -= min(extra, right.size)
            if extra:
                free = np.setdiff1d(np.arange(1 << j), np.concatenate([left, right]),
                                    assume_unique=True)
                chosen.append(free[:extra])
            pos = np.sort(np.concatenate(chosen))
        support.append(pos)
        prev = pos
    return support


def make_h_function(params: HFunctionParams) -> CoefficientField:
    """Haar coefficients of ``h[m, alpha, alpha1, alpha2]``; scaling coefficient 0."""
    levels = [np.zeros(1)]
    for j, pos in enumerate(h_support(params)):
        a = np.zeros(1 << j)
        a[pos] = params.magnitude(j)
        levels.append(a)
    return CoefficientField(levels)
