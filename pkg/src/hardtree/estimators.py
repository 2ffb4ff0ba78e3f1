"""Keep-or-kill wavelet estimators.

Every estimator here keeps the scaling level, multiplies each detail
coefficient ``y_jk`` (``0 <= j < j_lambda``) by a binary ``gamma_jk``, and
drops every level at or beyond ``j_lambda``.

* :func:`hard_threshold` keeps ``|y_jk| > lam``.
* :func:`hard_tree` keeps a node when some member of its scope exceeds
  ``lam``; computed as the hard-threshold set closed under ancestors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .coefficients import CoefficientField
from .noise import max_scale
from .transform import WaveletBasis
from .tree import DyadicNode, ancestor_closure, subtree_max, tree_max

MAX_BRUTE_FORCE_SLOTS = 20


class ThresholdLike(Protocol):
    lam: float
    eta: float
    j_lambda: int


@dataclass(frozen=True)
class Threshold:
    """A threshold given directly rather than through ``(epsilon, m)``."""

    lam: float
    eta: float = 1.0

    @property
    def j_lambda(self) -> int:
        return max_scale(self.lam, self.eta)


@dataclass
class KeepMask:
    """Binary ``gamma`` per detail coefficient, one bool array per level ``0 .. j_lambda - 1``."""

    gamma: list[np.ndarray]

    @property
    def depth(self) -> int:
        return len(self.gamma)

    @property
    def n_slots(self) -> int:
        return (1 << self.depth) - 1

    def kept(self) -> set[tuple[int, int]]:
        return {(j, int(k)) for j, g in enumerate(self.gamma)
                for k in np.flatnonzero(g)}

    def count(self) -> int:
        return int(sum(int(g.sum()) for g in self.gamma))

    def flat(self) -> np.ndarray:
        if not self.gamma:
            return np.zeros(0, dtype=bool)
        return np.concatenate(self.gamma)

    @classmethod
    def from_flat(cls, flat: np.ndarray, depth: int) -> "KeepMask":
        flat = np.asarray(flat, dtype=bool)
        if flat.size != (1 << depth) - 1:
            raise ValueError(f"need {(1 << depth) - 1} entries, got {flat.size}")
        return cls([flat[(1 << j) - 1:(1 << (j + 1)) - 1].copy()
                    for j in range(depth)])

    @classmethod
    def from_set(cls, kept, depth: int) -> "KeepMask":
        gamma = [np.zeros(1 << j, dtype=bool) for j in range(depth)]
        for j, k in kept:
            gamma[j][k] = True
        return cls(gamma)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KeepMask):
            return NotImplemented
        return self.depth == other.depth and all(
            np.array_equal(a, b) for a, b in zip(self.gamma, other.gamma))


@dataclass
class EstimateResult:
    estimate: CoefficientField
    mask: KeepMask
    lam: float
    j_lambda: int


def _check_depth(y: CoefficientField, j_lambda: int) -> None:
    if y.max_level < j_lambda:
        raise ValueError(
            f"observations stop at level {y.max_level - 1}, "
            f"estimator needs levels below {j_lambda}")


def apply_mask(y: CoefficientField, mask: KeepMask) -> CoefficientField:
    """``gamma * y`` on detail levels below the mask depth, scaling level copied."""
    _check_depth(y, mask.depth)
    out = [np.array(y.level(-1))]
    for j, g in enumerate(mask.gamma):
        if g.size != 1 << j:
            raise ValueError(f"mask level {j} has {g.size} entries")
        out.append(np.where(g, y.level(j), 0.0))
    return CoefficientField(out)


def hard_threshold(y: CoefficientField, config: ThresholdLike) -> EstimateResult:
    lam, jl = config.lam, config.j_lambda
    _check_depth(y, jl)
    mask = KeepMask([np.abs(y.level(j)) > lam for j in range(jl)])
    return EstimateResult(apply_mask(y, mask), mask, lam, jl)


def hard_tree(y: CoefficientField, config: ThresholdLike) -> EstimateResult:
    """Hard tree rule: threshold, then add every ancestor of a kept index."""
    lam, jl = config.lam, config.j_lambda
    _check_depth(y, jl)
    exceed = [np.abs(y.level(j)) > lam for j in range(jl)]
    mask = KeepMask(ancestor_closure(exceed))
    return EstimateResult(apply_mask(y, mask), mask, lam, jl)


def hard_tree_reference(y: CoefficientField, config: ThresholdLike) -> KeepMask:
    """Mask from the scope definition, one :func:`tree_max` scan per node.

    Exponential in depth; kept as an independent check of :func:`hard_tree`.
    """
    lam, eta, jl = config.lam, config.eta, config.j_lambda
    _check_depth(y, jl)
    y = y.truncated(jl)
    gamma = []
    for j in range(jl):
        g = np.zeros(1 << j, dtype=bool)
        for k in range(1 << j):
            g[k] = tree_max(y, DyadicNode(j, k), lam, eta, bound=lam) > lam
        gamma.append(g)
    return KeepMask(gamma)


def _cost_terms(y: CoefficientField, config: ThresholdLike):
    lam, jl = config.lam, config.j_lambda
    _check_depth(y, jl)
    ybar = subtree_max(y.detail_levels()[:jl], jl)
    kill = np.concatenate(ybar) ** 2 if jl else np.zeros(0)
    keep = np.full(kill.shape, lam * lam)
    return kill, keep


def penalized_cost(mask: KeepMask, y: CoefficientField,
                   config: ThresholdLike) -> float:
    """``sum (gamma - 1)^2 ybar^2 + gamma^2 lam^2`` over detail slots below the cutoff."""
    if mask.depth != config.j_lambda:
        raise ValueError(
            f"mask depth {mask.depth} does not match cutoff {config.j_lambda}")
    kill, keep = _cost_terms(y, config)
    g = mask.flat()
    return math.fsum(np.where(g, keep, kill))


def brute_force_argmin(y: CoefficientField, config: ThresholdLike) -> KeepMask:
    """Exhaustive minimizer of :func:`penalized_cost` over all ``2**D`` masks.

    Test oracle only; refuses more than 20 detail slots.
    """
    jl = config.j_lambda
    n = (1 << jl) - 1
    if n > MAX_BRUTE_FORCE_SLOTS:
        raise ValueError(
            f"{n} detail slots is too many for exhaustive search "
            f"(limit {MAX_BRUTE_FORCE_SLOTS})")
    kill, keep = _cost_terms(y, config)
    # bit i of the index is gamma for slot i
    costs = np.zeros(1)
    for i in range(n):
        costs = np.concatenate([costs + kill[i], costs + keep[i]])
    best = int(np.argmin(costs))
    # re-rank near-ties with exactly rounded sums
    tol = 1e-9 * max(1.0, float(costs[best]))
    candidates = np.flatnonzero(costs <= costs[best] + tol)
    bits = (candidates[:, None] >> np.arange(n)[None, :]) & 1
    exact = [math.fsum(np.where(b.astype(bool), keep, kill)) for b in bits]
    choice = bits[int(np.argmin(exact))].astype(bool)
    return KeepMask.from_flat(choice, jl)


def lepski_haar(y: CoefficientField, config: ThresholdLike,
                basis: WaveletBasis | None = None) -> np.ndarray:
    """Local bandwidth selection in its Haar wavelet form.

    For each grid point ``t_i = i 2^-J`` (``J = j_lambda``) the partial sums
    ``f_j(t) = y_{-1,0} + sum_{j' < j} y_{j' k(t)} psi_{j' k}(t)`` are
    compared level by level.  Level ``j`` is admissible at ``t`` when every
    increment ``|f_{j'+1}(t') - f_{j'}(t')|`` with ``j <= j' < J`` and ``t'``
    in the level-``j`` dyadic interval around ``t`` stays below
    ``2^(j'/2) lam``; the reconstruction at ``t`` is the partial sum at the
    smallest admissible level.
    """
    if basis is not None and not basis.is_haar:
        raise ValueError(f"Lepski reconstruction is only defined for Haar, got {basis.name}")
    if y.n_scaling != 1:
        raise ValueError("Haar observations have one scaling coefficient")
    lam, J = config.lam, config.j_lambda
    _check_depth(y, J)
    n = 1 << J
    i = np.arange(n)
    increments = np.empty((J, n))
    for j in range(J):
        shift = J - j
        k = i >> shift
        sign = np.where((i >> (shift - 1)) & 1, -1.0, 1.0)
        increments[j] = 2.0 ** (j / 2) * sign * y.level(j)[k]
    too_big = np.abs(increments) > (2.0 ** (np.arange(J) / 2) * lam)[:, None]

    # j_hat(t): smallest admissible level, J always admissible
    j_hat = np.full(n, J)
    seen = np.zeros(n, dtype=bool)
    for j in range(J - 1, -1, -1):
        seen |= too_big[j]
        block_bad = seen.reshape(1 << j, -1).any(axis=1)
        ok = ~np.repeat(block_bad, n >> j)
        j_hat = np.where(ok, j, j_hat)

    out = np.full(n, float(y.level(-1)[0]))
    for j in range(J):
        out = out + np.where(j < j_hat, increments[j], 0.0)
    return out
