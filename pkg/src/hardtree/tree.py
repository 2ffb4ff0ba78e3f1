"""Binary index tree over dyadic nodes ``(j, k)``.

Node ``(j, k)`` has children ``(j+1, 2k)`` and ``(j+1, 2k+1)``.  The scope
of a node for threshold ``lam`` is the complete subtree below it, cut off
before level ``max_scale(lam, eta)``.  The same index tree is used for every
basis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .coefficients import CoefficientField
from .noise import max_scale


@dataclass(frozen=True, order=True)
class DyadicNode:
    level: int
    position: int

    def __post_init__(self):
        if self.level < 0:
            raise ValueError(f"node level must be >= 0, got {self.level}")
        if not 0 <= self.position < 1 << self.level:
            raise ValueError(
                f"position {self.position} out of range at level {self.level}")

    @property
    def children(self) -> tuple["DyadicNode", "DyadicNode"]:
        j, k = self.level, self.position
        return DyadicNode(j + 1, 2 * k), DyadicNode(j + 1, 2 * k + 1)

    @property
    def parent(self) -> "DyadicNode | None":
        if self.level == 0:
            return None
        return DyadicNode(self.level - 1, self.position // 2)

    def interval(self) -> tuple[float, float]:
        """Haar support ``[k 2^-j, (k+1) 2^-j)``."""
        w = 2.0 ** -self.level
        return self.position * w, (self.position + 1) * w


@dataclass(frozen=True)
class TreeScope:
    """Subtree rooted at ``root`` over levels ``root.level .. cutoff_level - 1``.

    Iteration is lazy, level by level with ascending positions.
    """

    root: DyadicNode
    cutoff_level: int

    def __post_init__(self):
        if self.root.level >= self.cutoff_level:
            raise ValueError(
                f"root level {self.root.level} not below cutoff {self.cutoff_level}")

    def positions(self, level: int) -> range:
        """Member positions at ``level``: a contiguous block of ``2**(level - j)``."""
        if not self.root.level <= level < self.cutoff_level:
            return range(0)
        w = 1 << (level - self.root.level)
        return range(self.root.position * w, (self.root.position + 1) * w)

    def count(self, level: int) -> int:
        return len(self.positions(level))

    def __iter__(self) -> Iterator[DyadicNode]:
        for lev in range(self.root.level, self.cutoff_level):
            for k in self.positions(lev):
                yield DyadicNode(lev, k)

    def __len__(self) -> int:
        return (1 << (self.cutoff_level - self.root.level)) - 1

    def __contains__(self, node: object) -> bool:
        if not isinstance(node, DyadicNode):
            return False
        return node.position in self.positions(node.level)


def scope(root: DyadicNode, lam: float, eta: float) -> TreeScope:
    cutoff = max_scale(lam, eta)
    if root.level >= cutoff:
        raise ValueError(
            f"node {root} lies at or below the cutoff level {cutoff}")
    return TreeScope(root, cutoff)


def ancestors(node: DyadicNode, lam: float, eta: float) -> list[DyadicNode]:
    """Nodes whose scope contains ``node``: the parent chain, ``node`` first."""
    cutoff = max_scale(lam, eta)
    if node.level >= cutoff:
        raise ValueError(f"node {node} lies at or below the cutoff level {cutoff}")
    chain = [node]
    while chain[-1].parent is not None:
        chain.append(chain[-1].parent)
    return chain


def tree_max(field: CoefficientField, root: DyadicNode, lam: float, eta: float,
             bound: float | None = None) -> float:
    """Largest ``|value|`` over the scope of ``root``.

    With ``bound`` set, scanning stops at the first value exceeding it and
    that value is returned (enough to decide ``tree_max > bound``).
    """
    sc = scope(root, lam, eta)
    if field.max_level < sc.cutoff_level:
        raise ValueError(
            f"field stops before level {field.max_level}, "
            f"scope needs levels below {sc.cutoff_level}")
    best = 0.0
    for lev in range(root.level, sc.cutoff_level):
        r = sc.positions(lev)
        m = float(np.max(np.abs(field.level(lev)[r.start:r.stop])))
        if m > best:
            best = m
            if bound is not None and best > bound:
                break
    return best


def subtree_max(levels: list[np.ndarray], cutoff: int) -> list[np.ndarray]:
    """Scope maxima of ``|values|`` for every node above ``cutoff``.

    ``levels[j]`` holds level-j detail values; missing levels count as zero.
    Returns one array per level ``0 .. cutoff - 1``.
    """
    out: list[np.ndarray] = [None] * cutoff
    below = None
    for j in range(cutoff - 1, -1, -1):
        cur = np.abs(levels[j]) if j < len(levels) else np.zeros(1 << j)
        if below is not None:
            cur = np.maximum(cur, np.maximum(below[0::2], below[1::2]))
        out[j] = cur
        below = cur
    return out


def ancestor_closure(marked: list[np.ndarray]) -> list[np.ndarray]:
    """Boolean masks closed under taking parents (bottom-up OR over child pairs)."""
    out = [np.array(m, dtype=bool) for m in marked]
    for j in range(len(out) - 1, 0, -1):
        child = out[j]
        out[j - 1] = out[j - 1] | child[0::2] | child[1::2]
    return out
