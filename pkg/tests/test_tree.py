import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hardtree.coefficients import CoefficientField, zero_field
from hardtree.noise import max_scale
from hardtree.tree import (
    DyadicNode,
    TreeScope,
    ancestor_closure,
    ancestors,
    scope,
    subtree_max,
    tree_max,
)

from conftest import random_field


def node_strategy(max_level=7):
    return st.integers(0, max_level).flatmap(
        lambda j: st.builds(DyadicNode, st.just(j), st.integers(0, (1 << j) - 1)))


def test_node_relations():
    n = DyadicNode(2, 3)
    assert n.children == (DyadicNode(3, 6), DyadicNode(3, 7))
    assert n.parent == DyadicNode(1, 1)
    assert DyadicNode(0, 0).parent is None
    assert n.interval() == (0.75, 1.0)
    with pytest.raises(ValueError):
        DyadicNode(1, 2)


def test_scope_examples():
    s = scope(DyadicNode(0, 0), 0.5, 1)
    assert s.cutoff_level == 2
    assert set(s) == {DyadicNode(0, 0), DyadicNode(1, 0), DyadicNode(1, 1)}
    assert list(scope(DyadicNode(1, 1), 0.5, 1)) == [DyadicNode(1, 1)]


def test_scope_rejects_root_at_cutoff():
    with pytest.raises(ValueError):
        scope(DyadicNode(2, 0), 0.5, 1)


def test_scope_counts_and_partition(rng):
    for _ in range(200):
        lam, eta = rng.uniform(0.02, 0.9), rng.uniform(1, 2)
        cutoff = max_scale(lam, eta)
        j = int(rng.integers(0, cutoff))
        k = int(rng.integers(0, 1 << j))
        s = scope(DyadicNode(j, k), lam, eta)
        assert DyadicNode(j, k) in s
        for lev in range(j, cutoff):
            r = s.positions(lev)
            assert len(r) == 2 ** (lev - j)
            assert r.start == k * 2 ** (lev - j) and r.stop == (k + 1) * 2 ** (lev - j)
        assert s.count(cutoff) == 0


def test_scope_is_lazy():
    s = TreeScope(DyadicNode(0, 0), 60)
    it = iter(s)
    assert next(it) == DyadicNode(0, 0)
    assert len(s) == 2 ** 60 - 1
    assert DyadicNode(59, 2 ** 58) in s


def test_ancestors_examples():
    assert ancestors(DyadicNode(2, 3), 0.3, 1) == [DyadicNode(2, 3), DyadicNode(1, 1), DyadicNode(0, 0)]
    assert ancestors(DyadicNode(0, 0), 0.3, 1) == [DyadicNode(0, 0)]


@settings(max_examples=100, deadline=None)
@given(a=node_strategy(6), n=node_strategy(6),
       lam=st.floats(0.05, 0.95), eta=st.floats(1, 3))
def test_scope_ancestor_duality(a, n, lam, eta):
    cutoff = max_scale(lam, eta)
    if a.level >= cutoff or n.level >= cutoff:
        return
    assert (n in scope(a, lam, eta)) == (a in ancestors(n, lam, eta))


def test_tree_max_examples():
    root = DyadicNode(0, 0)
    assert tree_max(zero_field(3), root, 0.5, 1) == 0.0
    f = zero_field(8)
    f.set(0, 0, -0.7)
    assert tree_max(f, root, 0.5, 1) == 0.7
    assert tree_max(f, root, 0.1, 1) == 0.7
    g = CoefficientField([[0.0], [0.1], [0.8, 0.2]])
    assert tree_max(g, root, 0.5, 1) == 0.8


def test_tree_max_bound_short_circuit():
    g = CoefficientField([[0.0], [0.9], [0.1, 0.95]])
    assert tree_max(g, DyadicNode(0, 0), 0.5, 1, bound=0.5) == 0.9


def test_tree_max_missing_levels():
    with pytest.raises(ValueError):
        tree_max(zero_field(2), DyadicNode(0, 0), 0.1, 1)


def brute_tree_max(field, node, lam, eta):
    return max(abs(field.get(n.level, n.position)) for n in scope(node, lam, eta))


def test_tree_max_vs_enumeration(rng):
    for _ in range(50):
        f = random_field(rng, 9)
        lam = rng.uniform(0.05, 0.9)
        cutoff = max_scale(lam, 1)
        for _ in range(5):
            j = int(rng.integers(0, cutoff))
            n = DyadicNode(j, int(rng.integers(0, 1 << j)))
            assert tree_max(f, n, lam, 1) == brute_tree_max(f, n, lam, 1)


def test_tree_max_decreasing_in_lambda(rng):
    grid = np.linspace(0.05, 0.7, 30)
    for _ in range(30):
        f = random_field(rng, 12)
        vals = [tree_max(f, DyadicNode(0, 0), lam, 1.0) for lam in grid]
        assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_subtree_max_matches_tree_max(rng):
    f = random_field(rng, 7)
    lam = 0.2  # cutoff 5 for eta = 1
    bar = subtree_max(f.detail_levels(), 5)
    for j in range(5):
        for k in range(1 << j):
            assert bar[j][k] == tree_max(f, DyadicNode(j, k), lam, 1)


def test_ancestor_closure():
    marked = [np.array([False]), np.array([False, False]), np.array([False, False, True, False])]
    closed = ancestor_closure(marked)
    assert [list(m) for m in closed] == [[True], [False, True], [False, False, True, False]]
