import re

import numpy as np
import pytest

from hardtree import CoefficientField
from hardtree.estimators import Threshold

_ACCEPTANCE = []


def random_field(rng, max_level, scale=1.0, sparse=False):
    levels = [rng.normal(0, scale, 1)]
    for j in range(max_level):
        v = rng.normal(0, scale, 1 << j)
        if sparse:
            v = np.where(rng.random(v.size) < 0.8, v * 0.1, v)
        levels.append(v)
    return CoefficientField(levels)


def threshold_for_depth(depth, eta=1.0):
    """A threshold whose cutoff level is exactly ``depth`` (midway in the bracket)."""
    lam = 2.0 ** (-(depth - 0.5) / (2 * eta))
    t = Threshold(lam, eta)
    assert t.j_lambda == depth
    return t


def three_node_field():
    """y_00 = 0.1, y_10 = 0.8, y_11 = 0.2 with scaling coefficient 0.3."""
    return CoefficientField([[0.3], [0.1], [0.8, 0.2]])


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion."""
    def record(criterion, passed, detail):
        _ACCEPTANCE.append((criterion, bool(passed), detail))
        return passed
    return record


def _criterion_key(row):
    num, rest = re.match(r"(\d+)(.*)", str(row[0])).groups()
    return int(num), rest


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in sorted(_ACCEPTANCE, key=_criterion_key):
        terminalreporter.write_line(
            f"{'PASS' if passed else 'FAIL'}  criterion {criterion:>3}: {detail}")
