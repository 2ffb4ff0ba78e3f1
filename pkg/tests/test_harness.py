import math

import numpy as np
import pytest

from hardtree.coefficients import CoefficientField, tail_energy, zero_field
from hardtree.estimators import hard_threshold, hard_tree
from hardtree.harness import (
    DEFAULT_EPSILONS,
    DegenerateThresholdWarning,
    RiskCurve,
    compare_rules,
    curves_from_rows,
    eta_embedding,
    estimate,
    mc_risk,
    rate_fit,
    replicate_loss,
    risk_curve,
    target_exponent,
    tree_vs_weak_embedding,
)
from hardtree.noise import NoiseConfig, default_m, observe_levels, replicate_rng
from hardtree.spaces import HFunctionParams, make_h_function
from hardtree.tree import DyadicNode, ancestors

from conftest import random_field


def decaying_truth(rng, depth=14):
    f = random_field(rng, depth)
    levels = [f.level(-1).copy()] + [f.level(j) * 2.0 ** (-j) for j in range(depth)]
    return CoefficientField(levels)


def test_mc_risk_deterministic(rng):
    truth = decaying_truth(rng)
    cfg = NoiseConfig(2 ** -6, 2.0)
    a = mc_risk(truth, "tree", cfg, 30, seed=5)
    b = mc_risk(truth, "tree", cfg, 30, seed=5)
    assert a == b
    assert mc_risk(truth, "tree", cfg, 30, seed=6).mean != a.mean


def test_mc_risk_decomposition(rng):
    truth = decaying_truth(rng)
    cfg = NoiseConfig(2 ** -5, 3.0)
    r = mc_risk(truth, "hard", cfg, 20, seed=1)
    assert r.truncation == tail_energy(truth, cfg.j_lambda)
    assert r.mean == r.detail_mean + r.truncation
    losses = [replicate_loss(truth, "hard", cfg, 1, i) for i in range(20)]
    assert r.mean == pytest.approx(np.mean(losses), rel=1e-13)
    assert r.stderr == pytest.approx(np.std(losses, ddof=1) / math.sqrt(20), rel=1e-10)


def test_zero_truth_bound():
    truth = zero_field(12)
    cfg = NoiseConfig(2 ** -6, 1.0)
    r = mc_risk(truth, "hard", cfg, 100, seed=0)
    slots = (1 << cfg.j_lambda) - 1
    # scaling coefficient contributes eps^2; details are thresholded
    assert r.mean <= (slots + 1) * cfg.epsilon ** 2
    assert r.detail_mean < 0.5 * (slots + 1) * cfg.epsilon ** 2


def test_risk_approaches_truncation_floor(rng):
    truth = decaying_truth(rng, 16)
    eps = [2.0 ** -i for i in (4, 6, 8, 10)]
    gaps = []
    for e in eps:
        r = mc_risk(truth, "tree", NoiseConfig(e, 2.0), 10, seed=0)
        gaps.append(r.detail_mean)
    assert all(a > b for a, b in zip(gaps, gaps[1:]))


def test_mc_risk_validation(rng):
    with pytest.raises(ValueError):
        mc_risk(zero_field(8), "tree", NoiseConfig(0.1, 1.0), 0, 0)
    with pytest.raises(ValueError):
        mc_risk(zero_field(2), "tree", NoiseConfig(0.001, 2.0), 5, 0)
    with pytest.raises(ValueError):
        estimate(zero_field(4), "soft", NoiseConfig(0.1, 1.0))


def test_degenerate_threshold_warns():
    cfg = NoiseConfig(0.4, 10.0)
    truth = zero_field(4)
    truth.set(0, 0, 1.0)
    with pytest.warns(DegenerateThresholdWarning):
        r = mc_risk(truth, "tree", cfg, 5, 0)
    assert r.j_lambda == 0
    assert r.truncation == 1.0


def exact_curve(exponent, c=1.0):
    lams = np.array([0.3, 0.2, 0.1, 0.05, 0.02, 0.01])
    risks = c * lams ** exponent
    return RiskCurve(lams, lams, risks, np.zeros(6), np.ones(6, dtype=int))


@pytest.mark.parametrize("exponent", [2.0, target_exponent(1.0)])
def test_rate_fit_exact(exponent):
    fit = rate_fit(exact_curve(exponent, c=3.7))
    assert abs(fit.slope - exponent) <= 1e-12
    assert fit.intercept == pytest.approx(math.log(3.7), abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)


def test_rate_fit_drops_nonpositive():
    c = exact_curve(2.0)
    c.risks[0] = 0.0
    with pytest.warns(UserWarning):
        fit = rate_fit(c)
    assert fit.n_points == 5
    c.risks[:3] = 0.0
    with pytest.warns(UserWarning), pytest.raises(ValueError):
        rate_fit(c)


def test_risk_curve_validation():
    with pytest.raises(ValueError):
        RiskCurve([1, 2], [1, 2], [1.0], [0.0], [1])
    with pytest.raises(ValueError):
        RiskCurve([1], [1], [-1.0], [0.0], [1])


def test_compare_paired_and_dominance(rng):
    truth = decaying_truth(rng, 12)
    rows = compare_rules(truth, DEFAULT_EPSILONS[:3], replicates=10, seed=3, matched_m=True)
    for row in rows:
        assert row.dominance_checked
        assert row.lambda_tree == row.lambda_hard
        assert row.mean_extra_kept >= 0
        cfg = NoiseConfig(row.epsilon, default_m("tree", 1.0))
        assert row.risk_tree == mc_risk(truth, "tree", cfg, 10, seed=3)
        assert row.risk_hard == mc_risk(truth, "hard", cfg, 10, seed=3)
    curves = curves_from_rows(rows)
    assert list(curves["tree"].risks) == [r.risk_tree.mean for r in rows]


def test_compare_default_m_differs(rng):
    truth = decaying_truth(rng, 12)
    rows = compare_rules(truth, DEFAULT_EPSILONS[:2], replicates=5, seed=0)
    assert all(not r.dominance_checked and r.lambda_tree > r.lambda_hard for r in rows)


def test_zero_truth_rules_agree():
    rows = compare_rules(zero_field(12), DEFAULT_EPSILONS, replicates=50, seed=0,
                         matched_m=True)
    for r in rows:
        diff = abs(r.risk_tree.mean - r.risk_hard.mean)
        assert diff <= 2 * (r.risk_tree.stderr + r.risk_hard.stderr) + 1e-15


def test_spike_chain_differs_on_ancestors():
    truth = zero_field(10)
    truth.set(7, 77, 5.0)
    cfg = NoiseConfig(2 ** -7, 2.0)
    for r in range(20):
        y = observe_levels(truth, cfg.epsilon, cfg.j_lambda, replicate_rng(9, r))
        hard, tree = hard_threshold(y, cfg), hard_tree(y, cfg)
        extra = tree.mask.kept() - hard.mask.kept()
        chains = {(n.level, n.position) for j, k in hard.mask.kept()
                  for n in ancestors(DyadicNode(j, k), cfg.lam, cfg.eta)}
        assert extra <= chains
        assert (7, 77) in hard.mask.kept()
        diff = (tree.estimate - hard.estimate)
        changed = {(j, int(k)) for j, lev in diff.levels() if j >= 0
                   for k in np.flatnonzero(lev)}
        assert changed == {(j, k) for j, k in extra if y.get(j, k) != 0}


def test_embedding_validation():
    for s in (0.0, 1.0, 1.5):
        with pytest.raises(ValueError):
            tree_vs_weak_embedding(s, 2.0, [4, 5])
        with pytest.raises(ValueError):
            eta_embedding(s, 1.0, 2.0, [4, 5])
    with pytest.raises(ValueError):
        tree_vs_weak_embedding(0.5, 1.0, [4, 5])
    with pytest.raises(ValueError):
        eta_embedding(0.5, 2.0, 1.5, [4, 5])


def test_embedding_reports_small():
    rep = tree_vs_weak_embedding(0.5, 2.0, range(6, 10))
    assert len(rep.growing) == 4 and len(rep.growing_ratios) == 3
    d = rep.to_dict()
    assert d["params"]["r"] == 1.0 and "hybrid_besov_sup" in d["extra"]
    rep2 = eta_embedding(0.5, 1.0, 2.0, range(6, 10))
    assert all(g > 1 for g in rep2.growing_ratios)


@pytest.mark.xfail(strict=True, reason=(
    "the tree-vs-weak witness at eta = 1 has Besov smoothness exactly 1/4 only up to a "
    "logarithmic factor; its risk decays like lam*log(1/lam), which at these noise "
    "levels fits a slope near 0.72"))
def test_witness_slope_at_eta_one():
    truth = make_h_function(HFunctionParams.tree_vs_weak_witness(0.5, 1.0, 22))
    curve = risk_curve(truth, "tree", DEFAULT_EPSILONS, default_m("tree", 1.0),
                       replicates=200, seed=0)
    assert abs(rate_fit(curve).slope - 1.0) <= 0.25
