"""Monte Carlo risk estimation, rate fitting and embedding experiments.

Replicate ``r`` of an experiment seeded with ``seed`` always draws its noise
from ``replicate_rng(seed, r)``; the same stream is reused across noise
levels and across rules, which pairs every comparison.  Noise is drawn
level by level, so a shallow observation is a prefix of a deeper one from
the same stream.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .coefficients import CoefficientField, squared_distance, tail_energy
from .estimators import EstimateResult, KeepMask, hard_threshold, hard_tree
from .noise import NoiseConfig, default_m, observe_levels, replicate_rng
from .spaces import (
    HFunctionParams,
    besov_stat,
    hybrid_besov_stat,
    lambda_grid,
    make_h_function,
    tree_weak_besov_stat,
    weak_besov_stat,
)

logger = logging.getLogger(__name__)

RULES = {"hard": hard_threshold, "tree": hard_tree}
DEFAULT_EPSILONS = tuple(2.0 ** -i for i in range(4, 10))
DEFAULT_REPLICATES = 200


class DegenerateThresholdWarning(UserWarning):
    pass


def effective_depth(config: NoiseConfig) -> int:
    """``j_lambda``, or 0 (scaling level only) when the threshold is >= 1."""
    if config.degenerate:
        warnings.warn(
            f"threshold {config.lam:.4g} >= 1 at epsilon={config.epsilon}: "
            "estimate keeps the scaling level only",
            DegenerateThresholdWarning, stacklevel=3)
        return 0
    return config.j_lambda


def estimate(y: CoefficientField, rule: str, config: NoiseConfig) -> EstimateResult:
    """Apply ``rule`` to observations ``y``, handling a degenerate threshold."""
    if rule not in RULES:
        raise ValueError(f"unknown rule {rule!r}; use one of {sorted(RULES)}")
    if config.degenerate:
        return EstimateResult(y.truncated(0), KeepMask([]), config.lam, 0)
    return RULES[rule](y, config)


def replicate_loss(truth: CoefficientField, rule: str, config: NoiseConfig,
                   seed: int, replicate: int = 0) -> float:
    """Squared error of one replicate, truncation energy included."""
    depth = effective_depth(config)
    y = observe_levels(truth, config.epsilon, depth, replicate_rng(seed, replicate))
    est = estimate(y, rule, config).estimate
    return squared_distance(est, truth.truncated(depth)) + tail_energy(truth, depth)


@dataclass
class RiskEstimate:
    """Monte Carlo risk; ``mean`` is exactly ``detail_mean + truncation``."""

    mean: float
    stderr: float
    detail_mean: float
    truncation: float
    replicates: int
    lam: float
    j_lambda: int


def _summarize(losses: np.ndarray, truncation: float, lam: float,
               depth: int) -> RiskEstimate:
    n = losses.size
    detail_mean = math.fsum(losses) / n
    stderr = float(np.std(losses, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return RiskEstimate(detail_mean + truncation, stderr, detail_mean,
                        truncation, n, lam, depth)


def mc_risk(truth: CoefficientField, rule: str, config: NoiseConfig,
            replicates: int, seed: int) -> RiskEstimate:
    """Estimate ``E ||f_hat - f||^2`` for a fixed truth.

    The loss on levels below the cutoff is averaged over replicates; the
    energy of the truth at and past the cutoff is added exactly.
    """
    if replicates < 1:
        raise ValueError(f"replicates must be >= 1, got {replicates}")
    depth = effective_depth(config)
    if truth.max_level < depth:
        raise ValueError(
            f"truth resolves levels below {truth.max_level}, need {depth}")
    head = truth.truncated(depth)
    losses = np.empty(replicates)
    for r in range(replicates):
        y = observe_levels(truth, config.epsilon, depth, replicate_rng(seed, r))
        losses[r] = squared_distance(estimate(y, rule, config).estimate, head)
    return _summarize(losses, tail_energy(truth, depth), config.lam, depth)


@dataclass
class RiskCurve:
    epsilons: np.ndarray
    lambdas: np.ndarray
    risks: np.ndarray
    stderrs: np.ndarray
    replicates: np.ndarray
    points: list[RiskEstimate] = field(default_factory=list, repr=False)

    def __post_init__(self):
        arrays = [np.asarray(a, dtype=np.float64) for a in
                  (self.epsilons, self.lambdas, self.risks, self.stderrs)]
        self.epsilons, self.lambdas, self.risks, self.stderrs = arrays
        self.replicates = np.asarray(self.replicates, dtype=np.int64)
        if len({a.size for a in arrays} | {self.replicates.size}) != 1:
            raise ValueError("risk curve arrays differ in length")
        if np.any(self.risks < 0) or np.any(self.stderrs < 0):
            raise ValueError("risks and standard errors must be non-negative")


def risk_curve(truth: CoefficientField, rule: str, epsilons, m: float,
               eta: float = 1.0, replicates: int = DEFAULT_REPLICATES,
               seed: int = 0) -> RiskCurve:
    pts = [mc_risk(truth, rule, NoiseConfig(e, m, eta), replicates, seed)
           for e in epsilons]
    return RiskCurve(np.asarray(epsilons), [p.lam for p in pts],
                     [p.mean for p in pts], [p.stderr for p in pts],
                     [p.replicates for p in pts], pts)


@dataclass
class RateFit:
    slope: float
    intercept: float
    r_squared: float
    n_points: int


def rate_fit(curve: RiskCurve) -> RateFit:
    """Least squares of ``log risk`` on ``log lambda``."""
    ok = curve.risks > 0
    if not np.all(ok):
        warnings.warn(f"dropping {int((~ok).sum())} non-positive risk(s) from the fit",
                      stacklevel=2)
    x = np.log(curve.lambdas[ok])
    y = np.log(curve.risks[ok])
    if x.size < 4:
        raise ValueError(f"rate fit needs >= 4 positive risks, got {x.size}")
    A = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return RateFit(float(slope), float(intercept), r2, int(x.size))


def target_exponent(s: float) -> float:
    """Exponent ``4s / (1 + 2s)`` of the rate ``lambda_eps^(4s/(1+2s))``."""
    return 4 * s / (1 + 2 * s)


# paired comparison ---------------------------------------------------------

@dataclass
class CompareRow:
    epsilon: float
    lambda_tree: float
    lambda_hard: float
    risk_tree: RiskEstimate
    risk_hard: RiskEstimate
    ratio: float
    dominance_checked: bool
    mean_extra_kept: float  # tree kept count minus hard kept count, averaged


def compare_rules(truth: CoefficientField, epsilons, eta: float = 1.0,
                  replicates: int = DEFAULT_REPLICATES, seed: int = 0,
                  m_tree: float | None = None, m_hard: float | None = None,
                  matched_m: bool = False) -> list[CompareRow]:
    """Risks of both rules on shared noise draws.

    By default each rule uses its own default constant for ``m``;
    ``matched_m`` runs both with the tree constant.  When the two thresholds
    coincide, every replicate is checked for the kept-set inclusion
    ``hard ⊆ tree`` and a violation raises ``AssertionError``.
    """
    m_tree = default_m("tree", eta) if m_tree is None else m_tree
    if matched_m:
        m_hard = m_tree
    elif m_hard is None:
        m_hard = default_m("hard", eta)
    rows = []
    for e in epsilons:
        ct, ch = NoiseConfig(e, m_tree, eta), NoiseConfig(e, m_hard, eta)
        dt, dh = effective_depth(ct), effective_depth(ch)
        depth = max(dt, dh)
        if truth.max_level < depth:
            raise ValueError(
                f"truth resolves levels below {truth.max_level}, need {depth}")
        same = ct.lam == ch.lam
        lt, lh, extra = np.empty(replicates), np.empty(replicates), np.empty(replicates)
        for r in range(replicates):
            y = observe_levels(truth, e, depth, replicate_rng(seed, r))
            et = estimate(y.truncated(dt), "tree", ct)
            eh = estimate(y.truncated(dh), "hard", ch)
            lt[r] = squared_distance(et.estimate, truth.truncated(dt))
            lh[r] = squared_distance(eh.estimate, truth.truncated(dh))
            if same and not eh.mask.kept() <= et.mask.kept():
                raise AssertionError(
                    f"replicate {r}, epsilon {e}: hard kept set not inside tree kept set")
            extra[r] = et.mask.count() - eh.mask.count()
        rt = _summarize(lt, tail_energy(truth, dt), ct.lam, dt)
        rh = _summarize(lh, tail_energy(truth, dh), ch.lam, dh)
        rows.append(CompareRow(e, ct.lam, ch.lam, rt, rh,
                               rt.mean / rh.mean if rh.mean > 0 else math.nan,
                               same, float(extra.mean())))
    return rows


def curves_from_rows(rows: list[CompareRow]) -> dict[str, RiskCurve]:
    out = {}
    for rule in ("tree", "hard"):
        pts = [getattr(r, f"risk_{rule}") for r in rows]
        out[rule] = RiskCurve([r.epsilon for r in rows], [p.lam for p in pts],
                              [p.mean for p in pts], [p.stderr for p in pts],
                              [p.replicates for p in pts], pts)
    return out


# embedding experiments -----------------------------------------------------

def _growth(values: list[float]) -> list[float]:
    return [b / a if a > 0 else math.inf for a, b in zip(values, values[1:])]


@dataclass
class EmbeddingReport:
    name: str
    params: dict
    levels: list[int]
    growing_label: str
    bounded_label: str
    growing: list[float]
    bounded: list[float]
    extra: dict = field(default_factory=dict)

    @property
    def growing_ratios(self) -> list[float]:
        return _growth(self.growing)

    @property
    def bounded_ratios(self) -> list[float]:
        return _growth(self.bounded)

    @property
    def separated(self) -> bool:
        """Growing statistic rises at every step and the bounded one has levelled off."""
        return (all(g > 1 for g in self.growing_ratios)
                and self.bounded_ratios[-1] < 1.1)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["growing_ratios"] = self.growing_ratios
        d["bounded_ratios"] = self.bounded_ratios
        d["separated"] = self.separated
        return d


def _check_s(s: float) -> None:
    if not 0 < s < 1:
        raise ValueError(f"strict inclusions are established for 0 < s < 1, got s={s}")


def tree_vs_weak_embedding(s: float, eta: float, levels,
                           grid=None) -> EmbeddingReport:
    """Weak vs tree weak statistics on the truncated witness ``h[1, 1/(eta(1+2s)), 1, 1/(2eta)]``.

    The weak statistic should keep growing with depth while the tree
    statistic levels off.
    """
    _check_s(s)
    if not eta > 1:
        raise ValueError(f"eta must be > 1, got {eta}")
    levels = list(levels)
    if len(levels) < 2:
        raise ValueError("need at least two truncation levels")
    grid = lambda_grid() if grid is None else grid
    r = 2 / (1 + 2 * s)
    u = s / (eta * (1 + 2 * s))
    weak, tree, hybrid = [], [], []
    for L in levels:
        h = make_h_function(HFunctionParams.tree_vs_weak_witness(s, eta, L))
        weak.append(weak_besov_stat(h, r, grid).sup)
        tree.append(tree_weak_besov_stat(h, r, eta, grid).sup)
        hybrid.append(hybrid_besov_stat(h, u).sup)
    return EmbeddingReport(
        "tree_vs_weak", {"s": s, "eta": eta, "r": r}, levels,
        "weak_besov_sup", "tree_weak_besov_sup", weak, tree,
        {"hybrid_besov_u": u, "hybrid_besov_sup": hybrid})


def eta_embedding(s: float, eta1: float, eta2: float, levels) -> EmbeddingReport:
    """Besov statistics at ``s/(eta_i (1+2s))`` on the witness ``h[0, 1/(eta2(1+2s)), 1/(2eta2), 1/(2eta2)]``."""
    _check_s(s)
    if not 1 <= eta1 < eta2:
        raise ValueError(f"need 1 <= eta1 < eta2, got {eta1}, {eta2}")
    levels = list(levels)
    if len(levels) < 2:
        raise ValueError("need at least two truncation levels")
    u1 = s / (eta1 * (1 + 2 * s))
    u2 = s / (eta2 * (1 + 2 * s))
    b1, b2 = [], []
    for L in levels:
        h = make_h_function(HFunctionParams.eta_witness(s, eta2, L))
        b1.append(besov_stat(h, u1).sup)
        b2.append(besov_stat(h, u2).sup)
    return EmbeddingReport(
        "eta", {"s": s, "eta1": eta1, "eta2": eta2, "u1": u1, "u2": u2}, levels,
        "besov_sup_eta1", "besov_sup_eta2", b1, b2)
