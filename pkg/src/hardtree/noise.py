"""Gaussian white-noise observation model in the wavelet domain."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coefficients import CoefficientField


def threshold_level(epsilon: float, m: float) -> float:
    """Universal threshold ``m * eps * sqrt(log(1/eps))`` (natural log)."""
    return m * epsilon * math.sqrt(math.log(1.0 / epsilon))


def max_scale(lam: float, eta: float) -> int:
    """Scale cutoff: the integer j with ``2**-j <= lam**(2 eta) < 2**(1-j)``.

    Equivalently the smallest j with ``2**j >= lam**(-2 eta)``.
    """
    if not 0.0 < lam < 1.0:
        raise ValueError(f"lambda must lie in (0, 1), got {lam}")
    if eta < 1.0:
        raise ValueError(f"eta must be >= 1, got {eta}")
    t = -2.0 * eta * math.log2(lam)
    nearest = round(t)
    # lam**(2 eta) landing on a power of two within rounding counts as equal
    if abs(t - nearest) <= _SNAP * max(1.0, t):
        return max(1, int(nearest))
    return max(1, math.ceil(t))


_SNAP = 1e-9


def default_m(rule: str, eta: float) -> float:
    """Smallest threshold constant for which the minimax rates are guaranteed.

    ``4 sqrt(3 eta)`` for the tree rule, ``4 sqrt(2 eta)`` for hard
    thresholding.
    """
    if rule == "tree":
        return 4.0 * math.sqrt(3.0 * eta)
    if rule == "hard":
        return 4.0 * math.sqrt(2.0 * eta)
    raise ValueError(f"unknown rule {rule!r}")


@dataclass(frozen=True)
class NoiseConfig:
    """Noise level ``epsilon``, threshold constant ``m`` and scale parameter ``eta``."""

    epsilon: float
    m: float
    eta: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.epsilon < 0.5:
            raise ValueError(f"epsilon must lie in (0, 1/2), got {self.epsilon}")
        if not self.m > 0.0:
            raise ValueError(f"m must be positive, got {self.m}")
        if not self.eta >= 1.0:
            raise ValueError(f"eta must be >= 1, got {self.eta}")

    @property
    def lam(self) -> float:
        return threshold_level(self.epsilon, self.m)

    @property
    def degenerate(self) -> bool:
        """True when the threshold is >= 1 and no detail level survives."""
        return self.lam >= 1.0

    @property
    def j_lambda(self) -> int:
        return max_scale(self.lam, self.eta)


def replicate_rng(seed: int, replicate: int) -> np.random.Generator:
    """Independent generator stream for one Monte Carlo replicate."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(replicate,)))


def observe_levels(truth: CoefficientField, epsilon: float, n_levels: int,
                   rng: np.random.Generator) -> CoefficientField:
    """``y = beta + epsilon * Z`` on levels ``-1 .. n_levels - 1``.

    Noise is drawn in one block, levels ascending, so a shallower
    observation from the same stream is a prefix of a deeper one.
    """
    if n_levels < 0:
        raise ValueError(f"n_levels must be >= 0, got {n_levels}")
    if truth.max_level < n_levels:
        raise ValueError(
            f"truth resolves levels below {truth.max_level}, "
            f"observation needs {n_levels}")
    beta = truth.truncated(n_levels).flat()
    z = rng.standard_normal(beta.size)
    return CoefficientField.from_flat(beta + epsilon * z, truth.n_scaling)


def observe(truth: CoefficientField, config: NoiseConfig,
            rng: np.random.Generator) -> CoefficientField:
    """Noisy coefficients up to (excluding) the cutoff ``j_lambda``."""
    return observe_levels(truth, config.epsilon, config.j_lambda, rng)
