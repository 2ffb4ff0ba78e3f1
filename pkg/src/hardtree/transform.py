"""Periodized orthonormal discrete wavelet transforms on [0, 1).

Coefficients are normalized for the discrete inner product
``<x, y> = mean(x * y)``, so for ``n = 2**J`` samples the coefficient
vector has squared norm ``mean(x**2)``.  Under this convention the Haar
coefficient of a sampled ``psi_jk`` is exactly 1, and ``synthesize`` returns
function values on the grid ``i / n``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .coefficients import CoefficientField

MAX_VANISHING_MOMENTS = 10


@functools.lru_cache(maxsize=None)
def daubechies_lowpass(n_moments: int) -> tuple[float, ...]:
    """Extremal-phase Daubechies low-pass filter with ``n_moments`` zeros at pi.

    Built by spectral factorization of the half-band polynomial at 50
    digits, then rounded to float.  Coefficients sum to sqrt(2) and are
    ordered as in the usual tables (db2: 0.4830, 0.8365, 0.2241, -0.1294).
    """
    if not 1 <= n_moments <= MAX_VANISHING_MOMENTS:
        raise ValueError(
            f"vanishing moments must be in 1..{MAX_VANISHING_MOMENTS}, got {n_moments}")
    N = n_moments
    with mpmath.workdps(50):
        # Q(z) = z^(N-1) * sum_k C(N-1+k, k) y^k,  y = -(z-1)^2 / (4z)
        poly = [mpmath.mpf(0)] * (2 * N - 1)  # ascending powers of z
        for k in range(N):
            c = mpmath.binomial(N - 1 + k, k) * (mpmath.mpf(-1) / 4) ** k
            # (z-1)^(2k) * z^(N-1-k)
            for i in range(2 * k + 1):
                poly[N - 1 - k + i] += (c * mpmath.binomial(2 * k, i)
                                        * (-1) ** (2 * k - i))
        roots = (mpmath.polyroots(poly[::-1], maxsteps=500, extraprec=200)
                 if N > 1 else [])
        inside = [r for r in roots if abs(r) < 1]
        h = [mpmath.mpf(1)]
        for factor_root in inside:
            h = _poly_mul(h, [-factor_root, 1])
        for _ in range(N):
            h = _poly_mul(h, [1, 1])
        h = [mpmath.re(c) for c in h]
        scale = mpmath.sqrt(2) / mpmath.fsum(h)
        return tuple(float(c * scale) for c in reversed(h))


def _poly_mul(a, b):
    out = [mpmath.mpf(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


@dataclass(frozen=True)
class WaveletBasis:
    """An orthonormal compactly supported wavelet basis.

    ``family`` is ``"haar"`` or ``"daubechies"``; Haar is Daubechies with
    one vanishing moment.
    """

    family: str
    vanishing_moments: int
    lowpass: np.ndarray = field(repr=False, compare=False)

    @classmethod
    def haar(cls) -> "WaveletBasis":
        s = 1.0 / np.sqrt(2.0)
        return cls("haar", 1, np.array([s, s]))

    @classmethod
    def daubechies(cls, n_moments: int) -> "WaveletBasis":
        if n_moments == 1:
            return cls.haar()
        return cls("daubechies", n_moments,
                   np.array(daubechies_lowpass(n_moments)))

    @classmethod
    def from_name(cls, name: str) -> "WaveletBasis":
        """Parse ``haar`` or ``dbN``."""
        name = name.strip().lower()
        if name == "haar":
            return cls.haar()
        if name.startswith("db") and name[2:].isdigit():
            return cls.daubechies(int(name[2:]))
        raise ValueError(f"unknown basis {name!r}; use 'haar' or 'dbN'")

    @property
    def name(self) -> str:
        return "haar" if self.is_haar else f"db{self.vanishing_moments}"

    @property
    def is_haar(self) -> bool:
        return self.vanishing_moments == 1

    @property
    def highpass(self) -> np.ndarray:
        h = self.lowpass
        signs = np.where(np.arange(h.size) % 2 == 0, 1.0, -1.0)
        return signs * h[::-1]

    @property
    def support_length(self) -> int:
        """Support size of the mother wavelet, ``2N - 1``."""
        return 2 * self.vanishing_moments - 1


def _is_power_of_two(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


def _windows(n: int, taps: int) -> np.ndarray:
    # row k holds indices 2k, 2k+1, ..., 2k+taps-1 (mod n)
    return (2 * np.arange(n // 2)[:, None] + np.arange(taps)[None, :]) % n


def analyze(samples: np.ndarray, basis: WaveletBasis) -> CoefficientField:
    """Full-depth forward transform of ``2**J`` equispaced samples."""
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 1 or not _is_power_of_two(x.size):
        raise ValueError(f"sample length must be a power of two, got {x.shape}")
    n = x.size
    if not basis.is_haar and n < basis.lowpass.size:
        raise ValueError(
            f"{basis.name} needs at least {basis.lowpass.size} samples, got {n}")
    J = n.bit_length() - 1
    h, g = basis.lowpass, basis.highpass
    approx = x / np.sqrt(n)
    details = [None] * J
    for j in range(J - 1, -1, -1):
        win = approx[_windows(approx.size, h.size)]
        details[j] = win @ g
        approx = win @ h
    return CoefficientField([approx] + details)


def synthesize(field: CoefficientField, basis: WaveletBasis) -> np.ndarray:
    """Inverse of :func:`analyze`; returns ``2**max_level`` samples."""
    if field.n_scaling != 1:
        raise ValueError("synthesize expects a single scaling coefficient")
    h, g = basis.lowpass, basis.highpass
    approx = np.array(field.level(-1), dtype=np.float64)
    for j in range(field.max_level):
        n = 2 * approx.size
        idx = _windows(n, h.size)
        out = np.zeros(n)
        np.add.at(out, idx, approx[:, None] * h[None, :]
                  + field.level(j)[:, None] * g[None, :])
        approx = out
    return approx * np.sqrt(approx.size)
