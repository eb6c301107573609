"""Wigner semicircle law with scale ``sigma`` (support ``[-2 sigma, 2 sigma]``)."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SemicircleRef:
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    @classmethod
    def for_orthogonal_blocks(cls, d: int) -> SemicircleRef:
        """Limit for Haar O(d)/SO(d) blocks after scaling by ``1/sqrt(nd)``."""
        return cls(1.0 / math.sqrt(d))

    @property
    def edge(self) -> float:
        return 2.0 * self.sigma

    def density(self, x):
        return sc_density(self, x)

    def cdf(self, x):
        return sc_cdf(self, x)

    def quantile(self, q):
        return sc_quantile(self, q)

    def stieltjes(self, z):
        return sc_stieltjes(self, z)


def sc_density(ref: SemicircleRef, x):
    s = ref.sigma
    x = np.asarray(x, dtype=np.float64)
    inside = np.abs(x) <= 2 * s
    out = np.where(inside, np.sqrt(np.clip(4 * s * s - x * x, 0.0, None)) / (2 * np.pi * s * s), 0.0)
    return float(out) if out.ndim == 0 else out


def sc_cdf(ref: SemicircleRef, x):
    s = ref.sigma
    x = np.asarray(x, dtype=np.float64)
    xc = np.clip(x, -2 * s, 2 * s)
    out = 0.5 + xc * np.sqrt(np.clip(4 * s * s - xc * xc, 0.0, None)) / (4 * np.pi * s * s)
    out = out + np.arcsin(xc / (2 * s)) / np.pi
    out = np.where(x <= -2 * s, 0.0, np.where(x >= 2 * s, 1.0, np.clip(out, 0.0, 1.0)))
    return float(out) if out.ndim == 0 else out


def sc_quantile(ref: SemicircleRef, q, tol: float = 1e-13):
    """Inverse CDF by bisection on ``[-2 sigma, 2 sigma]`` (vectorized)."""
    q = np.asarray(q, dtype=np.float64)
    if np.any((q <= 0) | (q >= 1)):
        raise ValueError("quantile level must lie in (0, 1)")
    lo = np.full(q.shape, -2 * ref.sigma)
    hi = np.full(q.shape, 2 * ref.sigma)
    # fixed iteration count: interval 4 sigma halves to below tol * sigma
    steps = int(math.ceil(math.log2(4.0 / tol))) + 1
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        below = sc_cdf(ref, mid) < q
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    out = 0.5 * (lo + hi)
    return float(out) if out.ndim == 0 else out


def sc_stieltjes(ref: SemicircleRef, z) -> complex:
    """Root of ``sigma^2 m^2 + z m + 1 = 0`` with ``Im m > 0``."""
    z = complex(z.re, z.im) if hasattr(z, "re") else complex(z)
    if not z.imag > 0:
        raise ValueError("z must lie in the upper half-plane")
    s2 = ref.sigma**2
    root = cmath.sqrt(z * z - 4 * s2)
    m = (-z + root) / (2 * s2)
    if m.imag <= 0:
        m = (-z - root) / (2 * s2)
    return m
