"""Spectra of symmetric matrices and the statistics computed from them."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .eigen import symmetric_eigh
from .io import write_csv, write_json

RANK_RTOL = 1e-10


@dataclass
class Spectrum:
    """Ascending eigenvalues plus provenance (law, n, d, seed, scale, ...)."""

    eigenvalues: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=np.float64)
        if ev.ndim != 1:
            raise ValueError("eigenvalues must be one-dimensional")
        if np.any(np.diff(ev) < 0):
            ev = np.sort(ev)
        self.eigenvalues = ev

    def __len__(self):
        return self.eigenvalues.size

    def shifted(self, a: float = 0.0, b: float = 1.0) -> Spectrum:
        """Spectrum of ``a + b*M`` (order is fixed up if ``b < 0``)."""
        return Spectrum(a + b * self.eigenvalues, dict(self.meta))


@dataclass(frozen=True)
class UpperHalfPoint:
    re: float
    im: float

    def __post_init__(self):
        if not self.im > 0:
            raise ValueError(f"point must lie in the upper half-plane, got im={self.im}")

    @property
    def z(self) -> complex:
        return complex(self.re, self.im)

    @classmethod
    def parse(cls, text: str) -> UpperHalfPoint:
        """Parse ``"a+bi"`` (also ``"bi"``, ``"a-bi"`` is rejected by the im > 0 check)."""
        z = complex(text.strip().replace(" ", "").replace("i", "j"))
        return cls(z.real, z.imag)


def _as_point(z) -> UpperHalfPoint:
    if isinstance(z, UpperHalfPoint):
        return z
    z = complex(z)
    return UpperHalfPoint(z.real, z.imag)


def eig_symmetric(m: np.ndarray, meta: dict | None = None) -> Spectrum:
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    scale = float(np.max(np.abs(m))) if m.size else 0.0
    if np.max(np.abs(m - m.T), initial=0.0) > 1e-12 * max(scale, 1.0):
        raise ValueError("matrix is not symmetric")
    return Spectrum(symmetric_eigh(m), dict(meta or {}))


def stieltjes(sp: Spectrum, z) -> complex:
    """``(1/N) sum_k 1/(lambda_k - z)``."""
    z = _as_point(z).z
    return complex(np.mean(1.0 / (sp.eigenvalues - z)))


def ks_distance(sp: Spectrum, cdf: Callable) -> float:
    """One-sample Kolmogorov-Smirnov distance of the ESD to ``cdf``."""
    x = sp.eigenvalues
    n = x.size
    f = np.asarray(cdf(x), dtype=np.float64)
    k = np.arange(1, n + 1)
    return float(max(np.max(k / n - f), np.max(f - (k - 1) / n), 0.0))


def ks_two_sample(a: Spectrum, b: Spectrum) -> float:
    """Sup distance between the two empirical CDFs."""
    xa, xb = a.eigenvalues, b.eigenvalues
    grid = np.concatenate([xa, xb])
    fa = np.searchsorted(xa, grid, side="right") / xa.size
    fb = np.searchsorted(xb, grid, side="right") / xb.size
    return float(np.max(np.abs(fa - fb)))


def quantiles(x: np.ndarray, levels: np.ndarray) -> np.ndarray:
    """Linear interpolation of order statistics, ``x_(k)`` sitting at level ``(k-1/2)/n``."""
    return np.quantile(np.asarray(x, dtype=np.float64), levels, method="hazen")


def qq_levels(k: int) -> np.ndarray:
    return (np.arange(1, k + 1) - 0.5) / k


def qq_pairs(a: Spectrum, b: Spectrum) -> np.ndarray:
    """``(K, 2)`` array of matched quantiles at levels ``(k-1/2)/K``, ``K = min(len)``."""
    if len(a) == 0 or len(b) == 0:
        raise ValueError("empty spectrum")
    levels = qq_levels(min(len(a), len(b)))
    return np.column_stack([quantiles(a.eigenvalues, levels), quantiles(b.eigenvalues, levels)])


def numerical_rank(delta: np.ndarray, rtol: float = RANK_RTOL) -> int:
    fro = float(np.linalg.norm(delta))
    if fro == 0.0:
        return 0
    # singular values of a symmetric matrix are |eigenvalues|
    sv = np.abs(symmetric_eigh(delta))
    return int(np.sum(sv > rtol * fro))


@dataclass(frozen=True)
class RankPerturbationCheck:
    lhs: float
    bound: float
    ok: bool


def rank_perturbation_check(a: np.ndarray, b: np.ndarray, z) -> RankPerturbationCheck:
    """``|tr(A-z)^{-1} - tr(B-z)^{-1}|`` against ``rank(A-B)/Im z``."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    p = _as_point(z)
    n = a.shape[0]
    lhs = abs(n * stieltjes(eig_symmetric(a), p) - n * stieltjes(eig_symmetric(b), p))
    bound = numerical_rank(a - b) / p.im
    return RankPerturbationCheck(lhs, bound, lhs <= bound * (1 + 1e-9))


# -- serialization -----------------------------------------------------------

def write_spectrum(sp: Spectrum, path) -> list[Path]:
    """Write ``index,eigenvalue`` CSV plus a JSON sidecar with ``meta``."""
    path = Path(path)
    rows = [(k, v) for k, v in enumerate(sp.eigenvalues)]
    write_csv(path, ["index", "eigenvalue"], rows)
    sidecar = path.with_suffix(".json")
    write_json(sidecar, sp.meta)
    return [path, sidecar]


def read_spectrum(path) -> Spectrum:
    path = Path(path)
    with open(path, newline="") as fh:
        values = [float(row["eigenvalue"]) for row in csv.DictReader(fh)]
    sidecar = path.with_suffix(".json")
    meta = json.loads(sidecar.read_text()) if sidecar.exists() else {}
    return Spectrum(np.array(values), meta)
