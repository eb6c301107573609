"""Null-case graph connection Laplacian on the circle model.

Signals are i.i.d. Gaussian vectors on ``p`` equispaced points of the circle;
rotating by ``2 pi l / p`` is the cyclic shift ``np.roll(z, l)``.  The optimal
rotation between two signals is the first shift minimizing
``||z_i - roll(z_j, l)||``, and the minimum is the rotationally invariant
distance (RID).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats

from .groups import rotation2
from .io import write_csv, write_json
from .rng import RandomStream, gaussian_from_keys
from .spectral import Spectrum, eig_symmetric

# relative slack for treating FFT correlations as tied before exact resolution
_FFT_RTOL = 1e-9


@dataclass
class SurrogateEnsemble:
    data: np.ndarray  # (n, p)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def p(self) -> int:
        return self.data.shape[1]


@dataclass
class AlignmentResult:
    shifts: np.ndarray  # (n, n) int, entries in [0, p)
    rids: np.ndarray  # (n, n) float, symmetric, zero diagonal
    p: int

    @property
    def n(self) -> int:
        return self.shifts.shape[0]

    def upper(self):
        """``(i, j, shift, rid)`` arrays over pairs i < j."""
        iu, ju = np.triu_indices(self.n, 1)
        return iu, ju, self.shifts[iu, ju], self.rids[iu, ju]


def gen_surrogates(s: RandomStream, n: int, p: int) -> SurrogateEnsemble:
    """``n`` standard normal signals of length ``p``; signal i uses ``split(s, i)``."""
    if n < 2 or p < 2:
        raise ValueError("need n >= 2 and p >= 2")
    return SurrogateEnsemble(gaussian_from_keys(s.child_keys(np.arange(n)), p))


def cyclic_shift(z: np.ndarray, shift: int) -> np.ndarray:
    return np.roll(z, shift)


def shift_distances(zi: np.ndarray, zj: np.ndarray, shifts) -> np.ndarray:
    """``||zi - roll(zj, l)||`` for each ``l`` in ``shifts``, evaluated directly."""
    p = zi.size
    shifts = np.asarray(shifts, dtype=np.int64).reshape(-1)
    idx = (np.arange(p)[None, :] - shifts[:, None]) % p
    out = np.empty(shifts.size)
    for r in range(shifts.size):
        diff = zi - zj[idx[r]]
        out[r] = math.sqrt(float(np.dot(diff, diff)))
    return out


def _first_argmin(dist: np.ndarray, candidates: np.ndarray):
    best = np.min(dist)
    k = int(np.flatnonzero(dist == best)[0])
    return int(candidates[k]), float(best)


def align_pair(zi, zj, method: str = "brute"):
    """Optimal cyclic shift of ``zj`` onto ``zi`` and the resulting distance.

    Ties go to the smallest shift.  ``method="fft"`` ranks shifts by circular
    cross-correlation and re-evaluates the near-maximal ones exactly, so it
    returns the same answer as the exhaustive search.
    """
    zi = np.asarray(zi, dtype=np.float64)
    zj = np.asarray(zj, dtype=np.float64)
    if zi.shape != zj.shape or zi.ndim != 1:
        raise ValueError(f"signals must be 1-d of equal length, got {zi.shape} and {zj.shape}")
    p = zi.size
    if method == "brute":
        shifts = np.arange(p)
        return _first_argmin(shift_distances(zi, zj, shifts), shifts)
    if method == "fft":
        corr = np.fft.irfft(np.fft.rfft(zi) * np.conj(np.fft.rfft(zj)), n=p)
        return _resolve(zi, zj, corr)
    raise ValueError(f"unknown alignment method {method!r}")


def _resolve(zi, zj, corr):
    scale = math.sqrt(float(np.dot(zi, zi)) * float(np.dot(zj, zj)))
    cands = np.flatnonzero(corr >= corr.max() - _FFT_RTOL * max(scale, 1e-300))
    return _first_argmin(shift_distances(zi, zj, cands), cands)


def align_all(e: SurrogateEnsemble, method: str = "fft") -> AlignmentResult:
    """Align every pair i < j and mirror: ``shift(j,i) = (p - shift(i,j)) mod p``."""
    n, p = e.n, e.p
    z = e.data
    shifts = np.zeros((n, n), dtype=np.int64)
    rids = np.zeros((n, n))
    spectra = np.fft.rfft(z, axis=1) if method == "fft" else None
    for i in range(n - 1):
        if method == "fft":
            corr = np.fft.irfft(spectra[i][None, :] * np.conj(spectra[i + 1 :]), n=p, axis=1)
        for j in range(i + 1, n):
            if method == "fft":
                l, r = _resolve(z[i], z[j], corr[j - i - 1])
            else:
                l, r = align_pair(z[i], z[j], "brute")
            shifts[i, j] = l
            shifts[j, i] = (p - l) % p
            rids[i, j] = rids[j, i] = r
    return AlignmentResult(shifts, rids, p)


def epsilon_from_quantile(a: AlignmentResult, q: float = 0.25, squared: bool = False) -> float:
    """Lower order-statistic ``q``-quantile of the upper-triangle RIDs (optionally squared)."""
    if a.n < 2:
        raise ValueError("need at least two signals")
    if not 0 < q < 1:
        raise ValueError("quantile level must lie in (0, 1)")
    eps = float(np.quantile(a.upper()[3], q, method="lower"))
    return eps * eps if squared else eps


def affinities(a: AlignmentResult, epsilon: float) -> np.ndarray:
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    w = np.exp(-(a.rids**2) / epsilon)
    np.fill_diagonal(w, 0.0)
    return w


def build_S(a: AlignmentResult, epsilon: float) -> np.ndarray:
    """``2n x 2n`` matrix with block (i,j) = w_ij * rotation(2 pi shift_ij / p)."""
    n, p = a.n, a.p
    w = affinities(a, epsilon)
    s = np.zeros((n, 2, n, 2))
    iu, ju = np.triu_indices(n, 1)
    theta = 2.0 * np.pi * a.shifts[iu, ju] / p
    c, sn = np.cos(theta), np.sin(theta)
    blocks = np.empty((iu.size, 2, 2))
    blocks[:, 0, 0] = c
    blocks[:, 0, 1] = -sn
    blocks[:, 1, 0] = sn
    blocks[:, 1, 1] = c
    blocks *= w[iu, ju][:, None, None]
    s[iu, :, ju, :] = blocks
    # g_ji = g_ij^T, mirrored so S is exactly symmetric
    s[ju, :, iu, :] = np.swapaxes(blocks, 1, 2)
    return s.reshape(2 * n, 2 * n)


def build_D(a: AlignmentResult, epsilon: float) -> np.ndarray:
    if a.n < 2:
        raise ValueError("need at least two signals")
    degree = affinities(a, epsilon).sum(axis=1)
    return np.diag(np.repeat(degree, 2))


def gcl_spectrum(s: np.ndarray, d: np.ndarray, meta: dict | None = None) -> Spectrum:
    """Eigenvalues of ``D^{-1} S`` via the similar matrix ``D^{-1/2} S D^{-1/2}``."""
    dd = np.diag(d) if np.ndim(d) == 2 else np.asarray(d, dtype=np.float64)
    if np.any(~(dd > 0)):
        raise ValueError("D must have strictly positive diagonal entries")
    r = 1.0 / np.sqrt(dd)
    return eig_symmetric(s * (r[:, None] * r[None, :]), meta)


# -- null-case statistics ----------------------------------------------------

@dataclass(frozen=True)
class ChiSquareResult:
    chi2: float
    pvalue: float
    dof: int


def _bin_shift(shift, p: int, bins: int):
    # angle 2 pi l / p falls in interval floor(l * bins / p)
    return (np.asarray(shift, dtype=np.int64) * bins) // p


def uniformity_test(a: AlignmentResult, bins: int = 20) -> ChiSquareResult:
    """Chi-square test of the upper-triangle shift angles against the uniform law on the grid."""
    if bins < 2:
        raise ValueError("bins must be >= 2")
    shifts = a.upper()[2]
    observed = np.bincount(_bin_shift(shifts, a.p, bins), minlength=bins)
    grid_per_bin = np.bincount(_bin_shift(np.arange(a.p), a.p, bins), minlength=bins)
    expected = shifts.size * grid_per_bin / a.p
    if np.any(expected < 5):
        raise ValueError("fewer than 5 expected counts in some bin; use fewer bins or more pairs")
    res = stats.chisquare(observed, expected)
    return ChiSquareResult(float(res.statistic), float(res.pvalue), bins - 1)


def _row_pairs(a: AlignmentResult, i: int):
    others = [j for j in range(a.n) if j != i]
    first = others[0 : len(others) - 1 : 2]
    second = others[1 : len(others) : 2]
    return a.shifts[i, first], a.shifts[i, second]


def pairwise_independence_test(a: AlignmentResult, i: int | None = None, bins: int = 6) -> ChiSquareResult:
    """Chi-square independence test of ``(shift(i,j), shift(i,k))``.

    Row ``i`` is split into disjoint pairs ``(j, k)``, ``j < k``, taking the
    other indices two at a time in order.  ``i=None`` pools the pairs of all rows.
    """
    rows = range(a.n) if i is None else [i]
    x, y = [], []
    for row in rows:
        xs, ys = _row_pairs(a, row)
        x.append(xs)
        y.append(ys)
    x = np.concatenate(x)
    y = np.concatenate(y)
    if x.size < bins * bins * 5:
        raise ValueError(f"insufficient pairs: {x.size} < {bins * bins * 5}")
    table = np.zeros((bins, bins))
    np.add.at(table, (_bin_shift(x, a.p, bins), _bin_shift(y, a.p, bins)), 1)
    chi2, pvalue, dof, _ = stats.chi2_contingency(table, correction=False)
    return ChiSquareResult(float(chi2), float(pvalue), int(dof))


# -- serialization -----------------------------------------------------------

def write_alignment(a: AlignmentResult, path, meta: dict | None = None) -> list[Path]:
    path = Path(path)
    iu, ju, sh, rid = a.upper()
    write_csv(path, ["i", "j", "shift", "rid"], zip(iu, ju, sh, rid))
    sidecar = path.with_suffix(".json")
    write_json(sidecar, {"n": a.n, "p": a.p, **(meta or {})})
    return [path, sidecar]


def read_alignment(path) -> AlignmentResult:
    import json

    path = Path(path)
    info = json.loads(path.with_suffix(".json").read_text())
    n, p = int(info["n"]), int(info["p"])
    shifts = np.zeros((n, n), dtype=np.int64)
    rids = np.zeros((n, n))
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            i, j = int(row["i"]), int(row["j"])
            l, r = int(row["shift"]), float(row["rid"])
            shifts[i, j] = l
            shifts[j, i] = (p - l) % p
            rids[i, j] = rids[j, i] = r
    return AlignmentResult(shifts, rids, p)
