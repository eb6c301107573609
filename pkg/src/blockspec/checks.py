"""Verification suite: acceptance criteria and per-module invariants.

Each check function takes a root seed and returns a list of :class:`Check`
records.  Tolerances come from ``thresholds.json``; nothing here is tuned at
run time.
"""
from __future__ import annotations

import json
import math
import tempfile
import time
import zlib
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import integrate, stats

from . import gcl
from .blocks import (
    BlockMatrixSpec,
    assemble,
    block_mean_estimate,
    diagonal_block_norm_bound_check,
    goe_matrix,
)
from .eigen import symmetric_eigh, sturm_eigenvalues, tridiagonalize
from .groups import BlockLaw, parse_law, sample_block, sample_blocks, sl2_top_density
from .rng import RandomStream, make_stream
from .semicircle import SemicircleRef, sc_cdf, sc_density, sc_quantile, sc_stieltjes
from .spectral import (
    Spectrum,
    UpperHalfPoint,
    eig_symmetric,
    ks_distance,
    ks_two_sample,
    numerical_rank,
    rank_perturbation_check,
    stieltjes,
)


def load_thresholds() -> dict:
    text = resources.files("blockspec").joinpath("thresholds.json").read_text()
    return json.loads(text)


THRESHOLDS = load_thresholds()
DEFAULT_SEED = THRESHOLDS["default_seed"]
BAND = THRESHOLDS["mc_sigma_band"]


@dataclass
class Check:
    name: str
    group: str
    value: float
    bound: float
    passed: bool
    detail: str = ""
    seconds: float = 0.0

    def __post_init__(self):
        self.value = float(self.value)
        self.bound = float(self.bound)
        self.passed = bool(self.passed)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: value={self.value:.6g} bound={self.bound:.6g} {self.detail}".rstrip()


def _stream(seed: int, tag: str) -> RandomStream:
    # one independent substream per check, keyed by a stable hash of its name
    return make_stream(seed).split(zlib.crc32(tag.encode()))


def _band(x: np.ndarray, y: np.ndarray | None = None, axis: int = 0) -> np.ndarray:
    """``BAND`` Monte Carlo standard errors of mean(x) (or of mean(x) - mean(y))."""
    var = x.var(axis=axis, ddof=1) / x.shape[axis]
    if y is not None:
        var = var + y.var(axis=axis, ddof=1) / y.shape[axis]
    return BAND * np.sqrt(var)


def matrix_spectrum(s: RandomStream, law: BlockLaw, n: int, policy: str = "zero") -> Spectrum:
    spec = BlockMatrixSpec(n, law.d, law, policy, "inv-sqrt-N")
    return eig_symmetric(assemble(s, spec), spec.describe())


# -- acceptance criteria -----------------------------------------------------

def ac1_semicircle_convergence(seed: int = DEFAULT_SEED) -> list[Check]:
    cfg = THRESHOLDS["acceptance"]["semicircle_convergence"]
    out = []
    for text in cfg["laws"]:
        law = parse_law(text)
        n = cfg["n_by_d"][str(law.d)]
        t0 = time.perf_counter()
        sp = matrix_spectrum(_stream(seed, f"ac1/{text}"), law, n)
        ks = ks_distance(sp, SemicircleRef.for_orthogonal_blocks(law.d).cdf)
        secs = time.perf_counter() - t0
        ok = ks <= cfg["ks_max"] and secs <= cfg["runtime_max_s"]
        out.append(Check(f"AC1 semicircle KS {text} n={n}", "acceptance", ks, cfg["ks_max"], ok,
                         f"runtime={secs:.1f}s (max {cfg['runtime_max_s']}s)", secs))
    return out


def ac2_gaussian_replacement(seed: int = DEFAULT_SEED) -> list[Check]:
    cfg = THRESHOLDS["acceptance"]["gaussian_replacement"]
    law = parse_law(cfg["law"])
    n = cfg["n"]
    t0 = time.perf_counter()
    group = matrix_spectrum(_stream(seed, "ac2/group"), law, n).shifted(b=math.sqrt(law.d))
    dim = n * law.d
    goe = eig_symmetric(goe_matrix(_stream(seed, "ac2/goe"), dim) / math.sqrt(dim))
    ks = ks_two_sample(group, goe)
    return [Check(f"AC2 {cfg['law']} (x sqrt d) vs GOE two-sample KS", "acceptance", ks, cfg["ks_max"],
                  ks <= cfg["ks_max"], f"N={dim}", time.perf_counter() - t0)]


def ac3_nonhaar_outlier(seed: int = DEFAULT_SEED) -> list[Check]:
    cfg = THRESHOLDS["acceptance"]["nonhaar_outlier"]
    law = parse_law(cfg["law"])
    n, d = cfg["n"], law.d
    edge = 2.0 / math.sqrt(d)
    root = _stream(seed, "ac3")
    t0 = time.perf_counter()
    tops = []
    first = None
    for r in range(cfg["seeds"]):
        sp = matrix_spectrum(root.split(r), law, n)
        if first is None:
            first = sp
        tops.append(sp.eigenvalues[-1])
    tops = np.array(tops)
    hits = int(np.sum(tops > cfg["edge_factor"] * edge))
    out = [Check(f"AC3a outlier separation (top > {cfg['edge_factor']} x edge) in seeds", "acceptance",
                 hits, cfg["min_hits"], hits >= cfg["min_hits"],
                 f"of {cfg['seeds']}; median top={np.median(tops):.3f}", time.perf_counter() - t0)]
    bulk = Spectrum(first.eigenvalues[first.eigenvalues < cfg["bulk_cut"]])
    ks = ks_distance(bulk, SemicircleRef.for_orthogonal_blocks(d).cdf)
    out.append(Check(f"AC3b bulk (< {cfg['bulk_cut']}) KS vs semicircle sigma=1/sqrt({d})", "acceptance",
                     ks, cfg["bulk_ks_max"], ks <= cfg["bulk_ks_max"]))
    t1 = time.perf_counter()
    spot = matrix_spectrum(root.split(cfg["seeds"]), law, cfg["spot_n"]).eigenvalues[-1]
    lo, hi = cfg["spot_range"]
    out.append(Check(f"AC3c top eigenvalue at n={cfg['spot_n']} in [{lo}, {hi}]", "acceptance",
                     spot, hi, lo <= spot <= hi, "", time.perf_counter() - t1))
    # bulk against the semicircle of the centred law: sigma^2 = (d - |E Q|_F^2) / d^2
    mean = block_mean_estimate(root.split(cfg["seeds"] + 1), law, cfg["mean_reps"])
    sigma_c = math.sqrt((d - float(np.sum(mean**2))) / d**2)
    ks_c = ks_distance(bulk, SemicircleRef(sigma_c).cdf)
    out.append(Check(f"AC3 diagnostic: bulk KS vs centred-law semicircle sigma={sigma_c:.4f}",
                     "diagnostic", ks_c, cfg["bulk_ks_max"], ks_c <= cfg["bulk_ks_max"]))
    return out


def sl2_top_eigenvalues(s: RandomStream, samples: int) -> np.ndarray:
    """``lambda_max(B^T B)`` for ``samples`` draws of Sl(2) blocks (draw r from split(s, r))."""
    b = sample_blocks(s.child_keys(np.arange(samples)), BlockLaw("sl", 2))
    return np.linalg.eigvalsh(np.swapaxes(b, 1, 2) @ b)[:, -1]


def sl2_survival_reference(t: float) -> float:
    if t <= 1.0:
        return 1.0
    val, _ = integrate.quad(sl2_top_density, t, np.inf, epsabs=1e-12, epsrel=1e-10, limit=200)
    return val


def sl2_histogram_gof(y: np.ndarray, lo: float, hi: float, bins: int):
    """Chi-square GOF of the samples in ``[lo, hi)`` against the closed-form density."""
    edges = np.linspace(lo, hi, bins + 1)
    inside = y[(y >= lo) & (y < hi)]
    observed = np.histogram(inside, bins=edges)[0]
    mass = np.array([integrate.quad(sl2_top_density, a, b)[0] for a, b in zip(edges[:-1], edges[1:])])
    expected = inside.size * mass / mass.sum()
    res = stats.chisquare(observed, expected)
    return float(res.statistic), float(res.pvalue)


def ac4_sl2_tail(seed: int = DEFAULT_SEED) -> list[Check]:
    cfg = THRESHOLDS["acceptance"]["sl2_tail"]
    y = sl2_top_eigenvalues(_stream(seed, "ac4"), cfg["samples"])
    out = []
    for t in cfg["thresholds"]:
        emp = float(np.mean(y > t))
        ref = sl2_survival_reference(t)
        ratio = emp / ref
        ok = 1 / cfg["factor"] <= ratio <= cfg["factor"]
        out.append(Check(f"AC4 Sl(2) survival ratio at t={t:g}", "acceptance", ratio, cfg["factor"], ok,
                         f"empirical={emp:.5f} quadrature={ref:.5f}"))
    lo, hi = cfg["hist_range"]
    chi2, p = sl2_histogram_gof(y, lo, hi, cfg["hist_bins"])
    out.append(Check(f"AC4 Sl(2) top-eigenvalue histogram GOF on [{lo:g},{hi:g}]", "acceptance", p,
                     cfg["p_min"], p > cfg["p_min"], f"chi2={chi2:.2f}"))
    return out


def sl_sigma_mc(s: RandomStream, d: int, reps: int) -> float:
    """``sqrt(E tr(B^T B) / d^2)`` for Sl(d) blocks, estimated from ``reps`` draws."""
    b = sample_blocks(s.child_keys(np.arange(reps)), BlockLaw("sl", d))
    return math.sqrt(float(np.mean(np.sum(b * b, axis=(1, 2)))) / d**2)


def ac5_sl_bulk(seed: int = DEFAULT_SEED) -> list[Check]:
    cfg = THRESHOLDS["acceptance"]["sl_bulk"]
    out = []
    for d in cfg["ds"]:
        sigma = sl_sigma_mc(_stream(seed, f"ac5/sigma/{d}"), d, cfg["sigma_reps"])
        sp = matrix_spectrum(_stream(seed, f"ac5/{d}"), BlockLaw("sl", d), cfg["n"])
        ks = ks_distance(sp, SemicircleRef(sigma).cdf)
        out.append(Check(f"AC5 Sl({d}) KS vs semicircle sigma={sigma:.4f} n={cfg['n']}", "acceptance",
                         ks, cfg["ks_max"], ks <= cfg["ks_max"]))
    return out


def concentration_table(s: RandomStream, law: BlockLaw, z, ns, reps: int):
    """Rows ``(n, mean re, mean im, std)`` of m_M(z) over ``reps`` matrices per n."""
    rows = []
    for n in ns:
        sub = s.split(n)
        vals = np.array([stieltjes(matrix_spectrum(sub.split(r), law, n), z) for r in range(reps)])
        std = float(np.sqrt(np.var(vals.real, ddof=1) + np.var(vals.imag, ddof=1))) if reps > 1 else math.nan
        rows.append((n, float(vals.real.mean()), float(vals.imag.mean()), std))
    return rows


def loglog_slope(ns, stds) -> float:
    return float(np.polyfit(np.log(ns), np.log(stds), 1)[0])


def ac6_concentration(seed: int = DEFAULT_SEED) -> list[Check]:
    cfg = THRESHOLDS["acceptance"]["concentration"]
    t0 = time.perf_counter()
    rows = concentration_table(_stream(seed, "ac6"), parse_law(cfg["law"]), UpperHalfPoint.parse(cfg["z"]),
                               cfg["ns"], cfg["reps"])
    secs = time.perf_counter() - t0
    stds = [r[3] for r in rows]
    slope = loglog_slope(cfg["ns"], stds)
    detail = "std=" + ",".join(f"{v:.4g}" for v in stds)
    return [
        Check("AC6 log-log slope of std(m(z)) vs n", "acceptance", slope, cfg["slope_max"],
              slope <= cfg["slope_max"], detail, secs),
        Check("AC6 std decreases from smallest to largest n", "acceptance", stds[-1], stds[0],
              stds[-1] < stds[0]),
        Check("AC6 runtime (s)", "acceptance", secs, cfg["runtime_max_s"], secs <= cfg["runtime_max_s"]),
    ]


def random_low_rank(s: RandomStream, dim: int, rank: int) -> np.ndarray:
    q = np.linalg.qr(s.gaussian((dim, rank)))[0]
    tau = s.gaussian(rank) * 2.0
    tau = np.where(np.abs(tau) < 0.1, 0.1 * np.sign(tau) + (tau == 0) * 0.1, tau)
    delta = (q * tau) @ q.T
    return 0.5 * (delta + delta.T)


def ac7_rank_perturbation(seed: int = DEFAULT_SEED) -> list[Check]:
    cfg = THRESHOLDS["acceptance"]["rank_perturbation"]
    z = UpperHalfPoint.parse(cfg["z"])
    root = _stream(seed, "ac7")
    fails = 0
    rank_mismatch = 0
    worst = 0.0
    for k in range(cfg["instances"]):
        s = root.split(k)
        r = 1 + k % cfg["max_rank"]
        a = goe_matrix(s.split(0), cfg["dim"])
        delta = random_low_rank(s.split(1), cfg["dim"], r)
        res = rank_perturbation_check(a, a + delta, z)
        fails += not res.ok
        rank_mismatch += numerical_rank(delta) != r
        worst = max(worst, res.lhs / res.bound)
    return [Check("AC7 rank-perturbation bound failures", "acceptance", fails, 0, fails == 0 and rank_mismatch == 0,
                  f"instances={cfg['instances']} worst lhs/bound={worst:.4f} rank mismatches={rank_mismatch}")]


def gcl_pipeline(s: RandomStream, n: int, p: int, q: float = 0.25, method: str = "fft", squared: bool = False):
    ens = gcl.gen_surrogates(s, n, p)
    a = gcl.align_all(ens, method)
    eps = gcl.epsilon_from_quantile(a, q, squared)
    sp = gcl.gcl_spectrum(gcl.build_S(a, eps), gcl.build_D(a, eps))
    return ens, a, eps, sp


def ac8_gcl_null(seed: int = DEFAULT_SEED) -> list[Check]:
    cfg = THRESHOLDS["acceptance"]["gcl_null"]
    n, p = cfg["n"], cfg["p"]
    t0 = time.perf_counter()
    ens, a, eps, sp = gcl_pipeline(_stream(seed, "ac8/0"), n, p, cfg["quantile"])
    fast_secs = time.perf_counter() - t0
    uni = gcl.uniformity_test(a, cfg["uniformity_bins"])
    ind = gcl.pairwise_independence_test(a, None, cfg["independence_bins"])
    tol = cfg["eig_tol"]
    lo, hi = sp.eigenvalues[0], sp.eigenvalues[-1]
    _, _, _, sp2 = gcl_pipeline(_stream(seed, "ac8/1"), n, p, cfg["quantile"])
    ks = ks_two_sample(sp, sp2)
    t1 = time.perf_counter()
    brute = gcl.align_all(ens, "brute")
    brute_secs = time.perf_counter() - t1
    same = np.array_equal(brute.shifts, a.shifts) and np.array_equal(brute.rids, a.rids)
    return [
        Check("AC8a shift-angle uniformity p-value", "acceptance", uni.pvalue, cfg["p_min"], uni.pvalue > cfg["p_min"],
              f"chi2={uni.chi2:.2f} dof={uni.dof}"),
        Check("AC8b pooled pairwise independence p-value", "acceptance", ind.pvalue, cfg["p_min"],
              ind.pvalue > cfg["p_min"], f"chi2={ind.chi2:.2f} dof={ind.dof}"),
        Check("AC8c D^-1 S spectrum within [-1-tol, 1+tol]", "acceptance", max(abs(lo), abs(hi)), 1 + tol,
              lo >= -1 - tol and hi <= 1 + tol, f"range=[{lo:.4f}, {hi:.4f}]"),
        Check("AC8d two-seed spectrum KS", "acceptance", ks, cfg["ks_max"], ks <= cfg["ks_max"]),
        Check("AC8 runtime, correlation fast path (s)", "acceptance", fast_secs, cfg["runtime_fast_max_s"],
              fast_secs <= cfg["runtime_fast_max_s"]),
        Check("AC8 brute-force path runtime (s), identical alignment", "acceptance", brute_secs,
              cfg["runtime_brute_max_s"], same and brute_secs <= cfg["runtime_brute_max_s"],
              f"identical={same}"),
    ]


def ac9_goe_diagonal(seed: int = DEFAULT_SEED) -> list[Check]:
    cfg = THRESHOLDS["acceptance"]["goe_diagonal"]
    frac = diagonal_block_norm_bound_check(_stream(seed, "ac9"), cfg["n"], cfg["d"], cfg["reps"], cfg["slack"])
    return [Check(f"AC9 GOE block-diagonal bound fraction n={cfg['n']} d={cfg['d']}", "acceptance", frac,
                  cfg["min_fraction"], frac >= cfg["min_fraction"])]


def brute_force_alignment(zi: np.ndarray, zj: np.ndarray):
    """Reference: evaluate ``||zi - roll(zj, l)||`` for every l, keep the first minimizer."""
    best_l, best = 0, math.inf
    for l in range(zi.size):
        dist = float(np.linalg.norm(zi - np.roll(zj, l)))
        if dist < best:
            best_l, best = l, dist
    return best_l, best


def ac10_oracles(seed: int = DEFAULT_SEED) -> list[Check]:
    cfg = THRESHOLDS["acceptance"]["oracles"]
    root = _stream(seed, "ac10")
    worst_eig = 0.0
    for k in range(cfg["eig_instances"]):
        m = goe_matrix(root.split(0).split(k), cfg["eig_dim"])
        ev = eig_symmetric(m).eigenvalues
        diag, off, _ = tridiagonalize(m)
        worst_eig = max(worst_eig, float(np.max(np.abs(ev - sturm_eigenvalues(diag, off)))))
    worst_st = 0.0
    for k in range(cfg["stieltjes_instances"]):
        s = root.split(1).split(k)
        dim = cfg["stieltjes_dim"]
        m = goe_matrix(s, dim)
        z = complex(s.gaussian(), 0.1 + abs(s.gaussian()))
        direct = np.trace(np.linalg.solve(m - z * np.eye(dim), np.eye(dim))) / dim
        worst_st = max(worst_st, abs(stieltjes(eig_symmetric(m), z) - direct))
    mismatches = 0
    s = root.split(2)
    for k in range(cfg["align_instances"]):
        sub = s.split(k)
        p = 2 + int(sub.uniform() * (cfg["align_max_p"] - 1))
        zi, zj = sub.gaussian(p), sub.gaussian(p)
        ref_l, ref_d = brute_force_alignment(zi, zj)
        for method in ("brute", "fft"):
            l, dist = gcl.align_pair(zi, zj, method)
            if l != ref_l or abs(dist - ref_d) > cfg["rid_rtol"] * max(ref_d, 1.0):
                mismatches += 1
    return [
        Check("AC10 eigensolver vs Sturm bisection (max abs diff)", "acceptance", worst_eig, cfg["eig_tol"],
              worst_eig <= cfg["eig_tol"], f"{cfg['eig_instances']} x {cfg['eig_dim']}x{cfg['eig_dim']}"),
        Check("AC10 Stieltjes from eigenvalues vs direct solves", "acceptance", worst_st, cfg["stieltjes_tol"],
              worst_st <= cfg["stieltjes_tol"], f"{cfg['stieltjes_instances']} x {cfg['stieltjes_dim']}x{cfg['stieltjes_dim']}"),
        Check("AC10 align_pair (brute and fft) vs exhaustive search mismatches", "acceptance", mismatches, 0,
              mismatches == 0, f"{cfg['align_instances']} instances, p<={cfg['align_max_p']}"),
    ]


ACCEPTANCE = [
    ac1_semicircle_convergence,
    ac2_gaussian_replacement,
    ac3_nonhaar_outlier,
    ac4_sl2_tail,
    ac5_sl_bulk,
    ac6_concentration,
    ac7_rank_perturbation,
    ac8_gcl_null,
    ac9_goe_diagonal,
    ac10_oracles,
]


# -- module invariants -------------------------------------------------------

def inv_rand_core(seed: int = DEFAULT_SEED) -> list[Check]:
    reps = THRESHOLDS["invariants"]["moment_reps"]
    a = make_stream(seed).split(7).gaussian(1000)
    b = make_stream(seed).split(7).gaussian(1000)
    out = [Check("rand-core reproducibility (same seed, path)", "rand-core", float(np.max(np.abs(a - b))), 0.0,
                 np.array_equal(a, b))]
    s = _stream(seed, "inv/rand")
    u = s.split(0).uniform(reps)
    z = s.split(1).gaussian(reps)
    c = s.split(2).chi_square(3, reps)
    tests = [
        ("uniform mean", u, 0.5, 1 / math.sqrt(12)),
        ("gaussian mean", z, 0.0, 1.0),
        ("gaussian variance", (z - z.mean()) ** 2, 1.0, math.sqrt(2.0)),
        ("chi-square(3) mean", c, 3.0, math.sqrt(6.0)),
    ]
    for label, x, target, sd in tests:
        dev = abs(float(x.mean()) - target)
        bound = BAND * sd / math.sqrt(reps)
        out.append(Check(f"rand-core {label}", "rand-core", dev, bound, dev <= bound))
    return out


def _rows_cross(q: np.ndarray, j: int, k: int) -> np.ndarray:
    """Per-draw ``r_j^T r_k`` (outer products of rows)."""
    return q[:, j, :, None] * q[:, k, None, :]


def inv_group_samplers(seed: int = DEFAULT_SEED) -> list[Check]:
    cfg = THRESHOLDS["invariants"]
    reps = cfg["mc_reps"]
    out = []
    s = _stream(seed, "inv/groups")
    worst = 0.0
    for k, text in enumerate(["o-haar:2", "o-haar:3", "so-haar:2", "so-haar:3", "o-qr-naive:3"]):
        q = sample_blocks(s.split(0).child_keys(np.arange(k * 10000, (k + 1) * 10000)), parse_law(text))
        eye = np.eye(q.shape[1])
        worst = max(worst, float(np.max(np.abs(np.swapaxes(q, 1, 2) @ q - eye))))
    out.append(Check("groups orthogonality residual max|Q^TQ - I|", "group-samplers", worst,
                     THRESHOLDS["orthogonality_tol"], worst <= THRESHOLDS["orthogonality_tol"]))

    # Haar invariance under a fixed cyclic row permutation
    law = parse_law("o-haar:3")
    qa = sample_blocks(s.split(1).child_keys(np.arange(reps)), law)
    qb = sample_blocks(s.split(2).child_keys(np.arange(reps)), law)
    perm = np.array([1, 2, 0])
    pq = qb[:, perm, :]
    fails = 0
    for moment in (1, 2):
        x, y = (qa**moment).reshape(reps, -1), (pq**moment).reshape(reps, -1)
        fails += int(np.sum(np.abs(x.mean(0) - y.mean(0)) > _band(x, y)))
    out.append(Check("groups Haar O(3) invariance P.Q vs Q (entries outside 3 sigma)", "group-samplers",
                     fails, 0, fails == 0))

    # sigma-simple structure: E[r_j^T r_k] = 0 (j != k), E[r_j^T r_j] = I/d
    for text in ("o-haar:2", "o-haar:3", "so-haar:3"):
        law = parse_law(text)
        d = law.d
        q = sample_blocks(s.split(3).split(d * 10 + (text.startswith("so"))).child_keys(np.arange(reps)), law)
        bad = 0
        for j in range(d):
            for k in range(j, d):
                x = _rows_cross(q, j, k).reshape(reps, -1)
                target = (np.eye(d) / d).reshape(-1) if j == k else np.zeros(d * d)
                bad += int(np.sum(np.abs(x.mean(0) - target) > _band(x)))
        out.append(Check(f"groups sigma-simple structure {text} (entries outside 3 sigma)", "group-samplers",
                         bad, 0, bad == 0))

    # SO(2): E[r_1^T r_2] is anti-symmetric
    q = sample_blocks(s.split(4).child_keys(np.arange(reps)), parse_law("so-haar:2"))
    x = _rows_cross(q, 0, 1)
    sym = (x + np.swapaxes(x, 1, 2)).reshape(reps, -1)
    dev = np.abs(sym.mean(0))
    band = _band(sym)
    out.append(Check("groups SO(2) cross-covariance anti-symmetry max|M + M^T|", "group-samplers",
                     float(dev.max()), float(band.max()), bool(np.all(dev <= band))))
    out.extend(inv_sl2_heavy_tail(seed))
    return out


def hill_index(x: np.ndarray, top_fraction: float) -> float:
    """Hill estimator of the tail index from the upper ``top_fraction`` of ``x``."""
    xs = np.sort(x)
    k = max(int(top_fraction * xs.size), 2)
    tail = xs[-k:]
    return float(1.0 / np.mean(np.log(tail / xs[-k - 1])))


def inv_sl2_heavy_tail(seed: int = DEFAULT_SEED) -> list[Check]:
    cfg = THRESHOLDS["invariants"]["sl2_heavy_tail"]
    s = _stream(seed, "inv/sl-tail")
    m = cfg["samples"]
    b11 = sample_blocks(s.split(2).child_keys(np.arange(m)), BlockLaw("sl", 2))[:, 0, 0] ** 2
    b11_d3 = sample_blocks(s.split(3).child_keys(np.arange(m)), BlockLaw("sl", 3))[:, 0, 0] ** 2
    alpha2 = hill_index(b11, cfg["top_fraction"])
    alpha3 = hill_index(b11_d3, cfg["top_fraction"])
    growth = float(b11.mean() / b11[:10000].mean())
    lo, hi = cfg["index_range"]
    return [
        Check("groups Sl(2) B11^2 tail index (infinite mean at index <= 1)", "group-samplers", alpha2, hi,
              lo <= alpha2 <= hi, f"mean(1e6)/mean(1e4)={growth:.3f} (informational)"),
        Check("groups Sl(3) B11^2 tail index exceeds the Sl(2) regime", "group-samplers", alpha3,
              cfg["sl3_index_min"], alpha3 >= cfg["sl3_index_min"]),
    ]


def inv_block_means(seed: int = DEFAULT_SEED, fault: str | None = None) -> list[Check]:
    """Block-mean diagnostics; ``fault="naive-as-haar"`` swaps the Haar sampler for naive QR."""
    cfg = THRESHOLDS["invariants"]["block_mean"]
    s = _stream(seed, "inv/block-mean")
    haar = parse_law("so-haar:2")
    if fault == "naive-as-haar":
        haar = parse_law("o-qr-naive:2")
    m_haar = block_mean_estimate(s.split(0), haar, cfg["reps"])
    m_naive = block_mean_estimate(s.split(1), parse_law("o-qr-naive:2"), cfg["reps"])
    m_gauss = block_mean_estimate(s.split(2), parse_law("gauss-iid:2"), cfg["gauss_reps"])
    return [
        Check("block-matrix mean of so-haar:2 blocks max|mean|", "block-matrix", float(np.abs(m_haar).max()),
              cfg["centered_tol"], float(np.abs(m_haar).max()) <= cfg["centered_tol"]),
        Check("block-matrix mean of o-qr-naive:2 blocks max|mean|", "block-matrix", float(np.abs(m_naive).max()),
              cfg["naive_min_abs"], float(np.abs(m_naive).max()) > cfg["naive_min_abs"]),
        Check("block-matrix mean of gauss-iid:2 blocks max|mean|", "block-matrix", float(np.abs(m_gauss).max()),
              cfg["gauss_tol"], float(np.abs(m_gauss).max()) <= cfg["gauss_tol"]),
    ]


def inv_block_matrix(seed: int = DEFAULT_SEED, fault: str | None = None) -> list[Check]:
    reps = THRESHOLDS["invariants"]["mc_reps"]
    s = _stream(seed, "inv/blocks")
    out = []
    spec = BlockMatrixSpec(6, 2, parse_law("so-haar:2"), "sampled")
    m = assemble(s.split(0), spec)
    out.append(Check("block-matrix exact symmetry", "block-matrix", float(np.max(np.abs(m - m.T))), 0.0,
                     np.array_equal(m, m.T)))

    # replacing one pair substream changes only that block pair
    spec0 = BlockMatrixSpec(5, 2, parse_law("o-haar:2"), "zero", "none")
    base = assemble(s.split(1), spec0)
    swapped = assemble_with_override(s.split(1), spec0, (1, 3), s.split(2))
    diff = np.argwhere(base != swapped)
    blocks_changed = {(int(r) // 2, int(c) // 2) for r, c in diff}
    out.append(Check("block-matrix strip independence (changed block pairs)", "block-matrix",
                     len(blocks_changed), 2, blocks_changed == {(1, 3), (3, 1)}))

    # symmetrized cross-covariance equivalence for one strip
    nblk, d = 4, 2
    u = np.arange(1, nblk * d + 1, dtype=np.float64)
    u /= np.linalg.norm(u)
    haar = sample_blocks(s.split(3).child_keys(np.arange(reps * nblk)), parse_law("so-haar:2"))
    gauss = sample_blocks(s.split(4).child_keys(np.arange(reps * nblk)), parse_law("gauss-iid:2")) / math.sqrt(2)
    stats_ = []
    for blocks in (haar, gauss):
        strips = blocks.reshape(reps, nblk, d, d).transpose(0, 2, 1, 3).reshape(reps, d, nblk * d)
        x = strips @ u
        stats_.append((x[:, :, None] * x[:, None, :]).reshape(reps, -1))
    dev = np.abs(stats_[0].mean(0) - stats_[1].mean(0))
    band = _band(stats_[0], stats_[1])
    out.append(Check("block-matrix E[M(i)uu^TM(i)^T]: Haar SO(2) vs independent rows", "block-matrix",
                     float(dev.max()), float(band.max()), bool(np.all(dev <= band))))
    out.extend(inv_block_means(seed, fault))
    return out


def assemble_with_override(s: RandomStream, spec: BlockMatrixSpec, pair, other: RandomStream) -> np.ndarray:
    """``assemble`` with block pair ``pair`` (0-based i < j) drawn from ``other`` instead."""
    m = assemble(s, spec).copy()
    i, j = pair
    d = spec.d
    block = sample_block(other, spec.law)
    if spec.scale == "inv-sqrt-N":
        block = block / math.sqrt(spec.N)
    m[i * d:(i + 1) * d, j * d:(j + 1) * d] = block
    m[j * d:(j + 1) * d, i * d:(i + 1) * d] = block.T
    return m


def inv_spectral(seed: int = DEFAULT_SEED) -> list[Check]:
    tol = THRESHOLDS["invariants"]["eig_relative_tol"]
    s = _stream(seed, "inv/spectral")
    worst_tr = worst_fro = worst_res = 0.0
    herglotz_ok = True
    for k in range(20):
        dim = 5 + 7 * k
        m = goe_matrix(s.split(k), dim)
        ev, vec = symmetric_eigh(m, vectors=True)
        worst_tr = max(worst_tr, abs(ev.sum() - np.trace(m)) / (1 + abs(np.trace(m))))
        fro2 = float(np.sum(m * m))
        worst_fro = max(worst_fro, abs(np.sum(ev**2) - fro2) / (1 + fro2))
        res = np.linalg.norm(m @ vec - vec * ev, axis=0).max() / (1 + np.linalg.norm(m))
        worst_res = max(worst_res, float(res))
        herglotz_ok &= stieltjes(Spectrum(ev), 0.3 + 0.7j).imag > 0
    return [
        Check("spectral eigenvalue sum = trace (relative)", "spectral", worst_tr, tol, worst_tr <= tol),
        Check("spectral eigenvalue square-sum = |M|_F^2 (relative)", "spectral", worst_fro, tol, worst_fro <= tol),
        Check("spectral eigenpair residual / (1 + |M|_F)", "spectral", worst_res, tol, worst_res <= tol),
        Check("spectral Herglotz Im m(z) > 0", "spectral", float(herglotz_ok), 1.0, bool(herglotz_ok)),
    ]


def inv_semicircle(seed: int = DEFAULT_SEED) -> list[Check]:
    cfg = THRESHOLDS["invariants"]
    out = []
    for sigma in (1.0, 1 / math.sqrt(2)):
        ref = SemicircleRef(sigma)
        x = np.linspace(-2 * sigma, 2 * sigma, 1002)[1:-1]
        h = 1e-6 * sigma
        fd = (sc_cdf(ref, x + h) - sc_cdf(ref, x - h)) / (2 * h)
        err = float(np.max(np.abs(fd - sc_density(ref, x))))
        out.append(Check(f"semicircle dCDF/dx = density (sigma={sigma:.4f})", "semicircle", err,
                         cfg["semicircle_fd_tol"], err <= cfg["semicircle_fd_tol"]))
        resid = 0.0
        for re in np.linspace(-3, 3, 13):
            for im in (0.01, 0.2, 1.0, 5.0):
                z = complex(re, im)
                m = sc_stieltjes(ref, z)
                resid = max(resid, abs(sigma**2 * m * m + z * m + 1))
        out.append(Check(f"semicircle self-consistency residual (sigma={sigma:.4f})", "semicircle", resid,
                         cfg["semicircle_residual_tol"], resid <= cfg["semicircle_residual_tol"]))
    qs = np.linspace(0.05, 0.95, 19)
    scale_err = float(np.max(np.abs(sc_quantile(SemicircleRef(0.37), qs) - 0.37 * sc_quantile(SemicircleRef(1.0), qs))))
    out.append(Check("semicircle quantile scaling", "semicircle", scale_err, 1e-10, scale_err <= 1e-10))
    return out


def inv_gcl(seed: int = DEFAULT_SEED) -> list[Check]:
    cfg = THRESHOLDS["invariants"]
    s = _stream(seed, "inv/gcl")
    out = []
    # rid invariance under independent cyclic shifts of both signals
    worst = 0.0
    for k in range(100):
        sub = s.split(0).split(k)
        p = 8 + k % 57
        zi, zj = sub.gaussian(p), sub.gaussian(p)
        a, b = int(sub.uniform() * p), int(sub.uniform() * p)
        _, r0 = gcl.align_pair(zi, zj)
        _, r1 = gcl.align_pair(np.roll(zi, a), np.roll(zj, b))
        worst = max(worst, abs(r1 - r0) / r0)
    out.append(Check("gcl rid invariance under cyclic shifts (relative)", "gcl-null", worst, 1e-12, worst <= 1e-12))

    # permutation relabeling leaves the spectrum unchanged
    ens = gcl.gen_surrogates(s.split(1), 40, 64)
    a = gcl.align_all(ens)
    eps = gcl.epsilon_from_quantile(a)
    sp = gcl.gcl_spectrum(gcl.build_S(a, eps), gcl.build_D(a, eps))
    perm = np.roll(np.arange(40), 7)[::-1]
    ap = gcl.align_all(gcl.SurrogateEnsemble(ens.data[perm]))
    epsp = gcl.epsilon_from_quantile(ap)
    spp = gcl.gcl_spectrum(gcl.build_S(ap, epsp), gcl.build_D(ap, epsp))
    diff = float(np.max(np.abs(sp.eigenvalues - spp.eigenvalues)))
    out.append(Check("gcl spectrum invariant under relabeling", "gcl-null", diff, cfg["gcl_permutation_tol"],
                     diff <= cfg["gcl_permutation_tol"]))

    # serialization round trip rebuilds S and D bit-exactly
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "alignment.csv"
        gcl.write_alignment(a, path)
        back = gcl.read_alignment(path)
    eps_b = gcl.epsilon_from_quantile(back)
    same = (eps_b == eps and np.array_equal(gcl.build_S(back, eps_b), gcl.build_S(a, eps))
            and np.array_equal(gcl.build_D(back, eps_b), gcl.build_D(a, eps)))
    out.append(Check("gcl S, D rebuilt bit-exactly from serialized alignment", "gcl-null", float(same), 1.0, same))

    lsd = cfg["gcl_lsd"]
    _, _, _, s1 = gcl_pipeline(s.split(2), lsd["n"], lsd["p"])
    _, _, _, s2 = gcl_pipeline(s.split(3), lsd["n"], lsd["p"])
    ks = ks_two_sample(s1, s2)
    out.append(Check(f"gcl deterministic LSD: two-seed KS at n={lsd['n']} p={lsd['p']}", "gcl-null", ks,
                     lsd["ks_max"], ks <= lsd["ks_max"]))
    return out


INVARIANTS: list[Callable] = [
    inv_rand_core,
    inv_group_samplers,
    inv_block_matrix,
    inv_spectral,
    inv_semicircle,
    inv_gcl,
]


def run_all(seed: int = DEFAULT_SEED, fault: str | None = None, acceptance: bool = True, log=print) -> list[Check]:
    results: list[Check] = []
    suites = INVARIANTS + (ACCEPTANCE if acceptance else [])
    for fn in suites:
        kwargs = {"fault": fault} if fn is inv_block_matrix else {}
        for check in fn(seed, **kwargs):
            results.append(check)
            if log:
                log(check.line())
    return results


def report(results: list[Check]) -> dict:
    return {
        "passed": all(c.passed for c in results if c.group != "diagnostic"),
        "checks": [asdict(c) for c in results],
    }
