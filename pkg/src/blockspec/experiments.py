"""Experiment commands: each writes CSV artifacts plus a re-runnable manifest."""
from __future__ import annotations

import json
import math
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, checks, gcl
from .blocks import BlockMatrixSpec, assemble, goe_matrix
from .groups import BlockLaw, parse_law
from .io import histogram_rows, write_csv, write_json
from .rng import GAUSSIAN_METHOD, RandomStream, make_stream
from .semicircle import SemicircleRef, sc_quantile
from .spectral import Spectrum, UpperHalfPoint, eig_symmetric, qq_levels, qq_pairs, stieltjes, write_spectrum


def resolve_law(text: str, d: int | None = None, sl_flip: str = "first") -> BlockLaw:
    """Parse ``kind:d``; a bare ``kind`` takes its dimension from ``d``."""
    if ":" not in text:
        if d is None:
            raise ValueError(f"law {text!r} has no dimension and no d was given")
        text = f"{text}:{d}"
    law = parse_law(text, sl_flip)
    if d is not None and law.d != d:
        raise ValueError(f"law {text!r} has d={law.d} but d={d} was requested")
    return law


def law_stream(seed: int, law: BlockLaw) -> RandomStream:
    # same law and seed give the same matrix in every command
    return make_stream(seed).split(zlib.crc32(str(law).encode()))


def _policy_for(law: BlockLaw, policy: str) -> str:
    # the GOE reference is the full GOE, diagonal included
    return "sampled" if law.kind == "goe-block" else policy


def build_spectrum(law: BlockLaw, n: int, seed: int, policy: str = "zero") -> Spectrum:
    if n < 1:
        raise ValueError("n must be positive")
    spec = BlockMatrixSpec(n, law.d, law, policy, "inv-sqrt-N")
    return eig_symmetric(assemble(law_stream(seed, law), spec), {**spec.describe(), "seed": seed})


def _finish(out: Path, command: str, params: dict, outputs: list[Path], started: float, summary=None) -> dict:
    manifest = {
        "command": command,
        "params": params,
        "seed": params.get("seed"),
        "version": __version__,
        "gaussian_method": GAUSSIAN_METHOD,
        "outputs": sorted(p.name for p in outputs),
        "duration_s": time.perf_counter() - started,
        "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    if summary is not None:
        manifest["summary"] = summary
    write_json(out / "manifest.json", manifest)
    return manifest


def cmd_spectrum(law: str, n: int, d: int | None = None, seed: int = checks.DEFAULT_SEED,
                 diagonal_policy: str = "zero", sl_flip: str = "first", out=".") -> dict:
    started = time.perf_counter()
    out = Path(out)
    blaw = resolve_law(law, d, sl_flip)
    sp = build_spectrum(blaw, n, seed, diagonal_policy)
    files = write_spectrum(sp, out / "eigenvalues.csv")
    files.append(write_csv(out / "histogram.csv", ["bin_left", "bin_right", "count"], histogram_rows(sp.eigenvalues)))
    params = {"law": str(blaw), "n": n, "d": blaw.d, "seed": seed, "diagonal_policy": diagonal_policy,
              "sl_flip": sl_flip}
    summary = {"min": sp.eigenvalues[0], "max": sp.eigenvalues[-1], "N": len(sp)}
    return _finish(out, "spectrum", params, files, started, summary)


def _reference_quantiles(text: str, count: int) -> np.ndarray:
    sigma = float(text.split(":", 1)[1])
    return sc_quantile(SemicircleRef(sigma), qq_levels(count))


def cmd_qq(law_a: str, law_b: str, n: int, d: int | None = None, seed: int = checks.DEFAULT_SEED,
           diagonal_policy: str = "zero", sl_flip: str = "first", out=".") -> dict:
    """QQ pairs of two spectra; ``law_b`` may be ``semicircle:sigma``."""
    started = time.perf_counter()
    out = Path(out)
    la = resolve_law(law_a, d, sl_flip)
    sa = build_spectrum(la, n, seed, _policy_for(la, diagonal_policy))
    if law_b.startswith("semicircle:"):
        levels = qq_levels(len(sa))
        rows = np.column_stack([levels, sa.eigenvalues, _reference_quantiles(law_b, len(sa))])
        label_b = law_b
    else:
        lb = resolve_law(law_b, d, sl_flip)
        sb = build_spectrum(lb, n, seed, _policy_for(lb, diagonal_policy))
        pairs = qq_pairs(sa, sb)
        rows = np.column_stack([qq_levels(pairs.shape[0]), pairs])
        label_b = str(lb)
    files = [write_csv(out / "qq.csv", ["level", "a", "b"], rows)]
    params = {"law_a": str(la), "law_b": label_b, "n": n, "d": la.d, "seed": seed,
              "diagonal_policy": diagonal_policy, "sl_flip": sl_flip}
    return _finish(out, "qq", params, files, started)


def _concentration_row(args):
    seed, law_text, z, n, reps = args
    return checks.concentration_table(make_stream(seed), parse_law(law_text), z, [n], reps)[0]


def cmd_concentration(law: str, z: str, ns, reps: int, d: int | None = None, seed: int = checks.DEFAULT_SEED,
                      workers: int = 1, out=".") -> dict:
    """Mean and std of m_M(z) over ``reps`` matrices for each n (replicate r of n uses split(split(s, n), r))."""
    started = time.perf_counter()
    out = Path(out)
    blaw = resolve_law(law, d)
    point = UpperHalfPoint.parse(z) if isinstance(z, str) else z
    if reps < 1:
        raise ValueError("reps must be >= 1")
    ns = [int(n) for n in ns]
    jobs = [(seed, str(blaw), point, n, reps) for n in ns]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            rows = list(pool.map(_concentration_row, jobs))
    else:
        rows = [_concentration_row(j) for j in jobs]
    files = [write_csv(out / "concentration.csv", ["n", "mean_re", "mean_im", "std"], rows)]
    stds = [r[3] for r in rows]
    slope = checks.loglog_slope(ns, stds) if reps > 1 and len(ns) > 1 else None
    params = {"law": str(blaw), "z": f"{point.re!r}+{point.im!r}i", "ns": ns, "reps": reps, "seed": seed,
              "workers": workers}
    return _finish(out, "concentration", params, files, started, {"loglog_slope": slope})


def cmd_gcl(n: int, p: int, quantile: float = 0.25, seed: int = checks.DEFAULT_SEED, method: str = "fft",
            squared: bool = False, out=".") -> dict:
    started = time.perf_counter()
    out = Path(out)
    root = make_stream(seed)
    ens, a, eps, sp = checks.gcl_pipeline(root.split(0), n, p, quantile, method, squared)
    files = gcl.write_alignment(a, out / "alignment.csv", {"epsilon": eps, "quantile": quantile})
    _, _, shifts, rids = a.upper()
    degrees = 360.0 * shifts / p
    files.append(write_csv(out / "shift_hist.csv", ["bin_left", "bin_right", "count"],
                           histogram_rows(degrees, 100, (0.0, 360.0))))
    files.append(write_csv(out / "rid_hist.csv", ["bin_left", "bin_right", "count"], histogram_rows(rids)))
    degree = np.diag(gcl.build_D(a, eps))[::2]
    files.append(write_csv(out / "degrees.csv", ["index", "degree"], enumerate(degree)))
    sp.meta.update({"n": n, "p": p, "epsilon": eps, "seed": seed})
    files.extend(write_spectrum(sp, out / "spectrum.csv"))
    goe = eig_symmetric(goe_matrix(root.split(1), 2 * n) / math.sqrt(2 * n))
    pairs = qq_pairs(sp, goe)
    files.append(write_csv(out / "qq_goe.csv", ["level", "gcl", "goe"],
                           np.column_stack([qq_levels(pairs.shape[0]), pairs])))
    try:
        uni = gcl.uniformity_test(a, 20)
    except ValueError:  # too few pairs or grid points for 20 bins
        uni = None
    summary = {
        "epsilon": eps,
        "eig_min": sp.eigenvalues[0],
        "eig_max": sp.eigenvalues[-1],
        "uniformity_pvalue": None if uni is None else uni.pvalue,
    }
    params = {"n": n, "p": p, "quantile": quantile, "seed": seed, "method": method, "squared": squared}
    return _finish(out, "gcl", params, files, started, summary)


def cmd_sl2_tail(samples: int, thresholds, seed: int = checks.DEFAULT_SEED, out=".") -> dict:
    started = time.perf_counter()
    out = Path(out)
    if samples < 10_000:
        raise ValueError("samples must be >= 10^4")
    ts = sorted(float(t) for t in thresholds)
    y = checks.sl2_top_eigenvalues(make_stream(seed), samples)
    rows = [(t, float(np.mean(y > t)), checks.sl2_survival_reference(t), 2.0 / t) for t in ts]
    files = [write_csv(out / "sl2_tail.csv", ["t", "empirical_survival", "reference_survival", "two_over_t"], rows)]
    params = {"samples": samples, "thresholds": ts, "seed": seed}
    return _finish(out, "sl2_tail", params, files, started)


def cmd_verify(seed: int = checks.DEFAULT_SEED, fault: str | None = None, acceptance: bool = True,
               out=".", log=print) -> tuple[dict, int]:
    """Run every check; returns the manifest and the process exit code."""
    started = time.perf_counter()
    out = Path(out)
    results = checks.run_all(seed, fault, acceptance, log)
    report = checks.report(results)
    files = [write_json(out / "report.json", report)]
    params = {"seed": seed, "fault": fault, "acceptance": acceptance}
    manifest = _finish(out, "verify", params, files, started, {"passed": report["passed"]})
    return manifest, 0 if report["passed"] else 1


COMMANDS = {
    "spectrum": cmd_spectrum,
    "qq": cmd_qq,
    "concentration": cmd_concentration,
    "gcl": cmd_gcl,
    "sl2_tail": cmd_sl2_tail,
}


def rerun(manifest_path, out) -> dict:
    """Re-run the command recorded in a manifest into ``out``."""
    manifest = json.loads(Path(manifest_path).read_text())
    command = manifest["command"]
    if command == "verify":
        return cmd_verify(**manifest["params"], out=out)[0]
    return COMMANDS[command](**manifest["params"], out=out)
