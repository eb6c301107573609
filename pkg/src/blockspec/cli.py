"""``blockspec`` command-line entry point."""
from __future__ import annotations

import argparse
import json
import sys

from . import experiments
from .checks import DEFAULT_SEED


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x]


def _point(text: str):
    from .spectral import UpperHalfPoint

    try:
        return UpperHalfPoint.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="blockspec", description="Spectra of random block matrices.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, law=True):
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p.add_argument("--out", default=".")
        if law:
            p.add_argument("--n", type=int, required=True)
            p.add_argument("--d", type=int)
            p.add_argument("--diagonal", choices=("zero", "sampled"), default="zero")
            p.add_argument("--sl-flip", choices=("first", "random"), default="first")

    p = sub.add_parser("spectrum", help="eigenvalues and histogram of one block matrix")
    p.add_argument("--law", required=True)
    common(p)

    p = sub.add_parser("qq", help="QQ pairs of two spectra (or one against a semicircle)")
    p.add_argument("--law", required=True, help="first law")
    p.add_argument("--law-b", required=True, help="second law, or semicircle:SIGMA")
    common(p)

    p = sub.add_parser("concentration", help="spread of the Stieltjes transform across n")
    p.add_argument("--law", required=True)
    p.add_argument("--d", type=int)
    p.add_argument("--z", type=_point, default=_point("0+1i"))
    p.add_argument("--ns", type=_ints, default=[50, 100, 200, 400])
    p.add_argument("--reps", type=int, default=50)
    p.add_argument("--workers", type=int, default=1)
    common(p, law=False)

    p = sub.add_parser("gcl", help="null-case graph connection Laplacian pipeline")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--quantile", type=float, default=0.25)
    p.add_argument("--method", choices=("fft", "brute"), default="fft")
    p.add_argument("--squared", action="store_true", help="use the squared RID quantile as epsilon")
    common(p, law=False)

    p = sub.add_parser("sl2-tail", help="tail of the top eigenvalue of B^T B for Sl(2) blocks")
    p.add_argument("--reps", type=int, default=100_000, help="number of samples")
    p.add_argument("--thresholds", type=_floats, default=[2.0, 5.0, 10.0, 20.0, 50.0, 100.0])
    common(p, law=False)

    p = sub.add_parser("verify", help="run all checks; non-zero exit on failure")
    p.add_argument("--fault", choices=("naive-as-haar",))
    p.add_argument("--quick", action="store_true", help="skip the acceptance criteria")
    common(p, law=False)

    p = sub.add_parser("rerun", help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    p.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "spectrum":
            m = experiments.cmd_spectrum(args.law, args.n, args.d, args.seed, args.diagonal, args.sl_flip, args.out)
        elif args.command == "qq":
            m = experiments.cmd_qq(args.law, args.law_b, args.n, args.d, args.seed, args.diagonal, args.sl_flip,
                                   args.out)
        elif args.command == "concentration":
            m = experiments.cmd_concentration(args.law, args.z, args.ns, args.reps, args.d, args.seed,
                                              args.workers, args.out)
        elif args.command == "gcl":
            m = experiments.cmd_gcl(args.n, args.p, args.quantile, args.seed, args.method, args.squared, args.out)
        elif args.command == "sl2-tail":
            m = experiments.cmd_sl2_tail(args.reps, args.thresholds, args.seed, args.out)
        elif args.command == "verify":
            m, code = experiments.cmd_verify(args.seed, args.fault, not args.quick, args.out)
            print(f"{'PASSED' if code == 0 else 'FAILED'}; report written to {args.out}/report.json")
            return code
        else:
            m = experiments.rerun(args.manifest, args.out)
    except (ValueError, IndexError) as exc:
        print(f"blockspec: error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps({k: m[k] for k in ("command", "outputs", "duration_s")}, default=str))
    return 0


if __name__ == "__main__":
    sys.exit(main())
